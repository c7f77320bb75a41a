"""
Pas admissibles et bornes de récurrence des quatre garanties de convergence
(DSGD / FedAvg, fortement convexe / non convexe).

γ désigne le facteur d'amélioration relatif du round, dans [m/n, 1].
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from django.db import models

from .exceptions import OptimError, UnknownTheoremError

logger = logging.getLogger(__name__)


class Theorem(models.TextChoices):
    DSGD_CVX = "dsgd_cvx", "DSGD, fortement convexe"
    DSGD_NCVX = "dsgd_ncvx", "DSGD, non convexe"
    FEDAVG_CVX = "fedavg_cvx", "FedAvg, fortement convexe"
    FEDAVG_NCVX = "fedavg_ncvx", "FedAvg, non convexe"


@dataclass(frozen=True)
class ProblemConstants:
    L: float
    mu: float = 0.0
    W: float = 1.0
    M: float = 0.0
    R: int = 1
    sigma2: float = 0.0
    sum_sq_weights: float | None = None
    # Σw_i²Z_i et Σw_iZ_i
    sq_heterogeneity: float = 0.0
    heterogeneity: float = 0.0
    rho: float = 0.0

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise OptimError(f"L doit être > 0 (reçu {self.L!r})")
        if not 0 < self.W <= 1:
            raise OptimError(f"W doit être dans ]0, 1] (reçu {self.W!r})")
        if isinstance(self.R, bool) or int(self.R) != self.R or self.R < 1:
            raise OptimError(f"R doit être un entier ≥ 1 (reçu {self.R!r})")
        for name in ("mu", "M", "sigma2", "sq_heterogeneity", "heterogeneity", "rho"):
            if not getattr(self, name) >= 0:
                raise OptimError(f"{name} doit être ≥ 0")
        if self.sum_sq_weights is not None and not 0 < self.sum_sq_weights <= 1:
            raise OptimError(f"Σw² invalide : {self.sum_sq_weights!r}")


@dataclass(frozen=True)
class StepSizeCaps:
    theorem: str
    eta_cap: float
    eta_g_floor: float | None = None

    def admits(self, eta: float) -> bool:
        return 0 < eta <= self.eta_cap


def theorem_constants(federation, contract, R: int = 1, rho: float | None = None) -> ProblemConstants:
    """Constantes exactes d'une fédération ; ρ par défaut : dispersion en 0."""
    if rho is None:
        rho = federation.dispersion(np.zeros(federation.d))
    return ProblemConstants(
        L=federation.L,
        mu=federation.mu,
        W=federation.W,
        M=contract.M,
        R=R,
        sigma2=contract.sigma2,
        sum_sq_weights=federation.sum_sq_weights,
        sq_heterogeneity=federation.weighted_sq_heterogeneity,
        heterogeneity=federation.weighted_heterogeneity,
        rho=float(rho),
    )


def _check_gamma(gamma: float) -> float:
    if not 0 < gamma <= 1:
        raise OptimError(f"γ doit être dans ]0, 1] (reçu {gamma!r})")
    return float(gamma)


def step_size_caps(theorem: str, constants: ProblemConstants, gamma: float) -> StepSizeCaps:
    gamma = _check_gamma(gamma)
    c = constants
    sw2 = c.sum_sq_weights
    if theorem == Theorem.DSGD_CVX:
        return StepSizeCaps(theorem, gamma / ((1 + c.W * c.M) * c.L))
    if theorem == Theorem.DSGD_NCVX:
        return StepSizeCaps(theorem, gamma / ((1 + c.M) * c.L))
    if theorem == Theorem.FEDAVG_CVX:
        drift = 1 / (c.L * (2 + c.M / c.R))
        sampling = gamma / ((1 + c.W * (1 + c.M / c.R)) * c.L)
        floor = math.sqrt(gamma / sw2) if sw2 else None
        return StepSizeCaps(theorem, min(drift, sampling) / 8, floor)
    if theorem == Theorem.FEDAVG_NCVX:
        floor = math.sqrt(5 * gamma / (4 * sw2)) if sw2 else None
        return StepSizeCaps(theorem, 1 / (8 * c.L * (2 + c.M / c.R)), floor)
    raise UnknownTheoremError(
        f"Théorème inconnu : {theorem!r} (choix : {', '.join(Theorem.values)})"
    )


def effective_step(R: int, eta_l: float, eta_g: float) -> float:
    return R * eta_l * eta_g


def check_global_floor(caps: StepSizeCaps, eta_g: float) -> bool:
    """Le plancher sur η_g est signalé, jamais imposé."""
    if caps.eta_g_floor is not None and eta_g < caps.eta_g_floor:
        logger.warning(
            "η_g = %.6g sous le plancher %.6g (%s)", eta_g, caps.eta_g_floor, caps.theorem
        )
        return False
    return True


# =========================
# Bornes de récurrence
# =========================
def dsgd_cvx_rhs(c: ProblemConstants, eta: float, gamma: float, dist_sq: float) -> float:
    """Majorant de E‖x^{k+1} − x*‖² à partir de ‖x^k − x*‖²."""
    gamma = _check_gamma(gamma)
    sw2 = c.sum_sq_weights or 0.0
    beta1 = 2 * c.L * (1 + c.M) * c.sq_heterogeneity + sw2 * c.sigma2
    beta2 = 2 * c.L * c.sq_heterogeneity
    return (1 - c.mu * eta) * dist_sq + eta**2 * (beta1 / gamma - beta2)


def dsgd_ncvx_rhs(
    c: ProblemConstants, eta: float, gamma: float, f_value: float, grad_sq: float
) -> float:
    """Majorant de E f(x^{k+1})."""
    gamma = _check_gamma(gamma)
    sw2 = c.sum_sq_weights or 0.0
    beta = c.L / (2 * gamma) * ((1 + c.M - gamma) * c.W * c.rho + sw2 * c.sigma2)
    descent = eta * (1 - (1 + c.M) * c.L * eta / (2 * gamma))
    return f_value - descent * grad_sq + eta**2 * beta


def fedavg_cvx_rhs(
    c: ProblemConstants, eta: float, gamma: float, dist_sq: float, next_dist_sq: float
) -> float:
    """Majorant de (3/8)·E(f(x^k) − f*), η étant le pas effectif R·η_l·η_g."""
    gamma = _check_gamma(gamma)
    sw2 = c.sum_sq_weights or 0.0
    ratio = c.M / c.R
    beta1 = 2 * c.sigma2 / (gamma * c.R) * sw2 + 4 * c.L * (ratio + 1 - gamma) * c.sq_heterogeneity
    beta2 = 72 * c.L**2 * (1 + ratio) * c.heterogeneity
    return (
        (1 - c.mu * eta / 2) * dist_sq / eta
        - next_dist_sq / eta
        + eta * beta1
        + eta**2 * beta2
    )


def fedavg_ncvx_rhs(
    c: ProblemConstants, eta: float, gamma: float, f_value: float, grad_sq: float
) -> float:
    """Majorant de E f(x^{k+1}) pour le pas effectif η."""
    gamma = _check_gamma(gamma)
    sw2 = c.sum_sq_weights or 0.0
    beta = (c.rho / 4 + c.sigma2 / (gamma * c.R) * sw2) * c.L
    descent = 3 * eta / 8 * (1 - 10 * eta * c.L / 3)
    return f_value - descent * grad_sq + eta * c.rho / 8 + eta**2 * beta
