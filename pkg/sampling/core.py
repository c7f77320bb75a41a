"""
Probabilités d'inclusion optimales, approchées et uniformes.

Tout est fonction pure des entrées (plus un générateur numpy explicite pour
les tirages) : aucune variable globale mutable, utilisable depuis n'importe
quel nombre de threads.
"""

from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from .exceptions import InvalidBudgetError, UndefinedEstimatorError
from .vectors import (
    PROB_TOL,
    ClientSelection,
    ProbabilityVector,
    WeightedNormVector,
    as_norms,
    check_budget,
    check_iterations,
)

logger = logging.getLogger(__name__)

NormsLike = WeightedNormVector | Sequence[float] | np.ndarray

# C ≤ 1 à l'arrondi près : sinon une division 1/0.9999999999999999 relance
# une itération inutile.
AOCS_STOP_TOL = 1e-12


def _probs_array(p: ProbabilityVector | Sequence[float] | np.ndarray) -> np.ndarray:
    if isinstance(p, ProbabilityVector):
        return p.probs
    return np.clip(np.asarray(p, dtype=float).reshape(-1), 0.0, 1.0)


def snap_probabilities(probs: np.ndarray) -> np.ndarray:
    """Bornage dans [0, 1] avec ε = 1e-12 ; les quasi-certitudes deviennent 1."""
    out = np.clip(probs, 0.0, 1.0)
    out[out > 1.0 - PROB_TOL] = 1.0
    return out


def _degenerate(n: int, m: int) -> ProbabilityVector:
    logger.warning("Normes toutes nulles (n=%d, m=%d) : probabilités nulles", n, m)
    return ProbabilityVector(np.zeros(n), m, degenerate=True)


def _sorted_order(u: np.ndarray) -> np.ndarray:
    # tri stable (norme, indice client) : appartenance à A déterministe
    return np.lexsort((np.arange(u.size), u))


def _split_index(sorted_u: np.ndarray, m: int) -> int:
    """Plus grand ℓ tel que 0 < m+ℓ−n ≤ Σ_{j≤ℓ} u_(j) / u_(ℓ).

    La condition est satisfaite d'office quand u_(ℓ) = 0.
    """
    n = sorted_u.size
    ells = np.arange(1, n + 1)
    k = m + ells - n
    cums = np.cumsum(sorted_u)
    ok = (k > 0) & ((sorted_u == 0) | (k * sorted_u <= cums * (1 + PROB_TOL)))
    if not ok.any():
        # ℓ = n−m+1 vérifie toujours la condition (k = 1)
        return n - m + 1
    return int(ells[ok].max())


# =========================
# OCS : solution exacte
# =========================
def ocs_probabilities(norms: NormsLike, m: int) -> ProbabilityVector:
    """Probabilités minimisant Σ(1−p_i)/p_i·u_i² sous 0 ≤ p ≤ 1, Σp ≤ m."""
    m = check_budget(m)
    u = as_norms(norms).values
    n = u.size

    if m >= n:
        return ProbabilityVector(np.ones(n), m)
    if not np.any(u > 0):
        return _degenerate(n, m)

    order = _sorted_order(u)
    sorted_u = u[order]
    ell = _split_index(sorted_u, m)
    head = math.fsum(sorted_u[:ell])

    probs = np.ones(n)
    low = order[:ell]
    if head > 0:
        probs[low] = (m + ell - n) * u[low] / head
    else:
        probs[low] = 0.0  # 0/0 := 0
    probs = snap_probabilities(probs)
    return ProbabilityVector(probs, m)


# =========================
# AOCS : remise à l'échelle itérative
# =========================
def aocs_initial(norms: NormsLike, m: int) -> np.ndarray:
    """p_i = min(m·u_i/Σu_j, 1), calcul local de chaque client après diffusion de Σu."""
    u = as_norms(norms).values
    total = math.fsum(u)
    return np.minimum(m * u / total, 1.0)


def aocs_recalibrate(probs: np.ndarray, C: float) -> np.ndarray:
    """p_i ← min(C·p_i, 1) pour les clients non saturés."""
    out = probs.copy()
    unsat = out < 1.0
    out[unsat] = np.clip(C * out[unsat], 0.0, 1.0)
    return out


def calibration_constant(m: int, n: int, I: float, P: float) -> float:
    return (m - n + I) / P


def aocs_probabilities(
    norms: NormsLike, m: int, j_max: int
) -> tuple[ProbabilityVector, int]:
    """Approximation compatible avec l'agrégation sécurisée.

    Retourne les probabilités et le nombre d'itérations effectivement utilisées.
    """
    m = check_budget(m)
    j_max = check_iterations(j_max)
    u = as_norms(norms).values
    n = u.size

    if m >= n:
        return ProbabilityVector(np.ones(n), m), 0
    if not np.any(u > 0):
        return _degenerate(n, m), 0

    probs = aocs_initial(u, m)
    used = 0
    for j in range(1, j_max + 1):
        used = j
        unsat = probs < 1.0
        I = float(np.count_nonzero(unsat))
        P = math.fsum(probs[unsat])
        if P == 0:
            break
        C = calibration_constant(m, n, I, P)
        probs = aocs_recalibrate(probs, C)
        if C <= 1.0 + AOCS_STOP_TOL:
            break
    return ProbabilityVector(snap_probabilities(probs), m), used


def uniform_probabilities(n: int, m: int) -> ProbabilityVector:
    m = check_budget(m)
    if n < 1:
        raise InvalidBudgetError(f"Nombre de clients invalide : {n!r}")
    if m > n:
        raise InvalidBudgetError(f"m = {m} dépasse n = {n}")
    return ProbabilityVector(np.full(n, m / n), m)


def full_probabilities(n: int) -> ProbabilityVector:
    return ProbabilityVector(np.ones(n), n)


# =========================
# Tirages indépendants
# =========================
def sample_independent(
    p: ProbabilityVector | Sequence[float], stream: np.random.Generator
) -> ClientSelection:
    probs = _probs_array(p)
    draws = stream.random(probs.size)
    included = np.flatnonzero(draws < probs)
    return ClientSelection(frozenset(int(i) for i in included), probs.size)


def sample_many(
    p: ProbabilityVector | Sequence[float], stream: np.random.Generator, size: int
) -> np.ndarray:
    """Matrice booléenne size×n de sélections indépendantes."""
    probs = _probs_array(p)
    return stream.random((int(size), probs.size)) < probs


# =========================
# Variance de l'estimateur
# =========================
def estimator_variance(norms: NormsLike, p: ProbabilityVector | Sequence[float]) -> float:
    """Σ (1−p_i)/p_i·u_i² (égalité exacte pour l'échantillonnage indépendant)."""
    u = as_norms(norms).values
    probs = _probs_array(p)
    if probs.size != u.size:
        raise UndefinedEstimatorError(
            f"{u.size} normes pour {probs.size} probabilités"
        )
    active = u > 0
    if np.any(active & (probs <= 0)):
        bad = np.flatnonzero(active & (probs <= 0)).tolist()
        raise UndefinedEstimatorError(
            f"Clients de norme positive avec p = 0 : {bad}"
        )
    pa = probs[active]
    ua = u[active]
    return float(math.fsum((1.0 - pa) / pa * ua**2))


def optimal_variance_closed_form(norms: NormsLike, m: int) -> float:
    """(Σ_{j≤ℓ}u_(j))²/(m−n+ℓ) − Σ_{j≤ℓ}u_(j)², valeur au point optimal."""
    m = check_budget(m)
    u = as_norms(norms).values
    n = u.size
    if m >= n or not np.any(u > 0):
        return 0.0
    sorted_u = u[_sorted_order(u)]
    ell = _split_index(sorted_u, m)
    head = sorted_u[:ell]
    value = math.fsum(head) ** 2 / (m + ell - n) - math.fsum(head**2)
    return max(value, 0.0)


def improvement_factors(norms: NormsLike, m: int) -> tuple[float, float]:
    """(α, γ) : rapport de variance OCS/uniforme et fraction effective."""
    m = check_budget(m)
    u = as_norms(norms)
    n = u.n
    if m > n:
        raise InvalidBudgetError(f"m = {m} dépasse n = {n}")
    uniform_var = estimator_variance(u, uniform_probabilities(n, m))
    if uniform_var == 0:
        alpha = 0.0
    elif np.ptp(u.values) == 0:
        alpha = 1.0  # normes identiques : borne supérieure atteinte
    else:
        alpha = estimator_variance(u, ocs_probabilities(u, m)) / uniform_var
        alpha = min(max(alpha, 0.0), 1.0)
    gamma = m / (alpha * (n - m) + m)
    return alpha, gamma


def alpha_upper_bound(norms: NormsLike) -> float:
    """(Σu)²/(nΣu²), atteinte quand toutes les normes sont égales."""
    u = as_norms(norms).values
    sq = math.fsum(u**2)
    if sq == 0:
        return 0.0
    return math.fsum(u) ** 2 / (u.size * sq)


def effective_participants(norms: NormsLike, m: int) -> float:
    """m̃ = n·γ : taille d'un tirage uniforme de même variance."""
    _, gamma = improvement_factors(norms, m)
    return as_norms(norms).n * gamma
