"""
Fédération : clients pondérés et constantes exactes L, μ, x*, f*, Z_i, W.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .clients import LogisticClientTask, QuadraticClientTask, solve_reference
from .exceptions import TaskError

logger = logging.getLogger(__name__)

WEIGHT_TOL = 1e-12

ClientTask = QuadraticClientTask | LogisticClientTask


@dataclass(frozen=True)
class Federation:
    kind: str
    clients: tuple[ClientTask, ...]
    weights: np.ndarray
    L: float
    mu: float
    x_star: np.ndarray
    f_star: float
    Z: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.clients)

    @property
    def d(self) -> int:
        return self.clients[0].d

    @property
    def W(self) -> float:
        return float(self.weights.max())

    @property
    def sum_sq_weights(self) -> float:
        return float(math.fsum(self.weights**2))

    def f(self, x: np.ndarray) -> float:
        return float(math.fsum(w * c.value(x) for w, c in zip(self.weights, self.clients)))

    def client_grad(self, i: int, x: np.ndarray) -> np.ndarray:
        return self.clients[i].gradient(x)

    def client_grads(self, x: np.ndarray) -> np.ndarray:
        return np.stack([c.gradient(x) for c in self.clients])

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.weights @ self.client_grads(x)

    def dispersion(self, x: np.ndarray) -> float:
        """Σw_i‖∇f_i(x) − ∇f(x)‖²."""
        grads = self.client_grads(x)
        diff = grads - self.weights @ grads
        return float(self.weights @ np.sum(diff**2, axis=1))

    @property
    def weighted_heterogeneity(self) -> float:
        """Σw_i·Z_i."""
        return float(self.weights @ self.Z)

    @property
    def weighted_sq_heterogeneity(self) -> float:
        """Σw_i²·Z_i."""
        return float(self.weights**2 @ self.Z)


def _check_weights(weights: Sequence[float], n: int) -> np.ndarray:
    w = np.array(weights, dtype=float).reshape(-1)
    if w.size != n:
        raise TaskError(f"{w.size} poids pour {n} clients")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise TaskError("Poids négatifs ou non finis")
    if abs(math.fsum(w) - 1.0) > WEIGHT_TOL:
        raise TaskError(f"Σw = {math.fsum(w)!r} au lieu de 1")
    w.setflags(write=False)
    return w


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


# =========================
# Constructeurs
# =========================
def quadratic_federation(
    A: Sequence, b: Sequence, weights: Sequence[float], c: Sequence[float] | None = None,
    params: dict | None = None,
) -> Federation:
    """Constantes en forme close : x* = (Σw_iA_i)⁻¹Σw_iA_ib_i."""
    c = [0.0] * len(A) if c is None else list(c)
    if not (len(A) == len(b) == len(c)) or len(A) == 0:
        raise TaskError("A, b et c doivent décrire le même nombre (≥ 1) de clients")
    clients = tuple(QuadraticClientTask(Ai, bi, ci) for Ai, bi, ci in zip(A, b, c))
    if len({cl.d for cl in clients}) != 1:
        raise TaskError("Dimensions de clients incohérentes")
    w = _check_weights(weights, len(clients))

    H = sum(wi * cl.A for wi, cl in zip(w, clients))
    bs = np.stack([cl.b for cl in clients])
    if np.all(bs == bs[0]):
        x_star = bs[0].copy()
    else:
        x_star = np.linalg.solve(H, sum(wi * cl.A @ cl.b for wi, cl in zip(w, clients)))
    Z = np.array([cl.value(x_star) - cl.local_minimum() for cl in clients])
    fed = Federation(
        kind="quadratic",
        clients=clients,
        weights=w,
        L=max(cl.smoothness for cl in clients),
        mu=float(np.linalg.eigvalsh(H).min()),
        x_star=_frozen(x_star),
        f_star=0.0,
        Z=_frozen(np.maximum(Z, 0.0)),
        params=dict(params or {}),
    )
    object.__setattr__(fed, "f_star", fed.f(x_star))
    return fed


def logistic_federation(
    X: Sequence, y: Sequence, lam: float, weights: Sequence[float] | None = None,
    params: dict | None = None,
) -> Federation:
    """Poids proportionnels aux effectifs par défaut ; x* par résolution de référence."""
    if len(X) == 0 or len(X) != len(y):
        raise TaskError("X et y doivent décrire le même nombre (≥ 1) de clients")
    clients = tuple(LogisticClientTask(Xi, yi, lam) for Xi, yi in zip(X, y))
    if len({cl.d for cl in clients}) != 1:
        raise TaskError("Dimensions de clients incohérentes")
    if weights is None:
        counts = np.array([cl.samples for cl in clients], dtype=float)
        weights = counts / counts.sum()
    w = _check_weights(weights, len(clients))

    def value(x):
        return float(math.fsum(wi * cl.value(x) for wi, cl in zip(w, clients)))

    def gradient(x):
        return sum(wi * cl.gradient(x) for wi, cl in zip(w, clients))

    def hessian(x):
        return sum(wi * cl.hessian(x) for wi, cl in zip(w, clients))

    x_star = solve_reference(value, gradient, hessian, np.zeros(clients[0].d))
    Z = np.array([cl.value(x_star) - cl.local_minimum() for cl in clients])
    logger.info(
        "Fédération logistique : n=%d, d=%d, ‖∇f(x*)‖=%.2e",
        len(clients),
        clients[0].d,
        float(np.linalg.norm(gradient(x_star))),
    )
    return Federation(
        kind="logistic",
        clients=clients,
        weights=w,
        L=max(cl.smoothness for cl in clients),
        mu=float(lam),
        x_star=_frozen(x_star),
        f_star=value(x_star),
        Z=_frozen(np.maximum(Z, 0.0)),
        params=dict(params or {}),
    )


# =========================
# Métriques exactes
# =========================
@dataclass(frozen=True)
class ExactMetrics:
    suboptimality: float
    dist_sq: float
    client_grads: np.ndarray
    dispersion: float


def exact_metrics(federation: Federation, x: np.ndarray) -> ExactMetrics:
    x = np.asarray(x, dtype=float)
    grads = federation.client_grads(x)
    diff = grads - federation.weights @ grads
    return ExactMetrics(
        suboptimality=federation.f(x) - federation.f_star,
        dist_sq=float(np.sum((x - federation.x_star) ** 2)),
        client_grads=grads,
        dispersion=float(federation.weights @ np.sum(diff**2, axis=1)),
    )
