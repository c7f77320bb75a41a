"""
Fonctions objectif locales f_i : quadratiques et régression logistique ℓ2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .exceptions import ReferenceSolveError, TaskError

logger = logging.getLogger(__name__)

REFERENCE_GTOL = 1e-10


def _frozen(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != ndim:
        raise TaskError(f"Tableau de dimension {ndim} attendu, reçu {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise TaskError("Données non finies")
    arr.setflags(write=False)
    return arr


def solve_reference(
    value: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    hessian: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    gtol: float = REFERENCE_GTOL,
) -> np.ndarray:
    """Minimiseur par région de confiance exacte ; exige ‖∇f‖ < gtol."""
    result = minimize(
        value,
        x0,
        jac=gradient,
        hess=hessian,
        method="trust-exact",
        options={"gtol": gtol / 10, "maxiter": 500},
    )
    x = np.asarray(result.x, dtype=float)
    # quelques pas de Newton purs : insensibles à l'arrondi sur f près de x*
    for _ in range(20):
        g = gradient(x)
        if np.linalg.norm(g) < gtol:
            break
        x = x - np.linalg.solve(hessian(x), g)
    grad_norm = float(np.linalg.norm(gradient(x)))
    if not grad_norm < gtol:
        raise ReferenceSolveError(
            f"Résolution de référence non convergée (‖∇f‖ = {grad_norm:.3e}, {result.message})",
            grad_norm,
        )
    return x


# =========================
# Quadratique
# =========================
@dataclass(frozen=True)
class QuadraticClientTask:
    """f_i(x) = ½(x − b)ᵀA(x − b) + c, A symétrique définie positive."""

    A: np.ndarray
    b: np.ndarray
    c: float = 0.0

    def __post_init__(self) -> None:
        A = _frozen(self.A, 2)
        b = _frozen(self.b, 1)
        if A.shape != (b.size, b.size):
            raise TaskError(f"A de forme {A.shape} pour b de taille {b.size}")
        if not np.allclose(A, A.T, atol=1e-12):
            raise TaskError("A non symétrique")
        if np.linalg.eigvalsh(A).min() <= 0:
            raise TaskError("A non définie positive")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @property
    def d(self) -> int:
        return int(self.b.size)

    def value(self, x: np.ndarray) -> float:
        r = np.asarray(x, dtype=float) - self.b
        return float(0.5 * r @ self.A @ r + self.c)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.A @ (np.asarray(x, dtype=float) - self.b)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        return np.array(self.A)

    @property
    def smoothness(self) -> float:
        return float(np.linalg.eigvalsh(self.A).max())

    @property
    def strong_convexity(self) -> float:
        return float(np.linalg.eigvalsh(self.A).min())

    def local_minimum(self) -> float:
        """f_i* = c, atteint en b."""
        return self.c

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "b": self.b.tolist(), "c": self.c}


# =========================
# Régression logistique
# =========================
@dataclass(frozen=True)
class LogisticClientTask:
    """f_i(x) = moyenne log(1 + exp(−y·Xx)) + λ/2‖x‖², étiquettes ±1."""

    X: np.ndarray
    y: np.ndarray
    lam: float = 0.0

    def __post_init__(self) -> None:
        X = _frozen(self.X, 2)
        y = _frozen(self.y, 1)
        if X.shape[0] != y.size or y.size < 1:
            raise TaskError(f"{X.shape[0]} exemples pour {y.size} étiquettes")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise TaskError("Étiquettes attendues dans {-1, +1}")
        if not self.lam >= 0:
            raise TaskError(f"λ négatif : {self.lam!r}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def d(self) -> int:
        return int(self.X.shape[1])

    @property
    def samples(self) -> int:
        return int(self.y.size)

    def _margins(self, x: np.ndarray) -> np.ndarray:
        return self.y * (self.X @ np.asarray(x, dtype=float))

    def value(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        loss = np.logaddexp(0.0, -self._margins(x)).mean()
        return float(loss + 0.5 * self.lam * x @ x)

    def gradient(self, x: np.ndarray, rows: np.ndarray | None = None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        X, y = (self.X, self.y) if rows is None else (self.X[rows], self.y[rows])
        weights = -y * expit(-y * (X @ x))
        return X.T @ weights / y.size + self.lam * x

    def hessian(self, x: np.ndarray) -> np.ndarray:
        s = expit(self._margins(x))
        curvature = s * (1.0 - s)
        return (self.X.T * curvature) @ self.X / self.samples + self.lam * np.eye(self.d)

    @property
    def smoothness(self) -> float:
        """‖X‖₂²/(4n_i) + λ."""
        return float(np.linalg.norm(self.X, 2) ** 2 / (4 * self.samples) + self.lam)

    @property
    def strong_convexity(self) -> float:
        return self.lam

    def local_minimum(self) -> float:
        x = solve_reference(self.value, self.gradient, self.hessian, np.zeros(self.d))
        return self.value(x)

    def to_dict(self) -> dict:
        return {"X": self.X.tolist(), "y": self.y.tolist(), "lam": self.lam}
