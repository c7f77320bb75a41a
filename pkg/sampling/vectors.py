from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    InvalidBudgetError,
    InvalidNormsError,
    InvalidProbabilitiesError,
)

# Tolérances numériques partagées par tout le module
PROB_TOL = 1e-12
BUDGET_TOL = 1e-9


def _frozen_array(values: Iterable[float] | np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


def check_budget(m: int) -> int:
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise InvalidBudgetError(f"Budget m invalide : {m!r} (entier >= 1 attendu)")
    return int(m)


def check_iterations(j_max: int) -> int:
    if isinstance(j_max, bool) or int(j_max) != j_max or j_max < 1:
        raise InvalidBudgetError(f"j_max invalide : {j_max!r}")
    return int(j_max)


# =========================
# Normes pondérées
# =========================
@dataclass(frozen=True)
class WeightedNormVector:
    """u_i = w_i‖U_i‖ pour chaque client ; seule information utile au tirage."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen_array(self.values)
        if arr.size < 1:
            raise InvalidNormsError("Vecteur de normes vide")
        if not np.all(np.isfinite(arr)):
            raise InvalidNormsError("Normes non finies")
        if np.any(arr < 0):
            raise InvalidNormsError("Normes négatives")
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_updates(
        cls, updates: Sequence[np.ndarray], weights: Sequence[float]
    ) -> "WeightedNormVector":
        if len(updates) != len(weights):
            raise DimensionMismatchError(
                f"{len(updates)} mises à jour pour {len(weights)} poids"
            )
        return cls(
            [float(w) * float(np.linalg.norm(u)) for u, w in zip(updates, weights)]
        )

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def is_degenerate(self) -> bool:
        return not bool(np.any(self.values > 0))

    def scaled(self, c: float) -> "WeightedNormVector":
        return WeightedNormVector(self.values * c)


def as_norms(norms: WeightedNormVector | Sequence[float] | np.ndarray) -> WeightedNormVector:
    if isinstance(norms, WeightedNormVector):
        return norms
    return WeightedNormVector(norms)


# =========================
# Probabilités d'inclusion
# =========================
@dataclass(frozen=True)
class ProbabilityVector:
    """p_i pour chaque client, sous contrainte Σp_i ≤ m."""

    probs: np.ndarray
    budget: int
    degenerate: bool = False

    def __post_init__(self) -> None:
        arr = np.array(self.probs, dtype=float, copy=True).reshape(-1)
        budget = check_budget(self.budget)
        if arr.size < 1:
            raise InvalidProbabilitiesError("Vecteur de probabilités vide")
        if not np.all(np.isfinite(arr)):
            raise InvalidProbabilitiesError("Probabilités non finies")
        if np.any(arr < -PROB_TOL) or np.any(arr > 1 + PROB_TOL):
            raise InvalidProbabilitiesError(
                f"Probabilités hors de [0, 1] : min={arr.min()!r}, max={arr.max()!r}"
            )
        arr = np.clip(arr, 0.0, 1.0)
        if arr.sum() > budget + BUDGET_TOL:
            raise InvalidProbabilitiesError(
                f"Σp = {arr.sum()!r} dépasse le budget m = {budget}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)
        object.__setattr__(self, "budget", budget)

    @property
    def n(self) -> int:
        return int(self.probs.size)

    @property
    def expected_participants(self) -> float:
        """b = Σp_i."""
        return float(self.probs.sum())

    def __len__(self) -> int:
        return self.n

    def tolist(self) -> list[float]:
        return [float(p) for p in self.probs]


@dataclass(frozen=True)
class ClientSelection:
    """Ensemble S tiré par pièces indépendantes (indices 0..n-1)."""

    included: frozenset[int]
    n: int

    def __post_init__(self) -> None:
        included = frozenset(int(i) for i in self.included)
        if any(i < 0 or i >= self.n for i in included):
            raise DimensionMismatchError(
                f"Indices hors de [0, {self.n}) dans la sélection"
            )
        object.__setattr__(self, "included", included)

    @property
    def mask(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        out[list(self.included)] = True
        return out

    @property
    def size(self) -> int:
        return len(self.included)

    def __contains__(self, i: object) -> bool:
        return i in self.included

    def __iter__(self):
        return iter(sorted(self.included))


# =========================
# Matrice de probabilités
# =========================
@dataclass(frozen=True)
class ProbabilityMatrix:
    """P_ij = Prob({i, j} ⊆ S) et certificat v de l'inégalité ESO."""

    entries: np.ndarray
    v: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        mat = np.array(self.entries, dtype=float, copy=True)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
            raise DimensionMismatchError(f"Matrice carrée attendue, reçu {mat.shape}")
        if not np.allclose(mat, mat.T, atol=PROB_TOL):
            raise InvalidProbabilitiesError("Matrice de probabilités non symétrique")
        if np.any(mat < -PROB_TOL) or np.any(mat > 1 + PROB_TOL):
            raise InvalidProbabilitiesError("Entrées hors de [0, 1]")
        mat = np.clip(mat, 0.0, 1.0)
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)

        if self.v is None:
            v = gershgorin_certificate(mat)
        else:
            v = _frozen_array(self.v)
            if v.size != mat.shape[0]:
                raise DimensionMismatchError("Certificat v de mauvaise taille")
        v = np.array(v, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    @property
    def probs(self) -> np.ndarray:
        return np.diag(self.entries).copy()

    @property
    def covariance(self) -> np.ndarray:
        """P − ppᵀ."""
        p = self.probs
        return self.entries - np.outer(p, p)


def gershgorin_certificate(entries: np.ndarray) -> np.ndarray:
    """v_i = Σ_j |(P − ppᵀ)_ij| / p_i : dominance diagonale, donc ESO valide.

    Les clients de probabilité nulle reçoivent v_i = 0 (aucune contribution).
    """
    p = np.diag(entries)
    cov = np.abs(entries - np.outer(p, p))
    row = cov.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(p > 0, row / np.where(p > 0, p, 1.0), 0.0)
    return v
