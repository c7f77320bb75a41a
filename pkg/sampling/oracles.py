"""
Oracles de vérification : variance exacte pour une matrice de probabilités
quelconque, minimiseur numérique de la variance, estimations Monte-Carlo.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .core import NormsLike, estimator_variance, sample_many
from .exceptions import (
    DimensionMismatchError,
    InvalidProbabilitiesError,
    OracleConvergenceError,
    UndefinedEstimatorError,
)
from .vectors import (
    PROB_TOL,
    ProbabilityMatrix,
    ProbabilityVector,
    as_norms,
    check_budget,
)

logger = logging.getLogger(__name__)


# =========================
# Matrices de probabilités
# =========================
def independent_matrix(p: ProbabilityVector | Sequence[float]) -> ProbabilityMatrix:
    """P_ij = p_i·p_j hors diagonale, P_ii = p_i ; certificat v = 1 − p."""
    probs = p.probs if isinstance(p, ProbabilityVector) else np.asarray(p, dtype=float)
    entries = np.outer(probs, probs)
    np.fill_diagonal(entries, probs)
    return ProbabilityMatrix(entries, v=1.0 - probs)


def matrix_from_subsets(
    distribution: Mapping[frozenset[int], float], n: int
) -> ProbabilityMatrix:
    """Matrice d'une loi explicite sur les sous-ensembles de {0..n-1}."""
    total = math.fsum(distribution.values())
    if abs(total - 1.0) > 1e-9:
        raise InvalidProbabilitiesError(f"Loi sur les sous-ensembles de masse {total!r}")
    entries = np.zeros((n, n))
    for subset, prob in distribution.items():
        if prob < 0:
            raise InvalidProbabilitiesError("Probabilité de sous-ensemble négative")
        idx = sorted(subset)
        if any(i < 0 or i >= n for i in idx):
            raise DimensionMismatchError(f"Sous-ensemble {idx} hors de [0, {n})")
        for i in idx:
            entries[i, i] += prob
        for i, j in combinations(idx, 2):
            entries[i, j] += prob
            entries[j, i] += prob
    return ProbabilityMatrix(entries)


def certificate_is_valid(matrix: ProbabilityMatrix, tol: float = 1e-10) -> bool:
    """Diag(p∘v) − (P − ppᵀ) ⪰ 0."""
    gap = np.diag(matrix.probs * matrix.v) - matrix.covariance
    return bool(np.linalg.eigvalsh((gap + gap.T) / 2).min() >= -tol)


def _scaled_columns(matrix: ProbabilityMatrix, weighted_vectors) -> np.ndarray:
    vectors = np.atleast_2d(np.asarray(weighted_vectors, dtype=float))
    if vectors.shape[0] != matrix.n:
        raise DimensionMismatchError(
            f"{vectors.shape[0]} vecteurs pour une matrice {matrix.n}×{matrix.n}"
        )
    p = matrix.probs
    nonzero = np.linalg.norm(vectors, axis=1) > 0
    if np.any(nonzero & (p <= 0)):
        raise UndefinedEstimatorError("Vecteur non nul avec p_i = 0")
    scale = np.where(p > 0, 1.0 / np.where(p > 0, p, 1.0), 0.0)
    # a_i = w_iζ_i / p_i
    return vectors * scale[:, None]


def general_sampling_variance(matrix: ProbabilityMatrix, weighted_vectors) -> float:
    """eᵀ((P − ppᵀ) ∘ AᵀA)e, variance exacte de Σ_{i∈S} w_iζ_i/p_i."""
    a = _scaled_columns(matrix, weighted_vectors)
    gram = a @ a.T
    value = float(np.sum(matrix.covariance * gram))
    return max(value, 0.0)


def lemma_bound(matrix: ProbabilityMatrix, weighted_vectors) -> float:
    """Σ v_i/p_i·‖w_iζ_i‖², majorant valable dès que le certificat v l'est."""
    vectors = np.atleast_2d(np.asarray(weighted_vectors, dtype=float))
    if vectors.shape[0] != matrix.n:
        raise DimensionMismatchError("Nombre de vecteurs incohérent")
    sq = np.sum(vectors**2, axis=1)
    p = matrix.probs
    active = sq > 0
    if np.any(active & (p <= 0)):
        raise UndefinedEstimatorError("Vecteur non nul avec p_i = 0")
    return float(math.fsum(matrix.v[active] / p[active] * sq[active]))


def enumerate_variance(
    distribution: Mapping[frozenset[int], float], weighted_vectors
) -> float:
    """Variance par énumération directe des sous-ensembles (petits n)."""
    vectors = np.atleast_2d(np.asarray(weighted_vectors, dtype=float))
    n = vectors.shape[0]
    matrix = matrix_from_subsets(distribution, n)
    a = _scaled_columns(matrix, vectors)
    target = vectors.sum(axis=0)
    acc = 0.0
    for subset, prob in distribution.items():
        x = a[sorted(subset)].sum(axis=0) if subset else np.zeros_like(target)
        acc += prob * float(np.sum((x - target) ** 2))
    return acc


# =========================
# Minimiseur numérique
# =========================
@dataclass(frozen=True)
class BruteForceResult:
    probs: ProbabilityVector
    objective: float
    restarts: int
    iterations: int


def _project(z: np.ndarray, h: np.ndarray, lo: np.ndarray, hi: np.ndarray, m: int) -> np.ndarray:
    """Projection (métrique diag(h)) sur {lo ≤ q ≤ hi, Σq ≤ m}."""
    q = np.clip(z, lo, hi)
    if q.sum() <= m:
        return q
    # q(τ) = clip(z − τ/h) décroît en τ : bissection sur la contrainte active
    lo_tau, hi_tau = 0.0, 1.0
    while np.clip(z - hi_tau / h, lo, hi).sum() > m:
        hi_tau *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo_tau + hi_tau)
        if np.clip(z - mid / h, lo, hi).sum() > m:
            lo_tau = mid
        else:
            hi_tau = mid
    return np.clip(z - hi_tau / h, lo, hi)


def brute_force_probabilities(
    norms: NormsLike,
    m: int,
    stream: np.random.Generator | None = None,
    restarts: int = 20,
    max_iter: int = 5000,
    tol: float = 1e-12,
) -> BruteForceResult:
    """Minimise Σ(1−p_i)/p_i·u_i² sur {0 ≤ p ≤ 1, Σp ≤ m} par gradient projeté.

    Le pas de chaque coordonnée vient de la courbure locale 2u_i²/p_i³
    (pas 1/L estimé par instance, coordonnée par coordonnée), avec
    retour arrière si l'objectif augmente. Les clients de norme nulle sont
    fixés à p = 0 : ils ne changent pas l'objectif.
    """
    m = check_budget(m)
    u = as_norms(norms).values
    n = u.size
    rng = stream if stream is not None else np.random.default_rng(0)

    active = u > 0
    if m >= n or not active.any():
        probs = np.where(m >= n, 1.0, 0.0) * np.ones(n)
        return BruteForceResult(ProbabilityVector(probs, m), 0.0, 0, 0)

    ua = u[active]
    k = ua.size
    sq = ua**2
    budget = min(m, k)
    # borne basse strictement positive : l'objectif explose en 0
    lo = np.full(k, 1e-9)
    hi = np.ones(k)

    def objective(q: np.ndarray) -> float:
        return float(math.fsum((1.0 - q) / q * sq))

    best_q, best_obj, best_converged, total_iter = None, math.inf, False, 0
    for restart in range(int(restarts)):
        if restart == 0:
            q = np.full(k, budget / k)
        else:
            q = _project(rng.uniform(0.01, 1.0, size=k), np.ones(k), lo, hi, budget)
        obj = objective(q)
        converged = False
        for _ in range(int(max_iter)):
            total_iter += 1
            grad = -sq / q**2
            curv = 2.0 * sq / q**3
            step = 1.0
            cand = _project(q - grad / curv, curv, lo, hi, budget)
            cand_obj = objective(cand)
            while cand_obj > obj and step > 1e-12:
                step *= 0.5
                cand = _project(q - step * grad / curv, curv / step, lo, hi, budget)
                cand_obj = objective(cand)
            if cand_obj > obj:
                # plus aucune direction de descente au pas minimal
                converged = True
                break
            change = obj - cand_obj
            q, obj = cand, cand_obj
            if change <= tol * max(1.0, abs(obj)):
                converged = True
                break
        if obj < best_obj:
            best_q, best_obj, best_converged = q.copy(), obj, converged

    full = np.zeros(n)
    full[active] = best_q
    full = np.clip(full, 0.0, 1.0)
    if not best_converged:
        raise OracleConvergenceError(
            f"Oracle non convergé après {max_iter} itérations × {restarts} redémarrages",
            best_probs=full,
            best_objective=best_obj,
        )
    logger.debug(
        "Oracle : objectif %.17g après %d itérations (%d redémarrages)",
        best_obj,
        total_iter,
        restarts,
    )
    return BruteForceResult(ProbabilityVector(full, m), best_obj, int(restarts), total_iter)


def random_feasible_probabilities(
    n: int, m: int, stream: np.random.Generator
) -> ProbabilityVector:
    """Point admissible aléatoire strictement positif (comparaisons d'optimalité)."""
    m = check_budget(m)
    raw = stream.uniform(1e-3, 1.0, size=n)
    q = _project(raw, np.ones(n), np.full(n, 1e-3), np.ones(n), min(m, n))
    return ProbabilityVector(q, m)


# =========================
# Monte-Carlo
# =========================
def monte_carlo_variance(
    norms: NormsLike,
    p: ProbabilityVector,
    stream: np.random.Generator,
    draws: int = 200_000,
    chunk: int = 50_000,
) -> tuple[float, float]:
    """Moyenne et variance empiriques de Σ_{i∈S} u_i/p_i."""
    u = as_norms(norms).values
    probs = p.probs
    if np.any((u > 0) & (probs <= 0)):
        raise UndefinedEstimatorError("Clients de norme positive avec p = 0")
    coeff = np.where(probs > 0, u / np.where(probs > 0, probs, 1.0), 0.0)
    total, total_sq, done = 0.0, 0.0, 0
    while done < draws:
        size = min(chunk, draws - done)
        values = sample_many(p, stream, size) @ coeff
        total += float(values.sum())
        total_sq += float((values**2).sum())
        done += size
    mean = total / draws
    var = total_sq / draws - mean**2
    return mean, var * draws / (draws - 1)


def monte_carlo_mean_vector(
    weighted_vectors,
    p: ProbabilityVector,
    stream: np.random.Generator,
    draws: int = 100_000,
    chunk: int = 20_000,
) -> tuple[np.ndarray, np.ndarray]:
    """Moyenne et écart-type (par coordonnée) de Σ_{i∈S} Ũ_i/p_i."""
    vectors = np.atleast_2d(np.asarray(weighted_vectors, dtype=float))
    probs = p.probs
    if vectors.shape[0] != probs.size:
        raise DimensionMismatchError("Nombre de vecteurs incohérent")
    scaled = np.where(probs[:, None] > 0, vectors / np.where(probs > 0, probs, 1.0)[:, None], 0.0)
    total = np.zeros(vectors.shape[1])
    total_sq = np.zeros(vectors.shape[1])
    done = 0
    while done < draws:
        size = min(chunk, draws - done)
        values = sample_many(p, stream, size).astype(float) @ scaled
        total += values.sum(axis=0)
        total_sq += (values**2).sum(axis=0)
        done += size
    mean = total / draws
    std = np.sqrt(np.maximum(total_sq / draws - mean**2, 0.0))
    return mean, std


def optimality_gap(norms: NormsLike, candidate: ProbabilityVector, reference: ProbabilityVector) -> float:
    """objectif(candidate) − objectif(reference), relatif à max(1, |référence|)."""
    ref = estimator_variance(norms, reference)
    cand = estimator_variance(norms, candidate)
    return (cand - ref) / max(1.0, abs(ref))


__all__ = [
    "BruteForceResult",
    "PROB_TOL",
    "brute_force_probabilities",
    "certificate_is_valid",
    "enumerate_variance",
    "general_sampling_variance",
    "independent_matrix",
    "lemma_bound",
    "matrix_from_subsets",
    "monte_carlo_mean_vector",
    "monte_carlo_variance",
    "optimality_gap",
    "random_feasible_probabilities",
]
