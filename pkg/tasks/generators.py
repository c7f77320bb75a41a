"""
Générateurs de fédérations synthétiques reproductibles (graine -> fédération).
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from protocol.streams import TASK, RoundStream

from .exceptions import TaskError
from .federation import Federation, logistic_federation, quadratic_federation

logger = logging.getLogger(__name__)

WEIGHT_SCHEMES = ("uniform", "proportional-lognormal")
DEFAULT_MU0 = 0.1
DEFAULT_L0 = 10.0


def task_stream(seed: int) -> np.random.Generator:
    """Flux de génération des données, distinct des flux de round (round 0)."""
    return RoundStream(int(seed), 0).generator(TASK)


def _weights(scheme: str, n: int, rng: np.random.Generator) -> np.ndarray:
    if scheme == "uniform":
        return np.full(n, 1.0 / n)
    if scheme == "proportional-lognormal":
        raw = rng.lognormal(mean=0.0, sigma=1.0, size=n)
        return raw / raw.sum()
    raise TaskError(f"Schéma de poids inconnu : {scheme!r} (choix : {', '.join(WEIGHT_SCHEMES)})")


def _spd(d: int, mu0: float, L0: float, rng: np.random.Generator) -> np.ndarray:
    eigs = np.exp(rng.uniform(np.log(mu0), np.log(L0), size=d))
    Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    A = (Q * eigs) @ Q.T
    return (A + A.T) / 2


def make_quadratic_federation(
    n: int,
    d: int,
    heterogeneity: float = 0.0,
    weight_scheme: str = "uniform",
    seed: int = 0,
    mu0: float = DEFAULT_MU0,
    L0: float = DEFAULT_L0,
) -> Federation:
    """A_i de spectre log-uniforme dans [μ₀, L₀] ; b_i = b̄ + h·δ_i."""
    if n < 1 or d < 1:
        raise TaskError(f"n et d doivent être ≥ 1 (n={n}, d={d})")
    if heterogeneity < 0:
        raise TaskError("Hétérogénéité négative")
    if not 0 < mu0 <= L0:
        raise TaskError(f"Spectre invalide [{mu0}, {L0}]")
    rng = task_stream(seed)
    weights = _weights(weight_scheme, n, rng)
    A = [_spd(d, mu0, L0, rng) for _ in range(n)]
    b_bar = rng.normal(size=d)
    deltas = rng.normal(size=(n, d))
    b = [b_bar + heterogeneity * deltas[i] for i in range(n)] if heterogeneity else [b_bar] * n
    params = {
        "generator": "quadratic",
        "n": n,
        "d": d,
        "heterogeneity": float(heterogeneity),
        "weight_scheme": weight_scheme,
        "seed": int(seed),
        "mu0": float(mu0),
        "L0": float(L0),
    }
    return quadratic_federation(A, b, weights, params=params)


def make_logistic_federation(
    n: int,
    d: int,
    samples_per_client: Sequence[int],
    seed: int = 0,
    lam: float = 0.1,
    shift: float = 1.0,
) -> Federation:
    """Données gaussiennes décalées par client, poids proportionnels aux effectifs."""
    counts = [int(c) for c in samples_per_client]
    if len(counts) != n:
        raise TaskError(f"{len(counts)} effectifs pour n = {n}")
    if any(c < 1 for c in counts) or any(c != s for c, s in zip(counts, samples_per_client)):
        raise TaskError("Effectifs entiers ≥ 1 attendus")
    rng = task_stream(seed)
    truth = rng.normal(size=d)
    X, y = [], []
    for count in counts:
        center = shift * rng.normal(size=d)
        Xi = center + rng.normal(size=(count, d))
        logits = Xi @ truth + 0.5 * rng.normal(size=count)
        X.append(Xi)
        y.append(np.where(logits >= 0, 1.0, -1.0))
    params = {
        "generator": "logistic",
        "n": n,
        "d": d,
        "samples_per_client": counts,
        "seed": int(seed),
        "lam": float(lam),
        "shift": float(shift),
    }
    return logistic_federation(X, y, lam, params=params)


def unbalance_counts(
    counts: Sequence[int], s: float, a: int, b: int, stream: np.random.Generator
) -> list[int]:
    """Déséquilibrage des effectifs : pour a < n_c < b, le client est retiré
    avec probabilité s, sinon réduit à a exemples. Les autres sont inchangés.
    """
    if not 0 < s < 1:
        raise TaskError(f"s doit être dans ]0, 1[ (reçu {s!r})")
    if not 1 <= a < b:
        raise TaskError(f"Bornes invalides a={a}, b={b}")
    kept = []
    for count in counts:
        if a < count < b:
            if stream.random() < s:
                continue
            kept.append(int(a))
        else:
            kept.append(int(count))
    logger.debug("Déséquilibrage : %d clients sur %d conservés", len(kept), len(counts))
    return kept
