"""
Réglage du pas, balayage du budget m et tests appariés entre échantillonneurs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .forms import ExperimentConfig
from .referentiels import DEFAULT_STEP_GRID, MAX_GRID_EXTENSIONS
from .runner import SeedResult, run_experiment

logger = logging.getLogger(__name__)


def mean_final_suboptimality(results: Sequence[SeedResult]) -> float:
    """Moyenne sur les graines ; +inf dès qu'une graine a divergé."""
    values = [r.final_suboptimality for r in results]
    if not values or any(math.isinf(v) or math.isnan(v) for v in values):
        return math.inf
    return math.fsum(values) / len(values)


def paired_one_sided_test(a: Sequence[float], b: Sequence[float]) -> float:
    """p-valeur du test t apparié H1 : moyenne(a) < moyenne(b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.size < 2:
        raise ValueError(f"Échantillons appariés de tailles incompatibles : {a.shape} / {b.shape}")
    if np.array_equal(a, b):
        return 1.0
    return float(stats.ttest_rel(a, b, alternative="less").pvalue)


# =========================
# Réglage du pas
# =========================
@dataclass
class TuneResult:
    step_name: str
    best_step: float
    scores: dict[float, float] = field(default_factory=dict)
    extensions: int = 0

    @property
    def best_score(self) -> float:
        return self.scores[self.best_step]


def tune_step_size(
    config: ExperimentConfig,
    grid: Sequence[float] = DEFAULT_STEP_GRID,
    *,
    parallel: int = 1,
    divergence_threshold: float = math.inf,
) -> TuneResult:
    """Pas de plus faible sous-optimalité finale moyenne.

    Si le meilleur pas est au bord de la grille, la grille est prolongée d'une
    puissance de deux dans cette direction (au plus MAX_GRID_EXTENSIONS fois).
    """
    steps = sorted({float(s) for s in grid}, reverse=True)
    if not steps or any(not s > 0 for s in steps):
        raise ValueError("Grille de pas vide ou non positive")
    scores: dict[float, float] = {}

    def evaluate(step: float) -> None:
        if step not in scores:
            results = run_experiment(
                config.with_step(step), parallel=parallel, divergence_threshold=divergence_threshold
            )
            scores[step] = mean_final_suboptimality(results)
            logger.info("%s = %g : sous-optimalité moyenne %.6g", config.step_name, step, scores[step])

    for step in steps:
        evaluate(step)

    extensions = 0
    while extensions < MAX_GRID_EXTENSIONS:
        best = min(scores, key=lambda s: (scores[s], -s))
        if math.isinf(scores[best]):
            break
        largest, smallest = max(scores), min(scores)
        if best == largest:
            evaluate(best * 2)
        elif best == smallest:
            evaluate(best / 2)
        else:
            break
        extensions += 1

    best = min(scores, key=lambda s: (scores[s], -s))
    if math.isinf(scores[best]):
        logger.warning("Toutes les valeurs de la grille divergent")
    return TuneResult(config.step_name, best, dict(sorted(scores.items(), reverse=True)), extensions)


# =========================
# Balayage du budget
# =========================
@dataclass(frozen=True)
class BudgetPoint:
    m: int
    mean_suboptimality: float
    mean_uplink_bits: float
    diverged_seeds: int


def sweep_budget(
    config: ExperimentConfig,
    m_values: Sequence[int],
    *,
    parallel: int = 1,
    divergence_threshold: float = math.inf,
) -> list[BudgetPoint]:
    points = []
    for m in m_values:
        if not 1 <= m <= config.n:
            raise ValueError(f"m = {m} hors de [1, {config.n}]")
        results = run_experiment(
            config.replace(m=int(m)), parallel=parallel, divergence_threshold=divergence_threshold
        )
        points.append(
            BudgetPoint(
                m=int(m),
                mean_suboptimality=mean_final_suboptimality(results),
                mean_uplink_bits=math.fsum(r.total_bits for r in results) / len(results),
                diverged_seeds=sum(r.diverged for r in results),
            )
        )
    return points
