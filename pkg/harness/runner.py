"""
Exécution d'une expérience : K rounds par graine, une ligne CSV par round.

Chaque graine fixe à la fois la fédération générée et les flux de round ;
deux échantillonneurs lancés avec la même graine ne diffèrent donc que par
le tirage des clients.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np
from tqdm import tqdm

from optim.drivers import ModelState, dsgd_round, fedavg_round
from optim.exceptions import DivergenceError
from optim.oracles import GradientOracleContract
from protocol.ledger import BitLedger
from protocol.streams import RoundStream
from tasks.federation import Federation, exact_metrics
from tasks.generators import make_logistic_federation, make_quadratic_federation

from .forms import ExperimentConfig
from .referentiels import CSV_COLUMNS

logger = logging.getLogger(__name__)


def format_float(value: float | None) -> str:
    """17 chiffres significatifs ; champ vide pour une valeur absente."""
    if value is None:
        return ""
    return format(float(value), ".17g")


@dataclass(frozen=True)
class MetricsRow:
    seed: int
    round: int
    suboptimality: float
    dist_sq: float
    sampled_count: int
    alpha: float | None
    gamma: float | None
    cumulative_uplink_bits: int

    def to_csv_fields(self) -> list[str]:
        return [
            str(self.seed),
            str(self.round),
            format_float(self.suboptimality),
            format_float(self.dist_sq),
            str(self.sampled_count),
            format_float(self.alpha),
            format_float(self.gamma),
            str(self.cumulative_uplink_bits),
        ]


@dataclass
class SeedResult:
    seed: int
    rows: list[MetricsRow] = field(default_factory=list)
    diverged: bool = False
    divergence_round: int | None = None
    max_dispersion: float = 0.0

    @property
    def final_suboptimality(self) -> float:
        if self.diverged or not self.rows:
            return math.inf
        return self.rows[-1].suboptimality

    @property
    def total_bits(self) -> int:
        return self.rows[-1].cumulative_uplink_bits if self.rows else 0

    def bits_to_target(self, target: float) -> int | None:
        return bits_to_target(self.rows, target)


def bits_to_target(rows: Iterable[MetricsRow], target: float) -> int | None:
    """Premier cumul de bits montants pour lequel f(x) − f* ≤ target."""
    for row in rows:
        if row.suboptimality <= target:
            return row.cumulative_uplink_bits
    return None


def build_federation(config: ExperimentConfig, seed: int) -> Federation:
    if config.task == "logistic":
        return make_logistic_federation(
            config.n, config.d, [config.samples_per_client] * config.n, seed=seed, lam=config.lam
        )
    return make_quadratic_federation(
        config.n,
        config.d,
        heterogeneity=config.heterogeneity,
        weight_scheme=config.weight_scheme,
        seed=seed,
    )


def run_seed(
    config: ExperimentConfig, seed: int, divergence_threshold: float = math.inf
) -> SeedResult:
    federation = build_federation(config, seed)
    contract = GradientOracleContract(config.M, config.sigma2, config.batch_size)
    ledger = BitLedger(config.float_width, config.count_downlink)
    state = ModelState(np.zeros(federation.d))
    result = SeedResult(seed)
    options = {
        "contract": contract,
        "j_max": config.j_max,
        "ledger": ledger,
        "divergence_threshold": divergence_threshold,
    }

    for k in range(1, config.K + 1):
        stream = RoundStream(seed, k)
        try:
            if config.algorithm == "fedavg":
                state, _, metrics = fedavg_round(
                    state,
                    federation,
                    config.sampler,
                    config.m,
                    config.R,
                    config.eta_l,
                    config.eta_g,
                    stream,
                    **options,
                )
            else:
                state, _, metrics = dsgd_round(
                    state, federation, config.sampler, config.m, config.eta, stream, **options
                )
        except DivergenceError as e:
            result.diverged = True
            result.divergence_round = e.round_index
            logger.error("Graine %d abandonnée : %s", seed, e)
            break

        exact = exact_metrics(federation, state.x)
        result.max_dispersion = max(result.max_dispersion, exact.dispersion)
        result.rows.append(
            MetricsRow(
                seed=seed,
                round=k,
                suboptimality=exact.suboptimality,
                dist_sq=exact.dist_sq,
                sampled_count=metrics.sampled_count,
                alpha=metrics.alpha,
                gamma=metrics.gamma,
                cumulative_uplink_bits=ledger.uplink_bits,
            )
        )
    logger.debug("Graine %d : %d rounds, %d bits montants", seed, len(result.rows), ledger.uplink_bits)
    return result


def _run_seed_args(args: tuple) -> SeedResult:
    return run_seed(*args)


def run_experiment(
    config: ExperimentConfig,
    out: IO[str] | None = None,
    *,
    seeds: Iterable[int] | None = None,
    parallel: int = 1,
    divergence_threshold: float = math.inf,
    progress: bool = False,
) -> list[SeedResult]:
    """Résultats dans l'ordre des graines ; CSV écrit sur `out` si fourni."""
    seeds = tuple(config.seeds if seeds is None else seeds)
    jobs = [(config, seed, divergence_threshold) for seed in seeds]
    logger.info(
        "Expérience %s/%s : n=%d m=%d K=%d, %d graine(s)",
        config.algorithm,
        config.sampler,
        config.n,
        config.m,
        config.K,
        len(seeds),
    )

    bar = tqdm(total=len(jobs), desc="graines", unit="graine", disable=not progress)
    results: list[SeedResult] = []
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            # map conserve l'ordre des graines
            for result in pool.map(_run_seed_args, jobs):
                results.append(result)
                bar.update()
    else:
        for job in jobs:
            results.append(_run_seed_args(job))
            bar.update()
    bar.close()

    if out is not None:
        write_csv(results, out)
    return results


def write_csv(results: Iterable[SeedResult], out: IO[str]) -> int:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    count = 0
    for result in results:
        for row in result.rows:
            writer.writerow(row.to_csv_fields())
            count += 1
    return count
