"""
Rounds DSGD et FedAvg avec tirage de clients.

FedAvg : chaque client transmet S_i, somme de ses R gradients locaux
(Δy_i = η_l·S_i), et le maître applique x ← x − η_g·η_l·G. Avec R = 1 et
η_g = 1 le calcul coïncide bit à bit avec DSGD de pas η_l.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from protocol.ledger import BitLedger, RoundBits, account_bits
from protocol.rounds import (
    MODES,
    RoundTranscript,
    broadcast_model,
    run_sampling_round,
    submit_updates,
)
from protocol.streams import RoundStream
from sampling.core import improvement_factors

from .exceptions import DivergenceError, OptimError
from .oracles import GradientOracleContract, client_gradient

logger = logging.getLogger(__name__)

EXACT = GradientOracleContract()


@dataclass(frozen=True)
class ModelState:
    x: np.ndarray
    round: int = 0

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=float, copy=True).ravel()
        x.setflags(write=False)
        object.__setattr__(self, "x", x)


@dataclass(frozen=True)
class RoundMetrics:
    round: int
    sampled_count: int
    alpha: float | None
    gamma: float | None
    iterations_used: int
    bits: RoundBits
    degenerate: bool = False


def _check_sampler(sampler_kind: str) -> None:
    if sampler_kind not in MODES:
        raise OptimError(f"Échantillonneur inconnu : {sampler_kind!r} (choix : {', '.join(MODES)})")


def _check_positive(**steps: float) -> None:
    for name, value in steps.items():
        if not value > 0:
            raise OptimError(f"{name} doit être > 0 (reçu {value!r})")


def _sampled_step(
    state: ModelState,
    federation,
    updates: np.ndarray,
    sampler_kind: str,
    m: int,
    step: float,
    stream: RoundStream,
    j_max: int,
    ledger: BitLedger | None,
    divergence_threshold: float,
) -> tuple[ModelState, RoundTranscript, RoundMetrics]:
    k = state.round + 1
    if not np.all(np.isfinite(updates)):
        raise DivergenceError(f"Gradient non fini au round {k}", k)
    weights = federation.weights
    norms = weights * np.linalg.norm(updates, axis=1)
    transcript = run_sampling_round(sampler_kind, norms, m, stream, j_max)
    broadcast_model(transcript, state.x)
    G = submit_updates(transcript, list(updates), weights)
    x = state.x - step * G
    if not np.all(np.isfinite(x)) or np.linalg.norm(x) > divergence_threshold:
        logger.warning("Divergence au round %s (seuil %s)", k, divergence_threshold)
        raise DivergenceError(f"Divergence au round {k} (‖x‖ = {np.linalg.norm(x):.3e})", k)

    if sampler_kind == "full":
        alpha = gamma = None
    else:
        alpha, gamma = improvement_factors(norms, min(m, federation.n))
    bits = ledger.charge(transcript) if ledger is not None else account_bits(transcript)
    metrics = RoundMetrics(
        round=k,
        sampled_count=transcript.selection.size,
        alpha=alpha,
        gamma=gamma,
        iterations_used=transcript.iterations_used or 0,
        bits=bits,
        degenerate=transcript.degenerate,
    )
    return ModelState(x, k), transcript, metrics


def dsgd_round(
    state: ModelState,
    federation,
    sampler_kind: str,
    m: int,
    eta: float,
    stream: RoundStream,
    *,
    contract: GradientOracleContract = EXACT,
    j_max: int = 4,
    ledger: BitLedger | None = None,
    divergence_threshold: float = np.inf,
) -> tuple[ModelState, RoundTranscript, RoundMetrics]:
    """x ← x − η·Σ_{i∈S}(w_i/p_i)·g_i."""
    _check_sampler(sampler_kind)
    _check_positive(eta=eta)
    updates = np.array(
        [
            client_gradient(task, state.x, contract, stream.client(i))
            for i, task in enumerate(federation.clients)
        ]
    )
    return _sampled_step(
        state, federation, updates, sampler_kind, m, eta, stream, j_max, ledger, divergence_threshold
    )


def local_gradient_sum(
    task, x: np.ndarray, R: int, eta_l: float, contract: GradientOracleContract, rng
) -> np.ndarray:
    """S = Σ_r g(y_r), y_0 = x, y_{r+1} = x − η_l·S_r."""
    total = None
    y = x
    for _ in range(R):
        g = client_gradient(task, y, contract, rng)
        total = g if total is None else total + g
        y = x - eta_l * total
    return total


def fedavg_round(
    state: ModelState,
    federation,
    sampler_kind: str,
    m: int,
    R: int,
    eta_l: float,
    eta_g: float,
    stream: RoundStream,
    *,
    contract: GradientOracleContract = EXACT,
    j_max: int = 4,
    ledger: BitLedger | None = None,
    divergence_threshold: float = np.inf,
) -> tuple[ModelState, RoundTranscript, RoundMetrics]:
    _check_sampler(sampler_kind)
    _check_positive(eta_l=eta_l, eta_g=eta_g)
    if isinstance(R, bool) or int(R) != R or R < 1:
        raise OptimError(f"R doit être un entier ≥ 1 (reçu {R!r})")
    updates = np.array(
        [
            local_gradient_sum(task, state.x, int(R), eta_l, contract, stream.client(i))
            for i, task in enumerate(federation.clients)
        ]
    )
    return _sampled_step(
        state,
        federation,
        updates,
        sampler_kind,
        m,
        eta_g * eta_l,
        stream,
        j_max,
        ledger,
        divergence_threshold,
    )
