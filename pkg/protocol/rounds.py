"""
Déroulé d'un round de tirage : OCS, AOCS, uniforme ou participation totale.

Chaque fonction rend un RoundTranscript qui journalise tous les messages
échangés, les probabilités finales et l'ensemble tiré.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from sampling.core import (
    full_probabilities,
    sample_independent,
    snap_probabilities,
    uniform_probabilities,
)
from sampling.vectors import (
    ClientSelection,
    ProbabilityVector,
    as_norms,
    check_budget,
    check_iterations,
)

from .aggregator import SecureAggregator
from .exceptions import ProtocolError, TranscriptFormatError
from .messages import (
    AGGREGATOR,
    MASTER,
    Message,
    Variant,
    client_id,
)
from .parties import AOCSMaster, OCSMaster, ProtocolClient
from .streams import RoundStream

if TYPE_CHECKING:
    from .ledger import RoundBits

logger = logging.getLogger(__name__)

MODES = ("full", "uniform", "ocs", "aocs")
HEADER_PREFIX = "# transcript"


@dataclass
class RoundTranscript:
    mode: str
    round: int
    seed: int
    n: int
    m: int
    j_max: int | None = None
    messages: list[Message] = field(default_factory=list)
    probabilities: ProbabilityVector | None = None
    selection: ClientSelection | None = None
    iterations_used: int = 0
    ledger_delta: "RoundBits | None" = None

    def log(self, message: Message) -> None:
        self.messages.append(message)

    @property
    def degenerate(self) -> bool:
        return bool(self.probabilities is not None and self.probabilities.degenerate)

    @property
    def stream(self) -> RoundStream:
        return RoundStream(self.seed, self.round)

    def of_variant(self, variant: Variant) -> list[Message]:
        return [msg for msg in self.messages if msg.variant == variant]

    # ---------- Journal texte ----------
    def header(self) -> str:
        j_max = "-" if self.j_max is None else str(self.j_max)
        return (
            f"{HEADER_PREFIX} mode={self.mode} round={self.round} seed={self.seed} "
            f"n={self.n} m={self.m} j_max={j_max}"
        )

    def to_lines(self) -> list[str]:
        lines = [self.header()]
        lines.extend(msg.to_line() for msg in self.messages)
        if self.probabilities is not None:
            lines.append("# probabilities " + " ".join(repr(p) for p in self.probabilities.tolist()))
        if self.selection is not None:
            lines.append("# selection " + " ".join(str(i) for i in self.selection))
        lines.append(f"# iterations {self.iterations_used}")
        return lines

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "RoundTranscript":
        lines = [line.rstrip("\n") for line in lines if line.strip()]
        if not lines or not lines[0].startswith(HEADER_PREFIX):
            raise TranscriptFormatError("En-tête de transcript manquant", 1)
        try:
            meta = dict(item.split("=", 1) for item in lines[0][len(HEADER_PREFIX):].split())
            transcript = cls(
                mode=meta["mode"],
                round=int(meta["round"]),
                seed=int(meta["seed"]),
                n=int(meta["n"]),
                m=int(meta["m"]),
                j_max=None if meta["j_max"] == "-" else int(meta["j_max"]),
            )
        except (KeyError, ValueError) as e:
            raise TranscriptFormatError(f"En-tête invalide ({e})", 1)
        if transcript.mode not in MODES:
            raise TranscriptFormatError(f"Mode inconnu : {transcript.mode}", 1)

        probs = None
        for number, line in enumerate(lines[1:], start=2):
            if line.startswith("# probabilities"):
                probs = [float(v) for v in line.split()[2:]]
            elif line.startswith("# selection"):
                picked = frozenset(int(v) for v in line.split()[2:])
                transcript.selection = ClientSelection(picked, transcript.n)
            elif line.startswith("# iterations"):
                transcript.iterations_used = int(line.split()[2])
            else:
                transcript.log(Message.from_line(line, number))
        if probs is not None:
            budget = max(transcript.m, 1)
            transcript.probabilities = ProbabilityVector(
                probs, budget, degenerate=bool(probs) and not any(probs)
            )
        return transcript


# =========================
# Rounds de tirage
# =========================
def run_full_round(n: int, stream: RoundStream) -> RoundTranscript:
    transcript = RoundTranscript("full", stream.round, stream.seed, n, n)
    transcript.probabilities = full_probabilities(n)
    transcript.selection = ClientSelection(frozenset(range(n)), n)
    return transcript


def run_uniform_round(n: int, m: int, stream: RoundStream) -> RoundTranscript:
    m = check_budget(m)
    transcript = RoundTranscript("uniform", stream.round, stream.seed, n, m)
    transcript.probabilities = uniform_probabilities(n, m)
    transcript.selection = sample_independent(transcript.probabilities, stream.coins())
    return transcript


def run_ocs_round(norms, m: int, stream: RoundStream) -> RoundTranscript:
    """Algorithme non privé : le maître reçoit chaque norme individuellement."""
    m = check_budget(m)
    u = as_norms(norms).values
    n = u.size
    transcript = RoundTranscript("ocs", stream.round, stream.seed, n, m)
    master = OCSMaster(m)

    reports = [
        ProtocolClient(i, float(u[i]), m, n).norm_report(stream.round) for i in range(n)
    ]
    for msg in reports:
        transcript.log(msg)
    probs = master.on_norm_reports(reports)
    for msg in master.probability_messages(stream.round, probs):
        transcript.log(msg)

    transcript.probabilities = probs
    transcript.selection = sample_independent(probs, stream.coins())
    return transcript


def run_aocs_round(
    norms,
    m: int,
    j_max: int,
    stream: RoundStream,
    aggregator: SecureAggregator | None = None,
) -> RoundTranscript:
    """Recalibration itérative où le maître ne lit que des sommes."""
    m = check_budget(m)
    j_max = check_iterations(j_max)
    u = as_norms(norms).values
    n = u.size
    r = stream.round
    transcript = RoundTranscript("aocs", r, stream.seed, n, m, j_max)
    channel = aggregator if aggregator is not None else SecureAggregator()
    master = AOCSMaster(m, n)
    clients = [ProtocolClient(i, float(u[i]), m, n) for i in range(n)]

    for client in clients:
        msg = client.norm_report(r)
        transcript.log(msg)
        channel.receive(msg)
    total = master.on_norm_sum(channel)
    transcript.log(Message(r, MASTER, Variant.NORM_SUM_BROADCAST, (total,)))
    for client in clients:
        client.on_norm_sum(total)

    used = 0
    if m < n and total > 0:
        for j in range(1, j_max + 1):
            used = j
            for client in clients:
                msg = client.status_report(r)
                transcript.log(msg)
                channel.receive(msg)
            C = master.on_status_sum(channel)
            transcript.log(
                Message(r, AGGREGATOR, Variant.STATUS_AGGREGATE, master.last_status, MASTER)
            )
            if C is None:
                break
            transcript.log(Message(r, MASTER, Variant.CALIBRATION_BROADCAST, (C,)))
            for client in clients:
                client.on_calibration(C)
            if master.is_settled(C):
                break

    probs = snap_probabilities(np.array([c.probability for c in clients]))
    degenerate = total == 0 and m < n
    if degenerate:
        logger.warning("Round %d : normes toutes nulles, aucun client tiré", r)
    transcript.probabilities = ProbabilityVector(probs, m, degenerate=degenerate)
    transcript.iterations_used = used
    transcript.selection = sample_independent(transcript.probabilities, stream.coins())
    return transcript


def run_sampling_round(
    mode: str, norms, m: int, stream: RoundStream, j_max: int = 4
) -> RoundTranscript:
    n = as_norms(norms).n
    if mode == "full":
        return run_full_round(n, stream)
    if mode == "uniform":
        return run_uniform_round(n, m, stream)
    if mode == "ocs":
        return run_ocs_round(norms, m, stream)
    if mode == "aocs":
        return run_aocs_round(norms, m, j_max, stream)
    raise ProtocolError(f"Mode de tirage inconnu : {mode!r}")


# =========================
# Envoi des mises à jour
# =========================
def broadcast_model(transcript: RoundTranscript, x: np.ndarray) -> None:
    """Diffusion de l'état du modèle, placée en tête du round."""
    transcript.messages.insert(
        0, Message(transcript.round, MASTER, Variant.MODEL_BROADCAST, tuple(np.asarray(x).tolist()))
    )


def submit_updates(
    transcript: RoundTranscript,
    updates: Sequence[np.ndarray],
    weights: Sequence[float],
) -> np.ndarray:
    """G = Σ_{i∈S} (w_i/p_i)·U_i ; vecteur nul si S est vide."""
    if transcript.selection is None or transcript.probabilities is None:
        raise ProtocolError("Round de tirage incomplet")
    if len(updates) != transcript.n or len(weights) != transcript.n:
        raise ProtocolError(
            f"{len(updates)} mises à jour / {len(weights)} poids pour n = {transcript.n}"
        )
    d = int(np.asarray(updates[0]).size)
    if transcript.selection.size == 0:
        return np.zeros(d)

    probs = transcript.probabilities.probs
    channel = SecureAggregator()
    for i in transcript.selection:
        scaled = (float(weights[i]) / probs[i]) * np.asarray(updates[i], dtype=float)
        msg = Message(transcript.round, client_id(i), Variant.UPDATE_SUBMISSION, tuple(scaled.tolist()))
        transcript.log(msg)
        channel.receive(msg)
    return np.array(channel.total())


# =========================
# Relecture
# =========================
def replay_round(transcript: RoundTranscript) -> RoundTranscript:
    """Rejoue la partie tirage à partir des normes journalisées et de la graine."""
    stream = transcript.stream
    if transcript.mode in ("full", "uniform"):
        norms = np.ones(transcript.n)
    else:
        reports = transcript.of_variant(Variant.NORM_REPORT)
        if len(reports) != transcript.n:
            raise TranscriptFormatError(
                f"{len(reports)} NormReport pour n = {transcript.n}"
            )
        norms = [msg.payload[0] for msg in reports]
    return run_sampling_round(
        transcript.mode, norms, transcript.m, stream, transcript.j_max or 1
    )
