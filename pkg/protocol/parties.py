"""
Rôles du protocole : clients sans état et maîtres OCS / AOCS.

Le maître AOCS ne reçoit jamais qu'un SecureAggregator : ses méthodes ne
peuvent lire que des sommes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from sampling.core import AOCS_STOP_TOL, calibration_constant, ocs_probabilities
from sampling.vectors import ProbabilityVector

from .aggregator import SecureAggregator
from .exceptions import ProtocolError
from .messages import MASTER, Message, Variant, client_id, client_index, status_payload

logger = logging.getLogger(__name__)


# =========================
# Client
# =========================
@dataclass
class ProtocolClient:
    """État d'un client limité au round courant."""

    index: int
    norm: float
    m: int
    n: int
    probability: float = 0.0

    def norm_report(self, round_index: int) -> Message:
        return Message(round_index, client_id(self.index), Variant.NORM_REPORT, (self.norm,))

    def on_norm_sum(self, total: float) -> None:
        if self.m >= self.n:
            self.probability = 1.0
        elif total == 0:
            self.probability = 0.0
        else:
            self.probability = min(self.m * self.norm / total, 1.0)

    def status_report(self, round_index: int) -> Message:
        return Message(
            round_index,
            client_id(self.index),
            Variant.STATUS_REPORT,
            status_payload(self.probability),
        )

    def on_calibration(self, C: float) -> None:
        if self.probability < 1.0:
            self.probability = min(max(C * self.probability, 0.0), 1.0)


# =========================
# Maîtres
# =========================
class OCSMaster:
    """Variante non privée : le maître voit chaque u_i."""

    def __init__(self, m: int) -> None:
        self.m = m

    def on_norm_reports(self, reports: Sequence[Message]) -> ProbabilityVector:
        ordered = sorted(reports, key=lambda msg: client_index(msg.sender))
        if any(msg.variant != Variant.NORM_REPORT for msg in ordered):
            raise ProtocolError("Le maître OCS attend uniquement des NormReport")
        return ocs_probabilities([msg.payload[0] for msg in ordered], self.m)

    def probability_messages(
        self, round_index: int, probs: ProbabilityVector
    ) -> list[Message]:
        return [
            Message(round_index, MASTER, Variant.PROBABILITY_BROADCAST, (p,), client_id(i))
            for i, p in enumerate(probs.tolist())
        ]


class AOCSMaster:
    def __init__(self, m: int, n: int) -> None:
        self.m = m
        self.n = n
        self.last_status: tuple[float, float] | None = None

    def on_norm_sum(self, channel: SecureAggregator) -> float:
        (total,) = channel.total()
        return total

    def on_status_sum(self, channel: SecureAggregator) -> float | None:
        """C = (m − n + I)/P, ou None quand P = 0 (aucune recalibration possible)."""
        I, P = channel.total()
        self.last_status = (I, P)
        if P == 0:
            logger.debug("P = 0 : arrêt de la recalibration")
            return None
        return calibration_constant(self.m, self.n, I, P)

    @staticmethod
    def is_settled(C: float) -> bool:
        return C <= 1.0 + AOCS_STOP_TOL
