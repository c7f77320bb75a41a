"""
Comptage des bits montants.

Convention : chaque scalaire client -> maître coûte `float_width` bits ;
les diffusions du maître sont gratuites sauf si `count_downlink` est activé.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .messages import BROADCAST, MASTER, Variant
from .rounds import RoundTranscript

logger = logging.getLogger(__name__)


def _check_width(float_width: int) -> int:
    if isinstance(float_width, bool) or int(float_width) != float_width or float_width < 1:
        raise ValueError(f"Largeur de flottant invalide : {float_width!r}")
    return int(float_width)


@dataclass(frozen=True)
class RoundBits:
    round: int
    update_bits: int
    overhead_bits: int
    downlink_bits: int = 0

    @property
    def uplink_bits(self) -> int:
        return self.update_bits + self.overhead_bits

    @property
    def counted_bits(self) -> int:
        return self.uplink_bits + self.downlink_bits


def account_bits(
    transcript: RoundTranscript, float_width: int = 32, count_downlink: bool = False
) -> RoundBits:
    width = _check_width(float_width)
    update = overhead = downlink = 0
    for msg in transcript.messages:
        if msg.is_uplink:
            if msg.variant == Variant.UPDATE_SUBMISSION:
                update += msg.scalars
            else:
                overhead += msg.scalars
        elif count_downlink and msg.sender == MASTER:
            recipients = transcript.n if msg.recipient == BROADCAST else 1
            downlink += msg.scalars * recipients
    return RoundBits(transcript.round, update * width, overhead * width, downlink * width)


@dataclass
class BitLedger:
    float_width: int = 32
    count_downlink: bool = False
    per_round: list[RoundBits] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.float_width = _check_width(self.float_width)

    def charge(self, transcript: RoundTranscript) -> RoundBits:
        delta = account_bits(transcript, self.float_width, self.count_downlink)
        transcript.ledger_delta = delta
        self.per_round.append(delta)
        logger.debug(
            "Round %d : %d bits de mises à jour, %d bits de contrôle",
            delta.round,
            delta.update_bits,
            delta.overhead_bits,
        )
        return delta

    @property
    def uplink_bits(self) -> int:
        return sum(delta.uplink_bits for delta in self.per_round)

    @property
    def overhead_bits(self) -> int:
        return sum(delta.overhead_bits for delta in self.per_round)

    @property
    def downlink_bits(self) -> int:
        return sum(delta.downlink_bits for delta in self.per_round)

    @property
    def counted_bits(self) -> int:
        return self.uplink_bits + self.downlink_bits
