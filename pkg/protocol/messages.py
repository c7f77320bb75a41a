"""
Messages échangés pendant un round et leur format de journal.

Une ligne par message, champs séparés par des tabulations :
round, émetteur, variante, charge utile (liste JSON), destinataire.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from django.db import models

from .exceptions import TranscriptFormatError

MASTER = "master"
AGGREGATOR = "aggregator"
BROADCAST = "*"
CLIENT_PREFIX = "client:"


class Variant(models.TextChoices):
    NORM_REPORT = "NormReport", "Norme pondérée u_i"
    NORM_SUM_BROADCAST = "NormSumBroadcast", "Diffusion de Σu_i"
    PROBABILITY_BROADCAST = "ProbabilityBroadcast", "Envoi de p_i (OCS)"
    STATUS_REPORT = "StatusReport", "Statut (1, p_i) ou (0, 0)"
    STATUS_AGGREGATE = "StatusAggregate", "Somme (I, P) des statuts"
    CALIBRATION_BROADCAST = "CalibrationBroadcast", "Diffusion de C"
    # FedAvg : U_i = S_i, somme des R gradients locaux ; Δy_i = η_l·S_i n'est pas transmis
    UPDATE_SUBMISSION = "UpdateSubmission", "Mise à jour w_i/p_i·U_i"
    MODEL_BROADCAST = "ModelBroadcast", "Diffusion du modèle x"


# Messages clients -> maître qui ne sont pas la mise à jour elle-même
OVERHEAD_VARIANTS = frozenset({Variant.NORM_REPORT, Variant.STATUS_REPORT})


def client_id(index: int) -> str:
    return f"{CLIENT_PREFIX}{int(index)}"


def client_index(sender: str) -> int:
    if not sender.startswith(CLIENT_PREFIX):
        raise ValueError(f"Émetteur non client : {sender!r}")
    return int(sender[len(CLIENT_PREFIX):])


def status_payload(probability: float) -> tuple[float, float]:
    """t_i = (1, p_i) si le client n'est pas saturé, (0, 0) sinon."""
    if probability < 1.0:
        return (1.0, float(probability))
    return (0.0, 0.0)


@dataclass(frozen=True)
class Message:
    round: int
    sender: str
    variant: Variant
    payload: tuple[float, ...]
    recipient: str = BROADCAST

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "payload", tuple(float(v) for v in self.payload))

    @property
    def is_uplink(self) -> bool:
        return self.sender.startswith(CLIENT_PREFIX)

    @property
    def scalars(self) -> int:
        return len(self.payload)

    def to_line(self) -> str:
        payload = json.dumps(list(self.payload))
        return f"{self.round}\t{self.sender}\t{self.variant.value}\t{payload}\t{self.recipient}"

    @classmethod
    def from_line(cls, line: str, line_number: int | None = None) -> "Message":
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 5:
            raise TranscriptFormatError(
                f"5 champs attendus, {len(fields)} trouvés", line_number
            )
        round_txt, sender, variant, payload_txt, recipient = fields
        try:
            round_index = int(round_txt)
            variant = Variant(variant)
            payload = json.loads(payload_txt)
        except ValueError as e:
            raise TranscriptFormatError(str(e), line_number)
        if not isinstance(payload, list) or not all(
            isinstance(v, (int, float)) for v in payload
        ):
            raise TranscriptFormatError("Charge utile non numérique", line_number)
        return cls(round_index, sender, variant, tuple(payload), recipient)
