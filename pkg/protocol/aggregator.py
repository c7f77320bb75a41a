"""
Agrégation sécurisée modélisée comme un sommateur de confiance en mémoire.

Seule la forme du flux d'information est reproduite : les messages
individuels restent dans l'agrégateur, le maître n'obtient que leur somme.
"""

from __future__ import annotations

import logging
import math

from .exceptions import AggregationError
from .messages import Message

logger = logging.getLogger(__name__)


class SecureAggregator:
    def __init__(self) -> None:
        self.__payloads: list[tuple[float, ...]] = []

    @property
    def contributors(self) -> int:
        """Nombre de messages en attente (pas leur contenu)."""
        return len(self.__payloads)

    def receive(self, message: Message) -> None:
        if not message.is_uplink:
            raise AggregationError(
                f"Seuls les clients alimentent l'agrégateur (reçu de {message.sender})"
            )
        if self.__payloads and len(message.payload) != len(self.__payloads[0]):
            raise AggregationError(
                f"Charge de taille {len(message.payload)} au lieu de {len(self.__payloads[0])}"
            )
        self.__payloads.append(message.payload)

    def total(self) -> tuple[float, ...]:
        """Somme composante par composante, puis vidage."""
        if not self.__payloads:
            raise AggregationError("Aucun message à agréger")
        sums = tuple(math.fsum(column) for column in zip(*self.__payloads))
        logger.debug("Agrégat de %d messages", len(self.__payloads))
        self.__payloads = []
        return sums
