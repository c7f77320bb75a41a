"""
Flux aléatoires indexés par (graine, round, usage, client).

Deux appels avec les mêmes clés rendent des générateurs identiques, quel que
soit l'ordre ou le processus : les résultats ne dépendent pas du parallélisme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Usages réservés (troisième composante de la clé)
COINS = 0
GRADIENT = 1
TASK = 2


@dataclass(frozen=True)
class RoundStream:
    seed: int
    round: int

    def __post_init__(self) -> None:
        if int(self.seed) < 0 or int(self.round) < 0:
            raise ValueError("Graine et round doivent être positifs ou nuls")

    def generator(self, purpose: int, *keys: int) -> np.random.Generator:
        entropy = [int(self.seed), int(self.round), int(purpose), *(int(k) for k in keys)]
        return np.random.default_rng(np.random.SeedSequence(entropy))

    def coins(self) -> np.random.Generator:
        return self.generator(COINS)

    def client(self, index: int, purpose: int = GRADIENT) -> np.random.Generator:
        return self.generator(purpose, index)

    def next(self) -> "RoundStream":
        return RoundStream(self.seed, self.round + 1)
