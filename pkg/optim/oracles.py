"""
Oracles de gradient stochastique.

Le bruit est gaussien isotrope et atteint exactement le moment d'ordre deux
autorisé : E‖ξ‖² = M‖∇f_i(x)‖² + σ².
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tasks.clients import LogisticClientTask

from .exceptions import OptimError


@dataclass(frozen=True)
class GradientOracleContract:
    M: float = 0.0
    sigma2: float = 0.0
    batch_size: int | None = None

    def __post_init__(self) -> None:
        if not (self.M >= 0 and self.sigma2 >= 0):
            raise OptimError(f"M et σ² doivent être ≥ 0 (M={self.M!r}, σ²={self.sigma2!r})")
        if self.batch_size is not None and self.batch_size < 1:
            raise OptimError(f"Taille de mini-lot invalide : {self.batch_size!r}")

    @property
    def is_exact(self) -> bool:
        return self.M == 0 and self.sigma2 == 0 and self.batch_size is None


def noisy_gradient(
    task, x: np.ndarray, contract: GradientOracleContract, stream: np.random.Generator
) -> np.ndarray:
    """∇f_i(x) + ξ, variance par coordonnée (M‖∇f_i(x)‖² + σ²)/d."""
    grad = task.gradient(x)
    if contract.M == 0 and contract.sigma2 == 0:
        return grad
    scale = math.sqrt((contract.M * float(grad @ grad) + contract.sigma2) / grad.size)
    return grad + stream.normal(0.0, scale, size=grad.size)


def minibatch_gradient(
    task: LogisticClientTask, x: np.ndarray, batch_size: int, stream: np.random.Generator
) -> np.ndarray:
    """Gradient sur un mini-lot tiré sans remise (le lot complet si trop petit)."""
    if batch_size >= task.samples:
        return task.gradient(x)
    rows = stream.choice(task.samples, size=batch_size, replace=False)
    return task.gradient(x, rows=rows)


def client_gradient(
    task, x: np.ndarray, contract: GradientOracleContract, stream: np.random.Generator
) -> np.ndarray:
    if contract.batch_size is not None:
        if not isinstance(task, LogisticClientTask):
            raise OptimError("Mini-lots disponibles uniquement pour les tâches logistiques")
        grad = minibatch_gradient(task, x, contract.batch_size, stream)
        if contract.M == 0 and contract.sigma2 == 0:
            return grad
        scale = math.sqrt((contract.M * float(grad @ grad) + contract.sigma2) / grad.size)
        return grad + stream.normal(0.0, scale, size=grad.size)
    return noisy_gradient(task, x, contract, stream)
