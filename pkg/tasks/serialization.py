"""
Sauvegarde YAML d'une fédération : données des clients et poids.

Les constantes (L, μ, x*, f*, Z_i) sont recalculées au chargement et
comparées aux valeurs enregistrées.
"""

from __future__ import annotations

import logging

import numpy as np
import yaml

from .exceptions import FederationFormatError
from .federation import Federation, logistic_federation, quadratic_federation

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def dump_federation(federation: Federation) -> str:
    document = {
        "version": FORMAT_VERSION,
        "kind": federation.kind,
        "params": federation.params,
        "weights": federation.weights.tolist(),
        "clients": [client.to_dict() for client in federation.clients],
        "constants": {
            "L": federation.L,
            "mu": federation.mu,
            "x_star": federation.x_star.tolist(),
            "f_star": federation.f_star,
            "Z": federation.Z.tolist(),
        },
    }
    return yaml.safe_dump(document, sort_keys=False)


def load_federation(text: str, check_tol: float = 1e-8) -> Federation:
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise FederationFormatError(f"YAML illisible : {e}")
    if not isinstance(document, dict) or document.get("version") != FORMAT_VERSION:
        raise FederationFormatError("Document de fédération non reconnu")
    try:
        kind = document["kind"]
        weights = document["weights"]
        clients = document["clients"]
        params = document.get("params") or {}
        if kind == "quadratic":
            federation = quadratic_federation(
                [c["A"] for c in clients],
                [c["b"] for c in clients],
                weights,
                [c["c"] for c in clients],
                params=params,
            )
        elif kind == "logistic":
            lams = {c["lam"] for c in clients}
            if len(lams) != 1:
                raise FederationFormatError("λ doit être commun à tous les clients")
            federation = logistic_federation(
                [c["X"] for c in clients],
                [c["y"] for c in clients],
                lams.pop(),
                weights,
                params=params,
            )
        else:
            raise FederationFormatError(f"Type de fédération inconnu : {kind!r}")
    except (KeyError, TypeError) as e:
        raise FederationFormatError(f"Champ manquant ou invalide : {e}")

    stored = document.get("constants") or {}
    if "x_star" in stored and not np.allclose(
        federation.x_star, stored["x_star"], rtol=check_tol, atol=check_tol
    ):
        logger.warning("x* recalculé diffère de la valeur enregistrée")
    return federation
