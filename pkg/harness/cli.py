"""
Outils communs aux commandes de gestion : lecture de fichiers et erreurs.

Code de sortie 1 pour une entrée invalide, 2 pour une divergence.
"""

from pathlib import Path

from django.core.exceptions import ValidationError
from django.core.management.base import CommandError

from sampling.validators import validate_budget

from .forms import ExperimentConfig, parse_seed_list

EXIT_VALIDATION = 1
EXIT_DIVERGENCE = 2


def validation_error(message) -> CommandError:
    if isinstance(message, ValidationError):
        message = "; ".join(message.messages)
    return CommandError(str(message), returncode=EXIT_VALIDATION)


def read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise validation_error(f"Lecture impossible de {path} : {e}")


def load_config(path: str | None, seeds: str | None = None) -> ExperimentConfig:
    if not path:
        raise validation_error("Fichier de configuration requis (--config)")
    try:
        config = ExperimentConfig.from_text(read_text(path))
        if seeds:
            config = config.replace(seeds=parse_seed_list(seeds))
    except ValidationError as e:
        raise validation_error(e)
    return config


def parse_float_list(value: str, label: str) -> list[float]:
    try:
        values = [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise validation_error(f"{label} illisible : {value!r}")
    if not values:
        raise validation_error(f"{label} vide")
    return values


def parse_budget(value: str) -> int:
    try:
        return validate_budget(int(value))
    except (TypeError, ValueError):
        raise validation_error(f"Budget m invalide : {value!r} (entier ≥ 1 attendu)")
    except ValidationError as e:
        raise validation_error(e)
