import math

from django.core.exceptions import ValidationError

from .exceptions import SamplingError
from .vectors import BUDGET_TOL, ProbabilityVector, WeightedNormVector, check_budget


# ==================================
# Fichiers texte de normes / probabilités
# ==================================
def parse_decimal_text(text: str) -> list[float]:
    """Nombres décimaux séparés par des blancs ; ValueError sinon."""
    tokens = (text or "").split()
    if not tokens:
        raise ValueError("Fichier vide : au moins une valeur attendue")
    values = []
    for pos, tok in enumerate(tokens, start=1):
        try:
            values.append(float(tok))
        except ValueError:
            raise ValueError(f"Valeur non décimale en position {pos} : {tok!r}")
    return values


def validate_norms_text(value: str) -> WeightedNormVector:
    """
    Validateur Django qui s'appuie sur la validation du module de calcul.
    """
    try:
        return WeightedNormVector(parse_decimal_text(value))
    except (ValueError, SamplingError) as e:
        raise ValidationError(str(e), code="invalid_norms")


def validate_probs_text(value: str, m: int | None = None) -> ProbabilityVector:
    try:
        probs = parse_decimal_text(value)
        # plus petit budget entier compatible avec Σp
        budget = m if m is not None else max(1, math.ceil(math.fsum(probs) - BUDGET_TOL))
        return ProbabilityVector(probs, budget)
    except (ValueError, SamplingError) as e:
        raise ValidationError(str(e), code="invalid_probs")


def validate_budget(value) -> int:
    try:
        return check_budget(value)
    except (ValueError, TypeError) as e:
        raise ValidationError(str(e), code="invalid_budget")
