"""
Fichier de configuration d'expérience : texte plat `clé=valeur`.

Le formulaire Django valide chaque champ ; une clé inconnue est une erreur.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from django import forms
from django.conf import settings
from django.core.exceptions import ValidationError

from .exceptions import ConfigFileError
from .referentiels import ALGORITHMS, SAMPLERS, TASKS, WEIGHT_SCHEME_CHOICES


def parse_config_text(text: str) -> dict[str, str]:
    """Lignes `clé=valeur`, commentaires `#`, lignes vides ignorées."""
    values: dict[str, str] = {}
    for number, raw in enumerate((text or "").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigFileError(f"Ligne {number} : 'clé=valeur' attendu", number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigFileError(f"Ligne {number} : clé vide", number)
        if key in values:
            raise ConfigFileError(f"Ligne {number} : clé {key!r} répétée", number)
        values[key] = value
    return values


def parse_seed_list(value: str) -> tuple[int, ...]:
    """'0-19', '1,4,7' ou un mélange des deux ('0-3,10')."""
    seeds: list[int] = []
    for chunk in (value or "").replace(" ", "").split(","):
        if not chunk:
            continue
        try:
            if "-" in chunk:
                start, end = (int(part) for part in chunk.split("-", 1))
                if end < start:
                    raise ValueError
                seeds.extend(range(start, end + 1))
            else:
                seeds.append(int(chunk))
        except ValueError:
            raise ValidationError(f"Graines illisibles : {chunk!r}", code="invalid_seeds")
    if not seeds:
        raise ValidationError("Au moins une graine est requise", code="invalid_seeds")
    if any(s < 0 for s in seeds):
        raise ValidationError("Graines négatives interdites", code="invalid_seeds")
    if len(set(seeds)) != len(seeds):
        raise ValidationError("Graines répétées", code="invalid_seeds")
    return tuple(seeds)


# === CONFIG FORM ===
class ExperimentConfigForm(forms.Form):
    algorithm = forms.ChoiceField(choices=ALGORITHMS, label="Algorithme")
    sampler = forms.ChoiceField(choices=SAMPLERS, label="Échantillonneur")
    task = forms.ChoiceField(choices=TASKS, required=False, label="Tâche")
    n = forms.IntegerField(min_value=1, label="Nombre de clients")
    m = forms.IntegerField(min_value=1, label="Budget m")
    d = forms.IntegerField(min_value=1, label="Dimension")
    R = forms.IntegerField(min_value=1, required=False, label="Pas locaux")
    K = forms.IntegerField(min_value=1, label="Rounds")
    eta = forms.FloatField(required=False)
    eta_l = forms.FloatField(required=False)
    eta_g = forms.FloatField(required=False)
    M = forms.FloatField(min_value=0, required=False)
    sigma2 = forms.FloatField(min_value=0, required=False)
    j_max = forms.IntegerField(min_value=1, required=False)
    float_width = forms.IntegerField(min_value=1, required=False)
    count_downlink = forms.BooleanField(required=False)
    heterogeneity = forms.FloatField(min_value=0, required=False)
    weight_scheme = forms.ChoiceField(choices=WEIGHT_SCHEME_CHOICES, required=False)
    samples_per_client = forms.IntegerField(min_value=1, required=False)
    lam = forms.FloatField(min_value=0, required=False)
    batch_size = forms.IntegerField(min_value=1, required=False)
    seeds = forms.CharField(required=False)
    target = forms.FloatField(required=False)

    DEFAULTS = {
        "task": "quadratic",
        "R": 1,
        "eta_g": 1.0,
        "M": 0.0,
        "sigma2": 0.0,
        "j_max": 4,
        "heterogeneity": 0.0,
        "weight_scheme": "uniform",
        "samples_per_client": 50,
        "lam": 0.1,
        "target": 1e-2,
    }

    def __init__(self, data=None, *args, **kwargs):
        super().__init__(data, *args, **kwargs)
        self.unknown_keys = sorted(set(data or {}) - set(self.fields))

    def clean_seeds(self):
        return parse_seed_list(self.cleaned_data.get("seeds") or "0")

    def clean_target(self):
        target = self.cleaned_data.get("target")
        if target is not None and not target > 0:
            raise ValidationError("La cible doit être > 0", code="invalid_target")
        return target

    def clean(self):
        cleaned = super().clean()
        if self.unknown_keys:
            raise ValidationError(
                "Clés inconnues : %(keys)s",
                code="unknown_key",
                params={"keys": ", ".join(self.unknown_keys)},
            )
        for key, default in self.DEFAULTS.items():
            if cleaned.get(key) in (None, ""):
                cleaned[key] = default
        if cleaned.get("float_width") is None:
            cleaned["float_width"] = getattr(settings, "SIM_FLOAT_WIDTH", 32)
        if "count_downlink" not in self.data:
            cleaned["count_downlink"] = getattr(settings, "SIM_COUNT_DOWNLINK", False)

        n, m = cleaned.get("n"), cleaned.get("m")
        if n is not None and m is not None and m > n:
            self.add_error("m", ValidationError(f"m = {m} dépasse n = {n}", code="budget"))

        algorithm = cleaned.get("algorithm")
        required = ("eta",) if algorithm == "dsgd" else ("eta_l", "eta_g")
        for name in required:
            value = cleaned.get(name)
            if value is None:
                self.add_error(name, ValidationError("Pas requis", code="required"))
            elif not value > 0:
                self.add_error(name, ValidationError("Le pas doit être > 0", code="step"))
        if algorithm == "dsgd" and cleaned.get("R", 1) != 1:
            self.add_error("R", ValidationError("R > 1 réservé à FedAvg", code="local_steps"))
        if cleaned.get("batch_size") is not None and cleaned.get("task") != "logistic":
            self.add_error(
                "batch_size", ValidationError("Mini-lots : tâche logistique uniquement", code="batch")
            )
        return cleaned


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    sampler: str
    n: int
    m: int
    d: int
    K: int
    task: str = "quadratic"
    R: int = 1
    eta: float | None = None
    eta_l: float | None = None
    eta_g: float = 1.0
    M: float = 0.0
    sigma2: float = 0.0
    j_max: int = 4
    float_width: int = 32
    count_downlink: bool = False
    heterogeneity: float = 0.0
    weight_scheme: str = "uniform"
    samples_per_client: int = 50
    lam: float = 0.1
    batch_size: int | None = None
    seeds: tuple[int, ...] = (0,)
    target: float = 1e-2

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        data = {key: "" if value is None else str(value) for key, value in values.items()}
        if "seeds" in values and not isinstance(values["seeds"], str):
            data["seeds"] = ",".join(str(s) for s in values["seeds"])
        form = ExperimentConfigForm(data)
        if not form.is_valid():
            raise ValidationError(form.errors.as_text(), code="invalid_config")
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in form.cleaned_data.items() if k in names})

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        try:
            values = parse_config_text(text)
        except ConfigFileError as e:
            raise ValidationError(str(e), code="config_syntax")
        return cls.from_mapping(values)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.name == "seeds":
                value = ",".join(str(s) for s in value)
            elif isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{f.name}={value}")
        return "\n".join(lines) + "\n"

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    @property
    def step_name(self) -> str:
        """Pas réglé par `tune` : η pour DSGD, η_l pour FedAvg."""
        return "eta" if self.algorithm == "dsgd" else "eta_l"

    @property
    def step(self) -> float:
        return getattr(self, self.step_name)

    def with_step(self, step: float) -> "ExperimentConfig":
        return self.replace(**{self.step_name: float(step)})
