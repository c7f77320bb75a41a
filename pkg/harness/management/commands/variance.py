from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand

from harness.cli import parse_budget, read_text, validation_error
from sampling.core import estimator_variance, improvement_factors
from sampling.exceptions import SamplingError
from sampling.validators import validate_norms_text, validate_probs_text


class Command(BaseCommand):
    help = "Variance de l'estimateur pour (normes, probabilités), avec α et γ"

    def add_arguments(self, parser):
        parser.add_argument("norms_file")
        parser.add_argument("probs_file")
        parser.add_argument("--m", help="Budget ; par défaut Σp arrondi au supérieur")

    def handle(self, *args, **options):
        try:
            norms = validate_norms_text(read_text(options["norms_file"]))
            m = parse_budget(options["m"]) if options["m"] else None
            probs = validate_probs_text(read_text(options["probs_file"]), m)
            if probs.n != norms.n:
                raise validation_error(f"{norms.n} normes pour {probs.n} probabilités")
            value = estimator_variance(norms, probs)
            alpha, gamma = improvement_factors(norms, min(probs.budget, norms.n))
        except (ValidationError, SamplingError) as e:
            raise validation_error(e)
        self.stdout.write(f"{round(value, 6)} alpha={alpha:.6f} gamma={gamma:.6f}")
