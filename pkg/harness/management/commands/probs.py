from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand

from harness.cli import parse_budget, read_text, validation_error
from sampling.core import aocs_probabilities, ocs_probabilities
from sampling.exceptions import SamplingError
from sampling.validators import validate_norms_text


class Command(BaseCommand):
    help = "Affiche les probabilités d'inclusion OCS ou AOCS pour un fichier de normes"

    def add_arguments(self, parser):
        parser.add_argument("norms_file", help="Normes w_i‖U_i‖ séparées par des blancs")
        parser.add_argument("m", help="Budget m (entier ≥ 1)")
        parser.add_argument("--method", choices=["ocs", "aocs"], default="ocs")
        parser.add_argument("--j-max", type=int, default=4, dest="j_max")

    def handle(self, *args, **options):
        try:
            norms = validate_norms_text(read_text(options["norms_file"]))
            m = parse_budget(options["m"])
            if options["method"] == "aocs":
                probs, used = aocs_probabilities(norms, m, options["j_max"])
                self.stderr.write(f"itérations : {used}")
            else:
                probs = ocs_probabilities(norms, m)
        except (ValidationError, SamplingError) as e:
            raise validation_error(e)
        self.stdout.write(" ".join(f"{p:.6g}" for p in probs.tolist()))
