from django.core.management.base import BaseCommand

from harness.cli import validation_error
from optim.exceptions import OptimError
from optim.theory import ProblemConstants, Theorem, step_size_caps

CONSTANT_KEYS = {
    "L": float,
    "mu": float,
    "W": float,
    "M": float,
    "R": int,
    "sigma2": float,
    "sum_sq_weights": float,
}


class Command(BaseCommand):
    help = "Pas admissibles des garanties de convergence (clé=valeur : L, W, M, R, gamma, …)"

    def add_arguments(self, parser):
        parser.add_argument("theorem", choices=Theorem.values)
        parser.add_argument("constants", nargs="*", help="ex. L=2 gamma=1 M=0")

    def handle(self, *args, **options):
        values = {}
        gamma = 1.0
        for item in options["constants"]:
            key, sep, raw = item.partition("=")
            if not sep:
                raise validation_error(f"'clé=valeur' attendu : {item!r}")
            try:
                if key == "gamma":
                    gamma = float(raw)
                elif key in CONSTANT_KEYS:
                    values[key] = CONSTANT_KEYS[key](raw)
                else:
                    raise validation_error(f"Constante inconnue : {key!r}")
            except ValueError:
                raise validation_error(f"Valeur illisible pour {key} : {raw!r}")
        if "L" not in values:
            raise validation_error("L est requis")
        try:
            caps = step_size_caps(options["theorem"], ProblemConstants(**values), gamma)
        except OptimError as e:
            raise validation_error(e)
        line = f"{caps.eta_cap:.6g}"
        if caps.eta_g_floor is not None:
            line += f" eta_g_floor={caps.eta_g_floor:.6g}"
        self.stdout.write(line)
