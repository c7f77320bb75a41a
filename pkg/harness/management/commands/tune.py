from django.conf import settings
from django.core.management.base import BaseCommand

from harness.analysis import tune_step_size
from harness.cli import load_config, parse_float_list, validation_error
from harness.referentiels import DEFAULT_STEP_GRID


class Command(BaseCommand):
    help = "Règle le pas (η ou η_l) sur une grille de puissances de deux"

    def add_arguments(self, parser):
        parser.add_argument("--config", dest="config_path", required=True)
        parser.add_argument("--grid", help="Pas séparés par des virgules (2^-1 … 2^-5 par défaut)")
        parser.add_argument("--seeds")
        parser.add_argument(
            "--parallel", type=int, default=getattr(settings, "SIM_DEFAULT_PARALLEL", 1)
        )

    def handle(self, *args, **options):
        config = load_config(options["config_path"], options["seeds"])
        grid = parse_float_list(options["grid"], "Grille") if options["grid"] else DEFAULT_STEP_GRID
        try:
            result = tune_step_size(
                config,
                grid,
                parallel=max(1, options["parallel"]),
                divergence_threshold=getattr(settings, "SIM_DIVERGENCE_THRESHOLD", 1e12),
            )
        except ValueError as e:
            raise validation_error(e)
        for step, score in result.scores.items():
            self.stdout.write(f"{result.step_name}={step:.6g} {score:.6g}")
        self.stdout.write(f"best {result.step_name}={result.best_step:.6g}")
