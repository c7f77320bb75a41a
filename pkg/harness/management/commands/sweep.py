import humanize
from django.conf import settings
from django.core.management.base import BaseCommand

from harness.analysis import sweep_budget
from harness.cli import load_config, parse_float_list, validation_error


class Command(BaseCommand):
    help = "Sous-optimalité finale et bits montants en fonction du budget m"

    def add_arguments(self, parser):
        parser.add_argument("--config", dest="config_path", required=True)
        parser.add_argument("--m", dest="m_values", required=True, help="ex. 1,2,4,8")
        parser.add_argument("--seeds")
        parser.add_argument(
            "--parallel", type=int, default=getattr(settings, "SIM_DEFAULT_PARALLEL", 1)
        )

    def handle(self, *args, **options):
        config = load_config(options["config_path"], options["seeds"])
        values = parse_float_list(options["m_values"], "Liste de budgets")
        if any(v != int(v) for v in values):
            raise validation_error("Budgets entiers attendus")
        try:
            points = sweep_budget(
                config,
                [int(v) for v in values],
                parallel=max(1, options["parallel"]),
                divergence_threshold=getattr(settings, "SIM_DIVERGENCE_THRESHOLD", 1e12),
            )
        except ValueError as e:
            raise validation_error(e)
        for point in points:
            self.stdout.write(
                f"m={point.m} suboptimality={point.mean_suboptimality:.6g} "
                f"uplink={humanize.naturalsize(point.mean_uplink_bits / 8)} "
                f"diverged={point.diverged_seeds}"
            )
