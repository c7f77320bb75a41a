import io

import humanize
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from harness.cli import EXIT_DIVERGENCE, load_config
from harness.models import ExperimentRun, SeedOutcome
from harness.runner import build_federation, run_experiment, write_csv
from optim.oracles import GradientOracleContract
from optim.theory import Theorem, check_global_floor, step_size_caps, theorem_constants


class Command(BaseCommand):
    help = "Lance une expérience (config clé=valeur) et écrit le CSV des métriques"

    def add_arguments(self, parser):
        parser.add_argument("config_file", nargs="?")
        parser.add_argument("--config", dest="config_path")
        parser.add_argument("--out", help="Fichier CSV (sortie standard par défaut)")
        parser.add_argument("--seeds", help="ex. 0-19 ou 1,4,7")
        parser.add_argument(
            "--parallel", type=int, default=getattr(settings, "SIM_DEFAULT_PARALLEL", 1)
        )
        parser.add_argument("--no-record", action="store_true", help="Ne pas enregistrer en base")

    def _warn_global_floor(self, config):
        if config.algorithm != "fedavg":
            return
        federation = build_federation(config, config.seeds[0])
        contract = GradientOracleContract(config.M, config.sigma2)
        gamma = 1.0 if config.sampler == "full" else config.m / config.n
        constants = theorem_constants(federation, contract, config.R)
        for theorem in (Theorem.FEDAVG_CVX, Theorem.FEDAVG_NCVX):
            check_global_floor(step_size_caps(theorem, constants, gamma), config.eta_g)

    def handle(self, *args, **options):
        config = load_config(options["config_path"] or options["config_file"], options["seeds"])
        self._warn_global_floor(config)
        out_path = options["out"]
        run = None
        if not options["no_record"]:
            run = ExperimentRun.objects.create(
                config_text=config.to_text(),
                algorithm=config.algorithm,
                sampler=config.sampler,
                seeds=",".join(str(s) for s in config.seeds),
                status=ExperimentRun.Status.RUNNING,
                output_path=out_path or "",
            )

        try:
            results = run_experiment(
                config,
                parallel=max(1, options["parallel"]),
                divergence_threshold=getattr(settings, "SIM_DIVERGENCE_THRESHOLD", 1e12),
                progress=options["verbosity"] >= 1 and bool(out_path),
            )
            if out_path:
                with open(out_path, "w", encoding="utf-8", newline="") as fh:
                    rows = write_csv(results, fh)
            else:
                buffer = io.StringIO()
                rows = write_csv(results, buffer)
                self.stdout.write(buffer.getvalue(), ending="")
        except Exception as e:
            if run is not None:
                run.status = ExperimentRun.Status.FAILED
                run.error_message = str(e)
                run.save()
            raise

        diverged = [r.seed for r in results if r.diverged]
        total_bits = sum(r.total_bits for r in results)
        if run is not None:
            SeedOutcome.objects.bulk_create(
                SeedOutcome(
                    run=run,
                    seed=r.seed,
                    diverged=r.diverged,
                    divergence_round=r.divergence_round,
                    final_suboptimality=None if r.diverged else r.final_suboptimality,
                    uplink_bits=r.total_bits,
                    bits_to_target=r.bits_to_target(config.target),
                    max_dispersion=r.max_dispersion,
                )
                for r in results
            )
            run.rows_written = rows
            run.total_uplink_bits = total_bits
            run.status = ExperimentRun.Status.DIVERGED if diverged else ExperimentRun.Status.COMPLETED
            run.save()

        self.stderr.write(
            f"{rows} lignes, {humanize.naturalsize(total_bits / 8)} montants "
            f"({len(results)} graine(s))"
        )
        if diverged:
            raise CommandError(
                f"Divergence pour les graines {', '.join(map(str, diverged))}",
                returncode=EXIT_DIVERGENCE,
            )
