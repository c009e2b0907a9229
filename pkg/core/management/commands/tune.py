# core/management/commands/tune.py
from django.conf import settings

from core.models import EstimatorKind, TruthKind
from core.services.estimators import EstimatorSpec
from core.services.harness import TuneSpec, default_grid, scenario_for, tune_lambda
from core.services.reporting import format_table, run_metadata, write_csv

from ._base import ExperimentCommand, to_float, to_int


class Command(ExperimentCommand):
    help = "Choose the knowledge-aided shrinkage weight by minimising each metric."

    def add_options(self, parser):
        self.option(parser, "--grid-step", to_float, lambda: settings.NSNR_LAMBDA_STEP, "lambda grid step")
        self.option(parser, "--trials", to_int, lambda: settings.NSNR_TRIALS, "random truths")
        self.option(parser, "--n-samples", to_int, lambda: 50, "samples per estimate N")
        self.option(parser, "--seed", to_int, lambda: settings.NSNR_SEED, "master seed")
        self.option(parser, "--dim", to_int, lambda: settings.NSNR_DIM, "dimension D")
        self.option(parser, "--out", str, lambda: None, "CSV output path")

    def run(self, opts):
        base = scenario_for(
            TruthKind.RANDOM_LOW_RANK_PLUS_WISHART,
            opts["n_samples"],
            EstimatorSpec(kind=EstimatorKind.KNOWLEDGE_AIDED),
            opts["trials"], opts["seed"], opts["dim"],
        )
        result = tune_lambda(TuneSpec(base=base, lambda_grid=default_grid(opts["grid_step"])),
                             workers=opts["workers"])
        self.stdout.write(f"lambda* and mean worst-case NSNR ({opts['trials']} random truths, N={opts['n_samples']})")
        self.stdout.write(format_table(result.table))
        if opts["out"]:
            write_csv(result.table, opts["out"], run_metadata(opts["seed"], self.config_of(opts)), index=True)
            self.stdout.write(self.style.SUCCESS(f"wrote {opts['out']}"))
