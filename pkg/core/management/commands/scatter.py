# core/management/commands/scatter.py
from django.conf import settings

from core.models import TruthKind
from core.services.harness import export_scatter, run_trials, scenario_for
from core.services.reporting import run_metadata

from ._base import ExperimentCommand, to_estimator, to_int, to_truth


class Command(ExperimentCommand):
    help = "Per-trial metric values for scatter plots (plotting is left to other tools)."

    def add_options(self, parser):
        self.option(parser, "--scenario", to_truth, lambda: TruthKind.IDENTITY, "identity | lowrank | random")
        self.option(parser, "--n-samples", to_int, lambda: 50, "samples per estimate N")
        self.option(parser, "--lambda", to_estimator, lambda: to_estimator("0"), "loading value or 'lw'")
        self.option(parser, "--trials", to_int, lambda: settings.NSNR_TRIALS, "Monte Carlo trials")
        self.option(parser, "--seed", to_int, lambda: settings.NSNR_SEED, "master seed")
        self.option(parser, "--dim", to_int, lambda: settings.NSNR_DIM, "dimension D")
        self.option(parser, "--out", str, lambda: "scatter.csv", "CSV output path")

    def run(self, opts):
        spec = scenario_for(opts["scenario"], opts["n_samples"], opts["lambda"],
                            opts["trials"], opts["seed"], opts["dim"])
        records = run_trials(spec, workers=opts["workers"])
        export_scatter(records, opts["out"], run_metadata(opts["seed"], self.config_of(opts)))
        self.stdout.write(self.style.SUCCESS(f"wrote {len(records)} trials to {opts['out']}"))
