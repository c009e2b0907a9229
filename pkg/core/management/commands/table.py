# core/management/commands/table.py
from django.conf import settings

from core.models import TruthKind
from core.services.harness import correlation_table, scenario_for
from core.services.reporting import format_table, run_metadata, write_csv

from ._base import ExperimentCommand, to_estimator_list, to_int, to_int_list, to_truth


class Command(ExperimentCommand):
    help = "Pearson correlation of each metric with d_nsnr, one column per (N, estimator)."

    def add_options(self, parser):
        self.option(parser, "--scenario", to_truth, lambda: TruthKind.IDENTITY, "identity | lowrank | random")
        self.option(parser, "--n-samples", to_int_list, lambda: [50, 100, 150, 200], "comma-separated N values")
        self.option(parser, "--lambda", to_estimator_list, lambda: to_estimator_list("0"),
                    "comma-separated loading values and/or 'lw'")
        self.option(parser, "--trials", to_int, lambda: settings.NSNR_TRIALS, "trials per column")
        self.option(parser, "--seed", to_int, lambda: settings.NSNR_SEED, "master seed")
        self.option(parser, "--dim", to_int, lambda: settings.NSNR_DIM, "dimension D")
        self.option(parser, "--out", str, lambda: None, "CSV output path")

    def run(self, opts):
        specs = [
            scenario_for(opts["scenario"], n, estimator, opts["trials"], opts["seed"], opts["dim"])
            for n in opts["n_samples"]
            for estimator in opts["lambda"]
        ]
        table = correlation_table(specs, workers=opts["workers"])
        self.stdout.write(f"Pearson correlation with d_nsnr ({opts['scenario'].label}, {opts['trials']} trials)")
        self.stdout.write(format_table(table))
        if opts["out"]:
            write_csv(table, opts["out"], run_metadata(opts["seed"], self.config_of(opts)), index=True)
            self.stdout.write(self.style.SUCCESS(f"wrote {opts['out']}"))
