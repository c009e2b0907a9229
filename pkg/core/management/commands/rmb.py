# core/management/commands/rmb.py
from django.conf import settings

from core.services.harness import rmb_experiment

from ._base import ExperimentCommand, to_int


class Command(ExperimentCommand):
    help = "Mean fixed-target NSNR of the sample covariance (rule of thumb: N = 2D keeps about half)."

    def add_options(self, parser):
        self.option(parser, "--dim", to_int, lambda: settings.NSNR_DIM, "dimension D")
        self.option(parser, "--n-samples", to_int, lambda: None, "samples per estimate N (default 2D)")
        self.option(parser, "--trials", to_int, lambda: settings.NSNR_TRIALS, "Monte Carlo trials")
        self.option(parser, "--seed", to_int, lambda: settings.NSNR_SEED, "master seed")

    def run(self, opts):
        n_samples = opts["n_samples"] or 2 * opts["dim"]
        result = rmb_experiment(
            dim=opts["dim"],
            n_samples=n_samples,
            n_trials=opts["trials"],
            master_seed=opts["seed"],
            workers=opts["workers"],
        )
        self.stdout.write(f"D={opts['dim']} N={n_samples} trials={result.n_trials}")
        self.stdout.write(f"  mean NSNR          {result.mean_nsnr:.4f}")
        self.stdout.write(f"  (N-D+2)/(N+1)      {result.reference:.4f}")
