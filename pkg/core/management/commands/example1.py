# core/management/commands/example1.py
import math

from core.services.metrics import evaluate_all, matrix_ratio, swap_pair

from ._base import ExperimentCommand, to_float


class Command(ExperimentCommand):
    help = "Print every metric for the diag(1, a, a^2) vs diag(1, a^2, a) counterexample."

    def add_options(self, parser):
        self.option(parser, "--alpha", to_float, lambda: 0.1, "alpha in (0, 1)")

    def run(self, opts):
        alpha = opts["alpha"]
        C, Chat = swap_pair(alpha)
        record = evaluate_all(C, Chat)
        _, spectrum = matrix_ratio(C, Chat)

        self.stdout.write(f"alpha = {alpha:g}")
        self.stdout.write(f"  kappa(Q)      {spectrum.kappa:.17g}")
        for name in ("d_frobenius", "d_spectral", "d_kl", "d_symkl", "d_nsnr", "nsnr_min"):
            self.stdout.write(f"  {name:<13} {getattr(record, name):.17g}")
        self.stdout.write(f"  log((1+a^2)/(2a)) = {math.log((1 + alpha ** 2) / (2 * alpha)):.17g}")
        self.stdout.write(f"  worst-case SNR loss = {100 * (1 - record.nsnr_min):.2f}%")
