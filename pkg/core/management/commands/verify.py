# core/management/commands/verify.py
from django.conf import settings
from django.core.management.base import CommandError

from core.services.harness import verify_pairs
from core.services.oracle import OracleConfig

from ._base import ExperimentCommand, to_int


class Command(ExperimentCommand):
    help = "Check the closed-form worst-case NSNR and the KL bound on random SPD pairs."

    def add_options(self, parser):
        self.option(parser, "--pairs", to_int, lambda: 100, "number of random SPD pairs")
        self.option(parser, "--dim", to_int, lambda: None, "fixed dimension (default: drawn from 2..10 per pair)")
        self.option(parser, "--seed", to_int, lambda: settings.NSNR_SEED, "master seed")
        self.option(parser, "--oracle-random", to_int, lambda: settings.NSNR_ORACLE_RANDOM,
                    "random directions sampled by the brute-force oracle")

    def run(self, opts):
        report = verify_pairs(
            n_pairs=opts["pairs"],
            master_seed=opts["seed"],
            dim=opts["dim"],
            oracle=OracleConfig.from_settings(n_random=opts["oracle_random"]),
        )
        self.stdout.write(f"pairs checked: {report.pairs}")
        for name, limit in report.LIMITS.items():
            value = getattr(report, name)
            line = f"  {name:<20} max={value:.3e}  limit={limit:.0e}"
            self.stdout.write(self.style.ERROR(line) if value > limit else line)
        if not report.ok:
            raise CommandError(f"violations: {', '.join(report.violations)}")
        self.stdout.write(self.style.SUCCESS("all checks passed"))
