# core/models.py: enumerations shared by services and commands (no tables)
from django.db import models


class MetricKind(models.TextChoices):
    NSNR_DIST = "nsnr", "NSNR"
    KL = "kl", "KL"
    SYM_KL = "symkl", "symKL"
    FROBENIUS = "frobenius", "Frobenius"
    SPECTRAL = "spectral", "Spectral Norm"

    @property
    def column(self):
        """Name of the TrialRecord field holding this metric."""
        return f"d_{self.value}"


class EstimatorKind(models.TextChoices):
    SAMPLE = "sample", "Sample covariance"
    DIAG_LOAD = "diag_load", "Diagonal loading"
    LEDOIT_WOLF = "ledoit_wolf", "Ledoit-Wolf"
    KNOWLEDGE_AIDED = "knowledge_aided", "Knowledge-aided shrinkage"


class TruthKind(models.TextChoices):
    IDENTITY = "identity", "Identity"
    APPROX_LOW_RANK = "lowrank", "Approximately low rank"
    RANDOM_LOW_RANK_PLUS_WISHART = "random", "Low rank plus Wishart"


# Rows of the correlation tables, in the order the tables print them.
COMPETING_METRICS = [
    MetricKind.FROBENIUS,
    MetricKind.SPECTRAL,
    MetricKind.KL,
    MetricKind.SYM_KL,
]
