# core/services/estimators.py: covariance estimators for the experiments
"""
Sample covariance, diagonal loading, Ledoit–Wolf shrinkage to a scaled
identity and knowledge-aided shrinkage toward a prior mean. The noise model
is zero-mean, so no estimator subtracts a sample mean.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from sklearn.covariance import LedoitWolf

from ..exceptions import ConfigInvalid, DimensionMismatch
from ..models import EstimatorKind
from .spd import SpdMatrix, assert_spd

logger = logging.getLogger(__name__)

# d² at or below this fraction of m² counts as no dispersion
DISPERSION_RTOL = 1e-15


@dataclass(frozen=True, eq=False)
class SampleSet:
    """N noise realizations stored row-wise (N x D)."""
    samples: NDArray[np.float64]

    def __post_init__(self):
        if self.samples.ndim != 2 or self.samples.shape[0] < 1 or self.samples.shape[1] < 1:
            raise DimensionMismatch(f"samples must be an N x D array with N >= 1, got {self.samples.shape}")

    @classmethod
    def from_rows(cls, rows: ArrayLike) -> "SampleSet":
        arr = np.array(rows, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        arr.setflags(write=False)
        return cls(samples=arr)

    @property
    def n(self) -> int:
        return int(self.samples.shape[0])

    @property
    def dim(self) -> int:
        return int(self.samples.shape[1])


@dataclass(frozen=True, eq=False)
class EstimatorSpec:
    kind: EstimatorKind = EstimatorKind.SAMPLE
    lam: float = 0.0
    prior: Optional[SpdMatrix] = None

    def validate(self) -> "EstimatorSpec":
        if self.kind == EstimatorKind.DIAG_LOAD and not self.lam >= 0:
            raise ConfigInvalid(f"diagonal loading needs lambda >= 0, got {self.lam}")
        if self.kind == EstimatorKind.KNOWLEDGE_AIDED and not 0.0 <= self.lam <= 1.0:
            raise ConfigInvalid(f"knowledge-aided shrinkage needs lambda in [0, 1], got {self.lam}")
        return self

    @property
    def label(self) -> str:
        if self.kind == EstimatorKind.LEDOIT_WOLF:
            return "LW"
        if self.kind == EstimatorKind.SAMPLE:
            return "lambda=0"
        return f"lambda={self.lam:g}"


# -----------------------------
# Estimators
# -----------------------------
def sample_covariance(data: SampleSet) -> NDArray[np.float64]:
    X = data.samples
    S = X.T @ X / data.n
    return 0.5 * (S + S.T)


def diagonal_loading(S: ArrayLike, lam: float) -> SpdMatrix:
    if not lam >= 0:
        raise ConfigInvalid(f"lambda must be >= 0, got {lam}")
    S = np.asarray(S, dtype=np.float64)
    return assert_spd(S + lam * np.eye(S.shape[0]))


def ledoit_wolf(data: SampleSet) -> tuple[SpdMatrix, float]:
    """
    Linear shrinkage toward m·I, m = tr(S)/D, with the data-driven intensity
    b̄²/d². The noise is zero-mean, so the estimator is not re-centred.

    Returns the estimate and the intensity, which always lies in [0, 1]. A
    sample covariance that is already a scaled identity (d² ≈ 0) gives m·I
    with intensity 1.
    """
    if data.n < 2:
        raise ConfigInvalid("Ledoit-Wolf needs at least two samples")
    S = sample_covariance(data)
    m = float(np.trace(S)) / data.dim
    d2 = float(np.sum((S - m * np.eye(data.dim)) ** 2)) / data.dim
    if d2 <= DISPERSION_RTOL * m * m:
        logger.debug("Ledoit-Wolf: sample is a scaled identity (m=%.6g, d2=%.3g)", m, d2)
        return assert_spd(m * np.eye(data.dim)), 1.0
    lw = LedoitWolf(assume_centered=True, store_precision=False)
    lw.fit(data.samples)
    intensity = float(lw.shrinkage_)
    if intensity == 0.0:
        logger.debug("Ledoit-Wolf: zero shrinkage (n=%d, dim=%d)", data.n, data.dim)
    return assert_spd(lw.covariance_), intensity


def knowledge_aided(data: SampleSet, lam: float, prior: SpdMatrix) -> SpdMatrix:
    """(1 − λ)·S + λ·E[C]."""
    if not 0.0 <= lam <= 1.0:
        raise ConfigInvalid(f"lambda must lie in [0, 1], got {lam}")
    prior = assert_spd(prior)
    if prior.dim != data.dim:
        raise DimensionMismatch(f"prior is {prior.dim}x{prior.dim}, samples have dimension {data.dim}")
    return assert_spd((1.0 - lam) * sample_covariance(data) + lam * prior.entries)


def build_estimate(spec: EstimatorSpec, data: SampleSet, prior: Optional[SpdMatrix] = None) -> SpdMatrix:
    """Dispatch on spec.kind; `prior` fills in for spec.prior when the truth supplies it."""
    spec.validate()
    if spec.kind == EstimatorKind.SAMPLE:
        return diagonal_loading(sample_covariance(data), 0.0)
    if spec.kind == EstimatorKind.DIAG_LOAD:
        return diagonal_loading(sample_covariance(data), spec.lam)
    if spec.kind == EstimatorKind.LEDOIT_WOLF:
        estimate, _ = ledoit_wolf(data)
        return estimate
    if spec.kind == EstimatorKind.KNOWLEDGE_AIDED:
        target = spec.prior if spec.prior is not None else prior
        if target is None:
            raise ConfigInvalid("knowledge-aided shrinkage needs a prior covariance")
        return knowledge_aided(data, spec.lam, target)
    raise ConfigInvalid(f"unknown estimator kind {spec.kind!r}")
