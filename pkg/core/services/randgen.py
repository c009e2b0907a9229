# core/services/randgen.py: seeded streams, Gaussian/Wishart samplers, ground truths
"""
Every trial owns its own generator, derived from (master_seed, trial_index)
only, so results do not depend on how trials are scheduled across workers.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from numpy.typing import NDArray
from scipy.stats import ortho_group

from ..exceptions import ConfigInvalid, NotPositiveDefinite
from ..models import TruthKind
from .estimators import SampleSet
from .spd import SpdMatrix, assert_spd, cholesky, from_spectrum, identity

logger = logging.getLogger(__name__)

GENERATOR_NAME = "numpy.random.Philox"


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigInvalid(f"master seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.trial_index < 0:
            raise ConfigInvalid(f"trial index must be >= 0, got {self.trial_index}")


@dataclass(frozen=True)
class TruthScenario:
    kind: TruthKind
    dim: int
    wishart_dof: int = 20
    low_rank_gain: float = 100.0

    def __post_init__(self):
        if self.dim < 2:
            raise ConfigInvalid(f"dimension must be >= 2, got {self.dim}")
        if self.wishart_dof < 1:
            raise ConfigInvalid(f"Wishart degrees of freedom must be >= 1, got {self.wishart_dof}")

    @classmethod
    def from_settings(cls, kind: TruthKind, dim: int) -> "TruthScenario":
        return cls(
            kind=TruthKind(kind),
            dim=dim,
            wishart_dof=settings.NSNR_WISHART_DOF,
            low_rank_gain=settings.NSNR_LOW_RANK_GAIN,
        )

    @property
    def is_random(self) -> bool:
        return self.kind == TruthKind.RANDOM_LOW_RANK_PLUS_WISHART


@dataclass(frozen=True, eq=False)
class Truth:
    covariance: SpdMatrix
    prior: SpdMatrix  # E[C]; equals the covariance for fixed truths


def generator_description() -> str:
    return f"{GENERATOR_NAME} (numpy {np.__version__})"


# -----------------------------
# Streams
# -----------------------------
def derive_trial_rng(seed: SeedSpec) -> np.random.Generator:
    sequence = np.random.SeedSequence(entropy=seed.master_seed, spawn_key=(seed.trial_index,))
    return np.random.Generator(np.random.Philox(sequence))


# -----------------------------
# Samplers
# -----------------------------
def mvn_sample(C: SpdMatrix, n: int, rng: np.random.Generator) -> SampleSet:
    """n zero-mean draws L·z with L = cholesky(C)."""
    if n < 1:
        raise ConfigInvalid(f"sample count must be >= 1, got {n}")
    L = cholesky(C)
    Z = rng.standard_normal((n, L.shape[0]))
    samples = Z @ L.T
    samples.setflags(write=False)
    return SampleSet(samples=samples)


def wishart_sample(scale: SpdMatrix, dof: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """(1/dof)·Σ z_k z_k^T with z_k ~ N(0, scale); the mean is `scale`."""
    if dof < 1:
        raise ConfigInvalid(f"degrees of freedom must be >= 1, got {dof}")
    Z = mvn_sample(scale, dof, rng).samples
    W = Z.T @ Z / dof
    return 0.5 * (W + W.T)


def random_spd(dim: int, rng: np.random.Generator, low: float = 1e-2, high: float = 1e2) -> SpdMatrix:
    """Eigenvalues log-uniform in [low, high] on a random orthogonal basis."""
    values = np.exp(rng.uniform(np.log(low), np.log(high), size=dim))
    basis = ortho_group.rvs(dim, random_state=rng) if dim > 1 else np.ones((1, 1))
    return from_spectrum(values, basis)


# -----------------------------
# Ground truths
# -----------------------------
def _low_rank_part(scenario: TruthScenario) -> NDArray[np.float64]:
    C0 = np.zeros((scenario.dim, scenario.dim))
    C0[0, 0] = scenario.low_rank_gain
    return C0


def make_truth(scenario: TruthScenario, rng: np.random.Generator | None = None,
               redraw_cap: int | None = None) -> Truth:
    eye = np.eye(scenario.dim)
    if scenario.kind == TruthKind.IDENTITY:
        C = identity(scenario.dim)
        return Truth(covariance=C, prior=C)
    if scenario.kind == TruthKind.APPROX_LOW_RANK:
        C = assert_spd(eye + _low_rank_part(scenario))
        return Truth(covariance=C, prior=C)
    if scenario.kind != TruthKind.RANDOM_LOW_RANK_PLUS_WISHART:
        raise ConfigInvalid(f"unknown truth scenario {scenario.kind!r}")
    if rng is None:
        raise ConfigInvalid("the random truth scenario needs a generator")

    C0 = _low_rank_part(scenario)
    prior = assert_spd(C0 + eye)
    cap = redraw_cap if redraw_cap is not None else settings.NSNR_REDRAW_CAP
    for attempt in range(1, cap + 1):
        delta = wishart_sample(identity(scenario.dim), scenario.wishart_dof, rng)
        try:
            return Truth(covariance=assert_spd(C0 + delta), prior=prior)
        except NotPositiveDefinite:
            logger.warning(
                "Wishart perturbation not positive definite (dof=%d, dim=%d), redraw %d/%d",
                scenario.wishart_dof, scenario.dim, attempt, cap,
            )
    raise NotPositiveDefinite(f"no positive definite random truth after {cap} draws")
