# core/services/harness.py: Monte Carlo experiments over covariance estimates
"""
Trials are independent: trial t draws everything from derive_trial_rng(seed, t)
and records are sorted by trial index before anything is aggregated, so the
output does not depend on the number of workers.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import pandas as pd
from django.conf import settings
from scipy import stats

from ..exceptions import (
    BoundViolation, ConfigInvalid, DegenerateInput, EstimatorSingular, NotPositiveDefinite,
)
from ..models import COMPETING_METRICS, EstimatorKind, MetricKind, TruthKind
from .estimators import EstimatorSpec, build_estimate, diagonal_loading, knowledge_aided, sample_covariance
from .metrics import MetricRecord, d_kl, d_nsnr, evaluate_all, nsnr, nsnr_min, worst_case_target
from .oracle import OracleConfig, brute_force_nsnr_min
from .randgen import SeedSpec, Truth, TruthScenario, derive_trial_rng, make_truth, mvn_sample, random_spd
from .reporting import write_csv
from .spd import identity

logger = logging.getLogger(__name__)

# slack allowed on d_nsnr <= d_kl before a trial is rejected
KL_BOUND_SLACK = 1e-12

SCATTER_COLUMNS = ["trial_index", "nsnr_min", "d_nsnr", "d_kl", "d_symkl", "d_frobenius", "d_spectral"]


# -----------------------------
# Specs and records
# -----------------------------
@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    truth: TruthScenario
    n_samples: int
    estimator: EstimatorSpec = field(default_factory=EstimatorSpec)
    n_trials: int = 1000
    master_seed: int = 0

    @property
    def dim(self) -> int:
        return self.truth.dim

    def validate(self) -> "ScenarioSpec":
        if self.n_trials < 2:
            raise ConfigInvalid(f"need at least 2 trials for a correlation, got {self.n_trials}")
        if self.n_samples < 1:
            raise ConfigInvalid(f"need at least one sample per trial, got {self.n_samples}")
        if self.estimator.kind == EstimatorKind.LEDOIT_WOLF and self.n_samples < 2:
            raise ConfigInvalid("Ledoit-Wolf needs at least two samples per trial")
        if self.estimator.prior is not None and self.estimator.prior.dim != self.dim:
            raise ConfigInvalid("estimator prior dimension does not match the scenario")
        SeedSpec(self.master_seed)
        self.estimator.validate()
        return self

    def describe(self) -> dict:
        """Flat config for CSV headers."""
        return {
            "truth": self.truth.kind.value,
            "dim": self.dim,
            "n_samples": self.n_samples,
            "estimator": self.estimator.kind.value,
            "lambda": self.estimator.lam,
            "n_trials": self.n_trials,
            "wishart_dof": self.truth.wishart_dof,
            "low_rank_gain": self.truth.low_rank_gain,
        }


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    d_nsnr: float
    d_kl: float
    d_symkl: float
    d_frobenius: float
    d_spectral: float
    nsnr_min: float
    redraws: int = 0

    @classmethod
    def from_metrics(cls, trial_index: int, metrics: MetricRecord, redraws: int = 0) -> "TrialRecord":
        return cls(trial_index=trial_index, redraws=redraws, **asdict(metrics))


@dataclass(frozen=True)
class TuneSpec:
    base: ScenarioSpec
    lambda_grid: tuple = ()

    def __post_init__(self):
        if not self.lambda_grid:
            object.__setattr__(self, "lambda_grid", default_grid(settings.NSNR_LAMBDA_STEP))

    def validate(self) -> "TuneSpec":
        grid = np.asarray(self.lambda_grid, dtype=float)
        if grid.size == 0:
            raise ConfigInvalid("lambda grid is empty")
        if np.any(grid < 0) or np.any(grid > 1):
            raise ConfigInvalid("lambda grid must lie within [0, 1]")
        if np.any(np.diff(grid) <= 0):
            raise ConfigInvalid("lambda grid must be strictly ascending")
        if self.base.estimator.kind != EstimatorKind.KNOWLEDGE_AIDED:
            raise ConfigInvalid("lambda tuning runs the knowledge-aided estimator")
        self.base.validate()
        return self


@dataclass(frozen=True)
class TuneResult:
    table: pd.DataFrame  # metric -> (lambda_star, nsnr_min)
    curves: pd.DataFrame  # lambda -> mean of every metric


@dataclass(frozen=True)
class RmbResult:
    mean_nsnr: float
    reference: float
    n_trials: int


@dataclass
class VerificationReport:
    pairs: int = 0
    oracle_gap: float = 0.0
    oracle_beats_bound: float = 0.0
    target_gap: float = 0.0
    kl_bound_excess: float = 0.0
    symmetry_error: float = 0.0
    scale_error: float = 0.0

    LIMITS = {
        "oracle_gap": 1e-6,
        "oracle_beats_bound": 1e-9,
        "target_gap": 1e-9,
        "kl_bound_excess": 1e-12,
        "symmetry_error": 1e-10,
        "scale_error": 1e-10,
    }

    @property
    def violations(self) -> list[str]:
        return [name for name, limit in self.LIMITS.items() if getattr(self, name) > limit]

    @property
    def ok(self) -> bool:
        return not self.violations


def default_grid(step: float) -> tuple:
    if not 0 < step <= 1:
        raise ConfigInvalid(f"grid step must lie in (0, 1], got {step}")
    grid = np.round(np.arange(0.0, 1.0 + step / 2, step), 10)
    return tuple(float(v) for v in grid if v <= 1.0)


def scenario_for(truth: TruthKind, n_samples: int, estimator: EstimatorSpec,
                 n_trials: int | None = None, master_seed: int | None = None,
                 dim: int | None = None) -> ScenarioSpec:
    """ScenarioSpec with the settings defaults filled in."""
    return ScenarioSpec(
        truth=TruthScenario.from_settings(truth, dim or settings.NSNR_DIM),
        n_samples=n_samples,
        estimator=estimator,
        n_trials=settings.NSNR_TRIALS if n_trials is None else n_trials,
        master_seed=settings.NSNR_SEED if master_seed is None else master_seed,
    ).validate()


# -----------------------------
# Execution helpers
# -----------------------------
def _map_trials(fn: Callable[[int], object], n_trials: int, workers: int | None) -> list:
    workers = settings.NSNR_WORKERS if workers is None else workers
    if workers <= 1:
        return [fn(t) for t in range(n_trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_trials)))


def _fixed_truth(scenario: TruthScenario) -> Optional[Truth]:
    if scenario.is_random:
        logger.info(
            "random truth: C = %g*e1e1^T + Wishart(I, %d)/%d, prior E[C] = C0 + I",
            scenario.low_rank_gain, scenario.wishart_dof, scenario.wishart_dof,
        )
        return None
    return make_truth(scenario)


def _with_redraws(trial_index: int, draw: Callable[[], object]):
    """Calls draw() until it stops raising NotPositiveDefinite; returns (result, redraws)."""
    cap = settings.NSNR_REDRAW_CAP
    for redraws in range(cap + 1):
        try:
            return draw(), redraws
        except NotPositiveDefinite as exc:
            logger.warning("trial %d: singular estimate (%s), redraw %d/%d", trial_index, exc, redraws + 1, cap)
    raise EstimatorSingular(f"trial {trial_index}: still singular after {cap} redraws")


def _check_bound(trial_index: int, metrics: MetricRecord) -> None:
    if metrics.d_nsnr > metrics.d_kl + KL_BOUND_SLACK:
        raise BoundViolation(
            f"trial {trial_index}: d_nsnr={metrics.d_nsnr!r} exceeds d_kl={metrics.d_kl!r}"
        )


# -----------------------------
# Operations
# -----------------------------
def run_trials(spec: ScenarioSpec, workers: int | None = None) -> list[TrialRecord]:
    spec.validate()
    fixed = _fixed_truth(spec.truth)

    def one(t: int) -> TrialRecord:
        rng = derive_trial_rng(SeedSpec(spec.master_seed, t))
        truth = fixed if fixed is not None else make_truth(spec.truth, rng)

        def draw():
            data = mvn_sample(truth.covariance, spec.n_samples, rng)
            return build_estimate(spec.estimator, data, prior=truth.prior)

        estimate, redraws = _with_redraws(t, draw)
        metrics = evaluate_all(truth.covariance, estimate)
        _check_bound(t, metrics)
        return TrialRecord.from_metrics(t, metrics, redraws)

    logger.info("running %d trials (%s)", spec.n_trials, spec.describe())
    records = sorted(_map_trials(one, spec.n_trials, workers), key=lambda r: r.trial_index)
    total = sum(r.redraws for r in records)
    if total:
        logger.warning("%d singular estimates were redrawn", total)
    return records


def records_frame(records: Sequence[TrialRecord]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in records], columns=[f.name for f in fields(TrialRecord)])


def pearson(x: Iterable[float], y: Iterable[float]) -> float:
    x = np.asarray(list(x), dtype=float)
    y = np.asarray(list(y), dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DegenerateInput(f"series must be 1-D and of equal length, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise DegenerateInput("need at least two points for a correlation")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise DegenerateInput("correlation is undefined for a constant series")
    return float(stats.pearsonr(x, y).statistic)


def scenario_labels(specs: Sequence[ScenarioSpec]) -> list[str]:
    """Column headers: whatever actually varies between the specs."""
    by_n = [f"N={s.n_samples}" for s in specs]
    by_est = [s.estimator.label for s in specs]
    if len(set(by_est)) <= 1:
        return by_n
    if len(set(by_n)) <= 1:
        return by_est
    return [f"{n}, {e}" for n, e in zip(by_n, by_est)]


def correlation_table(specs: Sequence[ScenarioSpec], workers: int | None = None) -> pd.DataFrame:
    """Pearson correlation of each competing metric with d_nsnr, one column per spec."""
    if not specs:
        raise ConfigInvalid("no scenarios given")
    columns = {}
    for label, spec in zip(scenario_labels(specs), specs):
        frame = records_frame(run_trials(spec, workers))
        columns[label] = [
            pearson(frame[metric.column], frame[MetricKind.NSNR_DIST.column]) for metric in COMPETING_METRICS
        ]
    table = pd.DataFrame(columns, index=[m.label for m in COMPETING_METRICS])
    table.index.name = "metric"
    return table


def export_scatter(records: Sequence[TrialRecord], path, meta: dict | None = None):
    if not records:
        raise DegenerateInput("no trial records to export")
    frame = records_frame(records)[SCATTER_COLUMNS]
    return write_csv(frame, path, meta)


def tune_lambda(spec: TuneSpec, workers: int | None = None) -> TuneResult:
    """
    Grid search of the knowledge-aided shrinkage weight. Every lambda sees the
    same truth and noise draws in trial t; only the estimator changes.
    """
    spec.validate()
    base = spec.base
    grid = [float(v) for v in spec.lambda_grid]
    fixed = _fixed_truth(base.truth)

    def one(t: int) -> list[dict]:
        rng = derive_trial_rng(SeedSpec(base.master_seed, t))
        truth = fixed if fixed is not None else make_truth(base.truth, rng)

        def draw():
            data = mvn_sample(truth.covariance, base.n_samples, rng)
            return [knowledge_aided(data, lam, truth.prior) for lam in grid]

        estimates, _ = _with_redraws(t, draw)
        rows = []
        for lam, estimate in zip(grid, estimates):
            metrics = evaluate_all(truth.covariance, estimate)
            _check_bound(t, metrics)
            rows.append({"trial_index": t, "lambda": lam, **asdict(metrics)})
        return rows

    logger.info("tuning lambda over %d grid points x %d trials", len(grid), base.n_trials)
    chunks = _map_trials(one, base.n_trials, workers)
    frame = pd.DataFrame([row for chunk in chunks for row in chunk])
    frame = frame.sort_values(["trial_index", "lambda"], kind="stable")
    curves = frame.drop(columns="trial_index").groupby("lambda", sort=True).mean()

    rows = {}
    for metric in COMPETING_METRICS + [MetricKind.NSNR_DIST]:
        # idxmin keeps the first minimum, i.e. the smaller lambda on ties
        lam_star = float(curves[metric.column].idxmin())
        rows[metric.label] = {"lambda_star": lam_star, "nsnr_min": float(curves.loc[lam_star, "nsnr_min"])}
    table = pd.DataFrame.from_dict(rows, orient="index")
    table.index.name = "metric"
    return TuneResult(table=table, curves=curves)


def rmb_experiment(dim: int, n_samples: int, n_trials: int, master_seed: int,
                   target=None, workers: int | None = None) -> RmbResult:
    """
    Mean per-target NSNR of the plain sample covariance with an identity
    truth. The real-valued reference mean is (N - D + 2)/(N + 1).
    """
    if dim < 2 or n_samples < dim or n_trials < 1:
        raise ConfigInvalid("need dim >= 2, n_samples >= dim and at least one trial")
    SeedSpec(master_seed)
    C = identity(dim)
    s = np.ones(dim) if target is None else np.asarray(target, dtype=float)

    def one(t: int) -> float:
        rng = derive_trial_rng(SeedSpec(master_seed, t))

        def draw():
            return diagonal_loading(sample_covariance(mvn_sample(C, n_samples, rng)), 0.0)

        estimate, _ = _with_redraws(t, draw)
        return nsnr(s, C, estimate)

    values = _map_trials(one, n_trials, workers)
    return RmbResult(
        mean_nsnr=float(np.mean(values)),
        reference=(n_samples - dim + 2) / (n_samples + 1),
        n_trials=n_trials,
    )


def verify_pairs(n_pairs: int, master_seed: int, dim: int | None = None,
                 oracle: OracleConfig | None = None) -> VerificationReport:
    """
    Random SPD pairs checked against the oracle, the worst-case target, the
    KL bound, symmetry and scale invariance. Dimension is drawn from 2..10
    per pair unless given.
    """
    if n_pairs < 1:
        raise ConfigInvalid(f"need at least one pair, got {n_pairs}")
    if dim is not None and dim < 2:
        raise ConfigInvalid(f"dimension must be >= 2, got {dim}")
    oracle = oracle or OracleConfig.from_settings()
    report = VerificationReport(pairs=n_pairs)

    for p in range(n_pairs):
        rng = derive_trial_rng(SeedSpec(master_seed, p))
        D = dim or int(rng.integers(2, 11))
        C, Chat = random_spd(D, rng), random_spd(D, rng)

        closed = nsnr_min(C, Chat)
        found = brute_force_nsnr_min(C, Chat, oracle, rng)
        report.oracle_gap = max(report.oracle_gap, abs(found.value - closed))
        report.oracle_beats_bound = max(report.oracle_beats_bound, closed - found.value)

        attained = nsnr(worst_case_target(C, Chat), C, Chat)
        report.target_gap = max(report.target_gap, abs(attained - closed))

        report.kl_bound_excess = max(report.kl_bound_excess, d_nsnr(C, Chat) - d_kl(C, Chat))
        report.symmetry_error = max(report.symmetry_error, abs(closed - nsnr_min(Chat, C)) / closed)
        for alpha in (1e-3, 1.0, 1e3):
            report.scale_error = max(report.scale_error, abs(nsnr_min(C, C.scaled(alpha)) - 1.0))

    logger.info("verified %d pairs, violations: %s", n_pairs, report.violations or "none")
    return report
