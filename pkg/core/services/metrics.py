# core/services/metrics.py: distances between a true and an estimated covariance
"""
Worst-case NSNR and the metrics it is compared against.

All ratio-based quantities (NSNR, KL, symKL) are computed from the spectrum
of Q = Ĉ^{-1/2} C Ĉ^{-1/2}; the norm-based ones work on C − Ĉ directly.
Logs are natural logs.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from ..exceptions import ConfigInvalid, DegenerateInput, DimensionMismatch
from .spd import SpdMatrix, assert_spd, check_same_dim

logger = logging.getLogger(__name__)

# q_max/q_min this close to 1 counts as C ∝ Ĉ
FLAT_SPECTRUM_RTOL = 1e-12


# -----------------------------
# Types
# -----------------------------
@dataclass(frozen=True, eq=False)
class TargetVector:
    entries: NDArray[np.float64]

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True, eq=False)
class RatioSpectrum:
    q: NDArray[np.float64]
    vectors: NDArray[np.float64]

    @property
    def q_min(self) -> float:
        return float(self.q[0])

    @property
    def q_max(self) -> float:
        return float(self.q[-1])

    @property
    def u_min(self) -> NDArray[np.float64]:
        return self.vectors[:, 0]

    @property
    def u_max(self) -> NDArray[np.float64]:
        return self.vectors[:, -1]

    @property
    def kappa(self) -> float:
        return self.q_max / self.q_min


@dataclass(frozen=True)
class MetricRecord:
    d_nsnr: float
    d_kl: float
    d_symkl: float
    d_frobenius: float
    d_spectral: float
    nsnr_min: float


def as_target(s: ArrayLike) -> TargetVector:
    if isinstance(s, TargetVector):
        return s
    arr = np.array(s, dtype=np.float64, copy=True).reshape(-1)
    if arr.size == 0 or not np.all(np.isfinite(arr)):
        raise DegenerateInput("target vector must be finite and nonempty")
    if not np.linalg.norm(arr) > 0:
        raise DegenerateInput("target vector must not be zero")
    arr.setflags(write=False)
    return TargetVector(entries=arr)


def _pair(C, Chat) -> tuple[SpdMatrix, SpdMatrix]:
    C, Chat = assert_spd(C), assert_spd(Chat)
    check_same_dim(C.entries, Chat.entries)
    return C, Chat


def _target_for(s, M: SpdMatrix) -> NDArray[np.float64]:
    t = as_target(s)
    if t.dim != M.dim:
        raise DimensionMismatch(f"target has length {t.dim}, covariance is {M.dim}x{M.dim}")
    return t.entries


# -----------------------------
# Matrix ratio
# -----------------------------
def matrix_ratio(C: SpdMatrix, Chat: SpdMatrix) -> tuple[SpdMatrix, RatioSpectrum]:
    C, Chat = _pair(C, Chat)
    W = Chat.inv_sqrt.entries
    P = W @ C.entries @ W
    # positivity is all that is required of Q; its conditioning is the measurement
    Q = assert_spd(0.5 * (P + P.T), rtol=0.0)
    return Q, RatioSpectrum(q=Q.eig.values, vectors=Q.eig.vectors)


def _nsnr_min_from(kappa: float) -> float:
    return 4.0 * kappa / (kappa + 1.0) ** 2


def _d_nsnr_from(kappa: float) -> float:
    # -1/2 log(4k/(k+1)^2) written so it never goes negative
    return max(math.log((kappa + 1.0) / (2.0 * math.sqrt(kappa))), 0.0)


def _kl_from(q: NDArray) -> float:
    return 0.5 * float(np.sum(q - 1.0 - np.log(q)))


def _reverse_kl_from(q: NDArray) -> float:
    # eigenvalues of C^{-1/2} Ĉ C^{-1/2} are 1/q
    return 0.5 * float(np.sum(1.0 / q - 1.0 + np.log(q)))


# -----------------------------
# Per-target SNR
# -----------------------------
def matched_filter(s: ArrayLike, C: SpdMatrix) -> NDArray[np.float64]:
    """w = C^{-1} s."""
    C = assert_spd(C)
    return C.inverse.entries @ _target_for(s, C)


def snr(s: ArrayLike, C: SpdMatrix) -> float:
    C = assert_spd(C)
    z = C.eig.vectors.T @ _target_for(s, C)
    return float(np.sum(z * z / C.eig.values))


def snr_estimated(s: ArrayLike, C: SpdMatrix, Chat: SpdMatrix) -> float:
    """Output SNR of the filter Ĉ^{-1}s when the noise covariance is really C."""
    C, Chat = _pair(C, Chat)
    w = matched_filter(s, Chat)
    x = _target_for(s, C)
    return float((w @ x) ** 2 / (w @ C.entries @ w))


def nsnr(s: ArrayLike, C: SpdMatrix, Chat: SpdMatrix) -> float:
    C, Chat = _pair(C, Chat)
    x = _target_for(s, C)
    _, spec = matrix_ratio(C, Chat)
    y = Chat.inv_sqrt.entries @ x
    y = y / np.linalg.norm(y)
    z2 = (spec.vectors.T @ y) ** 2
    value = 1.0 / (float(np.sum(spec.q * z2)) * float(np.sum(z2 / spec.q)))
    return min(value, 1.0)


# -----------------------------
# Worst case over targets
# -----------------------------
def nsnr_min(C: SpdMatrix, Chat: SpdMatrix) -> float:
    _, spec = matrix_ratio(C, Chat)
    return _nsnr_min_from(spec.kappa)


def nsnr_loss_fraction(C: SpdMatrix, Chat: SpdMatrix) -> float:
    """Share of the clairvoyant SNR lost on the worst target."""
    return 1.0 - nsnr_min(C, Chat)


def worst_case_target(C: SpdMatrix, Chat: SpdMatrix) -> TargetVector:
    C, Chat = _pair(C, Chat)
    _, spec = matrix_ratio(C, Chat)
    if spec.kappa - 1.0 <= FLAT_SPECTRUM_RTOL:
        # C ∝ Ĉ: every target attains NSNR = 1
        y = spec.u_min
    else:
        y = (spec.u_min + spec.u_max) / math.sqrt(2.0)
    return as_target(Chat.sqrt.entries @ y)


def d_nsnr(C: SpdMatrix, Chat: SpdMatrix) -> float:
    _, spec = matrix_ratio(C, Chat)
    return _d_nsnr_from(spec.kappa)


# -----------------------------
# Competing metrics
# -----------------------------
def d_kl(C: SpdMatrix, Chat: SpdMatrix) -> float:
    _, spec = matrix_ratio(C, Chat)
    return _kl_from(spec.q)


def d_symkl(C: SpdMatrix, Chat: SpdMatrix) -> float:
    _, spec = matrix_ratio(C, Chat)
    return 0.5 * (_kl_from(spec.q) + _reverse_kl_from(spec.q))


def kl_bound_gap(C: SpdMatrix, Chat: SpdMatrix) -> float:
    """d_kl − d_nsnr; zero exactly when q_min + q_max = 2 and all other q are 1."""
    _, spec = matrix_ratio(C, Chat)
    return _kl_from(spec.q) - _d_nsnr_from(spec.kappa)


def d_frobenius(C: SpdMatrix, Chat: SpdMatrix) -> float:
    C, Chat = _pair(C, Chat)
    return float(np.linalg.norm(C.entries - Chat.entries, "fro"))


def d_spectral(C: SpdMatrix, Chat: SpdMatrix) -> float:
    C, Chat = _pair(C, Chat)
    diff = C.entries - Chat.entries
    return float(np.max(np.abs(linalg.eigvalsh(0.5 * (diff + diff.T)))))


def evaluate_all(C: SpdMatrix, Chat: SpdMatrix) -> MetricRecord:
    """All metrics from one ratio decomposition."""
    C, Chat = _pair(C, Chat)
    _, spec = matrix_ratio(C, Chat)
    kl = _kl_from(spec.q)
    return MetricRecord(
        d_nsnr=_d_nsnr_from(spec.kappa),
        d_kl=kl,
        d_symkl=0.5 * (kl + _reverse_kl_from(spec.q)),
        d_frobenius=d_frobenius(C, Chat),
        d_spectral=d_spectral(C, Chat),
        nsnr_min=_nsnr_min_from(spec.kappa),
    )


# -----------------------------
# Counterexample pair
# -----------------------------
def swap_pair(alpha: float) -> tuple[SpdMatrix, SpdMatrix]:
    """
    C = diag(1, α, α²), Ĉ = diag(1, α², α): tiny in every norm, yet
    d_nsnr = log((1 + α²) / (2α)) grows without bound as α → 0.
    """
    if not 0 < alpha < 1:
        raise ConfigInvalid(f"alpha must lie in (0, 1), got {alpha}")
    C = assert_spd(np.diag([1.0, alpha, alpha ** 2]))
    Chat = assert_spd(np.diag([1.0, alpha ** 2, alpha]))
    return C, Chat
