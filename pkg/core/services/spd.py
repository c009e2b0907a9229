# core/services/spd.py: dense symmetric positive-definite kernel
"""
Every matrix function in the project (inverse, square roots, condition
number, log-determinant) goes through the one eigendecomposition stored on
each SpdMatrix.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from ..exceptions import (
    ConvergenceFailure, DimensionMismatch, NotPositiveDefinite, NotSymmetric,
)

logger = logging.getLogger(__name__)

# smallest eigenvalue must exceed PD_RTOL * largest eigenvalue
PD_RTOL = 1e-10
# asymmetry larger than this (relative to max|M|) is an input error, not rounding
SYMMETRY_RTOL = 1e-9


# -----------------------------
# Types
# -----------------------------
@dataclass(frozen=True, eq=False)
class EigenPair:
    """Ascending eigenvalues with orthonormal eigenvectors as columns."""
    values: NDArray[np.float64]
    vectors: NDArray[np.float64]

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True, eq=False)
class SpdMatrix:
    """
    Immutable real SPD matrix. Build it with assert_spd() or from_spectrum();
    the constructor itself trusts its arguments.
    """
    entries: NDArray[np.float64]
    eig: EigenPair

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @cached_property
    def inverse(self) -> "SpdMatrix":
        return mat_power(self, -1.0)

    @cached_property
    def sqrt(self) -> "SpdMatrix":
        return mat_power(self, 0.5)

    @cached_property
    def inv_sqrt(self) -> "SpdMatrix":
        return mat_power(self, -0.5)

    def scaled(self, alpha: float) -> "SpdMatrix":
        if not alpha > 0:
            raise NotPositiveDefinite(f"scale factor must be positive, got {alpha}")
        return from_spectrum(self.eig.values * alpha, self.eig.vectors)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __repr__(self) -> str:
        return f"SpdMatrix(dim={self.dim}, cond={cond(self):.4g})"


# -----------------------------
# Helpers
# -----------------------------
def _freeze(arr: NDArray) -> NDArray:
    arr.setflags(write=False)
    return arr


def _fix_signs(vectors: NDArray) -> NDArray:
    # largest-magnitude component of each eigenvector is made positive
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _square(M: ArrayLike) -> NDArray[np.float64]:
    arr = np.array(M, dtype=np.float64, copy=True)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionMismatch(f"expected a nonempty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    return arr


def _decompose(sym: NDArray) -> EigenPair:
    try:
        values, vectors = linalg.eigh(sym, check_finite=False)
    except (linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"symmetric eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise ConvergenceFailure("symmetric eigensolver returned non-finite eigenvalues")
    return EigenPair(values=_freeze(values), vectors=_freeze(_fix_signs(vectors)))


def symmetrize(M: ArrayLike) -> NDArray[np.float64]:
    """(M + M^T)/2 after checking the asymmetry is only rounding."""
    arr = _square(M)
    scale = np.max(np.abs(arr))
    asym = np.max(np.abs(arr - arr.T))
    if asym > SYMMETRY_RTOL * max(scale, np.finfo(float).tiny):
        raise NotSymmetric(f"asymmetry {asym:.3e} exceeds tolerance (max|M| = {scale:.3e})")
    return 0.5 * (arr + arr.T)


def check_same_dim(*mats) -> int:
    dims = {int(np.shape(m)[0]) for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def from_spectrum(values: ArrayLike, vectors: ArrayLike) -> SpdMatrix:
    """
    Build V·diag(values)·V^T from a known spectrum. Only positivity is
    checked: relative conditioning is whatever the caller asked for.
    """
    values = np.asarray(values, dtype=np.float64)
    vectors = np.asarray(vectors, dtype=np.float64)
    if not np.all(values > 0):
        raise NotPositiveDefinite(f"non-positive eigenvalue {values.min():.3e}")
    order = np.argsort(values, kind="stable")
    values, vectors = values[order], vectors[:, order]
    entries = (vectors * values) @ vectors.T
    entries = 0.5 * (entries + entries.T)
    return SpdMatrix(
        entries=_freeze(entries),
        eig=EigenPair(values=_freeze(values.copy()), vectors=_freeze(vectors.copy())),
    )


def identity(dim: int) -> SpdMatrix:
    eye = np.eye(dim)
    return SpdMatrix(entries=_freeze(eye.copy()), eig=EigenPair(_freeze(np.ones(dim)), _freeze(eye)))


# -----------------------------
# Operations
# -----------------------------
def assert_spd(M: ArrayLike, rtol: float = PD_RTOL) -> SpdMatrix:
    if isinstance(M, SpdMatrix):
        return M
    sym = symmetrize(M)
    eig = _decompose(sym)
    lo, hi = eig.values[0], eig.values[-1]
    if not (hi > 0 and lo > rtol * hi):
        raise NotPositiveDefinite(
            f"smallest/largest eigenvalue {lo:.3e}/{hi:.3e} is below relative tolerance {rtol:g}"
        )
    return SpdMatrix(entries=_freeze(sym), eig=eig)


def eig_sym(M: SpdMatrix) -> EigenPair:
    return M.eig


def cholesky(M: SpdMatrix | ArrayLike) -> NDArray[np.float64]:
    """Lower factor L with L·L^T = M."""
    arr = M.entries if isinstance(M, SpdMatrix) else symmetrize(M)
    try:
        L = linalg.cholesky(arr, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"Cholesky hit a non-positive pivot: {exc}") from exc
    return L


def mat_power(M: SpdMatrix, p: float) -> SpdMatrix:
    if p == 0:
        return identity(M.dim)
    if p == 1:
        return M
    return from_spectrum(M.eig.values ** p, M.eig.vectors)


def cond(M: SpdMatrix) -> float:
    return float(M.eig.values[-1] / M.eig.values[0])


def logdet(M: SpdMatrix) -> float:
    # natural log, like every log in the project
    return float(np.sum(np.log(M.eig.values)))
