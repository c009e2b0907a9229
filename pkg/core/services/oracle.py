# core/services/oracle.py: brute-force worst-case NSNR, independent of the closed form
"""
Minimises (y^T y)^2 / ((y^T Q y)(y^T Q^{-1} y)) over the unit sphere by
random multistart followed by plane rotations. It never looks at the
spectrum of Q, so it can be used to check the closed-form answer.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from numpy.typing import NDArray
from scipy.optimize import minimize_scalar

from ..exceptions import ConfigInvalid
from .metrics import TargetVector, as_target
from .spd import SpdMatrix, assert_spd, check_same_dim

logger = logging.getLogger(__name__)

_CHUNK = 20_000
_ANGLE_GRID = np.linspace(-math.pi, math.pi, 361)


@dataclass(frozen=True)
class OracleConfig:
    n_random: int = 100_000
    refine_steps: int = 200
    tol: float = 1e-10
    n_starts: int = 2  # best random directions handed to refinement
    random_probes: int = 3  # random planes tried before declaring convergence

    def __post_init__(self):
        if self.n_random < 1:
            raise ConfigInvalid(f"n_random must be >= 1, got {self.n_random}")
        if self.refine_steps < 0 or self.n_starts < 1:
            raise ConfigInvalid("refine_steps must be >= 0 and n_starts >= 1")

    @classmethod
    def from_settings(cls, **overrides) -> "OracleConfig":
        values = {
            "n_random": settings.NSNR_ORACLE_RANDOM,
            "refine_steps": settings.NSNR_ORACLE_REFINE_STEPS,
            "tol": settings.NSNR_ORACLE_TOL,
        }
        values.update(overrides)
        return cls(**values)


@dataclass(frozen=True, eq=False)
class OracleResult:
    value: float
    target: TargetVector
    steps: int


def _products(Y: NDArray, Q: NDArray, Qi: NDArray) -> NDArray:
    """(y^T Q y)(y^T Q^{-1} y) for each unit row of Y."""
    return np.sum((Y @ Q) * Y, axis=1) * np.sum((Y @ Qi) * Y, axis=1)


def _unit_rows(rng: np.random.Generator, n: int, dim: int) -> NDArray:
    Y = rng.standard_normal((n, dim))
    return Y / np.linalg.norm(Y, axis=1, keepdims=True)


def _plane_search(y: NDArray, d: NDArray, Q: NDArray, Qi: NDArray) -> tuple[float, float]:
    """Best angle for cos(t)·y + sin(t)·d; returns (t, product at t)."""
    def coefficients(M):
        yy, yd, dd = y @ M @ y, y @ M @ d, d @ M @ d
        return 0.5 * (yy + dd), 0.5 * (yy - dd), yd

    a0, a1, a2 = coefficients(Q)
    b0, b1, b2 = coefficients(Qi)

    # in phi = 2t both quadratic forms are first-order trigonometric polynomials
    def product(phi):
        c, s = np.cos(phi), np.sin(phi)
        return (a0 + a1 * c + a2 * s) * (b0 + b1 * c + b2 * s)

    grid = product(_ANGLE_GRID)
    k = int(np.argmax(grid))
    step = _ANGLE_GRID[1] - _ANGLE_GRID[0]
    found = minimize_scalar(
        lambda phi: -product(phi),
        bounds=(_ANGLE_GRID[k] - step, _ANGLE_GRID[k] + step),
        method="bounded",
        options={"xatol": 1e-13},
    )
    phi = float(found.x) if -found.fun >= grid[k] else float(_ANGLE_GRID[k])
    return 0.5 * phi, float(product(phi))


def _refine(y: NDArray, Q: NDArray, Qi: NDArray, cfg: OracleConfig,
            rng: np.random.Generator) -> tuple[NDArray, float, int]:
    h = float(_products(y[None, :], Q, Qi)[0])
    step = 0
    probes_left = cfg.random_probes
    while step < cfg.refine_steps:
        step += 1
        Qy, Qiy = Q @ y, Qi @ y
        grad = 2.0 * ((y @ Qi @ y) * Qy + (y @ Q @ y) * Qiy)
        d = grad - (grad @ y) * y
        use_gradient = np.linalg.norm(d) > 1e-14 * max(np.linalg.norm(grad), 1.0)
        if not use_gradient:
            d = rng.standard_normal(y.shape[0])
            d -= (d @ y) * y
        d /= np.linalg.norm(d)

        t, h_new = _plane_search(y, d, Q, Qi)
        if h_new > h * (1.0 + cfg.tol):
            y = math.cos(t) * y + math.sin(t) * d
            y /= np.linalg.norm(y)
            h = float(_products(y[None, :], Q, Qi)[0])
            continue
        # stalled: a few random planes before giving up
        if probes_left == 0:
            break
        probes_left -= 1
        d = rng.standard_normal(y.shape[0])
        d -= (d @ y) * y
        d /= np.linalg.norm(d)
        t, h_new = _plane_search(y, d, Q, Qi)
        if h_new > h * (1.0 + cfg.tol):
            y = math.cos(t) * y + math.sin(t) * d
            y /= np.linalg.norm(y)
            h = float(_products(y[None, :], Q, Qi)[0])
    logger.debug("oracle refinement stopped after %d steps (product %.15g)", step, h)
    return y, h, step


def brute_force_nsnr_min(C: SpdMatrix, Chat: SpdMatrix, cfg: OracleConfig | None,
                         rng: np.random.Generator) -> OracleResult:
    cfg = cfg or OracleConfig.from_settings()
    C, Chat = assert_spd(C), assert_spd(Chat)
    dim = check_same_dim(C.entries, Chat.entries)

    # Q and Q^{-1} built separately from C and C^{-1}
    Q = Chat.inv_sqrt.entries @ C.entries @ Chat.inv_sqrt.entries
    Qi = Chat.sqrt.entries @ C.inverse.entries @ Chat.sqrt.entries
    Q, Qi = 0.5 * (Q + Q.T), 0.5 * (Qi + Qi.T)

    best_rows, best_vals = [], []
    remaining = cfg.n_random
    while remaining > 0:
        Y = _unit_rows(rng, min(remaining, _CHUNK), dim)
        remaining -= Y.shape[0]
        h = _products(Y, Q, Qi)
        keep = np.argsort(-h, kind="stable")[: cfg.n_starts]
        best_rows.append(Y[keep])
        best_vals.append(h[keep])
    rows = np.concatenate(best_rows)
    vals = np.concatenate(best_vals)
    starts = rows[np.argsort(-vals, kind="stable")[: cfg.n_starts]]

    best_y, best_h, total_steps = starts[0], -np.inf, 0
    for y0 in starts:
        y, h, steps = _refine(y0.copy(), Q, Qi, cfg, rng)
        total_steps += steps
        if h > best_h:
            best_y, best_h = y, h

    value = min(1.0 / best_h, 1.0)
    return OracleResult(
        value=value,
        target=as_target(Chat.sqrt.entries @ best_y),
        steps=total_steps,
    )
