"""Front tracking: level crossings, phase fitting and speed regression."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, NoCrossingError
from .front import FrontProfile, profile_eval
from .grid import GridSpec, LatticeState, pad

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def crossing_position(values: np.ndarray, grid: GridSpec, bc, level: float = 0.5) -> float:
    """x of the ``level`` crossing, interpolated linearly between nodes.

    Boundary nodes at -L and +L take their extension values. With several
    crossings the median location is returned.
    """
    u = pad(np.asarray(values, dtype=float), bc, 1)
    x = grid.coord(np.arange(0, grid.N + 2))
    d = u - level
    idx = np.flatnonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)
    found = []
    if idx.size:
        d0, d1 = d[idx], d[idx + 1]
        found.append(x[idx] + (x[idx + 1] - x[idx]) * d0 / (d0 - d1))
    exact = np.flatnonzero(d == 0.0)
    if exact.size:
        found.append(x[exact])
    if not found:
        raise NoCrossingError(f"state never crosses {level}")
    return float(np.median(np.concatenate(found)))


def front_position(state: LatticeState, grid: GridSpec) -> float:
    state.conforms(grid)
    return crossing_position(state.values, grid, state.bc)


def _shift_distance(values, grid, fp, t, x0):
    d = values - profile_eval(fp.shifted(x0), grid.x, t)
    return grid.h * float(d @ d)


def golden_section(fun, lo: float, hi: float, xtol: float = 1e-11, maxiter: int = 200):
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(maxiter):
        if abs(b - a) <= xtol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)


def fit_shift(state: LatticeState, grid: GridSpec, fp: FrontProfile, t: float = 0.0):
    """Shift x0 minimizing the L2 distance to the sampled profile; returns (x0, distance_sq).

    The search brackets +-5 widths around the tracked crossing; a state with no
    crossing falls back to scanning node coordinates.
    """
    state.conforms(grid)
    u = state.values

    def dist(x0):
        return _shift_distance(u, grid, fp, t, x0)

    try:
        centre = front_position(state, grid) - fp.c * t
    except NoCrossingError:
        candidates = grid.coord(np.arange(1 - grid.ghost, grid.N + grid.ghost + 1))
        scores = [dist(x0) for x0 in candidates]
        best = int(np.argmin(scores))
        return float(candidates[best]), float(scores[best])
    span = 5.0 * fp.s
    return golden_section(dist, centre - span, centre + span)


@dataclass(frozen=True)
class SpeedFit:
    slope: float
    intercept: float
    residual_rms: float
    sample_count: int


def estimate_speed(positions, times) -> SpeedFit:
    """Ordinary least squares of position against time; NaN positions are dropped."""
    x = np.asarray(positions, dtype=float)
    t = np.asarray(times, dtype=float)
    if x.shape != t.shape:
        raise ValueError("positions and times differ in length")
    keep = np.isfinite(x) & np.isfinite(t)
    x, t = x[keep], t[keep]
    if x.size < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {x.size}")
    if np.ptp(t) == 0:
        raise InsufficientDataError("sample times are not distinct")
    A = np.column_stack([t, np.ones_like(t)])
    (slope, intercept), *_ = np.linalg.lstsq(A, x, rcond=None)
    resid = x - (slope * t + intercept)
    return SpeedFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))), int(x.size))
