"""Deviation from the moving front and Monte Carlo exceedance estimates."""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import ContractError, CutoffWarning
from .front import FrontProfile, profile_eval, tail_mass
from .grid import GridSpec
from .integrator import TrajectoryRecord
from .runspec import RunSetup


def deviation_series(rec: TrajectoryRecord, fp: FrontProfile, grid: GridSpec) -> np.ndarray:
    """Per-snapshot L2(R) distance to V(x - ct): grid part plus analytic tails."""
    if rec.snapshots is None or len(rec.times) == 0:
        raise ContractError("trajectory record has no snapshots")
    V = profile_eval(fp, grid.x[None, :], rec.times[:, None])
    interior = grid.h * np.sum((rec.snapshots - V) ** 2, axis=1)
    tails = np.array([tail_mass(fp, grid.L, t) for t in rec.times])
    return np.sqrt(interior + tails)


def sup_deviation(rec: TrajectoryRecord, fp: FrontProfile, grid: GridSpec) -> float:
    return float(np.max(deviation_series(rec, fp, grid)))


@dataclass(frozen=True)
class McEstimate:
    trials: int
    exceedances: int
    p_hat: float
    wilson_low: float
    wilson_high: float
    confidence: float
    deviations: tuple[float, ...] = ()


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("Wilson interval needs at least one trial")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    p = successes / trials
    z2n = z * z / trials
    centre = (p + z2n / 2.0) / (1.0 + z2n)
    half = z * np.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials)) / (1.0 + z2n)
    return max(0.0, min(centre - half, p)), min(1.0, max(centre + half, p))


def _trial(args) -> float:
    setup, seed, stream = args
    rec = setup.run(stream=stream, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CutoffWarning)
        return sup_deviation(rec, setup.front, setup.grid)


def trial_deviations(setup: RunSetup, M: int, base_seed: int | None = None, workers: int = 1):
    """sup_t deviations for streams 0..M-1, in stream order regardless of ``workers``."""
    seed = setup.cfg.seed if base_seed is None else base_seed
    jobs = [(setup, seed, m) for m in range(M)]
    if workers > 1 and M > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(_trial, jobs, chunksize=max(1, M // (4 * workers)))))
    return np.array([_trial(j) for j in jobs])


def mc_probability(
    setup: RunSetup,
    delta: float,
    M: int,
    confidence: float = 0.95,
    base_seed: int | None = None,
    workers: int = 1,
    deviations=None,
) -> McEstimate:
    """Estimate P[sup_t ||u(t) - V(. - ct)|| > delta] from M independent paths.

    Snapshots are taken at the configured stride, so the sup is a lower bound
    of the path sup. ``deviations`` reuses previously computed trial values.
    """
    if M < 1:
        raise ValueError("need at least one Monte Carlo trial")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if deviations is None:
        deviations = trial_deviations(setup, M, base_seed, workers)
    deviations = np.asarray(deviations, dtype=float)[:M]
    k = int(np.sum(deviations > delta))
    lo, hi = wilson_interval(k, M, confidence)
    return McEstimate(M, k, k / M, lo, hi, confidence, tuple(float(d) for d in deviations))
