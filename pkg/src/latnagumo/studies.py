"""Refinement, noise-amplitude and domain-size studies."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import CutoffWarning
from .front import FrontProfile, front_initial_data, profile_eval, tail_mass
from .grid import GridSpec
from .integrator import IntegratorConfig, Scheme, deterministic_solve, stability_max_dt
from .noise import trace_q
from .runspec import RunSetup
from .stencil import StencilWeights


def _loglog_slope(x, y):
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)


def _linear_fit(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * np.asarray(x) + intercept
    ss_res = float(np.sum((np.asarray(y) - fit) ** 2))
    ss_tot = float(np.sum((np.asarray(y) - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


@dataclass(frozen=True)
class ConvergenceTable:
    h: tuple[float, ...]
    errors: tuple[float, ...]
    ratios: tuple[float, ...]  # errors[i] / errors[i + 1]
    orders: tuple[float, ...]  # log2 of the ratios
    h_ref: float
    stochastic: bool


def convergence_study(
    setup: RunSetup,
    h_list,
    ref_factor: int = 4,
    stochastic: bool = False,
) -> ConvergenceTable:
    """Terminal L2 error of each resolution against a reference ``ref_factor`` times finer.

    Coarse nodes are a subset of the reference nodes, so the reference is
    restricted by injection. The stochastic variant drives every resolution with
    the same spectral mode sequence (same seed, same dt).
    """
    hs = [float(h) for h in h_list]
    if len(hs) < 3:
        raise ValueError("convergence study needs at least three resolutions")
    if len(set(hs)) != len(hs) or any(a <= b for a, b in zip(hs, hs[1:])):
        raise ValueError("spacings must be distinct and strictly decreasing")
    if int(ref_factor) != ref_factor or ref_factor < 1:
        raise ValueError("reference factor must be a positive integer")
    h_ref = hs[-1] / ref_factor
    L = setup.grid.L
    ref_grid = GridSpec.from_spacing(L, h_ref, setup.grid.ghost)
    base = setup if stochastic else setup.deterministic()

    def terminal(grid):
        return base.replace(grid=grid).run().snapshots[-1]

    ref = terminal(ref_grid)
    errors = []
    for h in hs:
        grid = GridSpec.from_spacing(L, h, setup.grid.ghost)
        stride = h / h_ref
        if abs(stride - round(stride)) > 1e-9:
            raise ValueError(f"spacing {h} is not a multiple of the reference {h_ref}")
        stride = int(round(stride))
        restricted = ref[stride - 1::stride][: grid.N]
        d = terminal(grid) - restricted
        errors.append(math.sqrt(grid.h * float(d @ d)))
    ratios = tuple(a / b for a, b in zip(errors, errors[1:]))
    return ConvergenceTable(
        h=tuple(hs),
        errors=tuple(errors),
        ratios=ratios,
        orders=tuple(math.log2(r) for r in ratios),
        h_ref=h_ref,
        stochastic=stochastic,
    )


@dataclass(frozen=True)
class SmallNoiseTable:
    sigma2: tuple[float, ...]
    trace: tuple[float, ...]
    mean_sup_sq: tuple[float, ...]
    stderr: tuple[float, ...]
    ratios: tuple[float, ...]
    slope: float
    M: int


def _sup_sq_difference(args):
    setup, stream, twin = args
    rec = setup.run(stream=stream)
    d = rec.snapshots - twin
    return float(np.max(setup.grid.h * np.sum(d * d, axis=1)))


def small_noise_study(setup: RunSetup, sigma2_list, M: int, workers: int = 1) -> SmallNoiseTable:
    """E[sup_t ||u(t) - v(t)||^2] against the deterministic twin v, per noise level.

    Every level reuses streams 0..M-1, so the levels are coupled path by path.
    """
    if M < 1:
        raise ValueError("need at least one path per noise level")
    levels = [float(s) for s in sigma2_list]
    if any(s < 0 for s in levels):
        raise ValueError("noise intensities must be nonnegative")
    twin = setup.deterministic().run().snapshots
    means, errs, traces = [], [], []
    for s2 in levels:
        noisy = setup.replace(noise=setup.noise.with_sigma(math.sqrt(s2)))
        traces.append(trace_q(noisy.noise))
        if s2 == 0.0:
            means.append(0.0)
            errs.append(0.0)
            continue
        jobs = [(noisy, m, twin) for m in range(M)]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                vals = np.array(list(pool.map(_sup_sq_difference, jobs)))
        else:
            vals = np.array([_sup_sq_difference(j) for j in jobs])
        means.append(float(np.mean(vals)))
        errs.append(float(np.std(vals, ddof=1) / math.sqrt(M)) if M > 1 else float("nan"))
    ratios = tuple(
        b / a if a > 0 else float("nan") for a, b in zip(means, means[1:])
    )
    pos = [(t, m) for t, m in zip(traces, means) if t > 0 and m > 0]
    slope = _loglog_slope(*zip(*pos))[0] if len(pos) >= 2 else float("nan")
    return SmallNoiseTable(tuple(levels), tuple(traces), tuple(means), tuple(errs), ratios, slope, M)


@dataclass(frozen=True)
class CutoffTable:
    L: tuple[float, ...]
    deviation: tuple[float, ...]
    tail: tuple[float, ...]
    flagged: tuple[bool, ...]
    slope: float
    intercept: float
    r2: float


def cutoff_study(
    fp: FrontProfile,
    L_list,
    h: float,
    T: float,
    w: StencilWeights,
    dt: float | None = None,
    scheme=Scheme.EXPLICIT_EM,
    margin_widths: float = 5.0,
) -> CutoffTable:
    """Terminal deviation from the analytic front as the domain half width grows.

    Points where the front comes within ``margin_widths`` profile widths of the
    boundary before T are flagged and left out of the log-linear fit.
    """
    p = fp.params
    rows = []
    for L in L_list:
        L = float(L)
        grid = GridSpec.from_spacing(L, h)
        reach = max(abs(fp.x0), abs(fp.midpoint(T)))
        flagged = reach > L - margin_widths * fp.s
        if flagged:
            warnings.warn(f"front within {margin_widths} widths of the boundary for L={L}", CutoffWarning)
        step = dt if dt is not None else 0.5 * stability_max_dt(grid, w, p)
        cfg = IntegratorConfig(step, T, scheme, snapshot_stride=10**9)
        rec = deterministic_solve(front_initial_data(fp, grid), grid, w, p, cfg)
        t = float(rec.times[-1])
        d = rec.snapshots[-1] - profile_eval(fp, grid.x, t)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CutoffWarning)
            tail = tail_mass(fp, L, t)
        rows.append((L, math.sqrt(grid.h * float(d @ d) + tail), tail, flagged))
    Ls, devs, tails, flags = (tuple(c) for c in zip(*rows))
    use = [(L, math.log(e)) for L, e, _, f in rows if not f and e > 0]
    if len(use) >= 2:
        slope, intercept, r2 = _linear_fit(*zip(*use))
    else:
        slope = intercept = r2 = float("nan")
    return CutoffTable(Ls, devs, tails, flags, slope, intercept, r2)
