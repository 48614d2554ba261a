"""Brute-force certification of the discrete coercivity and monotonicity bounds.

For states u, v on a zero-Dirichlet lattice, with gamma the noise variance
density scale (gamma = 0 gives the noise-free statements):

  coercivity:   h<nu Lap u + f(u), u> + h sum g(u)^2 gamma
                    <= -nu E_R(u) + (c_a + gamma) ||u||^2
  monotonicity: h<nu Lap(u - v) + f(u) - f(v), u - v> + h sum (g(u) - g(v))^2 gamma
                    <= (c_a + gamma) ||u - v||^2
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import BoundaryCondition, GridSpec, pad
from .noise import NoiseSpec, g_eval, variance_density
from .reaction import ReactionParams, c_a_const, f_eval
from .stencil import StencilWeights, _require, dirichlet_form_padded, laplacian_padded

SLACK = 1e-12
_ZERO = BoundaryCondition.ZERO_DIRICHLET


@dataclass(frozen=True)
class CertificationReport:
    kind: str
    trials: int
    violations: int
    max_excess: float  # largest lhs - rhs seen
    min_margin: float  # smallest rhs - lhs seen
    gamma: float
    slack: float = SLACK

    @property
    def passes(self) -> bool:
        return self.violations == 0


def noise_gamma(n: NoiseSpec | None, grid: GridSpec) -> float:
    if n is None or n.silent:
        return 0.0
    return float(np.max(variance_density(n, grid)))


def _chunks(trials, N, chunk, draw):
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        yield draw(m)
        done += m


def _coercivity_terms(U, grid, w, p, gamma):
    h, nu = grid.h, p.nu
    P = pad(U, _ZERO, w.R)
    lap = laplacian_padded(P, h, w)
    lhs = h * np.sum((nu * lap + f_eval(U, p)) * U, axis=1) + h * gamma * np.sum(g_eval(U) ** 2, axis=1)
    rhs = -nu * dirichlet_form_padded(P, h, w) + (c_a_const(p) + gamma) * h * np.sum(U * U, axis=1)
    return lhs, rhs


def _monotonicity_terms(U, V, grid, w, p, gamma):
    h, nu = grid.h, p.nu
    D = U - V
    lap = laplacian_padded(pad(D, _ZERO, w.R), h, w)
    lhs = h * np.sum((nu * lap + f_eval(U, p) - f_eval(V, p)) * D, axis=1)
    lhs = lhs + h * gamma * np.sum((g_eval(U) - g_eval(V)) ** 2, axis=1)
    rhs = (c_a_const(p) + gamma) * h * np.sum(D * D, axis=1)
    return lhs, rhs


def _report(kind, pieces, gamma, slack):
    excess = np.concatenate([lhs - rhs for lhs, rhs in pieces])
    return CertificationReport(
        kind=kind,
        trials=int(excess.size),
        violations=int(np.sum(excess > slack)),
        max_excess=float(np.max(excess)),
        min_margin=float(np.min(-excess)),
        gamma=gamma,
        slack=slack,
    )


def _rng(rng):
    if rng is None:
        return np.random.default_rng(0)
    if hasattr(rng, "generator"):
        return rng.generator()
    return rng


def check_coercivity(
    grid: GridSpec,
    w: StencilWeights,
    p: ReactionParams,
    n: NoiseSpec | None = None,
    trials: int = 10_000,
    rng=None,
    low: float = 0.0,
    high: float = 1.0,
    gamma: float | None = None,
    states=None,
    chunk: int = 500,
    slack: float = SLACK,
) -> CertificationReport:
    """Count random states violating the coercivity bound by more than ``slack``."""
    _require(w, grid)
    gamma = noise_gamma(n, grid) if gamma is None else float(gamma)
    if states is not None:
        U = np.atleast_2d(np.asarray(states, dtype=float))
        return _report("coercivity", [_coercivity_terms(U, grid, w, p, gamma)], gamma, slack)
    gen = _rng(rng)
    pieces = [
        _coercivity_terms(U, grid, w, p, gamma)
        for U in _chunks(trials, grid.N, chunk, lambda m: gen.uniform(low, high, (m, grid.N)))
    ]
    return _report("coercivity", pieces, gamma, slack)


def check_monotonicity(
    grid: GridSpec,
    w: StencilWeights,
    p: ReactionParams,
    n: NoiseSpec | None = None,
    trials: int = 10_000,
    rng=None,
    low: float = 0.0,
    high: float = 1.0,
    gamma: float | None = None,
    pairs=None,
    chunk: int = 500,
    slack: float = SLACK,
) -> CertificationReport:
    """Count random pairs violating the one-sided Lipschitz bound by more than ``slack``."""
    _require(w, grid)
    gamma = noise_gamma(n, grid) if gamma is None else float(gamma)
    if pairs is not None:
        U, V = (np.atleast_2d(np.asarray(a, dtype=float)) for a in pairs)
        return _report("monotonicity", [_monotonicity_terms(U, V, grid, w, p, gamma)], gamma, slack)
    gen = _rng(rng)
    pieces = [
        _monotonicity_terms(UV[0], UV[1], grid, w, p, gamma)
        for UV in _chunks(trials, grid.N, chunk, lambda m: gen.uniform(low, high, (2, m, grid.N)))
    ]
    return _report("monotonicity", pieces, gamma, slack)
