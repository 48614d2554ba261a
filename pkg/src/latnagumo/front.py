"""Closed-form travelling front of the continuum Nagumo equation.

V(zeta) = 1 / (1 + exp(-zeta / s)),  s = sqrt(2 nu),  c = sqrt(2 nu) (a - 1/2).
``tw_residual`` checks the pair against nu V'' + c V' + f(V) = 0 using exact
derivatives, and is the gate for every use of the closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .errors import CutoffWarning
from .grid import BoundaryCondition, GridSpec, LatticeState
from .reaction import ReactionParams, f_eval


def analytic_speed(p: ReactionParams) -> float:
    return math.sqrt(2.0 * p.nu) * (p.a - 0.5)


@dataclass(frozen=True)
class FrontProfile:
    a: float
    nu: float
    c: float
    x0: float = 0.0

    @classmethod
    def from_params(cls, p: ReactionParams, x0: float = 0.0) -> FrontProfile:
        return cls(p.a, p.nu, analytic_speed(p), x0)

    @property
    def params(self) -> ReactionParams:
        return ReactionParams(self.a, self.nu)

    @property
    def s(self) -> float:
        return math.sqrt(2.0 * self.nu)

    def shifted(self, x0: float) -> FrontProfile:
        return replace(self, x0=x0)

    def midpoint(self, t: float) -> float:
        return self.x0 + self.c * t


def profile_eval(fp: FrontProfile, x, t: float = 0.0):
    return expit((np.asarray(x, dtype=float) - fp.c * t - fp.x0) / fp.s)


def tw_residual(fp: FrontProfile, zeta) -> float:
    zeta = np.asarray(zeta, dtype=float)
    s = fp.s
    V = expit(zeta / s)
    W = V * (1.0 - V)
    dV = W / s
    d2V = W * (1.0 - 2.0 * V) / s**2
    r = fp.nu * d2V + fp.c * dV + f_eval(V, fp.params)
    return float(np.max(np.abs(r)))


def front_initial_data(fp: FrontProfile, grid: GridSpec) -> LatticeState:
    return LatticeState(profile_eval(fp, grid.x, 0.0), 0.0, BoundaryCondition.PINNED_FRONT)


def tail_envelope(fp: FrontProfile, L: float, t: float = 0.0) -> float:
    return 2.0 * fp.s * math.exp(-(L - abs(fp.c * t) - abs(fp.x0)) / fp.s)


def _tail_integral(Y: float) -> float:
    """Integral over [Y, inf) of expit(-y)^2, i.e. log1p(e^-Y) - expit(-Y)."""
    if Y < 5.0:
        return float(np.logaddexp(0.0, -Y) - expit(-Y))
    z = math.exp(-Y)
    # alternating series sum_{n>=2} (-1)^n (n-1) z^n / n avoids the cancellation
    total, zn = 0.0, z
    for n in range(2, 40):
        zn *= z
        term = (n - 1) * zn / n
        total += term if n % 2 == 0 else -term
        if term < 1e-18 * total:
            break
    return total


def tail_mass(fp: FrontProfile, L: float, t: float = 0.0) -> float:
    """L2 mass of the profile outside [-L, L] against constant 0 / 1 extensions."""
    if not L > 0:
        raise ValueError("half width must be positive")
    m = fp.midpoint(t)
    if not -L <= m <= L:
        warnings.warn(
            f"front midpoint {m:.4g} outside [-{L}, {L}] at t={t:g}",
            CutoffWarning,
            stacklevel=2,
        )
    s = fp.s
    return s * (_tail_integral((L - m) / s) + _tail_integral((L + m) / s))
