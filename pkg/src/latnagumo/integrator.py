"""Euler-Maruyama time stepping for the stochastic lattice Nagumo equation.

Both schemes are left-point (Ito). The semi-implicit variant treats the
linear diffusion implicitly and keeps reaction and noise explicit. Every run
carries an energy ledger built from the same increments as the dynamics.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import BlowUpError, ContractError, NoCrossingError
from .tracking import crossing_position
from .grid import BoundaryCondition, GridSpec, LatticeState, pad
from .noise import IncrementSampler, NoiseSpec, RngStream
from .reaction import ReactionParams, c_a_const, f_eval
from .stencil import StencilWeights, _require, operator_matrix

LEDGER_TERMS = ("norm_sq", "diff_work", "reac_work", "mart_term", "ito_term")


class Scheme(enum.Enum):
    EXPLICIT_EM = "explicit"
    SEMI_IMPLICIT_EM = "semi-implicit"

    @classmethod
    def parse(cls, name) -> Scheme:
        if isinstance(name, cls):
            return name
        key = str(name).lower().replace("_", "-")
        for s in cls:
            if key in (s.value, s.name.lower().replace("_", "-")):
                return s
        raise ValueError(f"unknown scheme {name!r}")


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    T: float
    scheme: Scheme = Scheme.EXPLICIT_EM
    snapshot_stride: int = 10
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.T < 0:
            raise ValueError(f"T must be nonnegative, got {self.T}")
        if self.T > 0 and self.dt > self.T:
            raise ValueError(f"dt={self.dt} exceeds T={self.T}")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ValueError("snapshot stride must be a positive integer")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.T / self.dt - 1e-9)) if self.T > 0 else 0

    def with_stream(self, stream: int) -> IntegratorConfig:
        return IntegratorConfig(self.dt, self.T, self.scheme, self.snapshot_stride, self.seed, stream)


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    snapshots: np.ndarray  # (n_snap, N)
    bc: object
    front_positions: np.ndarray
    l2_norms_sq: np.ndarray
    energy_terms: dict[str, np.ndarray]
    seed: int
    stream: int
    config_hash: str
    dt: float = 0.0
    steps: int = 0
    x: np.ndarray = field(default=None, repr=False)

    def state(self, i: int) -> LatticeState:
        return LatticeState(self.snapshots[i].copy(), float(self.times[i]), self.bc)

    @property
    def final(self) -> LatticeState:
        return self.state(len(self.times) - 1)

    def residuals(self) -> np.ndarray:
        e = self.energy_terms
        return e["norm_sq"] - e["norm_sq"][0] - (
            e["diff_work"] + e["reac_work"] + e["mart_term"] + e["ito_term"]
        )


def config_hash(*parts) -> str:
    def enc(o):
        if isinstance(o, enum.Enum):
            return o.value
        if hasattr(o, "__dataclass_fields__"):
            return {k: enc(v) for k, v in asdict(o).items()}
        if isinstance(o, dict):
            return {k: enc(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [enc(v) for v in o]
        return o

    blob = json.dumps([enc(p) for p in parts], sort_keys=True, default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def stability_max_dt(grid: GridSpec, w: StencilWeights, p: ReactionParams) -> float:
    """Gershgorin bound for the diffusion part and a margin for the reaction."""
    _require(w)
    S = w.row_sum
    reaction = 1.0 / (2.0 * c_a_const(p))
    if p.nu * S == 0:
        return reaction
    return min(grid.h**2 / (2.0 * p.nu * S), reaction)


class _Stepper:
    def __init__(self, grid, w, p, n, dt, scheme, bc, check_stability=True):
        _require(w, grid)
        self.grid, self.w, self.p, self.dt, self.bc = grid, w, p, dt, bc
        self.scheme = Scheme.parse(scheme)
        if self.scheme is Scheme.EXPLICIT_EM and check_stability:
            limit = stability_max_dt(grid, w, p)
            if dt > limit * (1 + 1e-12):
                raise ValueError(f"explicit dt={dt:g} exceeds stability bound {limit:g}")
        self.sampler = IncrementSampler(n, grid)
        self.q = self.sampler.variance_density()
        self.noisy = not n.silent
        self.h = grid.h
        self.R = w.R
        self.buf = pad(np.zeros(grid.N), bc, w.R)
        self.mirror = bc is BoundaryCondition.NEUMANN
        self.inv_h2 = 1.0 / grid.h**2
        self._lu = None
        self._b = None

    def lap(self, u):
        R, N, buf = self.R, self.grid.N, self.buf
        buf[R:R + N] = u
        if self.mirror:
            buf[:R] = u[:R][::-1]
            buf[R + N:] = u[::-1][:R]
        out = np.zeros(N)
        for k, Jk in enumerate(self.w.J, start=1):
            if Jk != 0.0:
                out += Jk * (buf[R + k:R + k + N] + buf[R - k:R - k + N] - 2.0 * u)
        out *= self.inv_h2
        return out

    def _factor(self):
        if self._lu is None:
            A, b = operator_matrix(self.grid, self.w, self.bc)
            M = sp.identity(self.grid.N, format="csc") - self.dt * self.p.nu * A.tocsc()
            self._lu = splu(M.tocsc())
            self._b = b
        return self._lu, self._b

    def increment(self, rng):
        return self.sampler.draw(self.dt, rng)

    def step(self, u, lap_u, fu, g_dW):
        """Advance one step from u given Laplacian, reaction and g(u)*dW at u."""
        dt = self.dt
        if self.scheme is Scheme.EXPLICIT_EM:
            return u + dt * (self.p.nu * lap_u + fu) + g_dW
        lu, b = self._factor()
        return lu.solve(u + dt * (fu + self.p.nu * b) + g_dW)


def _noise_shape(u):
    c = np.clip(u, 0.0, 1.0)
    return c * (1.0 - c)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return RngStream(0).generator()
    raise TypeError(f"cannot use {type(rng).__name__} as a random stream")


def _single_step(state, grid, w, p, n, dt, rng, scheme):
    state.conforms(grid)
    stepper = _Stepper(grid, w, p, n, dt, scheme, state.bc)
    u = state.values
    g_dW = _noise_shape(u) * stepper.increment(_as_generator(rng)) if stepper.noisy else 0.0
    new = stepper.step(u, stepper.lap(u), f_eval(u, p), g_dW)
    if not np.all(np.isfinite(new)):
        raise BlowUpError(1, state.t + dt, state)
    return LatticeState(new, state.t + dt, state.bc)


def em_step(state, grid, w, p, n, dt, rng=None) -> LatticeState:
    return _single_step(state, grid, w, p, n, dt, rng, Scheme.EXPLICIT_EM)


def semi_implicit_step(state, grid, w, p, n, dt, rng=None) -> LatticeState:
    return _single_step(state, grid, w, p, n, dt, rng, Scheme.SEMI_IMPLICIT_EM)


def integrate(
    u0: LatticeState,
    grid: GridSpec,
    w: StencilWeights,
    p: ReactionParams,
    n: NoiseSpec,
    cfg: IntegratorConfig,
    rng=None,
) -> TrajectoryRecord:
    """Run one trajectory; ``rng`` defaults to RngStream(cfg.seed, cfg.stream)."""
    u0.conforms(grid)
    stepper = _Stepper(grid, w, p, n, cfg.dt, cfg.scheme, u0.bc)
    gen = _as_generator(rng if rng is not None else RngStream(cfg.seed, cfg.stream))
    bc, h, dt, nu = u0.bc, grid.h, cfg.dt, p.nu
    steps = cfg.n_steps

    u = u0.values.copy()
    acc = dict.fromkeys(LEDGER_TERMS[1:], 0.0)
    times, snaps, ledger = [], [], {k: [] for k in LEDGER_TERMS}

    def record(t):
        times.append(t)
        snaps.append(u.copy())
        ledger["norm_sq"].append(h * float(u @ u))
        for k, v in acc.items():
            ledger[k].append(v)

    record(u0.t)
    for step in range(1, steps + 1):
        lap_u = stepper.lap(u)
        fu = f_eval(u, p)
        if stepper.noisy:
            g = _noise_shape(u)
            g_dW = g * stepper.increment(gen)
            acc["mart_term"] += 2.0 * h * float(g_dW @ u)
            acc["ito_term"] += h * float((g * g) @ stepper.q) * dt
        else:
            g_dW = 0.0
        acc["diff_work"] += 2.0 * nu * h * float(lap_u @ u) * dt
        acc["reac_work"] += 2.0 * h * float(fu @ u) * dt
        new = stepper.step(u, lap_u, fu, g_dW)
        if not np.all(np.isfinite(new)):
            raise BlowUpError(step, u0.t + step * dt, LatticeState(u, u0.t + (step - 1) * dt, bc))
        u = new
        if step % cfg.snapshot_stride == 0 or step == steps:
            record(u0.t + step * dt)

    snapshots = np.array(snaps)
    fronts = np.empty(len(times))
    for i, row in enumerate(snapshots):
        try:
            fronts[i] = crossing_position(row, grid, bc)
        except NoCrossingError:
            fronts[i] = np.nan
    return TrajectoryRecord(
        times=np.array(times),
        snapshots=snapshots,
        bc=bc,
        front_positions=fronts,
        l2_norms_sq=np.array(ledger["norm_sq"]),
        energy_terms={k: np.array(v) for k, v in ledger.items()},
        seed=cfg.seed,
        stream=cfg.stream,
        config_hash=config_hash(grid, w.J, p, n, cfg),
        dt=dt,
        steps=steps,
        x=grid.x,
    )


def deterministic_solve(u0, grid, w, p, cfg) -> TrajectoryRecord:
    return integrate(u0, grid, w, p, NoiseSpec(sigma=0.0, K=0), cfg)


def energy_residual(rec: TrajectoryRecord) -> float:
    if rec.energy_terms is None or any(k not in rec.energy_terms for k in LEDGER_TERMS):
        raise ContractError("trajectory record carries no energy ledger")
    if len(rec.times) <= 1:
        return 0.0
    return float(np.max(np.abs(rec.residuals())))
