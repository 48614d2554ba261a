"""Multiplicative noise shape and truncated Q-Wiener increments.

Spectral mode expands the increment in the Dirichlet sine basis of [-L, L]

    dW(x_i) = sum_{k<=K} sqrt(mu_k) e_k(x_i) xi_k sqrt(dt),  mu_k = sigma^2 k^(-2 rho)

with e_k(x) = sin(k pi (x + L) / 2L) / sqrt(L). PerNodeIID mode draws an
independent sigma * xi_i * sqrt(dt / h) at every node.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .grid import GridSpec

RNG_ALGORITHM = "numpy.random.PCG64 seeded by SeedSequence(entropy=seed, spawn_key=(stream,))"


class NoiseMode(enum.Enum):
    SPECTRAL = "spectral"
    PER_NODE_IID = "pernode"

    @classmethod
    def parse(cls, name) -> NoiseMode:
        if isinstance(name, cls):
            return name
        key = str(name).lower().replace("_", "").replace("-", "")
        for m in cls:
            if key in (m.value, m.name.lower().replace("_", "")):
                return m
        raise ValueError(f"unknown noise mode {name!r}")


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 0.0
    rho: float = 1.0
    K: int = 64
    mode: NoiseMode = NoiseMode.SPECTRAL
    g_shape: str = "front"

    def __post_init__(self):
        object.__setattr__(self, "mode", NoiseMode.parse(self.mode))
        if self.sigma < 0:
            raise ValueError("noise amplitude must be nonnegative")
        if not self.rho > 0.5:
            raise ValueError("spectral decay rho must exceed 1/2 for a trace-class Q")
        if int(self.K) != self.K or self.K < 0:
            raise ValueError("truncation K must be a nonnegative integer")
        if self.g_shape != "front":
            raise ValueError(f"unsupported noise shape {self.g_shape!r}")

    @property
    def silent(self) -> bool:
        return self.sigma == 0.0 or (self.mode is NoiseMode.SPECTRAL and self.K == 0)

    def eigenvalues(self) -> np.ndarray:
        k = np.arange(1, self.K + 1, dtype=float)
        return self.sigma**2 * k ** (-2.0 * self.rho)

    def with_sigma(self, sigma: float) -> NoiseSpec:
        return NoiseSpec(sigma, self.rho, self.K, self.mode, self.g_shape)


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))


def g_eval(u, n: NoiseSpec | None = None):
    """clamp(u, 0, 1) * (1 - clamp(u, 0, 1)); vanishes at both stable states."""
    c = np.clip(u, 0.0, 1.0)
    return c * (1.0 - c)


def trace_q(n: NoiseSpec) -> float:
    return float(np.sum(n.eigenvalues()))


def hilbert_schmidt_sq(n: NoiseSpec) -> float:
    return float(np.sum(n.eigenvalues() ** 2))


def operator_norm(n: NoiseSpec) -> float:
    mu = n.eigenvalues()
    return float(mu[0]) if mu.size else 0.0


def trace_deficit(n: NoiseSpec) -> float:
    """Trace of the modes dropped by truncating at K."""
    full = n.sigma**2 * float(zeta(2.0 * n.rho))
    return max(full - trace_q(n), 0.0)


def eigenbasis(grid: GridSpec, K: int) -> np.ndarray:
    """(N, K) matrix of e_k(x_i)."""
    k = np.arange(1, K + 1)
    arg = np.outer(grid.x + grid.L, k) * (np.pi / (2.0 * grid.L))
    return np.sin(arg) / np.sqrt(grid.L)


class IncrementSampler:
    """Precomputed increment generator for one (noise, grid) pair."""

    def __init__(self, n: NoiseSpec, grid: GridSpec):
        self.noise = n
        self.grid = grid
        self.mode = n.mode
        if n.mode is NoiseMode.SPECTRAL:
            self.modes = eigenbasis(grid, n.K) * np.sqrt(n.eigenvalues())
        else:
            self.modes = None

    def variance_density(self) -> np.ndarray:
        """Per-node variance of the increment divided by dt."""
        if self.noise.silent:
            return np.zeros(self.grid.N)
        if self.mode is NoiseMode.SPECTRAL:
            return np.sum(self.modes**2, axis=1)
        return np.full(self.grid.N, self.noise.sigma**2 / self.grid.h)

    def draw(self, dt: float, rng: np.random.Generator) -> np.ndarray:
        if not dt > 0:
            raise ValueError(f"time step must be positive, got {dt}")
        n = self.noise
        if self.mode is NoiseMode.SPECTRAL:
            if n.K == 0:
                return np.zeros(self.grid.N)
            xi = rng.standard_normal(n.K)
            return self.modes @ xi * np.sqrt(dt)
        xi = rng.standard_normal(self.grid.N)
        return n.sigma * np.sqrt(dt / self.grid.h) * xi


def wiener_increment(n: NoiseSpec, grid: GridSpec, dt: float, rng) -> np.ndarray:
    if isinstance(rng, RngStream):
        rng = rng.generator()
    return IncrementSampler(n, grid).draw(dt, rng)


def variance_density(n: NoiseSpec, grid: GridSpec) -> np.ndarray:
    return IncrementSampler(n, grid).variance_density()
