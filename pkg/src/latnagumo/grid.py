"""Uniform grid over [-L, L], lattice states and boundary extension."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, EvaluationError, NonFiniteStateError


class BoundaryCondition(enum.Enum):
    PINNED_FRONT = "pinned"
    ZERO_DIRICHLET = "dirichlet0"
    NEUMANN = "neumann"

    @property
    def left_value(self) -> float | None:
        return {"pinned": 0.0, "dirichlet0": 0.0}.get(self.value)

    @property
    def right_value(self) -> float | None:
        return {"pinned": 1.0, "dirichlet0": 0.0}.get(self.value)

    @classmethod
    def parse(cls, name: str | BoundaryCondition) -> BoundaryCondition:
        if isinstance(name, cls):
            return name
        aliases = {
            "pinned": cls.PINNED_FRONT,
            "pinnedfront": cls.PINNED_FRONT,
            "pinned_front": cls.PINNED_FRONT,
            "dirichlet0": cls.ZERO_DIRICHLET,
            "zerodirichlet": cls.ZERO_DIRICHLET,
            "zero_dirichlet": cls.ZERO_DIRICHLET,
            "neumann": cls.NEUMANN,
        }
        try:
            return aliases[str(name).lower()]
        except KeyError:
            raise ValueError(f"unknown boundary condition {name!r}") from None


@dataclass(frozen=True)
class GridSpec:
    """Interior nodes x_i = -L + i*h, i = 1..N, with h = 2L/(N+1).

    ``ghost`` is the number of extension nodes addressable on each side.
    """

    L: float
    N: int
    ghost: int = 32

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"half width must be positive, got {self.L}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"interior count must be a positive integer, got {self.N}")
        if self.ghost < 1:
            raise ValueError("ghost range must be at least 1")

    @classmethod
    def from_spacing(cls, L: float, h: float, ghost: int = 32) -> GridSpec:
        cells = 2.0 * L / h
        n_cells = int(round(cells))
        if abs(cells - n_cells) > 1e-9 * max(1.0, cells):
            raise ValueError(f"spacing {h} does not divide [-{L}, {L}] evenly")
        return cls(L=L, N=n_cells - 1, ghost=ghost)

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.N + 1)

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.h * np.arange(1, self.N + 1)

    def coord(self, index) -> np.ndarray:
        """Coordinate of (possibly ghost) node ``index``; index 0 is -L, N+1 is +L."""
        return -self.L + self.h * np.asarray(index, dtype=float)


@dataclass
class LatticeState:
    values: np.ndarray
    t: float = 0.0
    bc: BoundaryCondition = BoundaryCondition.PINNED_FRONT

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise DimensionError("lattice values must be one-dimensional")
        if not np.all(np.isfinite(self.values)):
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise NonFiniteStateError(f"non-finite value at node {bad + 1}")
        self.bc = BoundaryCondition.parse(self.bc)

    def copy(self) -> LatticeState:
        return LatticeState(self.values.copy(), self.t, self.bc)

    def conforms(self, grid: GridSpec) -> None:
        if self.values.shape[0] != grid.N:
            raise DimensionError(
                f"state has {self.values.shape[0]} nodes, grid has N={grid.N}"
            )


def pad(values: np.ndarray, bc: BoundaryCondition, width: int) -> np.ndarray:
    """Return the values with ``width`` extension nodes on each side."""
    n = values.shape[-1]
    if bc is BoundaryCondition.NEUMANN:
        if width > n:
            raise IndexError(f"mirror extension of width {width} needs N >= {width}")
        left = values[..., :width][..., ::-1]
        right = values[..., n - width:][..., ::-1]
        return np.concatenate([left, values, right], axis=-1)
    shape = values.shape[:-1] + (width,)
    left = np.full(shape, bc.left_value)
    right = np.full(shape, bc.right_value)
    return np.concatenate([left, values, right], axis=-1)


def extend(state: LatticeState, grid: GridSpec, index: int) -> float:
    """Value at 1-based node ``index``, using the boundary extension off-grid."""
    state.conforms(grid)
    N = grid.N
    if index < 1 - grid.ghost or index > N + grid.ghost:
        raise IndexError(
            f"node {index} outside ghost range [{1 - grid.ghost}, {N + grid.ghost}]"
        )
    if 1 <= index <= N:
        return float(state.values[index - 1])
    bc = state.bc
    if bc is BoundaryCondition.NEUMANN:
        mirrored = 1 - index if index <= 0 else 2 * N + 1 - index
        return float(state.values[mirrored - 1])
    return bc.left_value if index <= 0 else bc.right_value


def sample_function(
    grid: GridSpec,
    f: Callable[[np.ndarray], np.ndarray],
    bc: BoundaryCondition | str = BoundaryCondition.PINNED_FRONT,
) -> LatticeState:
    values = np.asarray(f(grid.x), dtype=float)
    if values.shape == ():
        values = np.full(grid.N, float(values))
    if not np.all(np.isfinite(values)):
        raise EvaluationError("sampled function returned a non-finite value")
    return LatticeState(values, 0.0, BoundaryCondition.parse(bc))


def discrete_l2_norm_sq(state: LatticeState, grid: GridSpec) -> float:
    state.conforms(grid)
    return grid.h * float(np.dot(state.values, state.values))


def l2_distance_sq(a: LatticeState, b: LatticeState, grid: GridSpec) -> float:
    a.conforms(grid)
    b.conforms(grid)
    if a.bc is not b.bc:
        raise DimensionError(f"boundary mismatch: {a.bc.name} vs {b.bc.name}")
    d = a.values - b.values
    return grid.h * float(np.dot(d, d))
