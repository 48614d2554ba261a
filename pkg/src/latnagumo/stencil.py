"""Nonlocal second-difference operator and its Dirichlet form.

Weights are stored one-sided, J(1..R); the mirror J(-k) = J(k) is implied.
Normalization is sum_{k=1..R} J(k) k^2 = 1, which makes

    (1/h^2) sum_k J(k) (u_{i+k} - 2 u_i + u_{i-k})

consistent with d^2/dx^2 (nearest neighbour: J(1) = 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ContractError, DegenerateStencilError
from .grid import BoundaryCondition, GridSpec, LatticeState, pad

MOMENT_TOL = 1e-12


@dataclass
class StencilWeights:
    J: tuple[float, ...]
    validated: bool = False

    def __post_init__(self):
        self.J = tuple(float(v) for v in self.J)
        if len(self.J) < 1:
            raise DegenerateStencilError("stencil needs at least one weight")

    @property
    def R(self) -> int:
        return len(self.J)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.J)

    @property
    def second_moment(self) -> float:
        """One-sided moment sum_{k>=1} J(k) k^2 (half the two-sided sum)."""
        k = np.arange(1, self.R + 1)
        return float(np.sum(self.array * k**2))

    @property
    def fourth_moment(self) -> float:
        k = np.arange(1, self.R + 1)
        return float(np.sum(self.array * k**4))

    @property
    def row_sum(self) -> float:
        """S = sum over j != 0 of J(j)."""
        return 2.0 * float(np.sum(self.array))

    def scaled(self, s: float) -> StencilWeights:
        return StencilWeights(tuple(s * v for v in self.J), validated=False)


@dataclass(frozen=True)
class ValidationReport:
    symmetric: bool
    second_moment: float
    fourth_moment: float
    nonnegative: bool
    passes: bool
    fourth_moment_term: float  # h^4 * fourth moment
    h_cubed: float


def validate_weights(w: StencilWeights, h: float = 1.0) -> ValidationReport:
    m2 = w.second_moment
    m4 = w.fourth_moment
    nonneg = bool(np.all(w.array >= 0.0))
    passes = abs(m2 - 1.0) <= MOMENT_TOL and nonneg and np.isfinite(m4)
    if passes:
        w.validated = True
    return ValidationReport(
        symmetric=True,
        second_moment=m2,
        fourth_moment=m4,
        nonnegative=nonneg,
        passes=bool(passes),
        fourth_moment_term=h**4 * m4,
        h_cubed=h**3,
    )


def normalize_second_moment(raw: Sequence[float]) -> StencilWeights:
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 1 or raw.size == 0:
        raise DegenerateStencilError("raw weights must be a non-empty list")
    if np.any(raw < 0):
        raise DegenerateStencilError("raw weights must be nonnegative")
    k = np.arange(1, raw.size + 1)
    m2 = float(np.sum(raw * k**2))
    if not m2 > 0:
        raise DegenerateStencilError("raw weights have zero second moment")
    w = StencilWeights(tuple(raw / m2))
    validate_weights(w)
    return w


def nearest_neighbor() -> StencilWeights:
    return StencilWeights((1.0,), validated=True)


def gaussian_weights(R: int, width: float) -> StencilWeights:
    if int(R) != R or R < 1:
        raise ValueError(f"stencil range must be a positive integer, got {R}")
    if not width > 0:
        raise ValueError(f"gaussian width must be positive, got {width}")
    k = np.arange(1, int(R) + 1)
    return normalize_second_moment(np.exp(-(k**2) / (2.0 * width**2)))


def _require(w: StencilWeights, grid: GridSpec | None = None) -> None:
    if not w.validated:
        raise ContractError("stencil weights have not passed validation")
    if grid is not None and grid.ghost < w.R:
        raise ContractError(f"grid ghost range {grid.ghost} < stencil range {w.R}")


def laplacian_padded(padded: np.ndarray, h: float, w: StencilWeights) -> np.ndarray:
    """Apply the stencil to an array carrying R extension nodes per side.

    Works on the last axis, so a stack of states can be processed at once.
    """
    R = w.R
    n = padded.shape[-1] - 2 * R
    centre = padded[..., R:R + n]
    out = np.zeros_like(centre)
    for k, Jk in enumerate(w.J, start=1):
        if Jk == 0.0:
            continue
        out += Jk * (padded[..., R + k:R + k + n] + padded[..., R - k:R - k + n] - 2.0 * centre)
    return out / (h * h)


def apply_laplacian(state: LatticeState, grid: GridSpec, w: StencilWeights) -> np.ndarray:
    _require(w, grid)
    state.conforms(grid)
    return laplacian_padded(pad(state.values, state.bc, w.R), grid.h, w)


def dirichlet_form_padded(padded: np.ndarray, h: float, w: StencilWeights) -> np.ndarray:
    R = w.R
    n = padded.shape[-1] - 2 * R
    total = np.zeros(padded.shape[:-1])
    for k, Jk in enumerate(w.J, start=1):
        # pairs (i, i+k) with i in [1-k, N]: at least one endpoint interior
        lo = padded[..., R - k:R + n]
        hi = padded[..., R:R + n + k]
        total = total + Jk * np.sum((hi - lo) ** 2, axis=-1)
    return total / h


def dirichlet_form(state: LatticeState, grid: GridSpec, w: StencilWeights) -> float:
    """E_R(u) = (1/h) sum_k J(k) sum_i (u_{i+k} - u_i)^2 over pairs touching the interior."""
    _require(w, grid)
    state.conforms(grid)
    return float(dirichlet_form_padded(pad(state.values, state.bc, w.R), grid.h, w))


def operator_matrix(
    grid: GridSpec, w: StencilWeights, bc: BoundaryCondition | str
) -> tuple[sp.csr_matrix, np.ndarray]:
    """Sparse A and vector b with apply_laplacian(u) == A @ u + b."""
    _require(w, grid)
    bc = BoundaryCondition.parse(bc)
    N, h2 = grid.N, grid.h**2
    rows, cols, vals = [], [], []
    b = np.zeros(N)
    idx = np.arange(N)
    rows.append(idx)
    cols.append(idx)
    vals.append(np.full(N, -2.0 * sum(w.J)))
    for k, Jk in enumerate(w.J, start=1):
        for sign in (1, -1):
            j = idx + sign * k
            inside = (j >= 0) & (j < N)
            rows.append(idx[inside])
            cols.append(j[inside])
            vals.append(np.full(int(inside.sum()), Jk))
            out = ~inside
            if not out.any():
                continue
            if bc is BoundaryCondition.NEUMANN:
                # node index (0-based) j < 0 mirrors to -1 - j; j >= N to 2N - 1 - j
                m = np.where(j[out] < 0, -1 - j[out], 2 * N - 1 - j[out])
                rows.append(idx[out])
                cols.append(m)
                vals.append(np.full(int(out.sum()), Jk))
            else:
                ghost = np.where(j[out] < 0, bc.left_value, bc.right_value)
                np.add.at(b, idx[out], Jk * ghost)
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N)
    ).tocsr()
    return A / h2, b / h2
