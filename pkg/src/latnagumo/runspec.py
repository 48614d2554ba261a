"""Bundle of everything one trajectory needs."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .front import FrontProfile, front_initial_data
from .grid import BoundaryCondition, GridSpec, LatticeState
from .integrator import IntegratorConfig, TrajectoryRecord, integrate
from .noise import NoiseSpec
from .reaction import ReactionParams
from .stencil import StencilWeights


@dataclass(frozen=True)
class RunSetup:
    grid: GridSpec
    weights: StencilWeights
    params: ReactionParams
    noise: NoiseSpec
    cfg: IntegratorConfig
    x0: float = 0.0
    bc: BoundaryCondition = BoundaryCondition.PINNED_FRONT

    @property
    def front(self) -> FrontProfile:
        return FrontProfile.from_params(self.params, self.x0)

    def initial_state(self) -> LatticeState:
        u0 = front_initial_data(self.front, self.grid)
        return LatticeState(u0.values, 0.0, self.bc)

    def run(self, stream: int | None = None, seed: int | None = None) -> TrajectoryRecord:
        cfg = self.cfg
        if stream is not None or seed is not None:
            cfg = replace(
                cfg,
                stream=cfg.stream if stream is None else stream,
                seed=cfg.seed if seed is None else seed,
            )
        return integrate(self.initial_state(), self.grid, self.weights, self.params, self.noise, cfg)

    def replace(self, **changes) -> RunSetup:
        return replace(self, **changes)

    def with_spacing(self, h: float) -> RunSetup:
        return replace(self, grid=GridSpec.from_spacing(self.grid.L, h, self.grid.ghost))

    def deterministic(self) -> RunSetup:
        return replace(self, noise=self.noise.with_sigma(0.0))


__all__ = ["RunSetup", "BoundaryCondition"]
