"""Cubic bistable reaction term and its one-sided Lipschitz constant."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ReactionParams:
    a: float = 0.25
    nu: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ValueError(f"threshold a must lie in (0, 1), got {self.a}")
        if not self.nu > 0.0:
            raise ValueError(f"diffusion coefficient must be positive, got {self.nu}")


def f_eval(u, p: ReactionParams):
    """u (1 - u)(u - a), elementwise."""
    return u * (1.0 - u) * (u - p.a)


def f_prime(u, p: ReactionParams):
    return -3.0 * u * u + 2.0 * (1.0 + p.a) * u - p.a


def c_a_const(p: ReactionParams) -> float:
    """sup over the real line of f'(u); attained at u = (1 + a)/3."""
    return (p.a * p.a - p.a + 1.0) / 3.0
