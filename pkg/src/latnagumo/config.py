"""Run configuration: flat dotted keys, typed defaults, validation.

A config file is a TOML document restricted to dotted keys, e.g.::

    domain.L = 20.0
    grid.N = 799
    stencil.family = "gaussian"
    stencil.R = 3
    noise.sigma = 0.02

Unknown keys are errors. Environment variables ``LATNAGUMO__SECTION__KEY``
override file values (``LATNAGUMO__NOISE__SIGMA=0.1`` sets ``noise.sigma``);
the value is parsed as a TOML value, falling back to a bare string.
"""

from __future__ import annotations

import math
import os
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .grid import BoundaryCondition, GridSpec
from .integrator import IntegratorConfig, Scheme, stability_max_dt
from .noise import NoiseMode, NoiseSpec
from .reaction import ReactionParams
from .runspec import RunSetup
from .stencil import (
    StencilWeights,
    gaussian_weights,
    nearest_neighbor,
    normalize_second_moment,
    validate_weights,
)

ENV_PREFIX = "LATNAGUMO__"

DEFAULTS: dict[str, object] = {
    "domain.L": 20.0,
    "grid.N": 399,
    "grid.h": 0.0,  # > 0 overrides grid.N
    "grid.bc": "pinned",
    "stencil.family": "nearest",
    "stencil.R": 1,
    "stencil.width": 1.0,
    "stencil.weights": [],
    "reaction.a": 0.25,
    "reaction.nu": 1.0,
    "front.x0": 0.0,
    "noise.mode": "spectral",
    "noise.sigma": 0.0,
    "noise.rho": 1.0,
    "noise.K": 64,
    "integrator.scheme": "explicit",
    "integrator.dt": 1e-3,
    "integrator.T": 5.0,
    "integrator.stride": 10,
    "rng.seed": 0,
    "run.workers": 1,
    "check.energy_residual_max": -1.0,  # < 0 disables
    "check.speed_rel_tol": -1.0,
    "check.speed_fit_from": 2.0,
    "mc.delta": 0.5,
    "mc.M": 200,
    "mc.confidence": 0.95,
    "mc.max_upper": 0.03,
    "certify.trials": 10_000,
    "certify.ranges": [[0.0, 1.0], [-2.0, 3.0]],
    "certify.gamma": -1.0,  # < 0 derives gamma from the noise settings
    "certify.slack": 1e-12,
    "converge.h": [0.2, 0.1, 0.05],
    "converge.ref_factor": 4,
    "converge.stochastic": False,
    "converge.ratio_min": 3.0,
    "converge.ratio_max": 5.0,
    "small_noise.sigma2": [1e-4, 2e-4, 4e-4],
    "small_noise.M": 100,
    "small_noise.ratio_min": 1.6,
    "small_noise.ratio_max": 2.6,
    "small_noise.slope_min": 0.8,
    "small_noise.slope_max": 1.2,
    "cutoff.L": [8.0, 12.0, 16.0, 20.0],
    "cutoff.h": 0.025,
    "cutoff.T": 2.0,
    "cutoff.r2_min": 0.95,
    "front_oracle.zeta_max": 30.0,
    "front_oracle.points": 6001,
    "front_oracle.tol": 1e-10,
}


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _coerce(key, value):
    default = DEFAULTS[key]
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{key}: expected a list, got {value!r}")
        return value
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a string, got {value!r}")
    return value


def _parse_env_value(raw: str):
    try:
        return tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        return raw


def resolve(values: dict, env=None) -> dict:
    """Merge ``values`` (and env overrides) over defaults, rejecting unknown keys."""
    cfg = dict(DEFAULTS)
    for key, value in values.items():
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        cfg[key] = _coerce(key, value)
    for name, raw in (env or {}).items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):].lower().replace("__", ".")
        match = {k.lower(): k for k in DEFAULTS}.get(key)
        if match is None:
            raise ConfigError(f"environment variable {name} names unknown key {key!r}")
        cfg[match] = _coerce(match, _parse_env_value(raw))
    return cfg


def load_config(path, env=None) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    try:
        return resolve(_flatten(data), os.environ if env is None else env)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def build_weights(cfg: dict) -> StencilWeights:
    family = str(cfg["stencil.family"]).lower()
    if family == "nearest":
        return nearest_neighbor()
    if family == "gaussian":
        return gaussian_weights(cfg["stencil.R"], cfg["stencil.width"])
    if family == "explicit":
        raw = cfg["stencil.weights"]
        if not raw:
            raise ConfigError("stencil.weights: explicit family needs a weight list")
        return normalize_second_moment(raw)
    raise ConfigError(f"stencil.family: unknown family {family!r}")


def build_grid(cfg: dict, L: float | None = None) -> GridSpec:
    L = cfg["domain.L"] if L is None else L
    if cfg["grid.h"] > 0:
        return GridSpec.from_spacing(L, cfg["grid.h"])
    return GridSpec(L, cfg["grid.N"])


def build_setup(cfg: dict) -> RunSetup:
    """Construct and validate every object a run needs before any compute."""
    key = "?"
    try:
        key = "grid"
        grid = build_grid(cfg)
        bc = BoundaryCondition.parse(cfg["grid.bc"])
        key = "stencil"
        w = build_weights(cfg)
        if not validate_weights(w, grid.h).passes:
            raise ConfigError("stencil weights fail validation")
        if w.R > grid.ghost:
            raise ConfigError(f"stencil range {w.R} exceeds ghost range {grid.ghost}")
        key = "reaction"
        p = ReactionParams(cfg["reaction.a"], cfg["reaction.nu"])
        key = "noise"
        n = NoiseSpec(cfg["noise.sigma"], cfg["noise.rho"], cfg["noise.K"], NoiseMode.parse(cfg["noise.mode"]))
        key = "integrator"
        ic = IntegratorConfig(
            cfg["integrator.dt"],
            cfg["integrator.T"],
            Scheme.parse(cfg["integrator.scheme"]),
            cfg["integrator.stride"],
            cfg["rng.seed"],
        )
        if ic.scheme is Scheme.EXPLICIT_EM:
            bound = stability_max_dt(grid, w, p)
            if ic.dt > bound:
                raise ConfigError(f"integrator.dt={ic.dt:g} exceeds explicit stability bound {bound:g}")
        if not math.isfinite(cfg["front.x0"]) or abs(cfg["front.x0"]) >= grid.L:
            key = "front"
            raise ConfigError("front.x0 must lie inside the domain")
    except ConfigError as exc:
        raise ConfigError(f"{key}: {exc}") from None
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{key}: {exc}") from None
    return RunSetup(grid, w, p, n, ic, cfg["front.x0"], bc)
