"""Command orchestration: config in, CSVs + manifest + verdict out."""

from __future__ import annotations

import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import artifacts
from .artifacts import Verdict, write_csv
from .certify import check_coercivity, check_monotonicity
from .config import build_grid, build_setup, build_weights, resolve
from .front import FrontProfile, tw_residual
from .integrator import LEDGER_TERMS, TrajectoryRecord, energy_residual
from .montecarlo import mc_probability
from .noise import RNG_ALGORITHM, RngStream, trace_deficit, trace_q
from .reaction import ReactionParams
from .stencil import validate_weights
from .studies import convergence_study, cutoff_study, small_noise_study
from .tracking import estimate_speed

COMMANDS = (
    "simulate",
    "deterministic",
    "mc",
    "verify-stencil",
    "certify",
    "converge",
    "small-noise",
    "cutoff",
    "front-oracle",
)


def _write_trajectory(out: Path, rec: TrajectoryRecord) -> None:
    x = rec.x
    write_csv(
        out / "snapshots.csv",
        ["t", "x", "u"],
        ((t, xi, ui) for t, row in zip(rec.times, rec.snapshots) for xi, ui in zip(x, row)),
    )
    res = rec.residuals()
    write_csv(
        out / "ledger.csv",
        ["t", *LEDGER_TERMS, "residual"],
        (
            (t, *(rec.energy_terms[k][i] for k in LEDGER_TERMS), res[i])
            for i, t in enumerate(rec.times)
        ),
    )
    write_csv(
        out / "fronts.csv",
        ["t", "position", "l2_norm_sq"],
        zip(rec.times, rec.front_positions, rec.l2_norms_sq),
    )


def _trajectory_verdicts(cfg, rec):
    verdicts = [Verdict("completed", True, f"{rec.steps} steps to t={rec.times[-1]:.6g}")]
    tol = cfg["check.energy_residual_max"]
    if tol >= 0:
        r = energy_residual(rec)
        verdicts.append(Verdict("energy_residual", r <= tol, f"max |residual| = {r:.6g} (tol {tol:g})"))
    return verdicts


def cmd_simulate(cfg, out, workers):
    setup = build_setup(cfg)
    rec = setup.run()
    _write_trajectory(out, rec)
    return _trajectory_verdicts(cfg, rec), {"seeds": {"seed": rec.seed, "stream": rec.stream}}


def cmd_deterministic(cfg, out, workers):
    setup = build_setup(cfg).deterministic()
    rec = setup.run()
    _write_trajectory(out, rec)
    verdicts = _trajectory_verdicts(cfg, rec)
    summary = []
    keep = rec.times >= cfg["check.speed_fit_from"] - 1e-12
    if np.count_nonzero(np.isfinite(rec.front_positions[keep])) >= 2:
        fit = estimate_speed(rec.front_positions[keep], rec.times[keep])
        c = setup.front.c
        summary = [("fitted_speed", fit.slope), ("analytic_speed", c), ("residual_rms", fit.residual_rms)]
        tol = cfg["check.speed_rel_tol"]
        if tol >= 0:
            err = abs(fit.slope - c) / abs(c) if c != 0 else abs(fit.slope)
            verdicts.append(Verdict("speed", err <= tol, f"fitted {fit.slope:.7g} vs {c:.7g}, error {err:.3g} (tol {tol:g})"))
    write_csv(out / "summary.csv", ["key", "value"], summary)
    return verdicts, {"seeds": {"seed": rec.seed, "stream": rec.stream}}


def cmd_mc(cfg, out, workers):
    setup = build_setup(cfg)
    M = cfg["mc.M"]
    est = mc_probability(setup, cfg["mc.delta"], M, cfg["mc.confidence"], workers=workers)
    write_csv(
        out / "trials.csv",
        ["stream", "sup_deviation", "exceeded"],
        ((m, d, d > cfg["mc.delta"]) for m, d in enumerate(est.deviations)),
    )
    write_csv(
        out / "summary.csv",
        ["key", "value"],
        [
            ("trials", est.trials),
            ("exceedances", est.exceedances),
            ("p_hat", est.p_hat),
            ("wilson_low", est.wilson_low),
            ("wilson_high", est.wilson_high),
            ("confidence", est.confidence),
            ("trace_q", trace_q(setup.noise)),
        ],
    )
    tol = cfg["mc.max_upper"]
    v = Verdict(
        "exceedance_upper_bound",
        est.wilson_high <= tol,
        f"{est.exceedances}/{M} exceedances of delta={cfg['mc.delta']:g}, "
        f"Wilson upper {est.wilson_high:.5g} (tol {tol:g}); snapshot sup is a lower bound of the path sup",
    )
    seeds = {"base_seed": setup.cfg.seed, "streams": [0, M - 1]}
    return [v], {"seeds": seeds}


def cmd_verify_stencil(cfg, out, workers):
    grid = build_grid(cfg)
    w = build_weights(cfg)
    rep = validate_weights(w, grid.h)
    write_csv(out / "stencil.csv", ["k", "J"], enumerate(w.J, start=1))
    write_csv(
        out / "summary.csv",
        ["key", "value"],
        [
            ("R", w.R),
            ("second_moment", rep.second_moment),
            ("fourth_moment", rep.fourth_moment),
            ("fourth_moment_term", rep.fourth_moment_term),
            ("h_cubed", rep.h_cubed),
            ("nonnegative", rep.nonnegative),
            ("passes", rep.passes),
        ],
    )
    return [Verdict("stencil", rep.passes, f"second_moment={rep.second_moment!r}, nonnegative={rep.nonnegative}")], {}


def cmd_certify(cfg, out, workers):
    setup = build_setup(cfg)
    gamma = None if cfg["certify.gamma"] < 0 else cfg["certify.gamma"]
    rows, verdicts = [], []
    for i, (lo, hi) in enumerate(cfg["certify.ranges"]):
        for j, check in enumerate((check_coercivity, check_monotonicity)):
            rng = RngStream(setup.cfg.seed, 2 * i + j)
            rep = check(
                setup.grid, setup.weights, setup.params, setup.noise,
                trials=cfg["certify.trials"], rng=rng, low=lo, high=hi,
                gamma=gamma, slack=cfg["certify.slack"],
            )
            rows.append((rep.kind, lo, hi, rep.trials, rep.violations, rep.max_excess, rep.min_margin, rep.gamma))
            verdicts.append(Verdict(f"{rep.kind}[{lo:g},{hi:g}]", rep.passes, f"{rep.violations} violations in {rep.trials}"))
    write_csv(
        out / "certify.csv",
        ["kind", "low", "high", "trials", "violations", "max_excess", "min_margin", "gamma"],
        rows,
    )
    return verdicts, {"seeds": {"seed": setup.cfg.seed, "streams": [0, 2 * len(cfg["certify.ranges"]) - 1]}}


def cmd_converge(cfg, out, workers):
    setup = build_setup(cfg)
    stochastic = cfg["converge.stochastic"]
    tab = convergence_study(setup, cfg["converge.h"], cfg["converge.ref_factor"], stochastic)
    write_csv(
        out / "convergence.csv",
        ["h", "error", "ratio", "order"],
        (
            (h, e, tab.ratios[i - 1] if i else float("nan"), tab.orders[i - 1] if i else float("nan"))
            for i, (h, e) in enumerate(zip(tab.h, tab.errors))
        ),
    )
    if stochastic:
        ok = all(a > b for a, b in zip(tab.errors, tab.errors[1:]))
        return [Verdict("monotone_errors", ok, f"errors {['%.4g' % e for e in tab.errors]}")], {}
    lo, hi = cfg["converge.ratio_min"], cfg["converge.ratio_max"]
    ok = all(lo <= r <= hi for r in tab.ratios)
    return [Verdict("error_ratios", ok, f"ratios {['%.4g' % r for r in tab.ratios]} in [{lo:g}, {hi:g}]")], {}


def cmd_small_noise(cfg, out, workers):
    setup = build_setup(cfg)
    M = cfg["small_noise.M"]
    tab = small_noise_study(setup, cfg["small_noise.sigma2"], M, workers=workers)
    write_csv(
        out / "small_noise.csv",
        ["sigma2", "trace", "mean_sup_sq", "stderr", "ratio"],
        (
            (s, t, m, e, tab.ratios[i - 1] if i else float("nan"))
            for i, (s, t, m, e) in enumerate(zip(tab.sigma2, tab.trace, tab.mean_sup_sq, tab.stderr))
        ),
    )
    lo, hi = cfg["small_noise.ratio_min"], cfg["small_noise.ratio_max"]
    slo, shi = cfg["small_noise.slope_min"], cfg["small_noise.slope_max"]
    ratios = [r for r in tab.ratios if math.isfinite(r)]
    verdicts = [
        Verdict("doubling_ratios", bool(ratios) and all(lo <= r <= hi for r in ratios),
                f"ratios {['%.4g' % r for r in tab.ratios]} in [{lo:g}, {hi:g}]"),
        Verdict("loglog_slope", slo <= tab.slope <= shi, f"slope {tab.slope:.4g} in [{slo:g}, {shi:g}]"),
    ]
    return verdicts, {"seeds": {"base_seed": setup.cfg.seed, "streams": [0, M - 1]}}


def cmd_cutoff(cfg, out, workers):
    setup = build_setup(cfg)
    tab = cutoff_study(setup.front, cfg["cutoff.L"], cfg["cutoff.h"], cfg["cutoff.T"], setup.weights)
    write_csv(
        out / "cutoff.csv",
        ["L", "deviation", "tail_mass", "flagged"],
        zip(tab.L, tab.deviation, tab.tail, tab.flagged),
    )
    write_csv(out / "summary.csv", ["key", "value"], [("slope", tab.slope), ("intercept", tab.intercept), ("r2", tab.r2)])
    ok = tab.slope < 0 and tab.r2 >= cfg["cutoff.r2_min"]
    return [Verdict("exponential_decay", bool(ok), f"slope {tab.slope:.4g}, R^2 {tab.r2:.4g} (min {cfg['cutoff.r2_min']:g})")], {}


def cmd_front_oracle(cfg, out, workers):
    p = ReactionParams(cfg["reaction.a"], cfg["reaction.nu"])
    fp = FrontProfile.from_params(p)
    zmax = cfg["front_oracle.zeta_max"]
    res = tw_residual(fp, np.linspace(-zmax, zmax, cfg["front_oracle.points"]))
    row = (p.a, p.nu, fp.c, fp.s, res)
    write_csv(out / "front_oracle.csv", ["a", "nu", "c", "s", "residual_max"], [row])
    tol = cfg["front_oracle.tol"]
    return [Verdict("tw_residual", res <= tol, f"max residual {res:.3g} (tol {tol:g})")], {}


HANDLERS = {
    "simulate": cmd_simulate,
    "deterministic": cmd_deterministic,
    "mc": cmd_mc,
    "verify-stencil": cmd_verify_stencil,
    "certify": cmd_certify,
    "converge": cmd_converge,
    "small-noise": cmd_small_noise,
    "cutoff": cmd_cutoff,
    "front-oracle": cmd_front_oracle,
}


def _derived(cfg) -> dict:
    out = {"rng_algorithm": RNG_ALGORITHM}
    try:
        setup = build_setup(cfg)
    except Exception:  # verify-stencil and front-oracle do not need a full setup
        return out
    from .integrator import stability_max_dt

    out.update(
        h=setup.grid.h,
        N=setup.grid.N,
        weights=list(setup.weights.J),
        stability_bound=stability_max_dt(setup.grid, setup.weights, setup.params),
        trace_q=trace_q(setup.noise),
        trace_deficit=trace_deficit(setup.noise),
        analytic_speed=setup.front.c,
    )
    return out


def execute(command: str, cfg: dict, out, workers: int | None = None) -> list[Verdict]:
    """Run ``command`` with a resolved config, writing artifacts into ``out``."""
    if command not in HANDLERS:
        raise ValueError(f"unknown command {command!r}")
    cfg = resolve(cfg, env={})
    if workers is not None:
        cfg["run.workers"] = int(workers)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    derived = _derived(cfg)
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    verdicts, extra = HANDLERS[command](cfg, out, cfg["run.workers"])
    manifest = {
        "command": command,
        "config": cfg,
        "derived": derived,
        "seeds": extra.get("seeds", {"seed": cfg["rng.seed"]}),
        "environment": artifacts.environment_info(),
        "wall_clock": {"started": started.isoformat(), "elapsed_s": time.perf_counter() - t0},
        "verdicts": [v.line() for v in verdicts],
    }
    artifacts.write_manifest(out, manifest)
    artifacts.write_verdicts(out, verdicts)
    return verdicts


def rerun(manifest_path, out, workers: int | None = None) -> list[Verdict]:
    m = artifacts.read_manifest(manifest_path)
    return execute(m["command"], m["config"], out, workers)


def report(verdicts, stream=sys.stdout) -> int:
    for v in verdicts:
        print(v.line(), file=stream)
    return 0 if all(v.passed for v in verdicts) else 1
