"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line, printed immediately and again in the
terminal summary. Run with ``pytest tests/test_acceptance.py -s -v``.
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from latnagumo import (
    BoundaryCondition,
    FrontProfile,
    GridSpec,
    IntegratorConfig,
    LatticeState,
    NoiseSpec,
    ReactionParams,
    RunSetup,
    apply_laplacian,
    check_coercivity,
    check_monotonicity,
    convergence_study,
    cutoff_study,
    dirichlet_form,
    energy_residual,
    estimate_speed,
    gaussian_weights,
    mc_probability,
    nearest_neighbor,
    small_noise_study,
    trace_q,
    tw_residual,
)
from latnagumo.cli import main as cli_main
from latnagumo.stencil import laplacian_padded

pytestmark = pytest.mark.acceptance

ZETA = np.linspace(-30.0, 30.0, 6001)
SPEED = -0.3535534


def record(tag, ok, detail, elapsed, budget):
    in_time = elapsed < budget
    line = f"{'PASS' if ok and in_time else 'FAIL'} {tag}: {detail} [{elapsed:.2f} s of {budget:g} s]"
    ACCEPTANCE_LINES.append(line)
    print("\n" + line)
    assert ok, line
    assert in_time, line


def front_gate():
    worst = 0.0
    for a in np.linspace(0.05, 0.95, 10):
        for nu in np.geomspace(0.1, 10.0, 10):
            worst = max(worst, tw_residual(FrontProfile.from_params(ReactionParams(a, nu)), ZETA))
    return worst


def test_ac01_front_oracle_gate():
    t0 = time.perf_counter()
    worst = front_gate()
    record("AC1 front oracle", worst <= 1e-10, f"max residual {worst:.3g} over 100 (a, nu) pairs (tol 1e-10)",
           time.perf_counter() - t0, 1.0)


def test_ac02_stencil_exactness():
    t0 = time.perf_counter()
    g = GridSpec(10.0, 399)
    worst = {}
    for name, w in (("nearest", nearest_neighbor()), ("gaussian(3,1)", gaussian_weights(3, 1.0))):
        R = w.R
        xp = g.coord(np.arange(1 - R, g.N + R + 1))
        out = laplacian_padded(xp**2, g.h, w)
        far = (g.x - (-g.L) >= R * g.h) & (g.L - g.x >= R * g.h)
        worst[name] = float(np.max(np.abs(out[far] - 2.0)))
    ok = all(v <= 1e-10 for v in worst.values())
    record("AC2 stencil exactness", ok, ", ".join(f"{k} max|err| {v:.2g}" for k, v in worst.items()) + " (tol 1e-10)",
           time.perf_counter() - t0, 1.0)


def test_ac03_summation_by_parts():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    g = GridSpec(10.0, 199)
    worst = 0.0
    for R in (1, 3, 5):
        w = nearest_neighbor() if R == 1 else gaussian_weights(R, 1.0)
        for _ in range(100):
            s = LatticeState(rng.normal(size=g.N), bc=BoundaryCondition.ZERO_DIRICHLET)
            E = dirichlet_form(s, g, w)
            worst = max(worst, abs(g.h * float(apply_laplacian(s, g, w) @ s.values) + E) / E)
    record("AC3 summation by parts", worst <= 1e-12, f"max relative defect {worst:.2g} (tol 1e-12)",
           time.perf_counter() - t0, 1.0)


def fitted_speed(a, w):
    g = GridSpec.from_spacing(20.0, 0.05)
    setup = RunSetup(g, w, ReactionParams(a, 1.0), NoiseSpec(0.0),
                     IntegratorConfig(5e-4, 10.0, "semi-implicit", snapshot_stride=100))
    rec = setup.run()
    keep = rec.times >= 2.0 - 1e-12
    return estimate_speed(rec.front_positions[keep], rec.times[keep]).slope


def test_ac04_deterministic_speed():
    assert front_gate() <= 1e-10, "front oracle gate failed; speed tests not run"
    t0 = time.perf_counter()
    c_nn = fitted_speed(0.25, nearest_neighbor())
    t1 = time.perf_counter()
    c_g = fitted_speed(0.25, gaussian_weights(3, 1.0))
    t2 = time.perf_counter()
    e_nn, e_g = abs(c_nn / SPEED - 1), abs(c_g / SPEED - 1)
    ok = e_nn <= 0.02 and e_g <= 0.03 and t1 - t0 < 30 and t2 - t1 < 30
    record("AC4 deterministic speed", ok,
           f"nearest {c_nn:.7f} (err {e_nn:.2%}, tol 2%), gaussian(3,1) {c_g:.7f} (err {e_g:.2%}, tol 3%), "
           f"runs {t1 - t0:.1f} s / {t2 - t1:.1f} s", t2 - t0, 60.0)


def test_ac05_standing_wave():
    assert front_gate() <= 1e-10, "front oracle gate failed; speed tests not run"
    t0 = time.perf_counter()
    c = fitted_speed(0.5, nearest_neighbor())
    record("AC5 standing wave", abs(c) <= 1e-3, f"|fitted speed| {abs(c):.3g} (tol 1e-3)", time.perf_counter() - t0, 30.0)


def test_ac06_spatial_order():
    t0 = time.perf_counter()
    setup = RunSetup(GridSpec(10.0, 99), nearest_neighbor(), ReactionParams(0.25), NoiseSpec(0.0),
                     IntegratorConfig(2.5e-4, 2.0, "semi-implicit", snapshot_stride=10**6))
    tab = convergence_study(setup, [0.2, 0.1, 0.05], ref_factor=4)
    ok = all(3.0 <= r <= 5.0 for r in tab.ratios)
    record("AC6 spatial order", ok,
           f"errors {', '.join(f'{e:.3g}' for e in tab.errors)}; ratios {', '.join(f'{r:.3f}' for r in tab.ratios)} "
           f"(band [3, 5], reference h = {tab.h_ref:g})", time.perf_counter() - t0, 60.0)


def test_ac07_certification():
    t0 = time.perf_counter()
    g = GridSpec(10.0, 199)
    reports = []
    for w in (nearest_neighbor(), gaussian_weights(3, 1.0)):
        for lo, hi in ((0.0, 1.0), (-2.0, 3.0)):
            for i, check in enumerate((check_coercivity, check_monotonicity)):
                reports.append(check(g, w, ReactionParams(0.25), None, trials=10_000,
                                     rng=np.random.default_rng(100 + i), low=lo, high=hi, gamma=0.0))
    bad = sum(r.violations for r in reports)
    margin = min(r.min_margin for r in reports)
    record("AC7 inequality certification", bad == 0,
           f"{bad} violations beyond 1e-12 across {len(reports)} runs of 1e4 (smallest margin {margin:.3g})",
           time.perf_counter() - t0, 10.0)


def test_ac08_energy_identity():
    t0 = time.perf_counter()
    g = GridSpec.from_spacing(20.0, 0.1)
    noise = NoiseSpec(math.sqrt(1e-3), rho=1.0, K=64)
    means = []
    for dt in (1e-3, 5e-4):
        setup = RunSetup(g, nearest_neighbor(), ReactionParams(0.25), noise,
                         IntegratorConfig(dt, 1.0, snapshot_stride=1, seed=7))
        means.append(np.mean([energy_residual(setup.run(stream=m)) for m in range(20)]))
    ratio = means[0] / means[1]
    record("AC8 energy identity", 1.5 <= ratio <= 3.0,
           f"mean max|residual| {means[0]:.4g} -> {means[1]:.4g}, ratio {ratio:.4f} (band [1.5, 3])",
           time.perf_counter() - t0, 120.0)


def test_ac09_small_noise_scaling():
    t0 = time.perf_counter()
    setup = RunSetup(GridSpec.from_spacing(20.0, 0.1), nearest_neighbor(), ReactionParams(0.25),
                     NoiseSpec(0.0, rho=1.0, K=64), IntegratorConfig(2e-3, 5.0, snapshot_stride=10, seed=11))
    tab = small_noise_study(setup, [1e-4, 2e-4, 4e-4], M=100)
    ok = all(1.6 <= r <= 2.6 for r in tab.ratios) and 0.8 <= tab.slope <= 1.2
    record("AC9 small-noise scaling", ok,
           f"ratios {', '.join(f'{r:.4f}' for r in tab.ratios)} (band [1.6, 2.6]), slope {tab.slope:.4f} "
           f"(band [0.8, 1.2])", time.perf_counter() - t0, 600.0)


def stability_setup(trace):
    sigma = math.sqrt(trace / trace_q(NoiseSpec(1.0, rho=1.0, K=64)))
    return RunSetup(GridSpec.from_spacing(20.0, 0.05), nearest_neighbor(), ReactionParams(0.25, 1.0),
                    NoiseSpec(sigma, rho=1.0, K=64), IntegratorConfig(5e-4, 5.0, snapshot_stride=10, seed=2024))


def test_ac10_front_stability_probability():
    t0 = time.perf_counter()
    main = mc_probability(stability_setup(1e-3), delta=0.5, M=200)
    t1 = time.perf_counter()
    control = mc_probability(stability_setup(1e-1), delta=0.5, M=200)
    t2 = time.perf_counter()
    main_ok = main.exceedances <= 1 and main.wilson_high <= 0.03
    control_ok = control.p_hat > main.p_hat
    pathwise = float(np.mean(np.array(control.deviations) > np.array(main.deviations)))
    detail = (f"main: {main.exceedances}/200 exceed delta=0.5, Wilson upper {main.wilson_high:.4f} (tol 0.03), "
              f"max sup deviation {max(main.deviations):.4f}; control (trace x100): p_hat {control.p_hat:.3f} vs "
              f"{main.p_hat:.3f} (must be strictly larger), max sup deviation {max(control.deviations):.4f}, "
              f"larger sup on {pathwise:.0%} of paths")
    record("AC10 front stability probability", main_ok and control_ok, detail, t2 - t0, 900.0)


def test_ac11_cutoff_decay():
    t0 = time.perf_counter()
    fp = FrontProfile.from_params(ReactionParams(0.25, 1.0))
    tab = cutoff_study(fp, [8.0, 12.0, 16.0, 20.0], h=0.025, T=2.0, w=nearest_neighbor())
    ok = tab.slope < 0 and tab.r2 >= 0.95 and not any(tab.flagged)
    record("AC11 cut-off decay", ok,
           f"deviations {', '.join(f'{d:.3g}' for d in tab.deviation)}; slope {tab.slope:.4f}, R^2 {tab.r2:.4f} (min 0.95)",
           time.perf_counter() - t0, 300.0)


def test_ac12_reproducibility(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        "domain.L = 10.0\ngrid.h = 0.1\nnoise.sigma = 0.05\nintegrator.dt = 0.002\n"
        "integrator.T = 1.0\nrng.seed = 5\nmc.M = 4\nmc.delta = 0.5\n"
    )
    t0 = time.perf_counter()
    same, worst = [], 0.0
    for cmd in ("simulate", "mc", "certify"):
        a, b = tmp_path / f"{cmd}-a", tmp_path / f"{cmd}-b"
        s0 = time.perf_counter()
        cli_main([cmd, "--config", str(cfg), "--out", str(a)])
        first = time.perf_counter() - s0
        s0 = time.perf_counter()
        cli_main(["rerun", str(a / "manifest.json"), "--out", str(b)])
        second = time.perf_counter() - s0
        worst = max(worst, second / first)
        csvs = sorted(p.name for p in a.glob("*.csv"))
        same.append(bool(csvs) and all((a / n).read_bytes() == (b / n).read_bytes() for n in csvs))
        assert json.loads((b / "manifest.json").read_text())["command"] == cmd
    ok = all(same) and worst < 1.5
    record("AC12 reproducibility", ok,
           f"byte-identical CSVs for simulate/mc/certify: {same}; rerun/run time ratio at most {worst:.2f}",
           time.perf_counter() - t0, 120.0)
