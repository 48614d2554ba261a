import math

import numpy as np
import pytest

from latnagumo import (
    BlowUpError,
    BoundaryCondition,
    FrontProfile,
    GridSpec,
    IntegratorConfig,
    LatticeState,
    NoiseSpec,
    ReactionParams,
    RunSetup,
    Scheme,
    c_a_const,
    deterministic_solve,
    em_step,
    energy_residual,
    estimate_speed,
    f_eval,
    front_initial_data,
    gaussian_weights,
    integrate,
    operator_matrix,
    semi_implicit_step,
    stability_max_dt,
)
from latnagumo.errors import ContractError
from latnagumo.noise import IncrementSampler, RngStream

BC = BoundaryCondition
SILENT = NoiseSpec(0.0)


def test_stability_examples(nn, params):
    assert stability_max_dt(GridSpec.from_spacing(20, 0.1), nn, params) == pytest.approx(0.0025)
    assert stability_max_dt(GridSpec.from_spacing(20, 0.05), nn, params) == pytest.approx(6.25e-4)
    coarse = GridSpec.from_spacing(20, 4.0)
    assert stability_max_dt(coarse, nn, params) == pytest.approx(1.5 / 0.8125)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(0.0, 1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(0.1, -1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(0.1, 1.0, snapshot_stride=0)
    assert IntegratorConfig(0.1, 1.0).n_steps == 10
    assert IntegratorConfig(0.3, 1.0).n_steps == 4
    assert IntegratorConfig(0.1, 0.0).n_steps == 0
    assert IntegratorConfig(0.1, 1.0, scheme="semi-implicit").scheme is Scheme.SEMI_IMPLICIT_EM


def test_explicit_rejects_unstable_dt(grid, nn, params):
    s = front_initial_data(FrontProfile.from_params(params), grid)
    with pytest.raises(ValueError, match="stability"):
        em_step(s, grid, nn, params, SILENT, 2 * stability_max_dt(grid, nn, params))


@pytest.mark.parametrize("level", [0.0, 0.25, 1.0])
def test_equilibria_are_fixed(level, grid, nn, params):
    s = LatticeState(np.full(grid.N, level), bc=BC.NEUMANN)
    # g vanishes at 0 and 1 only, so the threshold state is fixed only without noise
    n = NoiseSpec(0.5, K=16) if level != 0.25 else SILENT
    out = em_step(s, grid, nn, params, n, 1e-3, RngStream(1))
    assert np.all(out.values == level)
    assert out.t == pytest.approx(1e-3)


def test_quadratic_one_step(nn, params):
    g = GridSpec(5.0, 99)
    u = g.x**2 / 100
    dt = 1e-4
    out = em_step(LatticeState(u, bc=BC.NEUMANN), g, nn, params, SILENT, dt)
    inner = slice(2, -2)
    expected = u + dt * (2.0 * params.nu / 100 + f_eval(u, params))
    np.testing.assert_allclose(out.values[inner], expected[inner], rtol=0, atol=1e-14)


@pytest.mark.parametrize("bc", list(BC))
def test_step_matches_matrix_form(bc, rng, params):
    g = GridSpec(3.0, 40)
    w = gaussian_weights(3, 1.0)
    n = NoiseSpec(0.3, K=10)
    u = rng.uniform(-0.2, 1.2, g.N)
    dt = 0.5 * stability_max_dt(g, w, params)
    out = em_step(LatticeState(u, bc=bc), g, w, params, n, dt, RngStream(4, 2))
    A, b = operator_matrix(g, w, bc)
    dW = IncrementSampler(n, g).draw(dt, RngStream(4, 2).generator())
    c = np.clip(u, 0, 1)
    expected = u + dt * (params.nu * (A @ u + b) + f_eval(u, params)) + c * (1 - c) * dW
    np.testing.assert_allclose(out.values, expected, rtol=1e-12, atol=1e-14)

    implicit = semi_implicit_step(LatticeState(u, bc=bc), g, w, params, n, dt, RngStream(4, 2))
    M = np.eye(g.N) - dt * params.nu * A.toarray()
    rhs = u + dt * (f_eval(u, params) + params.nu * b) + c * (1 - c) * dW
    np.testing.assert_allclose(implicit.values, np.linalg.solve(M, rhs), rtol=1e-10, atol=1e-13)


def test_schemes_agree_for_small_dt(grid, nn, params):
    s = front_initial_data(FrontProfile.from_params(params), grid)
    a = em_step(s, grid, nn, params, SILENT, 1e-5)
    b = semi_implicit_step(s, grid, nn, params, SILENT, 1e-5)
    assert np.max(np.abs(a.values - b.values)) <= 1e-8


def test_semi_implicit_large_dt_bounded(grid, nn, params):
    s = front_initial_data(FrontProfile.from_params(params), grid)
    dt = 10 * stability_max_dt(grid, nn, params)
    dt = min(dt, 0.5 / c_a_const(params))
    rec = integrate(s, grid, nn, params, SILENT, IntegratorConfig(dt, 2.0, "semi-implicit"))
    assert np.all(np.isfinite(rec.snapshots))
    assert rec.snapshots.min() >= -1e-9 and rec.snapshots.max() <= 1 + 1e-9


def test_zero_horizon(grid, nn, params):
    s = front_initial_data(FrontProfile.from_params(params), grid)
    rec = integrate(s, grid, nn, params, NoiseSpec(0.1), IntegratorConfig(0.002, 0.0))
    assert rec.steps == 0 and len(rec.times) == 1
    assert np.array_equal(rec.snapshots[0], s.values)
    assert energy_residual(rec) == 0.0


def test_snapshots_and_metadata(grid, nn, params):
    s = front_initial_data(FrontProfile.from_params(params), grid)
    cfg = IntegratorConfig(0.0025, 0.1025, snapshot_stride=10, seed=3, stream=4)
    rec = integrate(s, grid, nn, params, SILENT, cfg)
    assert rec.steps == 41
    np.testing.assert_allclose(rec.times, [0, 0.025, 0.05, 0.075, 0.1, 0.1025])
    assert rec.snapshots.shape == (6, grid.N)
    assert (rec.seed, rec.stream) == (3, 4)
    assert len(rec.config_hash) == 16
    assert rec.final.t == pytest.approx(0.1025)


def test_front_moves_left_at_analytic_speed(nn):
    p = ReactionParams(0.25)
    g = GridSpec.from_spacing(15.0, 0.1)
    s = front_initial_data(FrontProfile.from_params(p), g)
    rec = deterministic_solve(s, g, nn, p, IntegratorConfig(0.0025, 6.0, snapshot_stride=40))
    keep = rec.times >= 2.0
    fit = estimate_speed(rec.front_positions[keep], rec.times[keep])
    assert fit.slope < 0
    assert fit.slope == pytest.approx(-math.sqrt(2) / 4, rel=5e-3)


def test_noisy_run_deterministic_given_seed(grid, nn, params):
    setup = RunSetup(grid, nn, params, NoiseSpec(0.2, K=16), IntegratorConfig(0.002, 0.2, seed=5))
    a, b = setup.run(stream=1), setup.run(stream=1)
    assert np.array_equal(a.snapshots, b.snapshots)
    assert a.config_hash == b.config_hash
    c = setup.run(stream=2)
    assert not np.array_equal(a.snapshots, c.snapshots)


def test_invariant_region_and_comparison(grid, nn, params, rng):
    dt = 0.5 * stability_max_dt(grid, nn, params)
    cfg = IntegratorConfig(dt, 1.0, snapshot_stride=50)
    for _ in range(5):
        lo = np.sort(rng.uniform(0, 1, grid.N))
        hi = np.minimum(lo + rng.uniform(0, 0.2, grid.N), 1.0)
        ra = deterministic_solve(LatticeState(lo), grid, nn, params, cfg)
        rb = deterministic_solve(LatticeState(hi), grid, nn, params, cfg)
        assert ra.snapshots.min() >= 0 and rb.snapshots.max() <= 1
        assert np.all(ra.snapshots <= rb.snapshots + 1e-15)
        # sorted data stays sorted under a monotone scheme
        assert np.all(np.diff(ra.snapshots, axis=1) >= -1e-15)


def test_gronwall_contraction(grid, nn, params, rng):
    dt = 0.5 * stability_max_dt(grid, nn, params)
    cfg = IntegratorConfig(dt, 1.0, snapshot_stride=40)
    base = front_initial_data(FrontProfile.from_params(params), grid).values
    pert = np.clip(base + 0.05 * rng.normal(size=grid.N), 0, 1)
    ra = deterministic_solve(LatticeState(base), grid, nn, params, cfg)
    rb = deterministic_solve(LatticeState(pert), grid, nn, params, cfg)
    d = grid.h * np.sum((ra.snapshots - rb.snapshots) ** 2, axis=1)
    bound = d[0] * np.exp(2 * c_a_const(params) * ra.times) * (1 + 1e-10)
    assert np.all(d <= bound)


def test_energy_ledger_exact_for_zero_state(grid, nn, params):
    rec = integrate(LatticeState(np.zeros(grid.N), bc=BC.ZERO_DIRICHLET), grid, nn, params,
                    NoiseSpec(0.3), IntegratorConfig(0.002, 0.2))
    assert energy_residual(rec) == 0.0


def test_energy_residual_first_order(nn, params):
    g = GridSpec(10.0, 199)
    s = LatticeState(front_initial_data(FrontProfile.from_params(params), g).values, bc=BC.ZERO_DIRICHLET)
    res = []
    for dt in (2e-3, 1e-3, 5e-4):
        rec = deterministic_solve(s, g, nn, params, IntegratorConfig(dt, 1.0, snapshot_stride=10**6))
        res.append(energy_residual(rec))
    r = np.array(res[:-1]) / np.array(res[1:])
    assert np.all((r >= 1.5) & (r <= 3.0)), r


def test_energy_residual_requires_ledger(grid, nn, params):
    rec = integrate(LatticeState(np.zeros(grid.N)), grid, nn, params, SILENT, IntegratorConfig(0.002, 0.01))
    rec.energy_terms = None
    with pytest.raises(ContractError):
        energy_residual(rec)


def test_explicit_vs_implicit_first_order(nn, params):
    g = GridSpec(8.0, 79)
    s = front_initial_data(FrontProfile.from_params(params), g)
    gaps = []
    for dt in (4e-3, 2e-3, 1e-3):
        a = deterministic_solve(s, g, nn, params, IntegratorConfig(dt, 1.0))
        b = deterministic_solve(s, g, nn, params, IntegratorConfig(dt, 1.0, "semi-implicit"))
        gaps.append(np.max(np.abs(a.final.values - b.final.values)))
    r = np.array(gaps[:-1]) / np.array(gaps[1:])
    assert np.all((r > 1.6) & (r < 2.4)), r


def test_blow_up_reported(nn, params):
    g = GridSpec(1.0, 9)
    s = LatticeState(np.full(9, 1e120), bc=BC.NEUMANN)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(BlowUpError) as info:
            integrate(s, g, nn, params, SILENT, IntegratorConfig(1e-3, 1.0))
    assert info.value.step >= 1
    assert np.all(np.isfinite(info.value.last_state.values))
