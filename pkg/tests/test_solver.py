"""Finite-volume solver: fluxes, stepping, diagnostics, breakdown detection."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nltraffic.grid import GridFunction, GridSpec, total_mass
from nltraffic.kernels import INFINITE, UNIFORM, ZERO, nonlocal_field, sk_scaled
from nltraffic.scenarios import bump_init, random_compact_bump
from nltraffic.solver import (
    SolverConfig,
    SolverFailure,
    evolve,
    front_position,
    gradient_indicator,
    make_state,
    numerical_flux,
    step,
    write_blowup_json,
)

DOMAIN = (-6.0, 10.0)


def scenario_grid(n):
    return GridSpec(DOMAIN[0], DOMAIN[1], n)


def box(grid, lo, hi, height=1.0):
    x = grid.centers
    return GridFunction(grid, np.where((x > lo) & (x < hi), height, 0.0))


# ---------------------------------------------------------------- fluxes


@given(
    v=st.floats(min_value=0.0, max_value=1.0),
    f=st.floats(min_value=0.05, max_value=1.0),
)
@settings(max_examples=60, deadline=None)
def test_flux_consistency(v, f):
    exact = v * (1.0 - v) * f
    for scheme in ("godunov", "llf"):
        assert numerical_flux(v, v, f, scheme) == pytest.approx(exact, abs=1e-15)


def test_godunov_hand_values():
    # transonic rarefaction: min of g over [0, 1] is 0 at either endpoint
    assert numerical_flux(0.0, 1.0, 1.0, "godunov") == pytest.approx(0.0, abs=1e-15)
    # compression spanning the sonic point: max g = g(1/2) = 1/4
    assert numerical_flux(1.0, 0.0, 1.0, "godunov") == pytest.approx(0.25)
    # one-sided intervals never reach the sonic point
    assert numerical_flux(0.4, 0.1, 0.5, "godunov") == pytest.approx(0.4 * 0.6 * 0.5)
    assert numerical_flux(0.9, 0.6, 1.0, "godunov") == pytest.approx(0.6 * 0.4)


def test_llf_hand_values():
    assert numerical_flux(1.0, 0.0, 1.0, "llf") == pytest.approx(0.5)
    assert numerical_flux(0.0, 1.0, 1.0, "llf") == pytest.approx(-0.5)


def test_flux_monotone_in_both_arguments():
    # nondecreasing in the left state, nonincreasing in the right one
    us = np.linspace(0.0, 1.0, 11)
    for scheme in ("godunov", "llf"):
        for uR in us:
            vals = numerical_flux(us, np.full_like(us, uR), 0.7, scheme)
            assert np.all(np.diff(vals) >= -1e-12)
        for uL in us:
            vals = numerical_flux(np.full_like(us, uL), us, 0.7, scheme)
            assert np.all(np.diff(vals) <= 1e-12)


def test_flux_scalar_and_vector_forms():
    out = numerical_flux(0.3, 0.3, 1.0)
    assert isinstance(out, float)
    arr = numerical_flux(np.array([0.3, 0.5]), np.array([0.3, 0.5]), 1.0)
    assert arr.shape == (2,)


def test_flux_rejects_unknown_scheme():
    with pytest.raises(ValueError):
        numerical_flux(0.3, 0.3, 1.0, scheme="weno")


# ---------------------------------------------------------------- stepping


def test_vacuum_fixed_point_and_cfl_step():
    grid = scenario_grid(200)
    config = SolverConfig(grid=grid, kernel=ZERO, t_end=100.0)
    state = make_state(0.0, GridFunction(grid, np.zeros(200)), ZERO)
    new = step(state, config)
    np.testing.assert_array_equal(new.u.values, 0.0)
    # vacuum wave speed is |1 - 0| * 1, so dt is exactly cfl * dx
    assert new.t == pytest.approx(0.45 * grid.dx, rel=1e-14)


def test_jam_fixed_point():
    grid = scenario_grid(200)
    config = SolverConfig(grid=grid, kernel=ZERO, t_end=100.0)
    state = make_state(0.0, GridFunction(grid, np.ones(200)), ZERO)
    new = step(state, config)
    np.testing.assert_array_equal(new.u.values, 1.0)


def test_stepwise_mass_conservation():
    grid = scenario_grid(400)
    u = GridFunction.from_callable(grid, random_compact_bump(7))
    config = SolverConfig(grid=grid, kernel=ZERO, t_end=100.0)
    state = make_state(0.0, u, ZERO)
    mass = total_mass(state.u)
    for _ in range(60):
        state = step(state, config)
        new_mass = total_mass(state.u)
        assert abs(new_mass - mass) <= 1e-12 * grid.n_cells
        mass = new_mass
    # support must not have reached the outflow boundaries
    assert state.u.values[:5].max() == 0.0
    assert state.u.values[-5:].max() == 0.0


def test_max_principle_through_shock():
    grid = scenario_grid(800)
    u0 = GridFunction.from_callable(grid, random_compact_bump(3))
    config = SolverConfig(grid=grid, kernel=ZERO, t_end=2.0, stop_on_blowup=False)
    _, diag = evolve(u0, config)
    assert min(diag.min_u) >= -1e-8
    assert max(diag.max_u) <= 1.0 + 1e-8
    assert diag.max_mass_drift <= 1e-12 * grid.n_cells


def test_factor_band_recorded(grid_bump_run):
    diag, m = grid_bump_run
    lo = math.exp(-m) - 1e-10
    assert min(diag.factor_min) >= lo
    assert max(diag.factor_max) <= 1.0 + 1e-10


@pytest.fixture(scope="module")
def grid_bump_run():
    grid = scenario_grid(600)
    u0 = GridFunction.from_callable(grid, bump_init)
    config = SolverConfig(grid=grid, kernel=INFINITE, t_end=1.0, stop_on_blowup=False)
    _, diag = evolve(u0, config)
    return diag, total_mass(u0)


def test_infinite_kernel_factor_monotone():
    grid = scenario_grid(600)
    u0 = GridFunction.from_callable(grid, bump_init)
    config = SolverConfig(
        grid=grid, kernel=INFINITE, t_end=0.5, snapshot_times=(0.5,),
        stop_on_blowup=False,
    )
    snaps, _ = evolve(u0, config)
    factor = nonlocal_field(dict(snaps)[0.5], INFINITE).factor.values
    assert np.all(np.diff(factor) >= -1e-14)


# ------------------------------------------------------- breakdown detection


def test_box_detected_immediately():
    grid = scenario_grid(1600)
    config = SolverConfig(grid=grid, kernel=ZERO, t_end=1.0, snapshot_times=(0.0,))
    snaps, diag = evolve(box(grid, 0.0, 1.0), config)
    report = diag.blowup
    assert report.detected and report.grid_resolved
    assert report.t_detect == 0.0
    assert len(diag.t) == 1  # stop_on_blowup halts before the first step
    assert snaps[0][0] == 0.0


def test_box_run_past_detection():
    grid = scenario_grid(1600)
    config = SolverConfig(
        grid=grid, kernel=ZERO, t_end=0.5, stop_on_blowup=False,
    )
    _, diag = evolve(box(grid, 0.0, 1.0), config)
    assert diag.t[-1] == pytest.approx(0.5, abs=1e-12)
    assert diag.blowup.t_detect == 0.0
    # a unit jump over one cell is the sharpest profile the grid can hold
    assert diag.blowup.max_gradient == pytest.approx(0.5 / grid.dx, rel=1e-12)


def test_smooth_short_run_not_detected():
    grid = scenario_grid(1000)
    u0 = GridFunction.from_callable(grid, lambda x: 0.1 * bump_init(x))
    config = SolverConfig(grid=grid, kernel=ZERO, t_end=0.5)
    _, diag = evolve(u0, config)
    assert not diag.blowup.detected
    assert diag.blowup.t_detect is None
    assert diag.t[-1] == pytest.approx(0.5, abs=1e-12)


def test_blowup_report_json(tmp_path):
    grid = scenario_grid(1600)
    config = SolverConfig(grid=grid, kernel=ZERO, t_end=1.0)
    _, diag = evolve(box(grid, 0.0, 1.0), config)
    path = tmp_path / "blowup.json"
    write_blowup_json(diag.blowup, path)
    data = json.loads(path.read_text())
    assert set(data) == {"detected", "t_detect", "max_gradient", "grid_resolved"}
    assert data["detected"] is True and data["t_detect"] == 0.0


# ------------------------------------------------------------- indicators


def test_gradient_indicator_box_is_half_per_dx():
    grid = scenario_grid(1600)
    u = box(grid, 0.0, 1.0)
    assert gradient_indicator(u) == pytest.approx(0.5 / grid.dx, rel=1e-13)


def test_gradient_indicator_scale_invariant():
    grid = scenario_grid(1600)
    u = GridFunction.from_callable(grid, bump_init)
    half = GridFunction(grid, 0.5 * u.values)
    assert gradient_indicator(half) == pytest.approx(gradient_indicator(u), rel=1e-13)


def test_gradient_indicator_constant_and_vacuum():
    grid = scenario_grid(100)
    assert gradient_indicator(GridFunction(grid, np.full(100, 0.3))) == 0.0
    with pytest.raises(ValueError):
        gradient_indicator(GridFunction(grid, np.zeros(100)))


def test_front_position_box_edge_and_translation():
    grid = scenario_grid(1600)
    a = front_position(box(grid, 0.0, 1.0), 0.5)
    b = front_position(box(grid, 2.0, 3.0), 0.5)
    assert abs(a - 1.0) <= grid.dx
    assert b - a == pytest.approx(2.0, abs=1e-12)


def test_front_position_level_never_attained():
    grid = scenario_grid(100)
    with pytest.raises(ValueError):
        front_position(GridFunction(grid, np.full(100, 0.2)), 0.5)


def test_front_position_exits_domain():
    grid = scenario_grid(400)
    u = box(grid, 9.0, 11.0, height=0.8)  # still above level at the last cell
    assert front_position(u, 0.5) == grid.x_right


# ------------------------------------------------------------ convergence


def _l1_error(coarse: GridFunction, fine: GridFunction) -> float:
    ratio = fine.grid.n_cells // coarse.grid.n_cells
    blocks = fine.values.reshape(coarse.grid.n_cells, ratio).mean(axis=1)
    return coarse.grid.dx * float(np.abs(coarse.values - blocks).sum())


def test_first_order_convergence():
    # gentle data, short time: the profile is still smooth at t = 0.5
    def gentle(x):
        return 0.1 * bump_init(x)

    def run(n):
        grid = scenario_grid(n)
        config = SolverConfig(
            grid=grid, kernel=ZERO, t_end=0.5, snapshot_times=(0.5,),
        )
        snaps, _ = evolve(GridFunction.from_callable(grid, gentle), config)
        return dict(snaps)[0.5]

    ref = run(4800)
    err = [_l1_error(run(n), ref) for n in (600, 1200)]
    ratio = err[0] / err[1]
    assert 1.6 <= ratio <= 2.4


def test_uniform_kernel_is_time_rescaled_lwr():
    # constant factor exp(-m) only rescales dt, so the discrete states match
    grid = scenario_grid(800)
    u0 = GridFunction.from_callable(grid, bump_init)
    m = total_mass(u0)
    t_fast = math.exp(-m)
    uni = SolverConfig(
        grid=grid, kernel=UNIFORM, t_end=1.0, snapshot_times=(1.0,),
        stop_on_blowup=False,
    )
    zero = SolverConfig(
        grid=grid, kernel=ZERO, t_end=t_fast, snapshot_times=(t_fast,),
        stop_on_blowup=False,
    )
    snap_u, diag_u = evolve(u0, uni)
    snap_z, _ = evolve(u0, zero)
    diff = dict(snap_u)[1.0].values - dict(snap_z)[t_fast].values
    assert float(np.abs(diff).max()) <= 1e-10
    assert diag_u.max_mass_drift <= 1e-12 * grid.n_cells


def test_short_lookahead_reduces_to_lwr():
    grid = scenario_grid(600)
    u0 = GridFunction.from_callable(grid, bump_init)
    length = 1e-3
    out = {}
    for kernel in (ZERO, sk_scaled(length)):
        config = SolverConfig(
            grid=grid, kernel=kernel, t_end=1.0, snapshot_times=(1.0,),
            stop_on_blowup=False,
        )
        snaps, _ = evolve(u0, config)
        out[kernel.kind] = dict(snaps)[1.0].values
    l1 = grid.dx * float(np.abs(out["zero"] - out["sk_scaled"]).sum())
    assert l1 <= 10.0 * length


# ------------------------------------------------------------- validation


def test_config_validation():
    grid = scenario_grid(100)
    with pytest.raises(ValueError):
        SolverConfig(grid=grid, kernel=ZERO, t_end=1.0, cfl=0.0)
    with pytest.raises(ValueError):
        SolverConfig(grid=grid, kernel=ZERO, t_end=1.0, cfl=1.5)
    with pytest.raises(ValueError):
        SolverConfig(grid=grid, kernel=ZERO, t_end=1.0, scheme="weno")
    with pytest.raises(ValueError):
        SolverConfig(grid=grid, kernel=ZERO, t_end=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(grid=grid, kernel=ZERO, t_end=1.0, snapshot_times=(0.5, 0.2))
    with pytest.raises(ValueError):
        SolverConfig(grid=grid, kernel=ZERO, t_end=1.0, snapshot_times=(2.0,))
    with pytest.raises(ValueError):
        SolverConfig(grid=grid, kernel=ZERO, t_end=1.0, blowup_gradient_factor=0.0)


def test_evolve_rejects_bad_initial_data():
    grid = scenario_grid(100)
    other = GridSpec(DOMAIN[0], DOMAIN[1], 200)
    config = SolverConfig(grid=grid, kernel=ZERO, t_end=1.0)
    with pytest.raises(ValueError):
        evolve(GridFunction(other, np.zeros(200)), config)
    with pytest.raises(ValueError):
        evolve(GridFunction(grid, np.full(100, 1.5)), config)


def test_infinite_kernel_rejects_right_tail():
    grid = scenario_grid(400)
    u = GridFunction(grid, np.full(400, 0.5))
    config = SolverConfig(grid=grid, kernel=INFINITE, t_end=1.0)
    with pytest.raises(ValueError, match="tail"):
        evolve(u, config)


# ------------------------------------------------------------ diagnostics


def test_snapshots_cover_requested_times():
    grid = scenario_grid(500)
    u0 = GridFunction.from_callable(grid, lambda x: 0.1 * bump_init(x))
    times = (0.0, 0.1, 0.2, 0.3)
    config = SolverConfig(grid=grid, kernel=ZERO, t_end=0.3, snapshot_times=times)
    snaps, _ = evolve(u0, config)
    assert tuple(t for t, _ in snaps) == times
    np.testing.assert_array_equal(snaps[0][1].values, u0.values)


def test_diagnostics_csv_layout(tmp_path):
    grid = scenario_grid(300)
    u0 = GridFunction.from_callable(grid, lambda x: 0.1 * bump_init(x))
    config = SolverConfig(grid=grid, kernel=ZERO, t_end=0.1)
    _, diag = evolve(u0, config)
    path = tmp_path / "diag.csv"
    diag.write_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,mass,min_u,max_u,grad_indicator,factor_min,factor_max"
    assert len(lines) == 1 + len(diag.t)


def test_ssp2_runs_and_conserves():
    grid = scenario_grid(400)
    u0 = GridFunction.from_callable(grid, lambda x: 0.3 * bump_init(x))
    config = SolverConfig(grid=grid, kernel=UNIFORM, t_end=0.5, ssp2=True)
    _, diag = evolve(u0, config)
    assert diag.max_mass_drift <= 1e-12 * grid.n_cells
    assert min(diag.min_u) >= -1e-8 and max(diag.max_u) <= 1.0 + 1e-8
