import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kklab.diagnostics import (
    ConvergenceTable,
    EntropyLedger,
    TestFunction,
    TVMonitor,
    convergence_study,
    default_test_bank,
    entropy_balance_residual,
    entropy_inequality_residual,
    front_position,
    invariant_region_check,
    lp_distance,
    total_variation,
    travelling_jump_trajectory,
    weak_residual,
)
from kklab.entropy import EntropyPair
from kklab.errors import InsufficientCadence, LengthMismatch
from kklab.model import THIN_FILM, State
from kklab.scenarios import builtin_scenarios
from kklab.viscous import CONSERVATIVE, FieldPair, Grid1D, SimConfig, Trajectory, initial_field, run

SC = builtin_scenarios()


# ---- invariant region


def test_region_valid_run():
    cfg = SimConfig(scenario=SC["shock"], n_cells=100, t_end=0.3)
    for fp in run(cfg).snapshots:
        assert invariant_region_check(fp, cfg.m, cfg.M).passed


def test_region_corner():
    m = 0.5
    rep = invariant_region_check(FieldPair(np.full(5, m), np.full(5, m)), m, 4.0)
    assert rep.passed
    assert (rep.u_min, rep.v_min, rep.r_min, rep.xi_min) == (m, m, m * m, 1.0)
    d = rep.to_dict()
    assert d["pass"] is True
    assert {"u_min", "u_max", "v_min", "v_max"} <= set(d)


def test_region_violation():
    u = np.full(10, 2.0)
    u[6] = 5.0
    rep = invariant_region_check(FieldPair(u, np.full(10, 2.0)), 0.5, 4.0)
    assert not rep.passed
    assert rep.offending == (6,)
    assert rep.to_dict()["pass"] is False


# ---- entropy ledger


def _ledger_run(cfg):
    start = initial_field(cfg)
    ledger = EntropyLedger.for_config(cfg, start)
    traj = run(cfg, [ledger], initial=start)
    return ledger, traj


def test_ledger_starts_at_zero():
    cfg = SimConfig(scenario=SC["smooth_sine"], epsilon=0.1, n_cells=50, t_end=0.1)
    ledger, _ = _ledger_run(cfg)
    assert entropy_balance_residual(ledger, 0.0) == 0.0


def test_ledger_residual_halves_on_smooth_data():
    res = []
    for n in (200, 400):
        cfg = SimConfig(scenario=SC["smooth_sine"], epsilon=0.1, n_cells=n, t_end=0.5)
        ledger, traj = _ledger_run(cfg)
        res.append(entropy_balance_residual(ledger, traj.final.time))
    assert 1.5 <= res[0] / res[1] <= 3.0


@pytest.mark.parametrize("name", ["shock", "smooth_sine", "contact"])
def test_total_entropy_never_exceeds_initial(name):
    cfg = SimConfig(scenario=SC[name], epsilon=0.1, n_cells=200, t_end=0.5)
    ledger, _ = _ledger_run(cfg)
    init = ledger.initial_total
    assert all(rec.total_entropy <= init + 1e-10 for rec in ledger.records)


def test_ledger_csv(tmp_path):
    cfg = SimConfig(scenario=SC["shock"], n_cells=50, t_end=0.05)
    ledger, _ = _ledger_run(cfg)
    path = tmp_path / "ledger.csv"
    ledger.write_csv(path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["t", "total_entropy", "dissipation_accum", "residual"]
    assert len(rows) == len(ledger.records) + 1
    assert float(rows[1][3]) == 0.0


# ---- TV and norms


def test_total_variation_examples():
    assert total_variation(np.full(7, 3.0)) == 0.0
    for n in (2, 5, 100):
        assert total_variation(np.r_[np.ones(n), 2 * np.ones(n)]) == 1.0


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=50))
def test_lp_distance_self_is_zero(a):
    a = np.array(a)
    for p in (1, 2, np.inf):
        assert lp_distance(a, a, p, 0.1) == 0.0


def test_lp_distance_values_and_errors():
    a, b = np.zeros(4), np.array([1.0, -1.0, 0.0, 2.0])
    assert lp_distance(a, b, 1, 0.5) == 2.0
    assert lp_distance(a, b, 2, 0.5) == pytest.approx(math.sqrt(3.0))
    assert lp_distance(a, b, np.inf) == 2.0
    with pytest.raises(LengthMismatch):
        lp_distance(np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError):
        lp_distance(a, b, 3)


def test_tv_monitor_on_invariant_run():
    cfg = SimConfig(scenario=SC["contact"], epsilon=0.05, n_cells=200, t_end=0.5)
    tv = TVMonitor()
    run(cfg, [tv])
    assert tv.nonincreasing
    assert tv.history[0] == pytest.approx(1.5)


def test_front_position_sharp_step():
    grid = Grid1D(-1.0, 1.0, 40)
    x = grid.centers
    xi = np.where(x < 0.3, 0.5, 2.0)
    assert front_position(x, xi, 0.5, 2.0, grid.dx) == pytest.approx(0.3, abs=1e-12)


# ---- weak and entropy residuals


def _constant_traj():
    grid = Grid1D(-5.0, 5.0, 200)
    snaps = [FieldPair(np.full(200, 1.5), np.full(200, 2.5), t) for t in np.linspace(0, 1, 101)]
    cfg = SimConfig(epsilon=0.0, n_cells=200, representation=CONSERVATIVE)
    return Trajectory(cfg, grid, snaps, [0.01] * 100, 100)


def test_residuals_vanish_for_constant_solution():
    traj = _constant_traj()
    assert weak_residual(traj, THIN_FILM) <= 1e-12
    assert entropy_inequality_residual(traj, EntropyPair(1, 1, 0.5), THIN_FILM) <= 1e-12


def test_cadence_is_enforced():
    traj = _constant_traj()
    sparse = Trajectory(traj.config, traj.grid, traj.snapshots[::50], [0.01] * 100, 100)
    with pytest.raises(InsufficientCadence):
        weak_residual(sparse, THIN_FILM)


def test_exact_shock_and_expansion_shock():
    grid = Grid1D(-5.0, 5.0, 800)
    ep = EntropyPair(1, 1, 0.5)
    good = travelling_jump_trajectory(THIN_FILM, State(2, 2), State(1, 1), 3.5, grid, 1.0, 400)
    assert weak_residual(good, THIN_FILM) <= 5e-3
    assert entropy_inequality_residual(good, ep, THIN_FILM) <= 1e-8
    # reversed data joined by a jump that satisfies Rankine-Hugoniot but not Lax
    bad = travelling_jump_trajectory(THIN_FILM, State(1, 1), State(2, 2), 3.5, grid, 1.0, 400)
    assert weak_residual(bad, THIN_FILM) <= 5e-3
    assert entropy_inequality_residual(bad, ep, THIN_FILM) > 1e-3


def test_test_functions_are_smooth_bumps():
    tf = TestFunction(0.5, 1.0, 0.4, 0.3)
    assert tf.value(0.5 + 1.0, 0.4) == 0.0
    h = 1e-6
    assert tf.dx(0.7, 0.5) == pytest.approx((tf.value(0.7 + h, 0.5) - tf.value(0.7 - h, 0.5)) / (2 * h), rel=1e-6)
    assert tf.dt(0.7, 0.5) == pytest.approx((tf.value(0.7, 0.5 + h) - tf.value(0.7, 0.5 - h)) / (2 * h), rel=1e-6)
    assert len(default_test_bank()) == 5


# ---- convergence


def test_convergence_determinism_and_csv(tmp_path):
    base = SimConfig(scenario=SC["shock"], n_cells=100, t_end=0.3)
    a = convergence_study(base, [0.4, 0.2])
    b = convergence_study(base, [0.4, 0.2])
    assert a.l1_error == b.l1_error
    assert a.strictly_decreasing()
    path = tmp_path / "conv.csv"
    a.write_csv(path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["eps", "dx", "L1_error", "wall_time"]
    assert all(d <= e / 4 + 1e-15 for e, d in zip(a.eps, a.dx))


def test_convergence_contact_limit():
    # the (u, v) error includes upwind smearing of xi, so only its decrease
    # is asserted; r stays 2 and the xi-front moves at phi(2) = 1
    base = SimConfig(scenario=SC["contact"], n_cells=200)
    assert convergence_study(base, [0.2, 0.1]).strictly_decreasing()
    cfg = SimConfig(scenario=SC["contact"], epsilon=0.1, n_cells=200)
    fin = run(cfg).final
    grid = cfg.grid()
    r, xi = fin.r_xi()
    assert np.sum(np.abs(r - 2.0)) * grid.dx <= 2 * grid.dx
    assert abs(front_position(grid.centers, xi, 0.5, 2.0, grid.dx) - 1.0) <= grid.dx / cfg.t_end


def test_convergence_finest_reference_and_errors():
    base = SimConfig(scenario=SC["smooth_sine"], n_cells=50, t_end=0.2)
    table = convergence_study(base, [0.4, 0.2], reference="finest", window=None)
    assert table.reference == "finest" and all(e > 0 for e in table.l1_error)
    with pytest.raises(ValueError):
        convergence_study(base, [0.4, 0.2])  # exact reference needs Riemann data
    with pytest.raises(ValueError):
        convergence_study(SimConfig(scenario=SC["shock"]), [0.1, 0.2])


def test_convergence_table_flags_failures():
    t = ConvergenceTable([0.2, 0.1], [0.05, 0.025], [40, 80], [0.5, math.nan], [0.1, 0.1], ["", "boom"], "exact")
    assert not t.strictly_decreasing()


def test_total_variation_periodic_counts_wraparound():
    f = np.array([1.0, 2.0, 3.0])
    assert total_variation(f) == 2.0
    assert total_variation(f, periodic=True) == 4.0


def test_tv_monitor_periodic_smooth_run_is_nonincreasing():
    from kklab.scenarios import builtin_scenarios
    from kklab.viscous import SimConfig, run

    cfg = SimConfig(scenario=builtin_scenarios()["smooth_sine"], epsilon=0.1, n_cells=100, t_end=0.2)
    tv = TVMonitor.for_config(cfg)
    assert tv.periodic
    run(cfg, [tv])
    assert tv.nonincreasing
