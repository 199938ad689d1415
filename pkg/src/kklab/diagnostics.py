"""Discrete versions of the a-priori estimates.

Invariant-region monitoring, the entropy balance ledger, weak and entropy
residuals against a bank of bump test functions, total-variation tracking
and vanishing-viscosity convergence studies.
"""

from __future__ import annotations

import csv
import math
import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .entropy import EntropyPair
from .errors import InsufficientCadence, KKError, LengthMismatch
from .model import FluxLaw, State
from .riemann import sample_riemann_grid, solve_riemann
from .viscous import (
    INVARIANT,
    N_GHOST,
    FieldPair,
    Grid1D,
    SimConfig,
    Trajectory,
    mollifier_kernel,
    mollifier_kernel_derivative,
    run,
)

__all__ = [
    "RegionReport",
    "invariant_region_check",
    "EntropyLedger",
    "entropy_balance_residual",
    "TVMonitor",
    "TestFunction",
    "default_test_bank",
    "weak_residual",
    "entropy_inequality_residual",
    "travelling_jump_trajectory",
    "total_variation",
    "lp_distance",
    "front_position",
    "ConvergenceTable",
    "convergence_study",
]


# ------------------------------------------------------------ invariant region

@dataclass(frozen=True)
class RegionReport:
    passed: bool
    m: float
    M: float
    tol: float
    u_min: float
    u_max: float
    v_min: float
    v_max: float
    r_min: float
    r_max: float
    xi_min: float
    xi_max: float
    r_in_box: bool
    xi_in_box: bool
    offending: tuple = ()

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "m": self.m,
            "M": self.M,
            "tol": self.tol,
            "u_min": self.u_min,
            "u_max": self.u_max,
            "v_min": self.v_min,
            "v_max": self.v_max,
            "u": [self.u_min, self.u_max],
            "v": [self.v_min, self.v_max],
            "r": [self.r_min, self.r_max],
            "xi": [self.xi_min, self.xi_max],
            "r_in_box": self.r_in_box,
            "xi_in_box": self.xi_in_box,
            "offending": list(self.offending),
        }


def invariant_region_check(fp, m: float, M: float, tol: float = 1e-8) -> RegionReport:
    """Pass iff every cell lies in ``[m - tol, M + tol]^2``.

    Also reports ``r`` against ``[m^2, M^2]`` and ``xi`` against
    ``[m/M, M/m]`` (with the same relative slack).
    """
    if isinstance(fp, FieldPair):
        u, v = fp.uv()
    else:
        u, v = (np.asarray(a, dtype=float) for a in fp)
    r = u * v
    xi = u / v
    lo, hi = m - tol, M + tol
    bad = np.nonzero((u < lo) | (u > hi) | (v < lo) | (v > hi))[0]
    return RegionReport(
        passed=bool(bad.size == 0),
        m=m,
        M=M,
        tol=tol,
        u_min=float(u.min()),
        u_max=float(u.max()),
        v_min=float(v.min()),
        v_max=float(v.max()),
        r_min=float(r.min()),
        r_max=float(r.max()),
        xi_min=float(xi.min()),
        xi_max=float(xi.max()),
        r_in_box=bool(r.min() >= m * m - tol and r.max() <= M * M + tol),
        xi_in_box=bool(xi.min() >= m / M - tol and xi.max() <= M / m + tol),
        offending=tuple(int(i) for i in bad[:32]),
    )


# ------------------------------------------------------------ entropy ledger

@dataclass(frozen=True)
class LedgerRecord:
    t: float
    domain_entropy: float
    boundary_outflow: float
    dissipation_accum: float

    @property
    def total_entropy(self) -> float:
        return self.domain_entropy + self.boundary_outflow


def _centered_gradient(grid: Grid1D, a):
    ap = grid.pad(a)
    return (ap[N_GHOST + 1:-N_GHOST + 1] - ap[N_GHOST - 1:-N_GHOST - 1]) / (2.0 * grid.dx)


class EntropyLedger:
    """Per-step record of the discrete entropy balance.

    Usable as a run hook.  ``total_entropy`` is the entropy in the domain
    plus what has left through outflow boundaries (``int (Q_right - Q_left)
    dt``), so that Riemann data, whose entropy is not integrable on the
    line, obey the same balance as decaying data.  ``dissipation_accum``
    sums ``dt * sum_i eps k(2k+1) r_i^{-k-2} (r_x)_i^2 dx`` with the
    centred ``r_x`` of the diffusion stencil, evaluated on the state at
    the start of each step.
    """

    def __init__(self, ep: EntropyPair, law: FluxLaw, epsilon: float, grid: Grid1D, initial: FieldPair):
        self.ep = ep
        self.law = law
        self.epsilon = float(epsilon)
        self.grid = grid
        self.records = [LedgerRecord(initial.time, self._domain(initial), 0.0, 0.0)]

    @classmethod
    def for_config(cls, cfg: SimConfig, initial: FieldPair) -> "EntropyLedger":
        return cls(EntropyPair(cfg.k, cfg.p, cfg.m), cfg.law, cfg.epsilon, cfg.grid(), initial)

    def _domain(self, fp: FieldPair) -> float:
        u, v = fp.uv()
        return float(np.sum(self.ep.value(u, v)) * self.grid.dx)

    @property
    def initial_total(self) -> float:
        return self.records[0].total_entropy

    def __call__(self, old: FieldPair, new: FieldPair, dt: float):
        last = self.records[-1]
        dx = self.grid.dx
        diss = 0.0
        if self.epsilon > 0:
            r, _ = old.r_xi()
            rx = _centered_gradient(self.grid, r)
            k = self.ep.k
            diss = dt * float(np.sum(self.epsilon * k * (2 * k + 1) * r ** (-k - 2) * rx * rx) * dx)
        out = 0.0
        if self.grid.boundary == "outflow":
            u, v = old.uv()
            q = self.ep.flux(self.law, u[[0, -1]], v[[0, -1]])
            out = dt * float(q[1] - q[0])
        self.records.append(
            LedgerRecord(
                new.time,
                self._domain(new),
                last.boundary_outflow + out,
                last.dissipation_accum + diss,
            )
        )

    def record_at(self, t: float) -> LedgerRecord:
        times = np.array([rec.t for rec in self.records])
        i = int(np.searchsorted(times, t, side="right")) - 1
        if i < 0:
            raise ValueError(f"ledger starts at t = {times[0]!r}")
        return self.records[i]

    def residual(self, t: float) -> float:
        rec = self.record_at(t)
        return rec.total_entropy + rec.dissipation_accum - self.initial_total

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "total_entropy", "dissipation_accum", "residual"])
            init = self.initial_total
            for rec in self.records:
                res = rec.total_entropy + rec.dissipation_accum - init
                w.writerow([f"{x:.17g}" for x in (rec.t, rec.total_entropy, rec.dissipation_accum, res)])


def entropy_balance_residual(ledger: EntropyLedger, t: float) -> float:
    """``total(t) + dissipation(t) - initial`` from the last record at or before ``t``."""
    return ledger.residual(t)


# ------------------------------------------------------------ total variation

def total_variation(field, periodic: bool = False) -> float:
    """Sum of absolute jumps; ``periodic`` adds the wrap-around jump."""
    f = np.asarray(field, dtype=float)
    if periodic and f.size:
        f = np.append(f, f[0])
    return float(np.sum(np.abs(np.diff(f))))


class TVMonitor:
    """Run hook recording ``TV(xi)`` after every step.

    On a periodic grid the jump across the boundary is part of the variation;
    use :meth:`for_config` to pick the right measure.
    """

    def __init__(self, slack: float = 1e-12, periodic: bool = False):
        self.slack = slack
        self.periodic = periodic
        self.history = []
        self.worst_increase = -math.inf

    def __call__(self, old: FieldPair, new: FieldPair, dt: float):
        _, xi_old = old.r_xi()
        _, xi_new = new.r_xi()
        tv_old = total_variation(xi_old, self.periodic)
        tv_new = total_variation(xi_new, self.periodic)
        if not self.history:
            self.history.append(tv_old)
        self.history.append(tv_new)
        self.worst_increase = max(self.worst_increase, tv_new - tv_old)

    @classmethod
    def for_config(cls, cfg: SimConfig, slack: float = 1e-12) -> "TVMonitor":
        return cls(slack, periodic=cfg.grid().boundary == "periodic")

    @property
    def nonincreasing(self) -> bool:
        return self.worst_increase <= self.slack


def lp_distance(a, b, p=1, dx: float = 1.0) -> float:
    """``(sum |a_i - b_i|^p dx)^{1/p}``; ``p`` in ``{1, 2, inf}``.

    :class:`FieldPair` arguments are compared in ``(u, v)``, summing both
    components.
    """
    if isinstance(a, FieldPair) and isinstance(b, FieldPair):
        a = np.concatenate(a.uv())
        b = np.concatenate(b.uv())
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"fields have shapes {a.shape} and {b.shape}")
    d = np.abs(a - b)
    if p in (np.inf, math.inf, "inf"):
        return float(d.max()) if d.size else 0.0
    if p == 1:
        return float(np.sum(d) * dx)
    if p == 2:
        return float(math.sqrt(np.sum(d * d) * dx))
    raise ValueError(f"p must be 1, 2 or inf, got {p!r}")


def front_position(x, xi, xi_left: float, xi_right: float, dx: float) -> float:
    """Location of a monotone front from ``xi_left`` to ``xi_right``, by mass.

    Exact for a sharp step and unchanged by symmetric smearing.
    """
    x = np.asarray(x, dtype=float)
    frac = (np.asarray(xi, dtype=float) - xi_left) / (xi_right - xi_left)
    right_edge = x[-1] + 0.5 * dx
    return float(right_edge - np.sum(frac) * dx)


# ------------------------------------------------------------ weak residuals

@dataclass(frozen=True)
class TestFunction:
    """``c j((x - x0)/w) j((t - t0)/s)`` with ``j`` the unit bump."""

    x0: float
    w: float
    t0: float
    s: float
    c: float = 1.0

    __test__ = False  # not a pytest class

    def value(self, x, t):
        return self.c * mollifier_kernel((x - self.x0) / self.w) * mollifier_kernel((t - self.t0) / self.s)

    def dt(self, x, t):
        return self.c * mollifier_kernel((x - self.x0) / self.w) * mollifier_kernel_derivative((t - self.t0) / self.s) / self.s

    def dx(self, x, t):
        return self.c * mollifier_kernel_derivative((x - self.x0) / self.w) / self.w * mollifier_kernel((t - self.t0) / self.s)


def default_test_bank() -> tuple:
    """Five bumps on ``[-5, 5] x [0, 1)``.

    Three straddle the ray ``x = 3.5 t`` of the standard shock, one sits
    on the initial jump and one lies in the undisturbed left state.
    """
    return (
        TestFunction(0.0, 1.5, 0.0, 0.6),
        TestFunction(1.75, 1.2, 0.5, 0.45),
        TestFunction(2.8, 1.0, 0.8, 0.15),
        TestFunction(-2.5, 1.5, 0.5, 0.45),
        TestFunction(1.0, 2.0, 0.35, 0.6),
    )


def _check_cadence(traj: Trajectory, max_ratio: float = 10.0):
    times = traj.times
    if times.size < 2:
        raise InsufficientCadence("trajectory needs at least two snapshots")
    gaps = np.diff(times)
    dt_max = max(traj.dts) if traj.dts else gaps.max()
    if gaps.max() > max_ratio * dt_max * (1.0 + 1e-9):
        raise InsufficientCadence(
            f"snapshot gap {gaps.max():.3g} exceeds {max_ratio:g} time steps ({dt_max:.3g})"
        )


def _space_time_pairing(traj: Trajectory, bank, density, flux_density, extra=None):
    """For each test function, ``iint (a phi_t + b phi_x) + int a_0 phi(., 0)``.

    ``density(fp)`` and ``flux_density(fp)`` return arrays of shape
    ``(n,)`` or ``(2, n)``.  Snapshots are held constant on each interval
    ``[t_j, t_{j+1})``.  The ``phi_t`` part is integrated exactly in time
    (differences of ``phi``), the ``phi_x`` part by the midpoint rule;
    midpoint rule in space throughout.
    """
    _check_cadence(traj)
    x = traj.grid.centers
    dx = traj.grid.dx
    times = traj.times
    mids = 0.5 * (times[1:] + times[:-1])
    steps = np.diff(times)
    snaps = traj.snapshots[:-1]
    dens = np.array([density(fp) for fp in snaps])
    flx = np.array([flux_density(fp) for fp in snaps])
    dens0 = density(traj.snapshots[0])
    xtra = np.array([extra(fp) for fp in snaps]) if extra is not None else None
    out = []
    for tf in bank:
        phi = tf.value(x[None, :], times[:, None])
        dphi = phi[1:] - phi[:-1]
        phix = tf.dx(x[None, :], mids[:, None]) * steps[:, None]
        if dens.ndim == 3:
            val = (np.einsum("jcn,jn->c", dens, dphi) + np.einsum("jcn,jn->c", flx, phix)
                   + dens0 @ phi[0]) * dx
        else:
            val = (np.sum(dens * dphi) + np.sum(flx * phix) + np.dot(dens0, phi[0])) * dx
            if xtra is not None:
                val = val - np.sum(xtra * phix) * dx
        out.append(val)
    return out


def weak_residual(traj: Trajectory, law: FluxLaw, test_bank=None) -> float:
    """Largest ``|iint (U phi_t + F(U) phi_x) + int U_0 phi(., 0)|`` over the bank."""
    bank = default_test_bank() if test_bank is None else test_bank

    def density(fp):
        return np.stack(fp.uv())

    def flux_density(fp):
        u, v = fp.uv()
        phi = law.eval(u * v, 0)
        return np.stack([u * phi, v * phi])

    vals = _space_time_pairing(traj, bank, density, flux_density)
    return float(max(np.max(np.abs(v)) for v in vals))


def entropy_inequality_residual(traj: Trajectory, ep: EntropyPair, law: FluxLaw, test_bank=None,
                                epsilon: float = 0.0) -> float:
    """One-sided violation ``max(0, -[iint (E phi_t + Q phi_x) + int E_0 phi(., 0)])``.

    With ``epsilon > 0`` the viscous correction ``eps iint (grad E B U_x)
    phi_x`` is subtracted first, which is the admissibility inequality of
    the regularised system.  ``B U_x = r_x (1/v, 1/u)``; ``r_x`` is
    centred.
    """
    bank = default_test_bank() if test_bank is None else test_bank
    grid = traj.grid

    def density(fp):
        return ep.value(*fp.uv())

    def flux_density(fp):
        return ep.flux(law, *fp.uv())

    extra = None
    if epsilon > 0:
        def extra(fp):
            u, v = fp.uv()
            rx = _centered_gradient(grid, u * v)
            g = ep.gradient(u, v)
            return epsilon * rx * (g[..., 0] / v + g[..., 1] / u)

    vals = _space_time_pairing(traj, bank, density, flux_density, extra)
    return float(max(max(0.0, -v) for v in vals))


def travelling_jump_trajectory(law: FluxLaw, left: State, right: State, speed: float, grid: Grid1D,
                               t_end: float, n_times: int, x0: float = 0.0) -> Trajectory:
    """Exact cell averages of a single jump moving at ``speed``.

    Used to build non-entropic (expansion) shocks as negative controls.
    """
    edges = grid.x_left + grid.dx * np.arange(grid.n_cells + 1)
    times = np.linspace(0.0, t_end, n_times + 1)
    snaps = []
    for t in times:
        pos = x0 + speed * t
        frac_left = np.clip((pos - edges[:-1]) / grid.dx, 0.0, 1.0)
        u = frac_left * left.u + (1.0 - frac_left) * right.u
        v = frac_left * left.v + (1.0 - frac_left) * right.v
        snaps.append(FieldPair(u, v, float(t)))
    cfg = SimConfig(epsilon=0.0, t_end=t_end, representation="conservative", n_cells=grid.n_cells)
    return Trajectory(cfg, grid, snaps, list(np.diff(times)), n_times)


# ------------------------------------------------------------ convergence

@dataclass
class ConvergenceTable:
    eps: list
    dx: list
    n_cells: list
    l1_error: list
    wall_time: list
    failures: list
    reference: str
    order: Optional[float] = None

    def strictly_decreasing(self) -> bool:
        e = self.l1_error
        return all(b < a for a, b in zip(e, e[1:])) and not any(self.failures)

    def rows(self):
        return list(zip(self.eps, self.dx, self.l1_error, self.wall_time))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["eps", "dx", "L1_error", "wall_time"])
            for row in self.rows():
                w.writerow([f"{x:.17g}" for x in row])

    def to_dict(self) -> dict:
        return {
            "reference": self.reference,
            "order_estimate": self.order,
            "eps": self.eps,
            "dx": self.dx,
            "n_cells": self.n_cells,
            "L1_error": self.l1_error,
            "failures": self.failures,
        }


def _rung_config(base: SimConfig, eps: float) -> SimConfig:
    length = base.scenario.x_right - base.scenario.x_left
    n = max(base.n_cells, int(math.ceil(length / (eps / 4.0) - 1e-9)))
    return replace(base, epsilon=eps, n_cells=n, snapshot_every=10**9)


def _window_mask(x, window):
    if window is None:
        return np.ones_like(x, dtype=bool)
    return (x >= window[0]) & (x <= window[1])


def _exact_reference(cfg: SimConfig, x):
    sc = cfg.scenario
    sol = solve_riemann(cfg.law, sc.left, sc.right)
    return sample_riemann_grid(sol, x, cfg.t_end, sc.x0)


def _run_rung(cfg: SimConfig):
    start = _time.perf_counter()
    try:
        fp = run(cfg).final
    except KKError as exc:
        return None, _time.perf_counter() - start, f"{type(exc).__name__}: {exc}"
    u, v = fp.uv()
    return (np.array(u), np.array(v)), _time.perf_counter() - start, ""


def convergence_study(base_cfg: SimConfig, eps_ladder: Sequence[float], reference: str = "exact",
                      window=(-5.0, 5.0), jobs: int = 1) -> ConvergenceTable:
    """L1 distance at ``t_end`` to a reference along a ladder of viscosities.

    Each rung uses ``dx <= eps/4``.  ``reference`` is ``"exact"`` (Riemann
    solution; Riemann or contact scenarios only) or ``"finest"`` (a run at
    half the smallest viscosity, interpolated).  The order is a
    least-squares fit of ``log L1`` against ``log eps`` over the last three
    rungs.
    """
    ladder = [float(e) for e in eps_ladder]
    if len(ladder) < 2 or any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("eps ladder must be strictly decreasing with at least two rungs")
    if reference not in ("exact", "finest"):
        raise ValueError(f"reference must be 'exact' or 'finest', got {reference!r}")
    if reference == "exact" and base_cfg.scenario.id not in ("riemann", "contact"):
        raise ValueError("the exact reference needs Riemann data")
    cfgs = [_rung_config(base_cfg, e) for e in ladder]
    jobs_list = list(cfgs)
    if reference == "finest":
        jobs_list.append(_rung_config(base_cfg, ladder[-1] / 2.0))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_rung, jobs_list))
    else:
        results = [_run_rung(c) for c in jobs_list]

    ref_x = ref_u = ref_v = None
    if reference == "finest":
        fields, _, err = results.pop()
        if fields is None:
            raise RuntimeError(f"reference run failed: {err}")
        ref_x = jobs_list[-1].grid().centers
        ref_u, ref_v = fields

    table = ConvergenceTable([], [], [], [], [], [], reference)
    for cfg, (fields, wall, err) in zip(cfgs, results):
        grid = cfg.grid()
        x = grid.centers
        table.eps.append(cfg.epsilon)
        table.dx.append(grid.dx)
        table.n_cells.append(grid.n_cells)
        table.wall_time.append(wall)
        table.failures.append(err)
        if fields is None:
            table.l1_error.append(math.nan)
            continue
        if reference == "exact":
            ue, ve = _exact_reference(cfg, x)
        else:
            ue, ve = np.interp(x, ref_x, ref_u), np.interp(x, ref_x, ref_v)
        mask = _window_mask(x, window)
        u, v = fields
        table.l1_error.append(float(np.sum(np.abs(u - ue)[mask] + np.abs(v - ve)[mask]) * grid.dx))

    tail_e = np.array(table.eps[-3:])
    tail_d = np.array(table.l1_error[-3:])
    if tail_d.size >= 2 and np.all(np.isfinite(tail_d)) and np.all(tail_d > 0):
        table.order = float(np.polyfit(np.log(tail_e), np.log(tail_d), 1)[0])
    return table
