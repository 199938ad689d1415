"""Time integration of the viscous regularisation

    u_t + (u phi(uv))_x = eps ((uv)_x / v)_x,
    v_t + (v phi(uv))_x = eps ((uv)_x / u)_x.

Two first-order, forward-Euler discretisations are provided.

``step_conservative`` works on ``(u, v)`` with local Lax-Friedrichs
interface fluxes and a flux-form diffusion term.

``step_invariant`` works on ``(theta, xi)`` with ``theta = sqrt(uv)`` and
``xi = u/v``.  In these variables the system decouples into

    theta_t + G(theta)_x = 2 eps theta_xx,     G(theta) = theta phi(theta^2),
    xi_t + (phi(r) - eps r_x / r) xi_x = 0.

The theta update is a monotone scheme and the xi update is an upwind
transport, so the box ``[min theta_0, max theta_0] x [min xi_0, max xi_0]``
is preserved exactly.  This is the reference discretisation.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import NumericalFailure, StabilityViolation, StateSpaceExit, ValidationError
from .model import FluxLaw, get_flux_law, lambda1, lambda2
from .scenarios import Scenario

__all__ = [
    "Grid1D",
    "FieldPair",
    "SimConfig",
    "Trajectory",
    "mollifier_kernel",
    "mollifier_normalization",
    "mollify_initial_data",
    "initial_field",
    "stable_dt",
    "step_invariant",
    "step_conservative",
    "step_identity",
    "run",
]

CONSERVATIVE = "conservative"
INVARIANT = "invariant"
REPRESENTATIONS = (CONSERVATIVE, INVARIANT)
BOUNDARIES = ("periodic", "outflow")
SYSTEMS = ("tailored", "identity")
N_GHOST = 2
DT_SLACK = 1e-12


@dataclass(frozen=True)
class Grid1D:
    x_left: float
    x_right: float
    n_cells: int
    boundary: str = "outflow"

    def __post_init__(self):
        if self.n_cells < 8:
            raise ValidationError("n_cells", f"must be >= 8, got {self.n_cells!r}")
        if not self.x_right > self.x_left:
            raise ValidationError("x_right", "must exceed x_left")
        if self.boundary not in BOUNDARIES:
            raise ValidationError("boundary", f"must be one of {BOUNDARIES}, got {self.boundary!r}")

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_left + (np.arange(self.n_cells) + 0.5) * self.dx

    def pad(self, a: np.ndarray) -> np.ndarray:
        """``a`` with two ghost cells per side."""
        mode = "wrap" if self.boundary == "periodic" else "edge"
        return np.pad(a, N_GHOST, mode=mode)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FieldPair:
    """Cell values ``a, b`` meaning ``(u, v)`` or ``(theta, xi)`` at ``time``."""

    a: np.ndarray
    b: np.ndarray
    time: float = 0.0
    representation: str = CONSERVATIVE

    def __post_init__(self):
        if self.representation not in REPRESENTATIONS:
            raise ValueError(f"unknown representation {self.representation!r}")
        object.__setattr__(self, "a", _frozen(self.a))
        object.__setattr__(self, "b", _frozen(self.b))
        if self.a.shape != self.b.shape or self.a.ndim != 1:
            raise ValueError("a and b must be 1-d arrays of equal length")

    def uv(self):
        if self.representation == CONSERVATIVE:
            return self.a, self.b
        sq = np.sqrt(self.b)
        return self.a * sq, self.a / sq

    def theta_xi(self):
        if self.representation == INVARIANT:
            return self.a, self.b
        return np.sqrt(self.a * self.b), self.a / self.b

    def r_xi(self):
        if self.representation == INVARIANT:
            return self.a * self.a, self.b
        return self.a * self.b, self.a / self.b

    def to(self, representation: str) -> "FieldPair":
        if representation == self.representation:
            return self
        a, b = self.uv() if representation == CONSERVATIVE else self.theta_xi()
        return FieldPair(a, b, self.time, representation)

    def __len__(self):
        return self.a.size


@dataclass(frozen=True)
class SimConfig:
    """Everything needed to reproduce one run.

    ``snapshot_every`` is the snapshot cadence in steps; the final state is
    always stored.  ``system = "identity"`` selects the plain ``eps u_xx``
    regularisation and is only used to demonstrate its failure.
    """

    scenario: Scenario = field(default_factory=Scenario)
    flux_law: str = "thin_film"
    epsilon: float = 0.1
    k: float = 1.0
    p: float = 1.0
    m: float = 0.5
    M: float = 4.0
    n_cells: int = 400
    boundary: Optional[str] = None
    t_end: float = 1.0
    cfl_adv: float = 0.45
    cfl_diff: float = 0.4
    representation: str = INVARIANT
    system: str = "tailored"
    snapshot_every: int = 10
    max_steps: int = 10_000_000

    @property
    def law(self) -> FluxLaw:
        return get_flux_law(self.flux_law)

    def grid(self) -> Grid1D:
        return Grid1D(
            self.scenario.x_left,
            self.scenario.x_right,
            self.n_cells,
            self.boundary or self.scenario.default_boundary(),
        )

    def validate(self) -> "SimConfig":
        if not (isinstance(self.epsilon, (int, float)) and self.epsilon >= 0):
            raise ValidationError("epsilon", f"must be >= 0, got {self.epsilon!r}")
        if not 0 < self.cfl_adv <= 0.5:
            raise ValidationError("cfl_adv", f"must lie in (0, 0.5], got {self.cfl_adv!r}")
        if not 0 < self.cfl_diff <= 0.5:
            raise ValidationError("cfl_diff", f"must lie in (0, 0.5], got {self.cfl_diff!r}")
        if not self.m > 0:
            raise ValidationError("m", f"must be positive, got {self.m!r}")
        if not self.M > self.m:
            raise ValidationError("M", f"must exceed m = {self.m!r}, got {self.M!r}")
        if not self.k > 0:
            raise ValidationError("k", f"must be positive, got {self.k!r}")
        if not self.p >= 0.5:
            raise ValidationError("p", f"must be >= 1/2, got {self.p!r}")
        if not self.t_end >= 0:
            raise ValidationError("t_end", f"must be >= 0, got {self.t_end!r}")
        if self.representation not in REPRESENTATIONS:
            raise ValidationError("representation", f"must be one of {REPRESENTATIONS}")
        if self.system not in SYSTEMS:
            raise ValidationError("system", f"must be one of {SYSTEMS}")
        if self.system == "identity" and self.representation != CONSERVATIVE:
            raise ValidationError("representation", "the identity system is only available in conservative form")
        if not (isinstance(self.snapshot_every, int) and self.snapshot_every >= 1):
            raise ValidationError("snapshot_every", "must be a positive integer")
        if not (isinstance(self.max_steps, int) and self.max_steps >= 1):
            raise ValidationError("max_steps", "must be a positive integer")
        try:
            law = self.law
        except KeyError as exc:
            raise ValidationError("flux_law", str(exc.args[0])) from None
        grid = self.grid()
        self.scenario.validate(self.m, self.M, law, self.t_end, grid.boundary)
        return self


@dataclass
class Trajectory:
    config: SimConfig
    grid: Grid1D
    snapshots: list
    dts: list
    n_steps: int
    wall_time: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def final(self) -> FieldPair:
        return self.snapshots[-1]


# ---------------------------------------------------------------- mollifier

def _bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(1.0 / (xi * xi - 1.0))
    return out


_NORMALIZATION = None


def mollifier_normalization() -> float:
    """``A = int_{-1}^{1} exp(1/(x^2 - 1)) dx``."""
    global _NORMALIZATION
    if _NORMALIZATION is None:
        _NORMALIZATION = integrate.quad(lambda x: math.exp(1.0 / (x * x - 1.0)), -1.0, 1.0,
                                        epsabs=1e-13, epsrel=1e-13)[0]
    return _NORMALIZATION


def mollifier_kernel(x):
    """Unit-mass Friedrichs bump ``j(x)`` supported on ``|x| < 1``."""
    return _bump(x) / mollifier_normalization()


def mollifier_kernel_derivative(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    d = xi * xi - 1.0
    out[inside] = np.exp(1.0 / d) * (-2.0 * xi / (d * d))
    return out / mollifier_normalization()


def _mollify_component(f: Callable, x: np.ndarray, eps: float, nodes: int) -> np.ndarray:
    h = 2.0 / nodes
    y = -1.0 + h * (np.arange(nodes) + 0.5)
    w = _bump(y)
    w = w / w.sum()
    centre = f(x)
    samples = f(x[:, None] - eps * y[None, :])
    out = centre + (samples - centre[:, None]) @ w
    # a convex average cannot leave the range of its samples
    return np.clip(out, samples.min(axis=1), samples.max(axis=1))


def mollify_initial_data(raw: Callable, eps_mollifier: float, grid: Grid1D,
                         representation: str = CONSERVATIVE, nodes: int = 128) -> FieldPair:
    """Convolve a datum with the scaled bump ``j(x/eps)/eps`` at cell centres.

    ``raw(x)`` returns ``(u, v)`` arrays.  The convolution acts on the
    variables of ``representation``: ``(u, v)`` for conservative runs,
    ``(theta, xi)`` for invariant runs.  Composite midpoint quadrature with
    ``nodes`` points over the kernel support; weights are normalised to sum
    to one so constants are reproduced exactly.
    """
    if not eps_mollifier > 0:
        raise ValueError("eps_mollifier must be positive")
    if nodes < 64:
        raise ValueError("need at least 64 quadrature nodes")
    if representation == CONSERVATIVE:
        comps = (lambda x: raw(x)[0], lambda x: raw(x)[1])
    else:
        def theta(x):
            u, v = raw(x)
            return np.sqrt(u * v)

        def xi(x):
            u, v = raw(x)
            return u / v

        comps = (theta, xi)
    x = grid.centers
    a, b = (_mollify_component(f, x, eps_mollifier, nodes) for f in comps)
    return FieldPair(a, b, 0.0, representation)


def initial_field(cfg: SimConfig) -> FieldPair:
    grid = cfg.grid()
    width = cfg.scenario.mollifier_width or 2.0 * grid.dx
    return mollify_initial_data(cfg.scenario.datum, width, grid, cfg.representation)


# ---------------------------------------------------------------- stepping

def _centered_gradient(grid: Grid1D, a: np.ndarray) -> np.ndarray:
    ap = grid.pad(a)
    return (ap[N_GHOST + 1:-N_GHOST + 1] - ap[N_GHOST - 1:-N_GHOST - 1]) / (2.0 * grid.dx)


def _transport_speed(law: FluxLaw, grid: Grid1D, r: np.ndarray, eps: float) -> np.ndarray:
    b = np.asarray(law.eval(r, 0), dtype=float) * np.ones_like(r)
    if eps > 0:
        b = b - eps * _centered_gradient(grid, r) / r
    return b


def stable_dt(fp: FieldPair, cfg: SimConfig) -> float:
    """``min(cfl_adv dx / max|speed|, cfl_diff dx^2 / (2 (2 eps)))``.

    The advective speed is ``max(|lambda_1|, |lambda_2|)``; for invariant
    fields the xi transport speed ``phi(r) - eps r_x / r`` is included as
    well.  The diffusive bound is dropped when ``eps = 0``.
    """
    grid = cfg.grid()
    law = cfg.law
    r, _ = fp.r_xi()
    speed = max(float(np.max(np.abs(lambda1(law, r)))), float(np.max(np.abs(lambda2(law, r)))))
    if fp.representation == INVARIANT:
        speed = max(speed, float(np.max(np.abs(_transport_speed(law, grid, r, cfg.epsilon)))))
    dx = grid.dx
    dt_adv = cfg.cfl_adv * dx / speed if speed > 0 else math.inf
    dt_diff = cfg.cfl_diff * dx * dx / (4.0 * cfg.epsilon) if cfg.epsilon > 0 else math.inf
    return min(dt_adv, dt_diff)


def _check_dt(fp: FieldPair, cfg: SimConfig, dt: float):
    if not dt > 0:
        raise StabilityViolation(f"time step must be positive, got {dt!r}", fp.time)
    limit = stable_dt(fp, cfg)
    if dt > limit * (1.0 + DT_SLACK):
        raise StabilityViolation(f"dt = {dt!r} exceeds the stable step {limit!r}", fp.time)


def _sonic_flux(law: FluxLaw, r_lo: float, r_hi: float) -> float:
    r_star = optimize.brentq(lambda r: float(lambda2(law, r)), r_lo, r_hi, xtol=1e-15)
    return math.sqrt(r_star) * float(law.eval(r_star, 0))


def _godunov_theta_flux(law: FluxLaw, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Godunov flux for ``G(theta) = theta phi(theta^2)``.

    ``G' = lambda_2(theta^2)`` is increasing, so G is convex and the flux
    is the minimum of G over ``[a, b]`` when ``a <= b`` and the maximum of
    the endpoint values otherwise.
    """
    ra, rb = a * a, b * b
    ga = a * law.eval(ra, 0)
    gb = b * law.eval(rb, 0)
    fa = lambda2(law, ra)
    fb = lambda2(law, rb)
    rising = a <= b
    out = np.where(rising, np.where(fa >= 0, ga, gb), np.maximum(ga, gb))
    sonic = rising & (fa < 0) & (fb > 0)
    if np.any(sonic):
        out = np.where(sonic, _sonic_flux(law, float(ra[sonic].min()), float(rb[sonic].max())), out)
    return out


def step_invariant(fp: FieldPair, cfg: SimConfig, dt: float) -> FieldPair:
    """One forward-Euler step of the decoupled ``(theta, xi)`` system."""
    if fp.representation != INVARIANT:
        raise ValueError("step_invariant needs (theta, xi) fields")
    _check_dt(fp, cfg, dt)
    grid = cfg.grid()
    law = cfg.law
    eps = cfg.epsilon
    dx = grid.dx
    n = len(fp)
    theta, xi = fp.a, fp.b

    tp = grid.pad(theta)
    g = _godunov_theta_flux(law, tp[N_GHOST - 1:N_GHOST + n], tp[N_GHOST:N_GHOST + n + 1])
    new_theta = theta - (dt / dx) * (g[1:] - g[:-1])
    if eps > 0:
        lap = tp[N_GHOST + 1:N_GHOST + n + 1] - 2.0 * theta + tp[N_GHOST - 1:N_GHOST + n - 1]
        new_theta = new_theta + (2.0 * eps * dt / (dx * dx)) * lap

    b = _transport_speed(law, grid, theta * theta, eps)
    xp = grid.pad(xi)
    back = xi - xp[N_GHOST - 1:N_GHOST + n - 1]
    fwd = xp[N_GHOST + 1:N_GHOST + n + 1] - xi
    new_xi = xi - (dt / dx) * (np.maximum(b, 0.0) * back + np.minimum(b, 0.0) * fwd)

    return FieldPair(new_theta, new_xi, fp.time + dt, INVARIANT)


def _conservative_fluxes(law: FluxLaw, ul, vl, ur, vr):
    rl, rr = ul * vl, ur * vr
    phil = law.eval(rl, 0)
    phir = law.eval(rr, 0)
    alpha = np.maximum.reduce([
        np.abs(lambda1(law, rl) * np.ones_like(rl)),
        np.abs(lambda2(law, rl)),
        np.abs(lambda1(law, rr) * np.ones_like(rr)),
        np.abs(lambda2(law, rr)),
    ])
    fu = 0.5 * (ul * phil + ur * phir) - 0.5 * alpha * (ur - ul)
    fv = 0.5 * (vl * phil + vr * phir) - 0.5 * alpha * (vr - vl)
    return fu, fv


def _conservative_update(fp: FieldPair, cfg: SimConfig, dt: float, system: str) -> FieldPair:
    if fp.representation != CONSERVATIVE:
        raise ValueError("conservative steps need (u, v) fields")
    _check_dt(fp, cfg, dt)
    grid = cfg.grid()
    law = cfg.law
    eps = cfg.epsilon
    dx = grid.dx
    n = len(fp)
    u, v = fp.a, fp.b
    up, vp = grid.pad(u), grid.pad(v)
    sl = slice(N_GHOST - 1, N_GHOST + n)
    sr = slice(N_GHOST, N_GHOST + n + 1)
    ul, vl, ur, vr = up[sl], vp[sl], up[sr], vp[sr]
    fu, fv = _conservative_fluxes(law, ul, vl, ur, vr)
    if eps > 0:
        if system == "tailored":
            grad_r = (ur * vr - ul * vl) / dx
            # harmonic-mean weights: 1/w is the mean of 1/v (resp. 1/u)
            fu = fu - eps * grad_r * 0.5 * (1.0 / vl + 1.0 / vr)
            fv = fv - eps * grad_r * 0.5 * (1.0 / ul + 1.0 / ur)
        else:
            fu = fu - eps * (ur - ul) / dx
            fv = fv - eps * (vr - vl) / dx
    new_u = u - (dt / dx) * (fu[1:] - fu[:-1])
    new_v = v - (dt / dx) * (fv[1:] - fv[:-1])
    out = FieldPair(new_u, new_v, fp.time + dt, CONSERVATIVE)
    if system == "tailored":
        slack = 0.01 * (cfg.M - cfg.m)
        lo, hi = cfg.m - slack, cfg.M + slack
        bad = np.nonzero((new_u < lo) | (new_u > hi) | (new_v < lo) | (new_v > hi) | ~np.isfinite(new_u + new_v))[0]
        if bad.size:
            i = int(bad[0])
            raise StateSpaceExit(
                f"cell {i} left [{lo:.6g}, {hi:.6g}]^2: (u, v) = ({new_u[i]!r}, {new_v[i]!r})", fp.time
            )
    return out


def step_conservative(fp: FieldPair, cfg: SimConfig, dt: float) -> FieldPair:
    """One forward-Euler step of the tailored system in ``(u, v)``.

    Interface flux: local Lax-Friedrichs with ``alpha`` the largest
    ``|lambda_i|`` of the two neighbours, minus the diffusive flux
    ``eps (r_{i+1} - r_i)/dx / w`` with ``w`` the harmonic mean of ``v``
    (u-equation) or ``u`` (v-equation).
    """
    return _conservative_update(fp, cfg, dt, "tailored")


def step_identity(fp: FieldPair, cfg: SimConfig, dt: float) -> FieldPair:
    """One step of the plain ``eps U_xx`` regularisation (for demonstrations)."""
    return _conservative_update(fp, cfg, dt, "identity")


def _stepper(cfg: SimConfig):
    if cfg.representation == INVARIANT:
        return step_invariant
    return step_identity if cfg.system == "identity" else step_conservative


def run(cfg: SimConfig, hooks: Sequence[Callable] = (), initial: Optional[FieldPair] = None) -> Trajectory:
    """Integrate from the mollified initial datum to ``cfg.t_end``.

    Each hook is called as ``hook(old, new, dt)`` after every step.  The
    last step is clipped to land on ``t_end`` exactly.
    """
    cfg.validate()
    grid = cfg.grid()
    step = _stepper(cfg)
    fp = initial if initial is not None else initial_field(cfg)
    if fp.representation != cfg.representation:
        fp = fp.to(cfg.representation)
    snapshots = [fp]
    dts = []
    n_steps = 0
    start = _time.perf_counter()
    t_end = cfg.t_end
    while fp.time < t_end:
        if n_steps >= cfg.max_steps:
            raise NumericalFailure(f"step budget {cfg.max_steps} exhausted", fp.time)
        dt = stable_dt(fp, cfg)
        remaining = t_end - fp.time
        last = remaining <= dt
        if last:
            dt = remaining
        elif remaining < 2.0 * dt:
            dt = 0.5 * remaining  # avoid a roundoff-sized final step
        try:
            new = step(fp, cfg, dt)
        except NumericalFailure as exc:
            if exc.time is None:
                exc.time = fp.time
            raise
        if last:
            new = FieldPair(new.a, new.b, t_end, new.representation)
        for hook in hooks:
            hook(fp, new, dt)
        fp = new
        dts.append(dt)
        n_steps += 1
        if n_steps % cfg.snapshot_every == 0 or last:
            snapshots.append(fp)
    return Trajectory(cfg, grid, snapshots, dts, n_steps, _time.perf_counter() - start)


def with_overrides(cfg: SimConfig, **changes) -> SimConfig:
    """``dataclasses.replace`` that also accepts scenario fields as ``scenario__name``."""
    scen = {k.split("__", 1)[1]: v for k, v in changes.items() if k.startswith("scenario__")}
    rest = {k: v for k, v in changes.items() if not k.startswith("scenario__")}
    if scen:
        rest["scenario"] = replace(cfg.scenario, **scen)
    return replace(cfg, **rest)
