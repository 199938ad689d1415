"""Exact Riemann solver for the inviscid system.

The wave fan is a 1-contact along ``{uv = const}`` moving at ``phi(r_left)``
followed by a 2-wave along ``{u/v = const}``.  The 2-wave is a rarefaction
when ``r`` increases across it and a Lax shock when ``r`` decreases.  On a
2-wave ``u = sqrt(xi) sqrt(r)`` with ``xi`` fixed, so the Rankine-Hugoniot
speed reduces to ``[sqrt(r) phi(r)] / [sqrt(r)]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import optimize

from .errors import AdmissibilityViolation, RootNotBracketed
from .model import FluxLaw, InvariantState, State, from_invariants, lambda2, to_invariants

__all__ = [
    "Shock",
    "Rarefaction",
    "RiemannSolution",
    "solve_riemann",
    "sample_riemann",
    "sample_riemann_grid",
    "rankine_hugoniot_residual",
    "shock_speed",
]

DEGENERATE_JUMP = 1e-13
BISECTION_XTOL = 1e-12


@dataclass(frozen=True)
class Shock:
    speed: float

    @property
    def kind(self):
        return "shock"


@dataclass(frozen=True)
class Rarefaction:
    # lambda_head is lambda_2 on the middle (left) side of the fan,
    # lambda_tail on the right side; lambda_head < lambda_tail.
    lambda_head: float
    lambda_tail: float

    @property
    def kind(self):
        return "rarefaction"


@dataclass(frozen=True)
class RiemannSolution:
    left: State
    middle: State
    right: State
    contact_speed: float
    wave2: Optional[Union[Shock, Rarefaction]]
    law: FluxLaw

    def wave_speeds(self) -> list:
        speeds = [self.contact_speed]
        if isinstance(self.wave2, Shock):
            speeds.append(self.wave2.speed)
        elif isinstance(self.wave2, Rarefaction):
            speeds.extend([self.wave2.lambda_head, self.wave2.lambda_tail])
        return speeds

    def summary(self) -> dict:
        if self.wave2 is None:
            wave2 = {"type": "none"}
        elif isinstance(self.wave2, Shock):
            wave2 = {"type": "shock", "speed": self.wave2.speed}
        else:
            wave2 = {
                "type": "rarefaction",
                "lambda_head": self.wave2.lambda_head,
                "lambda_tail": self.wave2.lambda_tail,
            }
        contact_strength = abs(self.left.u - self.middle.u) + abs(self.left.v - self.middle.v)
        return {
            "flux_law": self.law.name,
            "left": [self.left.u, self.left.v],
            "middle": [self.middle.u, self.middle.v],
            "right": [self.right.u, self.right.v],
            "contact": {"type": "contact" if contact_strength > 0 else "none", "speed": self.contact_speed},
            "wave2": wave2,
        }


def shock_speed(law: FluxLaw, r_a: float, r_b: float) -> float:
    """Rankine-Hugoniot speed of a 2-shock joining ``r_a`` and ``r_b``."""
    sa, sb = math.sqrt(r_a), math.sqrt(r_b)
    return float((sb * law.eval(r_b, 0) - sa * law.eval(r_a, 0)) / (sb - sa))


def _check_monotone_lambda2(law: FluxLaw, r_lo: float, r_hi: float, samples: int = 64):
    r = np.linspace(r_lo, r_hi, samples)
    ind = 3.0 * law.eval(r, 1) + 2.0 * r * law.eval(r, 2)
    ind = np.asarray(ind, dtype=float) * np.ones_like(r)
    if np.any(ind <= 0):
        i = int(np.argmax(ind <= 0))
        raise AdmissibilityViolation(
            f"lambda_2 is not increasing near r = {r[i]:.6g} for flux law {law.name!r}"
        )


def solve_riemann(law: FluxLaw, left: State, right: State, m: Optional[float] = None) -> RiemannSolution:
    """Construct the contact + 2-wave fan joining ``left`` to ``right``."""
    iv_l = to_invariants(left, m)
    iv_r = to_invariants(right, m)
    r_l, r_r = iv_l.r, iv_r.r
    middle = from_invariants(InvariantState(r=r_l, xi=iv_r.xi))
    if iv_l.xi == iv_r.xi:
        # the contact has zero strength; keep the given left state bitwise
        middle = left
    contact_speed = float(law.eval(r_l, 0))

    if abs(r_l - r_r) < DEGENERATE_JUMP:
        # |dr| this small means right and middle coincide up to rounding
        return RiemannSolution(left, right, right, contact_speed, None, law)

    _check_monotone_lambda2(law, min(r_l, r_r), max(r_l, r_r))
    lam_l = float(lambda2(law, r_l))
    lam_r = float(lambda2(law, r_r))
    if r_l < r_r:
        wave2 = Rarefaction(lambda_head=lam_l, lambda_tail=lam_r)
        slowest = lam_l
    else:
        s = shock_speed(law, r_l, r_r)
        if not (lam_l > s > lam_r):
            raise AdmissibilityViolation(
                f"Lax inequalities fail: lambda2(left) = {lam_l!r}, s = {s!r}, lambda2(right) = {lam_r!r}"
            )
        wave2 = Shock(speed=s)
        slowest = s
    if contact_speed > slowest:
        raise AdmissibilityViolation(
            f"contact speed {contact_speed!r} exceeds the 2-wave speed {slowest!r}"
        )
    return RiemannSolution(left, middle, right, contact_speed, wave2, law)


def _invert_lambda2(law: FluxLaw, speed: float, r_lo: float, r_hi: float) -> float:
    if law.lambda2_inverse is not None:
        return float(law.lambda2_inverse(speed))

    def g(r):
        return float(lambda2(law, r)) - speed

    glo, ghi = g(r_lo), g(r_hi)
    if glo == 0.0:
        return r_lo
    if ghi == 0.0:
        return r_hi
    if glo * ghi > 0:
        raise RootNotBracketed(f"lambda_2(r) = {speed!r} has no root in [{r_lo!r}, {r_hi!r}]")
    return float(optimize.bisect(g, r_lo, r_hi, xtol=BISECTION_XTOL, maxiter=500))


def sample_riemann(sol: RiemannSolution, x_over_t: float) -> State:
    """Evaluate the self-similar solution at ``x/t``."""
    y = float(x_over_t)
    if y < sol.contact_speed:
        return sol.left
    wave = sol.wave2
    if wave is None:
        return sol.right
    if isinstance(wave, Shock):
        return sol.middle if y < wave.speed else sol.right
    if y <= wave.lambda_head:
        return sol.middle
    if y >= wave.lambda_tail:
        return sol.right
    r_lo = sol.middle.u * sol.middle.v
    r_hi = sol.right.u * sol.right.v
    r = _invert_lambda2(sol.law, y, r_lo, r_hi)
    xi = sol.right.u / sol.right.v
    return from_invariants(InvariantState(r=r, xi=xi))


def sample_riemann_grid(sol: RiemannSolution, x, t: float, x0: float = 0.0):
    """Sample the solution at positions ``x`` and time ``t`` (jump at ``x0``).

    Returns arrays ``(u, v)``.  At ``t = 0`` the initial step is returned.
    """
    x = np.asarray(x, dtype=float)
    u = np.empty_like(x)
    v = np.empty_like(x)
    for i, xi in enumerate(x):
        if t == 0:
            s = sol.left if xi < x0 else sol.right
        else:
            s = sample_riemann(sol, (xi - x0) / t)
        u[i], v[i] = s.u, s.v
    return u, v


def rankine_hugoniot_residual(law: FluxLaw, s: float, a: State, b: State) -> np.ndarray:
    """``s [U] - [F(U)]`` for a jump from ``a`` to ``b`` moving at ``s``."""
    phi_a = law.eval(a.u * a.v, 0)
    phi_b = law.eval(b.u * b.v, 0)
    return np.array(
        [
            s * (b.u - a.u) - (b.u * phi_b - a.u * phi_a),
            s * (b.v - a.v) - (b.v * phi_b - a.v * phi_a),
        ],
        dtype=float,
    )
