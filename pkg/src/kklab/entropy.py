"""Entropy/entropy-flux pairs of the Keyfitz-Kranzer system.

The family used throughout is

    E_{k,p}(u, v) = (uv)^{-k} + sqrt(uv) (u/v)^p - m^{-2k} - m,

with flux

    Q_{k,p}(u, v) = int_{m^2}^{r} -k s^{-k-1} (phi(s) + 2 s phi'(s)) ds
                    + phi(r) sqrt(r) (u/v)^p,

for ``k > 0`` and ``p >= 1/2``.  It is the member ``Psi(r) = r^{-k}``,
``Theta(xi) = xi^p`` of the general family ``Psi(r) + sqrt(r) Theta(xi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import OutOfStateSpace, QuadratureFailure
from .model import FluxLaw, State, jacobian

__all__ = [
    "EntropyPair",
    "GeneralPairSpec",
    "ConditionFlags",
    "entropy_value",
    "entropy_flux_value",
    "entropy_gradient",
    "entropy_hessian",
    "compatibility_residual",
    "check_general_pair",
    "flux_integral",
    "dissipation_form",
]

QUAD_ABS_TOL = 1e-12
QUAD_LIMIT = 10_000


@dataclass(frozen=True)
class EntropyPair:
    """Parameters ``(k, p, m)`` selecting ``(E_{k,p}, Q_{k,p})``."""

    k: float
    p: float
    m: float

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k!r}")
        if not self.p >= 0.5:
            raise ValueError(f"p must be >= 1/2, got {self.p!r}")
        if not self.m > 0:
            raise ValueError(f"m must be positive, got {self.m!r}")

    # Vectorised kernels.  No state-space check: callers that need one use
    # the module-level functions.

    def value(self, u, v):
        k, p, m = self.k, self.p, self.m
        r = u * v
        # grouping and m^{-2k} written as (m*m)^{-k} keep E(m, m) == 0 bitwise
        return (r ** (-k) - (m * m) ** (-k)) + (np.sqrt(r) * (u / v) ** p - m)

    def flux(self, law: FluxLaw, u, v):
        r = u * v
        return flux_integral(self, law, r) + law.eval(r, 0) * np.sqrt(r) * (u / v) ** self.p

    def gradient(self, u, v):
        k, p = self.k, self.p
        a, b = p + 0.5, 0.5 - p
        eu = -k * u ** (-k - 1.0) * v ** (-k) + a * u ** (a - 1.0) * v ** b
        ev = -k * u ** (-k) * v ** (-k - 1.0) + b * u ** a * v ** (b - 1.0)
        return np.stack([eu, ev], axis=-1)

    def hessian_parts(self, u, v):
        """The ``(uv)^{-k}`` Hessian and the ``u^{p+1/2} v^{1/2-p}`` Hessian."""
        k, p = self.k, self.p
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        h1 = np.empty(u.shape + (2, 2))
        h1[..., 0, 0] = k * (k + 1.0) / (u ** (k + 2.0) * v ** k)
        h1[..., 0, 1] = h1[..., 1, 0] = k * k / (u ** (k + 1.0) * v ** (k + 1.0))
        h1[..., 1, 1] = k * (k + 1.0) / (u ** k * v ** (k + 2.0))
        c = p * p - 0.25
        xi = u / v
        h2 = np.empty(u.shape + (2, 2))
        h2[..., 0, 0] = c * xi ** (p - 0.5) / u
        h2[..., 0, 1] = h2[..., 1, 0] = -c * xi ** (p - 0.5) / v
        h2[..., 1, 1] = c * xi ** (p + 0.5) / v
        return h1, h2

    def hessian(self, u, v):
        h1, h2 = self.hessian_parts(u, v)
        return h1 + h2


def _closed_form_integral(ep: EntropyPair, coeffs, r):
    # int_{m^2}^{r} -k s^{-k-1} sum_j c_j (1 + 2j) s^j ds
    k, lo = ep.k, ep.m * ep.m
    total = 0.0
    for j, c in enumerate(coeffs):
        if c == 0.0:
            continue
        e = j - k
        if e == 0:
            part = np.log(r / lo)
        else:
            part = (r ** e - lo ** e) / e
        total = total + (-k * c * (1.0 + 2.0 * j)) * part
    return total


def _quad_integral(ep: EntropyPair, law: FluxLaw, r: float) -> float:
    k, lo = ep.k, ep.m * ep.m
    if r == lo:
        return 0.0

    def integrand(s):
        return -k * s ** (-k - 1.0) * (law.eval(s, 0) + 2.0 * s * law.eval(s, 1))

    val, abserr = integrate.quad(
        integrand, lo, r, epsabs=QUAD_ABS_TOL, epsrel=1e-14, limit=QUAD_LIMIT
    )
    if not abserr <= max(QUAD_ABS_TOL, 64 * np.finfo(float).eps * abs(val)):
        raise QuadratureFailure(
            f"entropy-flux integral on [{lo!r}, {r!r}] has error estimate {abserr:.3g}"
        )
    return val


def flux_integral(ep: EntropyPair, law: FluxLaw, r, method: str = "auto"):
    """The integral part of ``Q_{k,p}`` from ``m^2`` to ``r``.

    ``method`` is ``"auto"`` (closed form when the law is polynomial),
    ``"closed"`` or ``"quad"``.
    """
    if method not in ("auto", "closed", "quad"):
        raise ValueError(f"unknown method {method!r}")
    if method != "quad" and law.poly_coeffs is not None:
        out = _closed_form_integral(ep, law.poly_coeffs, np.asarray(r, dtype=float))
        return float(out) if np.ndim(out) == 0 else out
    if method == "closed":
        raise ValueError(f"flux law {law.name!r} has no closed-form entropy flux")
    if np.ndim(r) == 0:
        return _quad_integral(ep, law, float(r))
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    # duplicated states are common in piecewise-constant fields
    uniq, inv = np.unique(r, return_inverse=True)
    vals = np.array([_quad_integral(ep, law, float(x)) for x in uniq])
    out.flat[:] = vals[inv.ravel()]
    return out


def _checked(s, m):
    if not isinstance(s, State):
        s = State(*map(float, s))
    return s.check(m)


def entropy_value(ep: EntropyPair, s: State) -> float:
    s = _checked(s, ep.m)
    return float(ep.value(s.u, s.v))


def entropy_flux_value(ep: EntropyPair, law: FluxLaw, s: State, method: str = "auto") -> float:
    s = _checked(s, ep.m)
    r = s.u * s.v
    return float(flux_integral(ep, law, r, method) + law.eval(r, 0) * math.sqrt(r) * (s.u / s.v) ** ep.p)


def entropy_gradient(ep: EntropyPair, s: State) -> np.ndarray:
    s = _checked(s, ep.m)
    return ep.gradient(s.u, s.v)


def entropy_hessian(ep: EntropyPair, s: State) -> np.ndarray:
    s = _checked(s, ep.m)
    return ep.hessian(s.u, s.v)


def compatibility_residual(
    ep: EntropyPair,
    law: FluxLaw,
    s: State,
    entropy_flux: Optional[Callable[[float, float], float]] = None,
    h: float = 1e-5,
) -> np.ndarray:
    """``(grad E)^T DF - (grad Q)^T`` with ``grad Q`` by central differences.

    ``entropy_flux(u, v)`` replaces ``Q_{k,p}``; it exists for negative
    controls.  The difference step is ``h * max(1, |u|)`` (resp. ``v``).
    Finite-difference nodes may dip below ``m``; they are not checked.
    """
    s = _checked(s, ep.m)
    if entropy_flux is None:
        def entropy_flux(u, v):
            r = u * v
            return flux_integral(ep, law, r) + law.eval(r, 0) * math.sqrt(r) * (u / v) ** ep.p
    hu = h * max(1.0, abs(s.u))
    hv = h * max(1.0, abs(s.v))
    dq_du = (entropy_flux(s.u + hu, s.v) - entropy_flux(s.u - hu, s.v)) / (2 * hu)
    dq_dv = (entropy_flux(s.u, s.v + hv) - entropy_flux(s.u, s.v - hv)) / (2 * hv)
    grad_e = ep.gradient(s.u, s.v)
    return grad_e @ jacobian(law, s) - np.array([dq_du, dq_dv])


def dissipation_form(ep: EntropyPair, u, v, ux, vx):
    """``U_x^T (hess E) B U_x`` from matrices, with ``B = [[1, u/v], [v/u, 1]]``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    hess = ep.hessian(u, v)
    b = np.empty(u.shape + (2, 2))
    b[..., 0, 0] = 1.0
    b[..., 0, 1] = u / v
    b[..., 1, 0] = v / u
    b[..., 1, 1] = 1.0
    w = np.stack([np.asarray(ux, dtype=float), np.asarray(vx, dtype=float)], axis=-1)
    bw = np.einsum("...ij,...j->...i", b, w)
    return np.einsum("...i,...ij,...j->...", w, hess, bw)


@dataclass(frozen=True)
class GeneralPairSpec:
    """A member ``Psi(r) + sqrt(r) Theta(xi)`` of the general entropy family.

    ``psi`` and ``theta`` are triples ``(f, f', f'')`` of callables.
    """

    psi: tuple = field(repr=False)
    theta: tuple = field(repr=False)
    name: str = "custom"

    @classmethod
    def power(cls, k: float, p: float) -> "GeneralPairSpec":
        """``Psi = r^{-k}``, ``Theta = xi^p``: the pair behind ``E_{k,p}``."""
        return cls(
            psi=(lambda r: r ** -k, lambda r: -k * r ** (-k - 1), lambda r: k * (k + 1) * r ** (-k - 2)),
            theta=(lambda x: x ** p, lambda x: p * x ** (p - 1), lambda x: p * (p - 1) * x ** (p - 2)),
            name=f"power(k={k}, p={p})",
        )

    @classmethod
    def r_only(cls, k: float) -> "GeneralPairSpec":
        """``Psi = r^{-k}``, ``Theta = 0``: the entropy ``r^{-k} - m^{-2k}``."""
        zero = lambda x: 0.0 * x  # noqa: E731
        return cls(
            psi=(lambda r: r ** -k, lambda r: -k * r ** (-k - 1), lambda r: k * (k + 1) * r ** (-k - 2)),
            theta=(zero, zero, zero),
            name=f"r_only(k={k})",
        )


@dataclass(frozen=True)
class ConditionFlags:
    psi_convex: bool
    psi_decreasing: bool
    psi_combination: bool
    theta_condition: bool
    theta_expression: float
    form_r1: float
    form_r2: float

    @property
    def all_pass(self) -> bool:
        return self.psi_convex and self.psi_decreasing and self.psi_combination and self.theta_condition

    def to_dict(self) -> dict:
        return {
            "psi_convex": self.psi_convex,
            "psi_decreasing": self.psi_decreasing,
            "psi_combination": self.psi_combination,
            "theta_condition": self.theta_condition,
            "theta_expression": self.theta_expression,
            "form_r1": self.form_r1,
            "form_r2": self.form_r2,
            "all_pass": self.all_pass,
        }


def check_general_pair(gp: GeneralPairSpec, r: float, xi: float) -> ConditionFlags:
    """Evaluate the four sufficient convexity conditions at ``(r, xi)``.

    ``form_r1`` and ``form_r2`` are ``r_i^T (hess E) r_i`` for the two
    eigenvectors, written in the invariants:

        form_r1 = sqrt(r) (4 xi^2 Theta'' + 4 xi Theta' - Theta) - 2 r Psi'
        form_r2 = 2 r (2 r Psi'' + Psi')
    """
    if not (r > 0 and xi > 0):
        raise OutOfStateSpace(f"(r, xi) = ({r!r}, {xi!r}) must be positive")
    _, d1, d2 = (f(r) for f in gp.psi)
    t0, t1, t2 = (f(xi) for f in gp.theta)
    terms = (4.0 * xi * xi * t2, 4.0 * xi * t1, -t0)
    theta_expr = sum(terms)
    # the expression vanishes identically for p = 1/2; allow for roundoff
    theta_tol = 64.0 * np.finfo(float).eps * sum(abs(t) for t in terms)
    combo = 2.0 * r * d2 + d1
    return ConditionFlags(
        psi_convex=bool(d2 > 0),
        psi_decreasing=bool(d1 < 0),
        psi_combination=bool(combo > 0),
        theta_condition=bool(theta_expr >= -theta_tol),
        theta_expression=float(theta_expr),
        form_r1=float(math.sqrt(r) * theta_expr - 2.0 * r * d1),
        form_r2=float(2.0 * r * combo),
    )
