"""Flux laws, states and the characteristic structure of the 2x2 system

    u_t + (u phi(uv))_x = 0,
    v_t + (v phi(uv))_x = 0,

posed on the state space ``u, v >= m > 0``.

The system is of Keyfitz-Kranzer type: both components are carried by the
common scalar velocity ``phi(r)`` with ``r = uv``.  Its Riemann invariants
are ``r = uv`` and ``xi = u/v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NonPositiveDerivative, OutOfStateSpace

__all__ = [
    "FluxLaw",
    "State",
    "InvariantState",
    "ValidationReport",
    "THIN_FILM",
    "LOG_LAW",
    "register_flux_law",
    "get_flux_law",
    "available_flux_laws",
    "validate_flux_law",
    "to_invariants",
    "from_invariants",
    "eigensystem",
    "flux",
    "jacobian",
    "classify_fields",
    "lambda1",
    "lambda2",
]


@dataclass(frozen=True)
class FluxLaw:
    """A scalar velocity law ``phi(r)`` with analytic first and second derivatives.

    Parameters
    ----------
    name : str
        Registry identifier.
    phi, dphi, d2phi : callable
        ``phi``, ``phi'`` and ``phi''``.  Must accept floats and numpy arrays.
    poly_coeffs : sequence of float, optional
        When ``phi(r) = sum_j c_j r**j`` this enables closed-form entropy
        fluxes.  ``poly_coeffs[j]`` is ``c_j``.
    lambda2_inverse : callable, optional
        Closed-form inverse of ``r -> phi(r) + 2 r phi'(r)``, used to sample
        rarefaction fans without root finding.
    """

    name: str
    phi: Callable = field(repr=False)
    dphi: Callable = field(repr=False)
    d2phi: Callable = field(repr=False)
    poly_coeffs: Optional[tuple] = None
    lambda2_inverse: Optional[Callable] = field(default=None, repr=False)

    def eval(self, r, order=0):
        """Return ``phi``, ``phi'`` or ``phi''`` at ``r`` for ``order`` 0, 1, 2."""
        if order == 0:
            return self.phi(r)
        if order == 1:
            return self.dphi(r)
        if order == 2:
            return self.d2phi(r)
        raise ValueError(f"order must be 0, 1 or 2, got {order!r}")


def _thin_film_phi(r):
    return 0.5 * r


def _thin_film_dphi(r):
    return 0.5 * np.ones_like(r) if isinstance(r, np.ndarray) else 0.5


def _thin_film_d2phi(r):
    return np.zeros_like(r) if isinstance(r, np.ndarray) else 0.0


def _thin_film_lambda2_inverse(speed):
    # lambda_2(r) = r/2 + 2 r (1/2) = 3r/2
    return 2.0 * speed / 3.0


def _log_phi(r):
    return np.log(r)


def _log_dphi(r):
    return 1.0 / r


def _log_d2phi(r):
    return -1.0 / (r * r)


THIN_FILM = FluxLaw(
    name="thin_film",
    phi=_thin_film_phi,
    dphi=_thin_film_dphi,
    d2phi=_thin_film_d2phi,
    poly_coeffs=(0.0, 0.5),
    lambda2_inverse=_thin_film_lambda2_inverse,
)

LOG_LAW = FluxLaw(name="log", phi=_log_phi, dphi=_log_dphi, d2phi=_log_d2phi)

_REGISTRY = {THIN_FILM.name: THIN_FILM, LOG_LAW.name: LOG_LAW}


def register_flux_law(law: FluxLaw, replace: bool = False) -> None:
    """Make ``law`` available to :func:`get_flux_law` and configuration files."""
    if law.name in _REGISTRY and not replace:
        raise ValueError(f"flux law {law.name!r} is already registered")
    _REGISTRY[law.name] = law


def get_flux_law(name: str) -> FluxLaw:
    try:
        return _REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise KeyError(f"unknown flux law {name!r} (known: {known})") from None


def available_flux_laws() -> list:
    return sorted(_REGISTRY)


@dataclass(frozen=True)
class State:
    """Conserved pair ``(u, v)``; ``u`` is e.g. a film height."""

    u: float
    v: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v], dtype=float)

    def check(self, m: float) -> "State":
        if not (self.u >= m and self.v >= m):
            raise OutOfStateSpace(
                f"state (u, v) = ({self.u!r}, {self.v!r}) violates u, v >= m = {m!r}"
            )
        return self


@dataclass(frozen=True)
class InvariantState:
    """Riemann-invariant image ``(r, xi) = (uv, u/v)`` of a :class:`State`."""

    r: float
    xi: float


@dataclass(frozen=True)
class ValidationReport:
    law: str
    r_min: float
    r_max: float
    samples: int
    min_dphi: float
    gnl_sign_changes: list
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "law": self.law,
            "r_min": self.r_min,
            "r_max": self.r_max,
            "samples": self.samples,
            "min_dphi": self.min_dphi,
            "gnl_sign_changes": [list(p) for p in self.gnl_sign_changes],
            "pass": self.passed,
            "note": self.note,
        }


def validate_flux_law(law: FluxLaw, r_min: float, r_max: float, samples: int = 100) -> ValidationReport:
    """Sample ``phi'`` and ``3 phi' + 2 r phi''`` on ``[r_min, r_max]``.

    Raises
    ------
    NonPositiveDerivative
        If any sampled ``phi'(r) <= 0``.

    Notes
    -----
    Sign changes of ``3 phi' + 2 r phi''`` (the genuine-nonlinearity
    indicator divided by ``2r``) are reported but do not fail the check:
    only a set of positive measure of zeros would be inadmissible, and a
    finite sample cannot decide that.
    """
    if not r_min > 0:
        raise ValueError(f"r_min must be positive, got {r_min!r}")
    if not r_max > r_min:
        raise ValueError("r_max must exceed r_min")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    r = np.linspace(r_min, r_max, samples)
    dphi = np.asarray(law.eval(r, 1), dtype=float) * np.ones_like(r)
    d2phi = np.asarray(law.eval(r, 2), dtype=float) * np.ones_like(r)
    bad = np.nonzero(dphi <= 0)[0]
    if bad.size:
        i = bad[0]
        raise NonPositiveDerivative(
            f"flux law {law.name!r}: phi'({r[i]:.17g}) = {dphi[i]:.17g} <= 0"
        )
    indicator = 3.0 * dphi + 2.0 * r * d2phi
    # a change is reported as the bracket between consecutive nonzero samples
    changes = []
    last = None
    for i, val in enumerate(np.sign(indicator)):
        if val == 0:
            continue
        if last is not None and val != np.sign(indicator[last]):
            changes.append((float(r[last]), float(r[i])))
        last = i
    return ValidationReport(
        law=law.name,
        r_min=float(r_min),
        r_max=float(r_max),
        samples=int(samples),
        min_dphi=float(dphi.min()),
        gnl_sign_changes=changes,
        passed=True,
        note="admissibility checked only on the sampled interval",
    )


def to_invariants(s: State, m: Optional[float] = None) -> InvariantState:
    if m is not None:
        s.check(m)
    elif not (s.u > 0 and s.v > 0):
        raise OutOfStateSpace(f"state ({s.u!r}, {s.v!r}) is not positive")
    return InvariantState(r=s.u * s.v, xi=s.u / s.v)


def from_invariants(iv: InvariantState) -> State:
    if not (iv.r > 0 and iv.xi > 0):
        raise OutOfStateSpace(f"invariants (r, xi) = ({iv.r!r}, {iv.xi!r}) must be positive")
    return State(u=math.sqrt(iv.r * iv.xi), v=math.sqrt(iv.r / iv.xi))


def _as_state(s, m):
    if not isinstance(s, State):
        s = State(*map(float, s))
    if m is not None:
        s.check(m)
    elif not (s.u > 0 and s.v > 0):
        raise OutOfStateSpace(f"state ({s.u!r}, {s.v!r}) is not positive")
    return s


def lambda1(law: FluxLaw, r):
    """Contact speed ``phi(r)``; vectorised over ``r``."""
    return law.eval(r, 0)


def lambda2(law: FluxLaw, r):
    """Genuinely nonlinear speed ``phi(r) + 2 r phi'(r)``; vectorised over ``r``."""
    return law.eval(r, 0) + 2.0 * r * law.eval(r, 1)


def eigensystem(law: FluxLaw, s: State, m: Optional[float] = None):
    """Eigenvalues and right eigenvectors of the flux Jacobian at ``s``.

    Returns
    -------
    lam1, lam2 : float
    r1, r2 : ndarray, shape (2,)
        ``r1 = (-u, v)`` spans the linearly degenerate field,
        ``r2 = (u, v)`` the genuinely nonlinear one.
    """
    s = _as_state(s, m)
    r = s.u * s.v
    lam1 = float(lambda1(law, r))
    lam2 = float(lambda2(law, r))
    return lam1, lam2, np.array([-s.u, s.v]), np.array([s.u, s.v])


def flux(law: FluxLaw, s: State, m: Optional[float] = None) -> np.ndarray:
    s = _as_state(s, m)
    phi = law.eval(s.u * s.v, 0)
    return np.array([s.u * phi, s.v * phi], dtype=float)


def jacobian(law: FluxLaw, s: State, m: Optional[float] = None) -> np.ndarray:
    s = _as_state(s, m)
    r = s.u * s.v
    phi = law.eval(r, 0)
    dphi = law.eval(r, 1)
    diag = phi + r * dphi
    return np.array([[diag, s.u * s.u * dphi], [s.v * s.v * dphi, diag]], dtype=float)


def classify_fields(law: FluxLaw, s: State, m: Optional[float] = None):
    """Return ``(grad lam1 . r1, grad lam2 . r2)`` evaluated analytically.

    The first value vanishes identically (linearly degenerate contact
    field).  The second equals ``6 r phi' + 4 r^2 phi''`` and is nonzero
    for a genuinely nonlinear second field.
    """
    s = _as_state(s, m)
    u, v = s.u, s.v
    r = u * v
    dphi = law.eval(r, 1)
    # grad lam1 = phi'(r) (v, u); r1 = (-u, v)
    field1 = dphi * (v * (-u) + u * v)
    field2 = 6.0 * r * dphi + 4.0 * r * r * law.eval(r, 2)
    return float(field1), float(field2)


def invariants_array(u, v):
    """Vectorised ``(r, xi)`` of arrays ``u, v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u * v, u / v


def conserved_array(r, xi):
    """Vectorised inverse of :func:`invariants_array`."""
    r = np.asarray(r, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(r * xi), np.sqrt(r / xi)


def parse_state(text: str | Sequence[float]) -> State:
    """Parse ``"u,v"`` (or a 2-sequence) into a :class:`State`."""
    if isinstance(text, str):
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if len(parts) != 2:
            raise ValueError(f"expected 'u,v', got {text!r}")
        return State(float(parts[0]), float(parts[1]))
    u, v = text
    return State(float(u), float(v))
