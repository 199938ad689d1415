"""Library of initial data."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError
from .model import FluxLaw, State, lambda1, lambda2

__all__ = ["Scenario", "SCENARIO_IDS", "builtin_scenarios"]

SCENARIO_IDS = ("riemann", "contact", "smooth_sine", "constant", "custom_table")


@dataclass(frozen=True)
class Scenario:
    """Initial datum plus the domain it lives on.

    Only the fields relevant to ``id`` are used:

    * ``riemann`` / ``contact``: ``left``, ``right``, jump at ``x0``;
    * ``smooth_sine``: ``base`` + ``amplitude * sin(2 pi x / wavelength + phase_*)``;
    * ``constant``: ``base``;
    * ``custom_table``: ``table`` of ``(x, u, v)`` nodes, linearly interpolated.

    ``mollifier_width`` of ``None`` means two cells.
    """

    id: str = "riemann"
    left: Optional[State] = None
    right: Optional[State] = None
    x0: float = 0.0
    base: Optional[State] = None
    amplitude: float = 0.0
    wavelength: float = 1.0
    phase_u: float = 0.0
    phase_v: float = 0.5 * math.pi
    table: tuple = ()
    x_left: float = -5.0
    x_right: float = 5.0
    mollifier_width: Optional[float] = None
    boundary: Optional[str] = None

    def default_boundary(self) -> str:
        if self.boundary is not None:
            return self.boundary
        return "periodic" if self.id in ("smooth_sine", "constant") else "outflow"

    def datum(self, x):
        """Unmollified ``(u, v)`` at positions ``x``."""
        x = np.asarray(x, dtype=float)
        if self.id in ("riemann", "contact"):
            is_left = x < self.x0
            return (
                np.where(is_left, self.left.u, self.right.u),
                np.where(is_left, self.left.v, self.right.v),
            )
        if self.id == "constant":
            return np.full_like(x, self.base.u), np.full_like(x, self.base.v)
        if self.id == "smooth_sine":
            arg = 2.0 * math.pi * x / self.wavelength
            return (
                self.base.u + self.amplitude * np.sin(arg + self.phase_u),
                self.base.v + self.amplitude * np.sin(arg + self.phase_v),
            )
        if self.id == "custom_table":
            tab = np.asarray(self.table, dtype=float)
            return np.interp(x, tab[:, 0], tab[:, 1]), np.interp(x, tab[:, 0], tab[:, 2])
        raise ValidationError("scenario", f"unknown scenario id {self.id!r}")

    def extreme_states(self) -> list:
        """States whose box contains the whole datum."""
        if self.id in ("riemann", "contact"):
            return [self.left, self.right]
        if self.id == "constant":
            return [self.base]
        if self.id == "smooth_sine":
            a = abs(self.amplitude)
            return [State(self.base.u - a, self.base.v - a), State(self.base.u + a, self.base.v + a)]
        tab = np.asarray(self.table, dtype=float)
        return [State(float(u), float(v)) for _, u, v in tab]

    def wave_speeds(self, law: FluxLaw) -> list:
        """Speeds at which disturbances leave the initial jump or profile."""
        if self.id in ("riemann", "contact"):
            from .riemann import solve_riemann

            return solve_riemann(law, self.left, self.right).wave_speeds()
        speeds = []
        for s in self.extreme_states():
            r = s.u * s.v
            speeds += [float(lambda1(law, r)), float(lambda2(law, r))]
        return speeds

    def validate(self, m: float, M: float, law: Optional[FluxLaw] = None, t_end: float = 0.0,
                 boundary: Optional[str] = None) -> "Scenario":
        if self.id not in SCENARIO_IDS:
            raise ValidationError("scenario", f"must be one of {', '.join(SCENARIO_IDS)}, got {self.id!r}")
        if not self.x_right > self.x_left:
            raise ValidationError("x_right", "must exceed x_left")
        needs = {
            "riemann": ("left", "right"),
            "contact": ("left", "right"),
            "smooth_sine": ("base",),
            "constant": ("base",),
            "custom_table": ("table",),
        }[self.id]
        for key in needs:
            if not getattr(self, key):
                raise ValidationError(key, f"required by scenario {self.id!r}")
        for s in self.extreme_states():
            for name, val in (("u", s.u), ("v", s.v)):
                if not (m <= val <= M):
                    raise ValidationError(
                        "left" if self.id in ("riemann", "contact") else "base",
                        f"{name} = {val!r} violates the state box [m, M]^2 = [{m!r}, {M!r}]^2",
                    )
        if self.id == "contact":
            r_l, r_r = self.left.u * self.left.v, self.right.u * self.right.v
            if not math.isclose(r_l, r_r, rel_tol=1e-12):
                raise ValidationError("right", f"contact data need equal uv, got {r_l!r} and {r_r!r}")
        if self.id == "smooth_sine":
            if not self.wavelength > 0:
                raise ValidationError("wavelength", "must be positive")
            periods = (self.x_right - self.x_left) / self.wavelength
            if (boundary or self.default_boundary()) == "periodic" and not math.isclose(
                periods, round(periods), rel_tol=0, abs_tol=1e-9
            ):
                raise ValidationError("wavelength", "periodic domain must hold a whole number of wavelengths")
        if self.id == "custom_table":
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[1] != 3 or tab.shape[0] < 2:
                raise ValidationError("table", "needs at least two (x, u, v) rows")
            if np.any(np.diff(tab[:, 0]) <= 0):
                raise ValidationError("table", "x nodes must be strictly increasing")
        if self.mollifier_width is not None and not self.mollifier_width > 0:
            raise ValidationError("mollifier_width", "must be positive")
        if law is not None and (boundary or self.default_boundary()) == "outflow" and t_end > 0:
            half = 0.5 * (self.x_right - self.x_left)
            reach = max(abs(s) for s in self.wave_speeds(law)) * t_end
            if not reach < half:
                raise ValidationError(
                    "t_end",
                    f"waves travel {reach:.6g} by t_end but the domain half-width is {half:.6g}",
                )
        return self


def builtin_scenarios() -> dict:
    """The shipped scenarios, with defaults m = 0.5 and M = 4 in mind."""
    return {
        "shock": Scenario(id="riemann", left=State(2.0, 2.0), right=State(1.0, 1.0)),
        "rarefaction": Scenario(
            id="riemann", left=State(1.0, 1.0), right=State(2.0, 2.0), x_left=-10.0, x_right=10.0
        ),
        "contact": Scenario(id="contact", left=State(1.0, 2.0), right=State(2.0, 1.0)),
        "smooth_sine": Scenario(
            id="smooth_sine", base=State(2.0, 2.0), amplitude=0.5, wavelength=2.0, x_left=0.0, x_right=4.0
        ),
        "constant": Scenario(id="constant", base=State(1.5, 2.5), x_left=0.0, x_right=1.0),
        "custom_table": Scenario(
            id="custom_table", table=((-5.0, 1.0, 1.0), (-1.0, 1.0, 1.0), (0.0, 2.0, 1.5), (1.0, 1.0, 1.0), (5.0, 1.0, 1.0)),
        ),
    }
