"""Wave structure of the shipped Riemann problems.

Each problem is solved exactly and the solution is printed together with
the states it passes through.  The contact (first field) only moves the
ratio u/v; the second field only moves the product uv.
"""

from kklab import THIN_FILM, State, solve_riemann, to_invariants
from kklab.scenarios import builtin_scenarios


def describe(name, left, right):
    sol = solve_riemann(THIN_FILM, left, right)
    s = sol.summary()
    print(f"{name}: {left} -> {right}")
    print(f"  middle state {sol.middle}, invariants {to_invariants(sol.middle)}")
    for key in ("contact", "wave2"):
        print(f"  {key}: {s[key]}")
    print(f"  wave speeds {sol.wave_speeds()}")


if __name__ == "__main__":
    for name, sc in builtin_scenarios().items():
        if sc.id in ("riemann", "contact"):
            describe(name, sc.left, sc.right)
    describe("mixed", State(1.0, 2.0), State(1.5, 1.5))
