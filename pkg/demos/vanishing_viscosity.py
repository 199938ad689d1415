"""Vanishing viscosity limit.

The viscous shock approaches the exact Riemann solution as epsilon goes
to zero; the L1 error and the fitted rate are printed.
"""

from kklab import SimConfig, builtin_scenarios, convergence_study

if __name__ == "__main__":
    base = SimConfig(scenario=builtin_scenarios()["shock"], n_cells=400, t_end=1.0)
    table = convergence_study(base, [0.4, 0.2, 0.1, 0.05], reference="exact", window=(-5.0, 5.0), jobs=2)
    for eps, dx, err, _ in table.rows():
        print(f"eps = {eps:<5} dx = {dx:<8.5f} L1 error = {err:.5f}")
    print(f"observed order q = {table.order:.3f}")
