"""Convexity and compatibility of the entropy family.

For a few ``(k, p)`` the smallest Hessian eigenvalue over a box of states is
printed, followed by the largest violation of the entropy/flux
compatibility condition at random states.
"""

import numpy as np

from kklab import LOG_LAW, THIN_FILM, EntropyPair, State, compatibility_residual

if __name__ == "__main__":
    axis = np.linspace(0.5, 4.0, 40)
    uu, vv = np.meshgrid(axis, axis, indexing="ij")
    rng = np.random.default_rng(0)
    states = [State(*uv) for uv in rng.uniform(0.5, 4.0, size=(25, 2))]
    print(f"{'k':>3} {'p':>5} {'min eig':>12} {'thin film':>12} {'log law':>12}")
    for k in (1, 2, 3):
        for p in (0.5, 1.0, 2.0):
            ep = EntropyPair(k, p, 0.5)
            lam = np.linalg.eigvalsh(ep.hessian(uu.ravel(), vv.ravel())).min()
            res = [max(float(np.abs(compatibility_residual(ep, law, s)).max()) for s in states)
                   for law in (THIN_FILM, LOG_LAW)]
            print(f"{k:>3} {p:>5} {lam:>12.4e} {res[0]:>12.2e} {res[1]:>12.2e}")
