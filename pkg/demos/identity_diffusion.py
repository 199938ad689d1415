"""Why the viscosity has to be tailored.

The contact datum has constant uv = 2.  Adding the plain Laplacian to both
equations mixes u and v linearly and pushes uv above its initial maximum.
The tailored viscosity keeps uv exactly constant.
"""

from kklab import SimConfig, builtin_scenarios, demonstrate_identity_diffusion_failure

if __name__ == "__main__":
    cfg = SimConfig(scenario=builtin_scenarios()["contact"], epsilon=0.1, n_cells=400, t_end=1.0)
    rep = demonstrate_identity_diffusion_failure(cfg)
    print(f"initial max uv:           {rep.max_r_initial:.12f}")
    print(f"identity viscosity peak:  {rep.max_r_peak:.12f}")
    print(f"tailored viscosity peak:  {rep.max_r_peak_tailored:.12f}")
