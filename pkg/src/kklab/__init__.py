"""Viscous regularisation, entropy pairs and Riemann solutions for the
Keyfitz-Kranzer system ``u_t + (u phi(uv))_x = 0``, ``v_t + (v phi(uv))_x = 0``."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (  # noqa: F401
    LOG_LAW,
    THIN_FILM,
    FluxLaw,
    InvariantState,
    State,
    available_flux_laws,
    eigensystem,
    from_invariants,
    get_flux_law,
    register_flux_law,
    to_invariants,
    validate_flux_law,
)
from .entropy import (  # noqa: F401
    EntropyPair,
    GeneralPairSpec,
    check_general_pair,
    compatibility_residual,
    entropy_flux_value,
    entropy_hessian,
    entropy_value,
)
from .riemann import RiemannSolution, sample_riemann, sample_riemann_grid, solve_riemann  # noqa: F401
from .scenarios import Scenario, builtin_scenarios  # noqa: F401
from .viscous import FieldPair, Grid1D, SimConfig, Trajectory, initial_field, run, stable_dt  # noqa: F401
from .hyperbolic import demonstrate_identity_diffusion_failure, run_hyperbolic  # noqa: F401
from .diagnostics import (  # noqa: F401
    EntropyLedger,
    TVMonitor,
    convergence_study,
    entropy_inequality_residual,
    invariant_region_check,
    weak_residual,
)
from .config import parse_config, parse_config_text  # noqa: F401
