"""Variable-step Strang splitting for Allen-Cahn type equations."""

from .grid import FIVE_POINT, NEUMANN, PERIODIC, SPECTRAL, Grid, forward, inverse, laplacian_symbol, derivative_weight
from .propagators import (
    Logarithmic,
    Polynomial,
    PreconditionError,
    SdirkTableau,
    SolverError,
    TernaryConservative,
    linear_propagate,
    nonlinear_exact,
    nonlinear_log_rk,
    nonlinear_ternary_rk,
    q_defect,
)
from .functionals import convergence_rate, energy, error_eN, mass, norm
from .stepper import (
    Adaptive,
    RandomNormalized,
    SimConfig,
    Trace,
    Uniform,
    adaptive_next_tau,
    generate_random_steps,
    run,
    strang_step,
)

__version__ = "0.1.0"
