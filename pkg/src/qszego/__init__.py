"""qszego: spectral simulator and integrable-structure analyzer for a
quadratic Szego-type flow on the Hardy space of the torus.

Subpackages by responsibility:

* :mod:`qszego.spectrum`   - truncated Hardy-space coefficient arithmetic;
* :mod:`qszego.hankel`     - finite-section Hankel/Toeplitz operator calculus;
* :mod:`qszego.flow`       - time integration of the flow and dynamical checks;
* :mod:`qszego.rank_one`   - exact dynamics on the rank-one invariant manifold;
* :mod:`qszego.analysis`   - exponential fits, trajectory comparison;
* :mod:`qszego.cli`        - the ``qszego`` command-line front end.

The hot kernels run on a compiled Cython backend when built, with a NumPy
fallback selected automatically at import (see :mod:`qszego.backend`).
"""

from .backend import KERNELS, available_backends
from .spectrum import (
    Conserved,
    conserved_quantities,
    cubic_moment,
    mod_squared,
    multiply,
    poisson_smooth,
    shift_adjoint,
    sobolev_norm,
    szego_project,
)
from .hankel import (
    apply_antilinear,
    bmo_proxy,
    hankel_matrix,
    lax_generator_matrix,
    shifted_hankel_matrix,
    singular_values,
    toeplitz_matrix,
    trace_norm,
)
from .flow import (
    FlowConfig,
    evolve,
    lax_residual,
    lipschitz_ratio,
    rhs,
    step_rk4,
    xy_blowup_time,
)
from .rank_one import (
    RationalState,
    envelope_data,
    evolve_ode,
    find_blowup_initial,
    growth_diagnostic,
    growth_rate,
    resonance_residual,
    to_spectrum,
)
from .analysis import FitResult, compare_trajectories, fit_exponential
from .trajectory import Trajectory

__version__ = "0.1.0"

__all__ = [
    "KERNELS",
    "available_backends",
    "Conserved",
    "conserved_quantities",
    "cubic_moment",
    "mod_squared",
    "multiply",
    "poisson_smooth",
    "shift_adjoint",
    "sobolev_norm",
    "szego_project",
    "apply_antilinear",
    "bmo_proxy",
    "hankel_matrix",
    "lax_generator_matrix",
    "shifted_hankel_matrix",
    "singular_values",
    "toeplitz_matrix",
    "trace_norm",
    "FlowConfig",
    "evolve",
    "lax_residual",
    "lipschitz_ratio",
    "rhs",
    "step_rk4",
    "xy_blowup_time",
    "RationalState",
    "envelope_data",
    "evolve_ode",
    "find_blowup_initial",
    "growth_diagnostic",
    "growth_rate",
    "resonance_residual",
    "to_spectrum",
    "FitResult",
    "compare_trajectories",
    "fit_exponential",
    "Trajectory",
    "__version__",
]
