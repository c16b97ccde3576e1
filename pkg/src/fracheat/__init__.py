"""Numerics for the semilinear fractional heat equation on a 1D lattice.

Discretizes (-Laplacian)^s by its explicit lattice convolution kernel,
the Caputo derivative by backward Euler / L1 marching, and provides the
subordinated semigroup solution operators plus a convergence-study
harness with manufactured solutions.
"""

from .grid import GridFunction, Mesh, restrict
from .kernel import (
    KernelWeights,
    OracleConvergenceError,
    apply_operator,
    consistency_error,
    continuous_op_oracle,
    frac_laplacian_constant,
    kernel_weights,
    kernel_weights_direct,
    toeplitz_matvec,
)
from .special import (
    SeriesConvergenceError,
    bessel_i_scaled,
    bessel_i_scaled_row,
    log_gamma,
    mittag_leffler,
    wright_phi,
)
from .semigroup import (
    SemigroupKernel,
    frac_semigroup_apply,
    frac_semigroup_kernel,
    heat_semigroup_apply,
    heat_semigroup_kernel,
    subordinate_scalar_P,
    subordinate_scalar_S,
    subordinated_P_apply,
    subordinated_S_apply,
    subordination_quadrature,
)
from .evolution import (
    EvolutionProblem,
    Nonlinearity,
    SchemeConfig,
    Trajectory,
    caputo_l1_weights,
    evaluate_mild,
    solve,
    solve_scalar_l1,
    sup_norm_error,
)
from .problems import (
    ManufacturedSolution,
    example1,
    example2,
    gaussian_profile,
    getoor_constant,
    semilinear_variant,
    to_evolution_problem,
)
from .study import (
    DESK_SCALE,
    PAPER_SCALE,
    ErrorRecord,
    RateEstimate,
    StudyConfig,
    StudyResult,
    emit_csv,
    fit_rates,
    read_csv,
    run_consistency_study,
    run_study,
)

__version__ = "0.1.0"
