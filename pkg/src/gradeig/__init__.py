"""Preconditioned gradient eigensolver for Hermitian pencils, with a
verification harness for its sharp per-step convergence bound.

The library solves B v = mu A v pencils by preconditioned fixed-step
gradient iteration, audits every step against the sharp contraction
factor of the spectral-interval tail ratio, constructs the worst-case
preconditioner attaining that factor, and reproduces the supporting
geometry: the iteration cone, its Rayleigh-quotient minimizer, the Temple
residual bound, and the normalized descent flow on the unit sphere.
"""

from .linalg import (
    NotHermitianError,
    NotPositiveDefiniteError,
    eig_hermitian,
    cholesky,
    householder_mapping,
    spectral_norm,
    angle_between,
)
from .problem import (
    HermitianPencil,
    SpectralData,
    NormalizedProblem,
    solve_pencil,
    normalize_pencil,
    perturb_to_simple,
    random_problem,
    parse_spectrum,
    load_pencil,
)
from .precond import (
    Preconditioner,
    measure_gamma,
    identity_preconditioner,
    random_admissible,
    worst_case,
    load_preconditioner,
)
from .iteration import (
    IterateState,
    BoundReport,
    IterationTrace,
    rayleigh_quotient,
    gradient_step,
    simplified_step,
    interval_index,
    tail_ratio,
    bound_audit,
    run,
    trace_to_csv,
)
from .theory import (
    AtEigenvectorError,
    ConeSpec,
    MinimizerResult,
    AlphaRoots,
    cone_angle,
    cone_minimizer,
    alpha_quadratic,
    sigma_factor,
    sigma_of_alpha,
    two_dim_coordinates,
    temple_bound,
    rayleigh_gradient,
    gradient_norm,
    finite_difference_gradient,
    absolute_value_reduction,
    span_representative,
    sample_level_set,
)
from .flow import (
    FlowTrace,
    integrate,
    mu_decrease_identity_check,
    angle_vs_arclength_check,
    LemmaCheckResult,
    inverse_function_lemma_check,
)
from .verify import (
    VerifyProfile,
    PropertyResult,
    VerificationSummary,
    cone_boundary_samples,
    run_verification,
)

__version__ = "0.1.0"
