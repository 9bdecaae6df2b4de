"""Matrix-valued generalized hypergeometric functions.

Evaluation of the matrix series for arbitrary numerator/denominator
parameter counts, Frobenius solution bases of the associated ODE,
unit-circle convergence certification, and reduction of second-order
matrix equations to hypergeometric form through quadratic solvents.
"""

from .convergence import (
    ConvergenceCertificate,
    ProbeTrace,
    RadiusClass,
    boundary_probe,
    classify_radius,
    unit_circle_certificate,
)
from .hyperfn import (
    EvaluationResult,
    HypergeometricParams,
    NoConvergence,
    PoleInParameters,
    RadiusViolation,
    ShiftPoleViolation,
    SymbolSequence,
    eval_nfm,
    eval_shifted_nfm,
    symbol_sequence,
)
from .matcore import (
    EigenFailure,
    InvalidMatrix,
    RhoDelta,
    SingularMatrix,
    Spectrum,
    eigenvalues,
    inverse,
    kernel_basis,
    matrix_from_obj,
    matrix_to_obj,
    pochhammer,
    rho_delta,
    spectral_norm,
)
from .odesolve import (
    EmptyKernel,
    HypergeometricEquation,
    HypothesisViolation,
    IndicialRoots,
    ResonantExponent,
    SeriesSolution,
    analytic_basis,
    check_recursion,
    fundamental_set,
    indicial_roots,
    nonanalytic_solution,
    ode_residual,
    residual_coefficients,
    solution_from_obj,
    solution_to_obj,
)
from .reduction import (
    CollidingEigenvalues,
    InvalidExampleParameters,
    QPolynomial,
    ReductionResult,
    RootFailure,
    SecondOrderEquation,
    det_q_polynomial,
    equation_from_obj,
    equation_to_obj,
    q_matrix,
    q_roots,
    reduce_spherical_example,
    reduce_to_hypergeometric,
    result_to_obj,
    spherical_example,
)

__version__ = "0.1.0"
