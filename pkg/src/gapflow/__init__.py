"""Numerical bifurcation detection along paths of constraint subspaces.

The library computes the spectral flow of operator paths obtained by
restricting the Hessian of a variational functional to a family of
subspaces that moves continuously in the gap metric, detects the
parameters where eigenvalues cross zero, and verifies detected
bifurcations by solving the underlying boundary value problem.
"""

from .tolerances import DEFAULT_TOL, ToleranceProfile
from .errors import (
    AllTrivial,
    AmbientMismatch,
    BadCutoff,
    ConfigError,
    DegenerateEndpoint,
    DegenerateInput,
    GapFlowError,
    IntervalMismatch,
    NewtonDivergence,
    NotAProjection,
    OutOfInterval,
    PreconditionViolated,
    RankDeficiency,
    SubdivisionLimit,
    SurjectivityFailure,
)
from .grassmann import (
    InnerProductSpace,
    Projection,
    Subspace,
    gap_distance,
    intersection_dimension,
    kernel_path,
    orthogonal_projection,
    orthogonalize_projection,
    principal_angle_cosines,
)
from .specflow import (
    Crossing,
    OperatorPath,
    ScanControl,
    SpectralDecomposition,
    SpectralFlowResult,
    SymmetricOperator,
    direct_sum,
    kernel_dimension,
    morse_index,
    relative_morse_index,
    spectral_flow,
)
from .fem import (
    DiscreteFunction,
    DiscreteSpace,
    Mesh,
    ProblemData,
    assemble_gram,
    assemble_hessian,
    assemble_mass,
    build_L_path,
    chi_projection,
    constant_problem,
    constrained_subspace,
    cubic_problem,
    default_cutoff,
    evaluation_map,
    explicit_T_apply,
    polynomial_problem,
    riesz_operator,
    tabulated_problem,
)
from .bifurcation import (
    AdmissibilityResult,
    BifurcationReport,
    Candidate,
    MorseCriterionResult,
    admissibility_check,
    detect,
    kernel_condition,
    morse_criterion,
)
from .branches import (
    BranchPoint,
    BranchResult,
    GlobalSolutionCheck,
    branch_space,
    constrained_gradient,
    family_degeneracy,
    find_branch,
    functional_value,
    global_solution_check,
    refine_degeneracy,
    relaxed_gradient,
    relaxed_value,
)

__version__ = "0.1.0"
