"""Contour-integral projection eigensolver for singular nonsquare matrix pencils.

Computes all finite eigenvalues of z*B - A inside a prescribed circle, and
their eigenvectors, by filtering random probes through quadrature-sampled
pseudoinverse resolvents.  Includes structured test-pencil generation with
exact ground truth, iterative and dense least-squares backends, brute-force
oracles, and naive square-ization baselines for comparison.
"""

from .baselines import BaselineKind, run_baseline
from .contour import (
    ContourConfig,
    EigenPair,
    EigenPairSet,
    QuadratureNode,
    SubspaceBasis,
    assemble_moments,
    convergence_sweep,
    quadrature_moments,
    reduced_gep,
    solve,
    solve_timed,
    trapezoid_circle,
    truncate_svd,
)
from .errors import (
    ConfigurationError,
    ContourEigError,
    ContourProximityError,
    DimensionMismatchError,
    EmptySubspaceError,
    GeneratorSpecError,
    InputFormatError,
    MatrixDataError,
    ProblemSizeError,
    SolveFailureError,
)
from .lsq import (
    LsqConfig,
    LsqReport,
    apply_pseudoinverse,
    cgls_solve,
    global_cgls_solve,
    lsqr_solve,
    pinv_apply_dense,
)
from .mmio import read_matrix, write_matrix
from .oracle import (
    KroneckerFactors,
    finite_eigenvalues,
    hankel_reduced_pencil,
    oracle_dense_eig,
    oracle_moment,
)
from .pencil import (
    Embedding,
    GroundTruth,
    KroneckerSpec,
    MatrixPencil,
    make_kronecker_pencil,
    max_relative_error,
    pencil_apply,
    pencil_apply_adjoint,
    relative_error,
    rrn,
    sample_finite_eigs,
    sample_nilpotent_sizes,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineKind",
    "ContourConfig",
    "ContourEigError",
    "ConfigurationError",
    "ContourProximityError",
    "DimensionMismatchError",
    "EigenPair",
    "EigenPairSet",
    "Embedding",
    "EmptySubspaceError",
    "GeneratorSpecError",
    "GroundTruth",
    "InputFormatError",
    "KroneckerFactors",
    "KroneckerSpec",
    "LsqConfig",
    "LsqReport",
    "MatrixDataError",
    "MatrixPencil",
    "ProblemSizeError",
    "QuadratureNode",
    "SolveFailureError",
    "SubspaceBasis",
    "apply_pseudoinverse",
    "assemble_moments",
    "cgls_solve",
    "convergence_sweep",
    "finite_eigenvalues",
    "global_cgls_solve",
    "hankel_reduced_pencil",
    "lsqr_solve",
    "make_kronecker_pencil",
    "max_relative_error",
    "oracle_dense_eig",
    "oracle_moment",
    "pencil_apply",
    "pencil_apply_adjoint",
    "pinv_apply_dense",
    "quadrature_moments",
    "read_matrix",
    "reduced_gep",
    "relative_error",
    "rrn",
    "run_baseline",
    "sample_finite_eigs",
    "sample_nilpotent_sizes",
    "solve",
    "solve_timed",
    "trapezoid_circle",
    "truncate_svd",
    "write_matrix",
]
