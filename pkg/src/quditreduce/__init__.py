"""Reduce multipartite pure states to few product-basis terms with
recorded local plane rotations, plus an independent Schmidt-coefficient
oracle for the bipartite case."""

from .errors import (
    CapacityError,
    InternalConsistencyError,
    InvalidIndexError,
    InvalidRotationError,
    NonConvergenceError,
    OracleFailureError,
    QuditReduceError,
)
from .reduction import (
    DecompositionTrace,
    LocalRotation,
    ReductionReport,
    StageReport,
    StageTarget,
    eliminate_stage,
    invert_trace,
    reduce,
    stage_targets,
    support_count,
    term_bound,
    zeroing_rotation,
)
from .spectral import (
    SpectralResult,
    hermitian_eigenvalues,
    reduced_density,
    schmidt_coefficients,
)
from .state import (
    DEFAULT_SIZE_CAP,
    MultiIndex,
    PureState,
    amplitude_at,
    apply_plane_rotation,
    index_decode,
    index_encode,
    product_state,
    random_state,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "DEFAULT_SIZE_CAP",
    "DecompositionTrace",
    "InternalConsistencyError",
    "InvalidIndexError",
    "InvalidRotationError",
    "LocalRotation",
    "MultiIndex",
    "NonConvergenceError",
    "OracleFailureError",
    "PureState",
    "QuditReduceError",
    "ReductionReport",
    "SpectralResult",
    "StageReport",
    "StageTarget",
    "amplitude_at",
    "apply_plane_rotation",
    "eliminate_stage",
    "hermitian_eigenvalues",
    "index_decode",
    "index_encode",
    "invert_trace",
    "product_state",
    "random_state",
    "reduce",
    "reduced_density",
    "schmidt_coefficients",
    "stage_targets",
    "support_count",
    "term_bound",
    "zeroing_rotation",
]
