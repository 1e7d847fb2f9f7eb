"""Greedy reduced-basis model order reduction for parametric and time-delay systems."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .errors import (
    DegenerateSystem,
    DimensionMismatch,
    DuplicateCenters,
    EmptyCoarseSet,
    FormatError,
    FrozenEstimator,
    InvalidRange,
    MissingLog,
    MorGreedError,
    NotConverged,
    SingularMatrix,
    SingularOnGrid,
)
from .estimator import (
    ResidualEstimator,
    delta_diagnostic,
    estimate,
    residual,
    residual_of_residual,
    update_vr,
)
from .greedy import (
    GreedyConfig,
    GreedyResult,
    IterationRecord,
    TrainingSets,
    run,
    run_bifidelity,
    run_multifidelity,
    run_standard,
    update_coarse_set,
    validate,
)
from .linalg import SparseTriplets, gram_residual, orth_extend, solve_dense
from .rom import ReducedModel, output_error, project, reduced_transfer, solve_rom
from .surrogate import RbfSurrogate, rbf_eval, rbf_fit, select_candidates
from .synthetic import SyntheticSpec, generate_synthetic
from .system import (
    AffineSystem,
    AffineTerm,
    DelaySystem,
    FrequencyPoint,
    ParametricSystem,
    assemble,
    make_grid,
    solve_fom,
    transfer_function,
)
