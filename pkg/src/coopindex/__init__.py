"""Transmission and Cooperative Indices for teacher-learner communication."""

from .core import (
    CoopIndexError,
    DimensionError,
    InvalidMatrixError,
    LabeledMatrix,
    SpaceIndex,
    column_normalize,
    is_doubly_stochastic,
    joint_permute,
    row_normalize,
)
from .qgaussian import (
    FitGrid,
    PhaseDiagram,
    QGaussian,
    RegressionScenario,
    build_regression_matrix,
    fit_regression,
    ml_horizontal_fit,
    phase_diagram,
    q_gaussian_density,
)
from .sinkhorn import (
    CooperativeResult,
    NoPositiveDiagonalError,
    Priors,
    cooperative_index,
    cooperative_index_report,
    cooperative_iterate,
    prune_to_diagonal_support,
)
from .structure import (
    TriangularizationWitness,
    count_positive_diagonals,
    diagonal_support_entry,
    has_exactly_one_positive_diagonal,
    has_positive_diagonal,
    triangularize,
)
from .teaching import (
    ThresholdProblem,
    average_teaching_dimension,
    build_threshold_learner,
    sample_consistency,
    teaching_dimension,
    threshold_round,
)
from .transmission import (
    TiCertificate,
    UndefinedError,
    expected_teaching_dimension,
    machine_teaching_matrix,
    simulate_transmission,
    ti_certificate,
    transmission_index,
)

__version__ = "0.1.0"
