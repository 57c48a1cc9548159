"""Split-knockoff selection for structurally sparse linear regression."""

from .augment import (
    AugmentedSystem,
    SplitKnockoffCopy,
    StructuralProblem,
    build_augmented,
    build_split_knockoff,
    equicorrelated_s,
    verify_copy,
)
from .baseline import (
    ReducedProblem,
    baseline_knockoff_select,
    build_fixed_knockoff,
    reduce_generalized_lasso,
)
from .errors import (
    ConvergenceError,
    InfeasibleDimensionError,
    InvalidArgumentError,
    InvalidSeparationError,
    NotPSDError,
    RankDeficiencyError,
    SkfError,
)
from .experiments import (
    DiagnosticsReport,
    SimConfig,
    cross_validate_nu,
    diagnostics,
    gen_dataset,
    make_D,
    run_simulation,
    run_split_pipeline,
)
from .filters import (
    Selection,
    WStatistics,
    compute_w_statistics,
    knockoff_threshold,
    ms_ratio_curve,
    select_and_evaluate,
)
from .linalg import (
    DEFAULT_TOLS,
    Tolerances,
    constrained_least_squares,
    min_eigenvalue_sym,
    orthonormal_complement,
    pseudo_inverse,
    soft_threshold,
    sym_sqrt_factor,
)
from .path import (
    LambdaGrid,
    SignificanceStats,
    SplitPath,
    make_lambda_grid,
    solve_split_lasso_path,
    stage1_statistics,
    stage2_statistics,
)

__version__ = "0.1.0"
