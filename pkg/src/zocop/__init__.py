"""Solver library for zero-one composite optimization.

``min_w f(w) + lam * ||(A w + b)_+||_0`` is solved by an inexact augmented
Lagrangian outer loop whose subproblems run a Bregman alternating linearized
minimization with an exact zero-one prox. The package also ships stationarity
certificates, exact-penalty checks, brute-force oracles, application builders
(SVM, twin SVM, multi-label, rank regression), sklearn-style estimators, and
a CLI.
"""

from .apps import (
    Evaluation,
    LabeledDataset,
    append_bias,
    build_mlc,
    build_mrc,
    build_svm,
    build_tsvm,
    difference_matrix,
    evaluate,
    solve_mlc,
    solve_mrc,
    solve_svm,
    solve_tsvm,
)
from .balm import (
    BalmResult,
    InnerConfig,
    InnerTermination,
    InnerTraceRow,
    InnerVariant,
    balm_solve,
    default_inner_config,
    inner_stopping_check,
    lyapunov_value,
    u_step,
    w_step_case1,
    w_step_case2,
)
from .estimators import (
    RankCorrelationRidge,
    ZeroOneBinaryRelevance,
    ZeroOneSVC,
    ZeroOneTwinSVC,
)
from .exceptions import (
    DimensionMismatchError,
    DivergenceError,
    InvalidObjectiveError,
    ParseError,
    RankDeficiencyError,
    UnsupportedVariantError,
    ValidationError,
    ZocopError,
)
from .ialm import (
    DescentReport,
    IterateState,
    IterationRecord,
    OuterConfig,
    SolveReport,
    SolveStatus,
    default_init,
    derive_parameters,
    ialm_solve,
    multiplier_step,
    practical_parameters,
    rho_lower_bound,
    solve_problem,
    verify_descent_trace,
)
from .oracle import (
    SigmaCheck,
    StationaryCandidate,
    enumerate_stationary,
    prox_oracle,
    verify_sigma_constant,
)
from .problem import (
    CopProblem,
    QuadraticForm,
    SmoothObjective,
    SpectralInfo,
    check_gradient,
    quadratic_objective,
    spectral_info,
)
from .zeroone import (
    AlphaThresholds,
    ExactPenaltyReport,
    ProxBranch,
    ProxResult,
    StationarityResidual,
    alpha_thresholds,
    p_residual,
    p_tilde_residual,
    positive_count,
    prox_distance,
    prox_zero_one,
    subdifferential_member,
    verify_exact_penalty,
)

__version__ = "0.1.0"
