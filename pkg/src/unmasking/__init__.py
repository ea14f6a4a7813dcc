"""Information curves, unmasking schedules, and any-order samplers."""

from .curves import (
    CorrelationSummary,
    EntropyCurve,
    InfoCurve,
    dtc_direct,
    entropy_curve_exact,
    entropy_curve_mc,
    info_curve_exact,
    info_curve_from_entropy,
    tc_direct,
    tc_dtc_from_curve,
)
from .dist import (
    JointPMF,
    MarginalTable,
    PartialAssignment,
    conditional_oracle,
    decode,
    encode,
    entropy_bits,
    kl_bits,
    marginalize,
    tv,
)
from .errors import (
    DimensionMismatch,
    DuplicateEvalPoints,
    FieldTooSmall,
    HanViolation,
    InfeasibleEnumeration,
    InvalidTolerance,
    NonMonotoneNodes,
    NotADistribution,
    NotPrime,
    PositionOutOfRange,
    RankDeficient,
    UnmaskingError,
)
from .sampler import (
    OracleModel,
    SubsetSchedule,
    decoupling_check,
    draw_samples,
    expected_kl_exact,
    expected_kl_mc,
    mixture_output_dist,
    output_dist_fixed,
    random_partition,
    sample_fixed,
    sample_random,
)
from .schedules import (
    NodeVector,
    Schedule,
    ScheduleReport,
    all_singles,
    austin_schedule,
    dtc_schedule,
    geometric_round_bound,
    iter_compositions,
    left_riemann_seq,
    licai_bound,
    nodes_to_schedule,
    one_shot,
    optimal_nodes_dp,
    riemann_error,
    schedule_to_nodes,
    sweep_grid,
    tc_schedule,
)
from .stepfit import (
    DiscreteCurve,
    ExperimentRow,
    PiecewiseFit,
    best_k_piecewise,
    hard_curve,
    in_hypothesis_range,
    lower_bound_experiment,
)
from .zoo import (
    AffineCode,
    ProductMixtureSpec,
    code_dist,
    code_summary,
    elevated_family,
    mds_check,
    product_mixture,
    random_balanced_rs,
    rs_code,
    uniform_dist,
)

__version__ = "0.1.0"

__all__ = [
    "AffineCode",
    "CorrelationSummary",
    "DimensionMismatch",
    "DiscreteCurve",
    "DuplicateEvalPoints",
    "EntropyCurve",
    "ExperimentRow",
    "FieldTooSmall",
    "HanViolation",
    "InfeasibleEnumeration",
    "InfoCurve",
    "InvalidTolerance",
    "JointPMF",
    "MarginalTable",
    "NodeVector",
    "NonMonotoneNodes",
    "NotADistribution",
    "NotPrime",
    "OracleModel",
    "PartialAssignment",
    "PiecewiseFit",
    "PositionOutOfRange",
    "ProductMixtureSpec",
    "RankDeficient",
    "Schedule",
    "ScheduleReport",
    "SubsetSchedule",
    "UnmaskingError",
    "all_singles",
    "austin_schedule",
    "best_k_piecewise",
    "code_dist",
    "code_summary",
    "conditional_oracle",
    "decode",
    "decoupling_check",
    "draw_samples",
    "dtc_direct",
    "dtc_schedule",
    "elevated_family",
    "encode",
    "entropy_bits",
    "entropy_curve_exact",
    "entropy_curve_mc",
    "expected_kl_exact",
    "expected_kl_mc",
    "geometric_round_bound",
    "hard_curve",
    "in_hypothesis_range",
    "info_curve_exact",
    "info_curve_from_entropy",
    "iter_compositions",
    "kl_bits",
    "left_riemann_seq",
    "licai_bound",
    "lower_bound_experiment",
    "marginalize",
    "mds_check",
    "mixture_output_dist",
    "nodes_to_schedule",
    "one_shot",
    "optimal_nodes_dp",
    "output_dist_fixed",
    "product_mixture",
    "random_balanced_rs",
    "random_partition",
    "riemann_error",
    "rs_code",
    "sample_fixed",
    "sample_random",
    "schedule_to_nodes",
    "sweep_grid",
    "tc_direct",
    "tc_dtc_from_curve",
    "tc_schedule",
    "tv",
    "uniform_dist",
    "__version__",
]
