"""sgextremes: exceedance point processes of randomly scaled stationary
Gaussian sequences.

The package samples scaled sequences Y_i = S_i * X_i (X a stationary
standard Gaussian sequence, S i.i.d. nonnegative scales), evaluates the
closed-form tail asymptotics and norming constants of the product law,
and verifies the Poisson/Gumbel limit behaviour of the bivariate
exceedance point process by Monte Carlo with statistical gates.
"""

from ._version import __version__
from .correlation import (
    Geometric,
    LogDecay,
    PowerDecay,
    berman_diagnostic,
    rho,
)
from .gaussian import EmbeddingNotPSD, GaussianPath, sample_iid_path, sample_path
from .montecarlo import (
    DEFAULT_SEEDS,
    BermanSumDetail,
    ExperimentConfig,
    ExperimentReport,
    berman_sum,
    joint_order_target,
    run_block_test,
    run_independence_test,
    run_joint_order_test,
    run_poisson_test,
)
from .pointproc import (
    LengthMismatch,
    OutOfRange,
    PointPattern,
    ScaledPath,
    count,
    extract,
    order_stats,
    scale_path,
)
from .scaling import (
    Bounded,
    NoConvergence,
    Weibullian,
    quantile,
    sample_scales,
    survival,
)
from .tails import (
    NoBracket,
    NormingConstants,
    ProductConstants,
    ProductTailReport,
    QuadratureFailure,
    ScaledProductConstants,
    asymptotic_level,
    normal_isf,
    normal_sf,
    norming_constants,
    product_constants,
    product_tail_asymptotic,
    product_tail_oracle,
    product_tail_report,
    scaled_product_constants,
    scaled_product_tail_asymptotic,
    solve_level,
    tail_equivalence_check,
)

__all__ = [
    "__version__",
    "Geometric",
    "PowerDecay",
    "LogDecay",
    "rho",
    "berman_diagnostic",
    "GaussianPath",
    "EmbeddingNotPSD",
    "sample_path",
    "sample_iid_path",
    "Weibullian",
    "Bounded",
    "NoConvergence",
    "survival",
    "quantile",
    "sample_scales",
    "normal_sf",
    "normal_isf",
    "ProductConstants",
    "product_constants",
    "product_tail_asymptotic",
    "product_tail_oracle",
    "ProductTailReport",
    "product_tail_report",
    "asymptotic_level",
    "NormingConstants",
    "norming_constants",
    "solve_level",
    "ScaledProductConstants",
    "scaled_product_constants",
    "scaled_product_tail_asymptotic",
    "tail_equivalence_check",
    "QuadratureFailure",
    "NoBracket",
    "ScaledPath",
    "PointPattern",
    "LengthMismatch",
    "OutOfRange",
    "scale_path",
    "extract",
    "count",
    "order_stats",
    "ExperimentConfig",
    "ExperimentReport",
    "DEFAULT_SEEDS",
    "joint_order_target",
    "run_poisson_test",
    "run_joint_order_test",
    "run_independence_test",
    "run_block_test",
    "berman_sum",
    "BermanSumDetail",
]
