"""Direct maximum-likelihood estimation of means and covariance matrices
from randomly missing data, plus an MCAR simulation/benchmark harness."""

__version__ = "0.1.0"

from .baselines import classical_estimate, listwise_deletion_estimate, mean_impute_estimate
from .bench import (
    BenchConfig,
    MaskSpec,
    MetricR,
    apply_mcar,
    metric_r,
    normalize_features,
    run_benchmark,
    write_report,
)
from .csvio import parse_csv, write_csv
from .cubic import CubicProblem, RootSelection, cubic_roots, eta, select_sigma12
from .datasets import load_dataset
from .estimators import (
    case_deletion_sigma12,
    dper_multi_equal,
    dper_multi_unequal,
    dper_single,
    nearest_psd,
)
from .exceptions import (
    DataError,
    DegenerateObjective,
    DomainError,
    DperError,
    InsufficientCompleteRows,
    MaskInfeasible,
    MissingLabel,
    NoObservedData,
    ParseError,
    ShapeMismatch,
)
from .model import (
    REGIME_MULTI_EQUAL,
    REGIME_MULTI_UNEQUAL,
    REGIME_SINGLE,
    BenchReport,
    BenchRow,
    EstimationResult,
    LabeledDataset,
    MaskedMatrix,
    PairDiagnostic,
    PairStats,
    validate,
)
from .pairstats import available_mean, available_variance, pair_stats

__all__ = [
    "__version__",
    "BenchConfig",
    "BenchReport",
    "BenchRow",
    "CubicProblem",
    "DataError",
    "DegenerateObjective",
    "DomainError",
    "DperError",
    "EstimationResult",
    "InsufficientCompleteRows",
    "LabeledDataset",
    "MaskInfeasible",
    "MaskSpec",
    "MaskedMatrix",
    "MetricR",
    "MissingLabel",
    "NoObservedData",
    "PairDiagnostic",
    "PairStats",
    "ParseError",
    "REGIME_MULTI_EQUAL",
    "REGIME_MULTI_UNEQUAL",
    "REGIME_SINGLE",
    "RootSelection",
    "ShapeMismatch",
    "apply_mcar",
    "available_mean",
    "available_variance",
    "case_deletion_sigma12",
    "classical_estimate",
    "cubic_roots",
    "dper_multi_equal",
    "dper_multi_unequal",
    "dper_single",
    "eta",
    "select_sigma12",
    "listwise_deletion_estimate",
    "load_dataset",
    "mean_impute_estimate",
    "metric_r",
    "nearest_psd",
    "normalize_features",
    "pair_stats",
    "parse_csv",
    "run_benchmark",
    "validate",
    "write_csv",
    "write_report",
]
