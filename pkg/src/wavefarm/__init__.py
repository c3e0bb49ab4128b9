"""Wave-farm layout analysis and power-prediction toolkit.

Ingests 16-converter wave-farm layout/power records for the four coastal
scenarios (Sydney, Adelaide, Perth, Tasmania), computes distance-geometry
features and summary statistics, screens outliers (LOF, z-score, IQR), and
trains a from-scratch MLP regressor that predicts total farm power from
converter positions.
"""

from wavefarm.dataset import (
    SCENARIOS,
    FarmDataset,
    FarmRecord,
    WecLayout,
    load_dataset,
    parse_record,
    validate_dataset,
)
from wavefarm.geometry import (
    distance_summary,
    farm_summary,
    pairwise_distances,
    pca_2d,
    pearson_correlation,
)
from wavefarm.mlp import MlpConfig, MlpModel, init_model, load_model, save_model, train
from wavefarm.outliers import iqr_fences, lof_scores, zscore_flags
from wavefarm.preprocess import ScalerParams, SplitSpec, fit_scaler, train_test_split

__version__ = "0.1.0"

__all__ = [
    "SCENARIOS",
    "FarmDataset",
    "FarmRecord",
    "WecLayout",
    "load_dataset",
    "parse_record",
    "validate_dataset",
    "pairwise_distances",
    "distance_summary",
    "farm_summary",
    "pearson_correlation",
    "pca_2d",
    "lof_scores",
    "zscore_flags",
    "iqr_fences",
    "ScalerParams",
    "SplitSpec",
    "fit_scaler",
    "train_test_split",
    "MlpConfig",
    "MlpModel",
    "init_model",
    "train",
    "save_model",
    "load_model",
    "__version__",
]
