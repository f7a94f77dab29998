"""Error dependence plots and distribution rules for black-box classifiers."""
from .confusion import HIT, ConfusionDistribution, OutcomeCode, encode_outcome
from .cv import (Majority, NaiveBayes, PredictionSet, cross_val_predict, global_distribution,
                 import_predictions, kfold_partition)
from .edp import EDPResult, ZoomView, compute_edp, error_zoom, edp_to_csv, edp_to_json
from .ingest import (Bin, BinScheme, Dataset, DataError, UnknownCategoryError, categorical_bins,
                     discretize, find_bin, load_csv, quantile_bins)
from .rules import (DistributionRule, Item, MiningConfig, build_mining_table, format_rule,
                    mine_rules, query_subgroup)
from .stats import chi2_gof, chi2_sf
from .svg import render_edp_svg

__version__ = "0.1.0"

__all__ = [
    "HIT",
    "ConfusionDistribution",
    "OutcomeCode",
    "encode_outcome",
    "Majority",
    "NaiveBayes",
    "PredictionSet",
    "cross_val_predict",
    "global_distribution",
    "import_predictions",
    "kfold_partition",
    "EDPResult",
    "ZoomView",
    "compute_edp",
    "error_zoom",
    "edp_to_csv",
    "edp_to_json",
    "Bin",
    "BinScheme",
    "Dataset",
    "DataError",
    "UnknownCategoryError",
    "categorical_bins",
    "discretize",
    "find_bin",
    "load_csv",
    "quantile_bins",
    "DistributionRule",
    "Item",
    "MiningConfig",
    "build_mining_table",
    "format_rule",
    "mine_rules",
    "query_subgroup",
    "chi2_gof",
    "chi2_sf",
    "render_edp_svg",
]
