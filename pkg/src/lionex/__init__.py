"""Latent-space neighbourhood explanations for dense neural predictors.

Explains a single prediction by generating neighbours at the predictor's
penultimate layer, decoding them back to the input space, and fitting a
distance-weighted ridge surrogate whose coefficients are the feature
importances. Ships baseline explainers (mask-perturbation surrogate,
gradient-times-input), an evaluation-metric suite, dataset pipelines and a
CLI/HTTP surface for the interactive what-if explorer.
"""

from .baselines import LimeConfig, gradient_x_input_explain, lime_text_explain
from .lionets import (
    CounterfactualReport,
    Explanation,
    Neighbourhood,
    NeighbourhoodConfig,
    aggregate_sensor_importance,
    counterfactual_features,
    determine_value,
    distance_distributions,
    explain,
    generate_neighbourhood,
    what_if_text,
    what_if_window,
)
from .metrics import (
    MetricReport,
    altruist_untruthfulness,
    avg_nonzero,
    faithfulness,
    fidelity,
    relaxed_robustness,
)
from .neural import (
    DenseLayer,
    MLPModel,
    TrainConfig,
    build_mlp,
    decoder_for,
    encode,
    encode_batch,
    forward,
    forward_batch,
    gradient_wrt_input,
    load_model,
    predict_batch,
    save_model,
    train,
)
from .numerics import (
    FeatureStats,
    RidgeFit,
    compute_feature_stats,
    cosine_distance,
    euclidean_distance,
    kernel_weight,
    weighted_ridge_fit,
)

__version__ = "0.1.0"
