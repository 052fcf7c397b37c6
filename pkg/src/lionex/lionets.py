"""Latent-space neighbourhood explanations.

Pipeline: encode an instance at the predictor's penultimate layer, generate
a neighbourhood there (per-dimension Gaussian perturbations at three noise
levels, then randomly masked weak perturbations), decode the neighbours back
to the input space, weight them by a distance kernel and fit a weighted
ridge surrogate whose coefficients are the feature importances. Sparse
inputs additionally yield counterfactual features: vocabulary entries absent
from the instance that nevertheless carry surrogate weight.
"""

import csv
import json
from dataclasses import dataclass

import numpy as np

from . import kernels, numerics
from .data import Vocabulary, prepare_text, tfidf_transform
from .errors import DimensionError, DomainError, StructureError
from .neural import MLPModel, encode, encode_batch, forward_batch, predict_batch
from .numerics import FeatureStats, kernel_weights, weighted_ridge_fit

NOISE_LEVELS = ("normal", "weak", "strong")
_LEVEL_SCALE = {"normal": 1.0, "weak": 0.5, "strong": 2.0}
ZERO_IMPORTANCE = 1e-12


@dataclass(frozen=True)
class NeighbourhoodConfig:
    n_neighbours: int = 2000
    similarity: str = "euclidean"
    alpha_grid: tuple = (0.01, 0.1, 1.0, 10.0)
    fast: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.n_neighbours < 1:
            raise DomainError("n_neighbours must be >= 1")
        if self.similarity not in ("euclidean", "cosine"):
            raise DomainError(f"unknown similarity {self.similarity!r}")
        grid = tuple(self.alpha_grid)
        if not grid or any(a < 0 for a in grid):
            raise DomainError("alpha_grid must be non-empty with all entries >= 0")
        object.__setattr__(self, "alpha_grid", grid)

    def effective_alpha_grid(self):
        return (1.0,) if self.fast else self.alpha_grid


@dataclass(frozen=True)
class Neighbourhood:
    latent: np.ndarray  # (n, latent_dim)
    decoded: np.ndarray  # (n, input_dim)
    predictions: np.ndarray  # (n,)
    weights: np.ndarray  # (n,)
    first_order_count: int


@dataclass(frozen=True)
class Explanation:
    importances: np.ndarray  # one per input feature
    intercept: float
    local_prediction: float
    model_prediction: float
    local_fidelity_mae: float | None
    chosen_alpha: float | None
    seed: int


@dataclass(frozen=True)
class CounterfactualReport:
    present: list  # (feature index, importance), |importance| descending
    absent: list  # (feature index, importance), |importance| descending, top_k


def determine_value(value: float, stats_entry, level: str, rng) -> float:
    """New value for one dimension: Gaussian noise centred on the feature's
    mean, scaled by level (weak = std/2, normal = std, strong = 2*std),
    added to the current value and clamped into [min, max]."""
    if level not in _LEVEL_SCALE:
        raise DomainError(f"unknown noise level {level!r}")
    lo, hi, mean, std = stats_entry
    noise = mean + _LEVEL_SCALE[level] * std * rng.standard_normal()
    return min(max(value + noise, lo), hi)


def generate_neighbourhood(encoded_instance, n_neighbours: int, stats: FeatureStats, rng):
    """Latent neighbourhood matrix of exactly n_neighbours rows.

    The first min(3 * dims, n) rows are first-order neighbours: one per
    (dimension, level) pair in dimension order with levels normal, weak,
    strong, each differing from the instance in exactly that dimension.
    Remaining rows are second-order: a fresh random binary mask (all-zero
    masks redrawn) selects the dimensions re-valued at the weak level.
    """
    h = numerics.as_vector(encoded_instance, "encoded_instance")
    if n_neighbours < 1:
        raise DomainError("n_neighbours must be >= 1")
    dims = h.shape[0]
    if len(stats) != dims:
        raise DimensionError(f"stats has {len(stats)} entries for {dims} dimensions")

    noise3 = rng.standard_normal((dims, 3))
    first = kernels.first_order_rows(h, stats.mins, stats.maxs, stats.means, stats.stds, noise3)
    if n_neighbours <= first.shape[0]:
        return np.ascontiguousarray(first[:n_neighbours])

    extra = n_neighbours - first.shape[0]
    masks = np.empty((extra, dims), dtype=np.bool_)
    for r in range(extra):
        mask = rng.random(dims) < 0.5
        while not mask.any():
            mask = rng.random(dims) < 0.5
        masks[r] = mask
    noise = rng.standard_normal((extra, dims))
    second = kernels.masked_weak_rows(
        h, stats.mins, stats.maxs, stats.means, stats.stds, masks, noise
    )
    return np.vstack([first, second])


def _latent_distances(latent, h, similarity):
    if similarity == "cosine":
        return kernels.rows_cosine_distance(latent, h)
    return kernels.rows_euclidean(latent, h)


def explain(
    predictor: MLPModel,
    decoder: MLPModel,
    stats: FeatureStats,
    instance,
    cfg: NeighbourhoodConfig = NeighbourhoodConfig(),
):
    """Full pipeline for one instance; returns (Explanation, Neighbourhood).

    Deterministic given cfg.seed. The surrogate alpha is picked from
    cfg.alpha_grid by weighted mean absolute error against the predictor on
    the neighbourhood; the recorded fidelity diagnostic is the unweighted
    neighbourhood MAE.
    """
    x = numerics.as_vector(instance, "instance")
    h = encode(predictor, x)
    latent_dim = h.shape[0]
    if decoder.input_dim != latent_dim:
        raise StructureError(
            f"decoder expects input width {decoder.input_dim}, predictor latent is {latent_dim}"
        )
    if decoder.output_dim != predictor.input_dim:
        raise StructureError(
            f"decoder output width {decoder.output_dim} != predictor input {predictor.input_dim}"
        )

    rng = np.random.default_rng(cfg.seed)
    latent = generate_neighbourhood(h, cfg.n_neighbours, stats, rng)
    decoded, _ = forward_batch(decoder, latent)
    predictions = predict_batch(predictor, decoded)
    distances = _latent_distances(latent, h, cfg.similarity)
    weights = kernel_weights(distances, latent_dim)

    w_sum = float(weights.sum())
    best = None
    for alpha in cfg.effective_alpha_grid():
        fit = weighted_ridge_fit(decoded, predictions, weights, alpha)
        residual = np.abs(fit.predict(decoded) - predictions)
        weighted_mae = float(weights @ residual) / w_sum
        if best is None or weighted_mae < best[0]:
            best = (weighted_mae, float(np.mean(residual)), fit)
    _, plain_mae, fit = best

    model_prediction = float(predict_batch(predictor, x[None, :])[0])
    local_prediction = fit.intercept + float(fit.coefficients @ x)
    expl = Explanation(
        importances=fit.coefficients,
        intercept=fit.intercept,
        local_prediction=local_prediction,
        model_prediction=model_prediction,
        local_fidelity_mae=plain_mae,
        chosen_alpha=fit.alpha,
        seed=cfg.seed,
    )
    nb = Neighbourhood(
        latent=latent,
        decoded=decoded,
        predictions=predictions,
        weights=weights,
        first_order_count=min(3 * latent_dim, cfg.n_neighbours),
    )
    return expl, nb


def counterfactual_features(expl: Explanation, instance, top_k: int) -> CounterfactualReport:
    """Split non-zero importances into features present in the instance and
    absent ones; the absent side, ranked by |importance|, is the
    counterfactual candidate list (positive and negative kept)."""
    if top_k < 1:
        raise DomainError("top_k must be >= 1")
    x = np.asarray(instance, dtype=np.float64)
    imp = np.asarray(expl.importances, dtype=np.float64)
    if x.shape != imp.shape:
        raise DimensionError("instance and importances lengths differ")
    nonzero = np.abs(imp) > ZERO_IMPORTANCE
    present = [(int(i), float(imp[i])) for i in np.flatnonzero(nonzero & (x != 0.0))]
    absent = [(int(i), float(imp[i])) for i in np.flatnonzero(nonzero & (x == 0.0))]
    present.sort(key=lambda t: (-abs(t[1]), t[0]))
    absent.sort(key=lambda t: (-abs(t[1]), t[0]))
    return CounterfactualReport(present=present, absent=absent[:top_k])


@dataclass(frozen=True)
class WhatIfResult:
    prediction: float
    vector: np.ndarray
    text: str | None = None
    window: np.ndarray | None = None
    warnings: tuple = ()


def what_if_text(
    predictor: MLPModel, vocab: Vocabulary, sentence: str, edits, stem: bool = True
) -> WhatIfResult:
    """Apply token edits to a raw sentence, re-vectorize through the full
    preprocessing path and re-predict. The original sentence is untouched.

    Edits are dicts: {"op": "remove_token"|"add_token", "token": t}.
    Removing an absent token or adding an out-of-vocabulary one degrades to
    a warning-carrying no-op on the vector.
    """
    tokens = prepare_text(sentence, stem=stem).split()
    warnings = []
    for edit in edits:
        op = edit.get("op")
        tok = prepare_text(str(edit.get("token", "")), stem=stem).strip()
        if op == "remove_token":
            if tok in tokens:
                tokens = [t for t in tokens if t != tok]
            else:
                warnings.append(f"token {tok!r} not present; removal is a no-op")
        elif op == "add_token":
            if tok not in vocab.index:
                warnings.append(f"token {tok!r} not in vocabulary; no effect on the vector")
            tokens.append(tok)
        else:
            raise DomainError(f"unknown text edit op {op!r}")
    vector = tfidf_transform(vocab, " ".join(tokens))
    prediction = float(predict_batch(predictor, vector[None, :])[0])
    return WhatIfResult(
        prediction=prediction, vector=vector, text=" ".join(tokens), warnings=tuple(warnings)
    )


def what_if_window(predictor: MLPModel, window, edits) -> WhatIfResult:
    """Apply sensor-value edits to a (timesteps, sensors) window and
    re-predict on the timestep-major flattening. Indices are 0-based.

    Edits are dicts: {"op": "set_value", "sensor": s, "timestep": t,
    "value": v} or {"op": "add_delta", "sensor": s, "t_start": a,
    "t_end": b, "delta": d} with an inclusive range.
    """
    W = np.array(window, dtype=np.float64)
    if W.ndim != 2:
        raise DimensionError(f"window must be 2-D, got shape {W.shape}")
    t_len, sensors = W.shape
    for edit in edits:
        op = edit.get("op")
        s = int(edit.get("sensor", -1))
        if not 0 <= s < sensors:
            raise DomainError(f"sensor {s} out of range [0, {sensors})")
        if op == "set_value":
            t = int(edit["timestep"])
            if not 0 <= t < t_len:
                raise DomainError(f"timestep {t} out of range [0, {t_len})")
            W[t, s] = float(edit["value"])
        elif op == "add_delta":
            a, b = int(edit["t_start"]), int(edit["t_end"])
            if not (0 <= a <= b < t_len):
                raise DomainError(f"timestep range [{a}, {b}] invalid for length {t_len}")
            W[a : b + 1, s] += float(edit["delta"])
        else:
            raise DomainError(f"unknown window edit op {op!r}")
    flat = W.ravel()
    prediction = float(predict_batch(predictor, flat[None, :])[0])
    return WhatIfResult(prediction=prediction, vector=flat, window=W)


@dataclass(frozen=True)
class SensorAggregate:
    means: np.ndarray
    stds: np.ndarray
    mins: np.ndarray
    maxs: np.ndarray


def aggregate_sensor_importance(importances, window: int, sensors: int) -> SensorAggregate:
    """Regroup a timestep-major flat importance vector into per-sensor
    series and summarize each with mean/std/min/max."""
    imp = np.asarray(getattr(importances, "importances", importances), dtype=np.float64)
    if imp.ndim != 1 or imp.shape[0] != window * sensors:
        raise DimensionError(
            f"expected {window * sensors} importances for {window}x{sensors}, got {imp.shape}"
        )
    per_sensor = imp.reshape(window, sensors)
    return SensorAggregate(
        means=per_sensor.mean(axis=0),
        stds=per_sensor.std(axis=0),
        mins=per_sensor.min(axis=0),
        maxs=per_sensor.max(axis=0),
    )


# ---------------------------------------------------------------------------
# Latent-geometry study
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistanceStudy:
    """Four neighbour-distance samples and their fixed-bin histograms."""

    series: dict  # name -> 1-D distances
    histogram: list  # rows (series, bin_low, bin_high, count)


SERIES_NAMES = (
    "original_generated",         # generator neighbours vs instance, input space
    "original_generated_encoded",  # same neighbours vs instance, latent space
    "latent_generated_decoded",   # latent neighbours decoded vs instance, input space
    "latent_generated_latent",    # latent neighbours vs instance, latent space
)


def gaussian_column_perturber(X_train):
    """Dense-data neighbour generator: per-column Gaussian noise with the
    training column stds."""
    stds = np.asarray(X_train, dtype=np.float64).std(axis=0)

    def generate(instance, n, rng):
        x = np.asarray(instance, dtype=np.float64)
        return x + rng.standard_normal((n, x.shape[0])) * stds

    return generate


def zeroing_mask_perturber():
    """Sparse-data neighbour generator: zero a uniformly sized random subset
    of the non-zero features of the instance."""

    def generate(instance, n, rng):
        x = np.asarray(instance, dtype=np.float64)
        nz = np.flatnonzero(x)
        if nz.size == 0:
            raise DomainError("instance has no non-zero features to perturb")
        out = np.tile(x, (n, 1))
        for r in range(n):
            k = int(rng.integers(1, nz.size + 1))
            drop = rng.choice(nz, size=k, replace=False)
            out[r, drop] = 0.0
        return out

    return generate


def distance_distributions(
    predictor: MLPModel,
    decoder: MLPModel,
    stats: FeatureStats,
    instance,
    original_generator,
    cfg: NeighbourhoodConfig = NeighbourhoodConfig(),
    bins: int = 30,
) -> DistanceStudy:
    """Compare neighbourhood distance distributions across generation
    spaces: input-space generation measured in both spaces, and latent
    generation measured in both spaces."""
    x = numerics.as_vector(instance, "instance")
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_neighbours

    orig_nb = np.ascontiguousarray(original_generator(x, n, rng), dtype=np.float64)
    h = encode(predictor, x)
    series = {
        SERIES_NAMES[0]: kernels.rows_euclidean(orig_nb, x),
        SERIES_NAMES[1]: kernels.rows_euclidean(
            np.ascontiguousarray(encode_batch(predictor, orig_nb)), h
        ),
    }
    latent_nb = generate_neighbourhood(h, n, stats, rng)
    decoded, _ = forward_batch(decoder, latent_nb)
    series[SERIES_NAMES[2]] = kernels.rows_euclidean(decoded, x)
    series[SERIES_NAMES[3]] = kernels.rows_euclidean(latent_nb, h)

    rows = []
    for name in SERIES_NAMES:
        counts, edges = np.histogram(series[name], bins=bins)
        for i, count in enumerate(counts):
            rows.append((name, float(edges[i]), float(edges[i + 1]), int(count)))
    return DistanceStudy(series=series, histogram=rows)


def write_histogram_csv(path, study: DistanceStudy):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series", "bin_low", "bin_high", "count"])
        for name, lo, hi, count in study.histogram:
            writer.writerow([name, repr(lo), repr(hi), str(count)])


# ---------------------------------------------------------------------------
# Explanation serialization (shared with the baseline explainers)
# ---------------------------------------------------------------------------

def explanation_to_dict(
    expl: Explanation,
    instance,
    feature_names,
    instance_id: str,
    counterfactuals: CounterfactualReport | None = None,
):
    x = np.asarray(instance, dtype=np.float64)
    imp = np.asarray(expl.importances, dtype=np.float64)
    doc = {
        "instance_id": instance_id,
        "model_prediction": expl.model_prediction,
        "local_prediction": expl.local_prediction,
        "fidelity_mae": expl.local_fidelity_mae,
        "alpha": expl.chosen_alpha,
        "seed": expl.seed,
        "importances": [
            {"feature": feature_names[i], "value": float(x[i]), "importance": float(imp[i])}
            for i in range(len(imp))
        ],
        "counterfactuals": [
            {"feature": feature_names[i], "importance": v}
            for i, v in (counterfactuals.absent if counterfactuals else [])
        ],
    }
    return doc


def write_explanation_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)


def write_importance_csv(path, doc):
    """Bar-plot data: (feature, importance) sorted by |importance| desc."""
    entries = sorted(doc["importances"], key=lambda e: (-abs(e["importance"]), e["feature"]))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "importance"])
        for e in entries:
            writer.writerow([e["feature"], repr(e["importance"])])


def write_sensor_aggregation_csv(path, agg: SensorAggregate):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sensor", "mean", "std", "min", "max"])
        for s in range(len(agg.means)):
            writer.writerow(
                [
                    str(s),
                    repr(float(agg.means[s])),
                    repr(float(agg.stds[s])),
                    repr(float(agg.mins[s])),
                    repr(float(agg.maxs[s])),
                ]
            )
