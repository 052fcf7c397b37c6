"""Comparison explainers: mask-sampling surrogate over the instance's
non-zero features (the classic sparse-text perturbation scheme) and
gradient-times-input."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DomainError
from .lionets import Explanation
from .neural import MLPModel, gradient_wrt_input, predict_batch
from .numerics import weighted_ridge_fit


@dataclass(frozen=True)
class LimeConfig:
    num_samples: int = 5000
    alpha: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_samples < 1:
            raise DomainError("num_samples must be >= 1")
        if self.alpha < 0:
            raise DomainError("alpha must be >= 0")


def similarity_weights(samples, instance):
    """Per-sample weight: cosine similarity to the instance times 1000
    (all-zero samples get weight 0)."""
    x = np.asarray(instance, dtype=np.float64)
    S = np.asarray(samples, dtype=np.float64)
    x_norm = float(np.sqrt(x @ x))
    norms = np.sqrt(np.einsum("ij,ij->i", S, S))
    sims = np.zeros(S.shape[0])
    ok = (norms > 0) & (x_norm > 0)
    sims[ok] = (S[ok] @ x) / (norms[ok] * x_norm)
    return sims * 1000.0


def sample_masks(n_active: int, num_samples: int, rng):
    """Boolean keep-masks over the active features: the all-kept mask once,
    then masks zeroing a uniformly drawn number (1..n) of features, drawn
    with replacement so any of the 2^n achievable masks can repeat."""
    masks = np.ones((num_samples, n_active), dtype=np.bool_)
    for r in range(1, num_samples):
        k = int(rng.integers(1, n_active + 1))
        drop = rng.choice(n_active, size=k, replace=False)
        masks[r, drop] = False
    return masks


def lime_text_explain(predictor: MLPModel, instance, cfg: LimeConfig = LimeConfig()) -> Explanation:
    """Surrogate explanation from zeroing-mask perturbations of the
    instance's non-zero features.

    Sample weights are cosine similarity to the instance times 1000; the
    ridge fit runs on the active columns only, so absent-vocabulary features
    are structurally zero in the result.
    """
    expl, _, _ = lime_text_explain_full(predictor, instance, cfg)
    return expl


def lime_text_explain_full(predictor: MLPModel, instance, cfg: LimeConfig = LimeConfig()):
    """Like `lime_text_explain` but also returns the predictor and surrogate
    outputs on the sampled neighbourhood (for fidelity evaluation)."""
    x = np.asarray(instance, dtype=np.float64)
    active = np.flatnonzero(x)
    if active.size == 0:
        raise DegenerateInputError("instance has no non-zero features")

    rng = np.random.default_rng(cfg.seed)
    masks = sample_masks(active.size, cfg.num_samples, rng)
    samples = np.zeros((cfg.num_samples, x.shape[0]))
    samples[:, active] = x[active] * masks
    weights = similarity_weights(samples, x)

    preds = predict_batch(predictor, samples)
    fit = weighted_ridge_fit(samples[:, active], preds, weights, cfg.alpha)

    importances = np.zeros(x.shape[0])
    importances[active] = fit.coefficients
    surrogate = samples[:, active] @ fit.coefficients + fit.intercept
    model_prediction = float(predict_batch(predictor, x[None, :])[0])
    expl = Explanation(
        importances=importances,
        intercept=fit.intercept,
        local_prediction=fit.intercept + float(importances @ x),
        model_prediction=model_prediction,
        local_fidelity_mae=float(np.mean(np.abs(surrogate - preds))),
        chosen_alpha=cfg.alpha,
        seed=cfg.seed,
    )
    return expl, preds, surrogate


def gradient_x_input_explain(predictor: MLPModel, instance, output_index: int = 0) -> Explanation:
    """Gradient of the selected output at the instance, elementwise times
    the instance. No surrogate, hence no fidelity diagnostic."""
    x = np.asarray(instance, dtype=np.float64)
    grad = gradient_wrt_input(predictor, x, output_index)
    importances = grad * x
    model_prediction = float(predict_batch(predictor, x[None, :])[0])
    return Explanation(
        importances=importances,
        intercept=model_prediction - float(importances @ x),
        local_prediction=model_prediction,
        model_prediction=model_prediction,
        local_fidelity_mae=None,
        chosen_alpha=None,
        seed=0,
    )
