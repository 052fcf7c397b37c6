"""Minimal dense feedforward engine: forward pass with activation capture,
adam/backprop training, input gradients and JSON (de)serialization.

One model class serves three roles in the pipeline: predictor, encoder
(its prefix up to the penultimate layer) and decoder.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    DimensionError,
    DomainError,
    ModelFormatError,
    StructureError,
    TrainingDivergedError,
)

ACTIVATIONS = ("linear", "relu", "tanh", "sigmoid", "softmax")
_ACT_CODE = {name: i for i, name in enumerate(ACTIVATIONS)}
TASKS = ("binary_classification", "regression", "reconstruction")
LOSSES = ("mae", "mse", "binary_cross_entropy", "categorical_cross_entropy")

_PROB_EPS = 1e-12


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out, in), row-major
    bias: np.ndarray  # (out,)
    activation: str

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        self.bias = np.ascontiguousarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.ndim != 1:
            raise DimensionError("weights must be 2-D and bias 1-D")
        if self.bias.shape[0] != self.weights.shape[0]:
            raise StructureError(
                f"bias length {self.bias.shape[0]} != weight rows {self.weights.shape[0]}"
            )
        if self.activation not in ACTIVATIONS:
            raise DomainError(f"unknown activation {self.activation!r}")

    @property
    def out_dim(self):
        return self.weights.shape[0]

    @property
    def in_dim(self):
        return self.weights.shape[1]


class MLPModel:
    """Stack of dense layers. Mutable during `train`, read-only afterwards."""

    def __init__(self, layers, input_dim, task):
        if not layers:
            raise StructureError("model needs at least one layer")
        if task not in TASKS:
            raise DomainError(f"unknown task {task!r}")
        prev = input_dim
        for k, layer in enumerate(layers):
            if layer.in_dim != prev:
                raise StructureError(
                    f"layer {k} expects input width {layer.in_dim}, got {prev}"
                )
            if layer.activation == "softmax" and k != len(layers) - 1:
                raise StructureError("softmax is only permitted as the final layer")
            prev = layer.out_dim
        if task == "binary_classification" and layers[-1].activation != "sigmoid":
            raise StructureError("binary classification requires a sigmoid output layer")
        self.layers = list(layers)
        self.input_dim = int(input_dim)
        self.task = task

    @property
    def output_dim(self):
        return self.layers[-1].out_dim

    @property
    def latent_dim(self):
        """Width of the penultimate layer."""
        if len(self.layers) < 2:
            raise StructureError("model has no penultimate layer")
        return self.layers[-2].out_dim

    def widths(self):
        return [self.input_dim] + [layer.out_dim for layer in self.layers]


def build_mlp(input_dim, layer_specs, task, seed=0) -> MLPModel:
    """Construct a model from (width, activation) pairs with seeded
    uniform +-sqrt(6/(fan_in+fan_out)) weight init and zero bias."""
    rng = np.random.default_rng(seed)
    layers = []
    prev = input_dim
    for width, activation in layer_specs:
        bound = np.sqrt(6.0 / (prev + width))
        w = rng.uniform(-bound, bound, size=(width, prev))
        layers.append(DenseLayer(weights=w, bias=np.zeros(width), activation=activation))
        prev = width
    return MLPModel(layers, input_dim, task)


def decoder_for(predictor: MLPModel, unit_range: bool, seed=0) -> MLPModel:
    """Decoder skeleton roughly inverting the predictor's encoder: reversed
    hidden widths, sigmoid output when the data lives in [0, 1]."""
    widths = predictor.widths()[:-1]  # input .. penultimate
    rev = list(reversed(widths))
    hidden_acts = [layer.activation for layer in predictor.layers[:-1]]
    specs = []
    for i, width in enumerate(rev[1:], start=1):
        if i < len(rev) - 1:
            specs.append((width, hidden_acts[min(i - 1, len(hidden_acts) - 1)]))
        else:
            specs.append((width, "sigmoid" if unit_range else "linear"))
    return build_mlp(rev[0], specs, "reconstruction", seed=seed)


def forward_batch(model: MLPModel, X):
    """Run a (n, input_dim) batch through the model.

    Returns (outputs, activations) where activations[k] is the (n, width_k)
    post-activation output of layer k and outputs is activations[-1].
    """
    A = np.ascontiguousarray(X, dtype=np.float64)
    if A.ndim != 2 or A.shape[1] != model.input_dim:
        raise DimensionError(
            f"expected batch of shape (n, {model.input_dim}), got {A.shape}"
        )
    acts = []
    for layer in model.layers:
        Z = A @ layer.weights.T
        Z += layer.bias
        A = kernels.apply_activation(Z, _ACT_CODE[layer.activation])
        acts.append(A)
    return acts[-1], acts


def forward(model: MLPModel, x):
    """Single-instance forward pass; returns (output, per-layer activations)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError(f"expected 1-D input, got shape {x.shape}")
    out, acts = forward_batch(model, x[None, :])
    return out[0], [a[0] for a in acts]


def encode(model: MLPModel, x):
    """Post-activation output of the penultimate layer (the latent vector)."""
    if len(model.layers) < 2:
        raise StructureError("encoding requires a model with at least 2 layers")
    _, acts = forward(model, x)
    return acts[-2]


def encode_batch(model: MLPModel, X):
    if len(model.layers) < 2:
        raise StructureError("encoding requires a model with at least 2 layers")
    _, acts = forward_batch(model, X)
    return acts[-2]


def predict_batch(model: MLPModel, X):
    """First output unit per row: class-1 probability for binary classifiers,
    raw value for regressors/reconstructors."""
    out, _ = forward_batch(model, X)
    return out[:, 0]


@dataclass
class TrainConfig:
    loss: str
    epochs: int
    batch_size: int
    seed: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise DomainError(f"unknown loss {self.loss!r}")
        if self.lr <= 0:
            raise DomainError("lr must be > 0")
        if self.epochs < 1:
            raise DomainError("epochs must be >= 1")
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")


def _loss_and_delta(loss, A, Y):
    """Mean loss over the batch and the gradient to start backprop.

    Returns (value, delta, wrt_preactivation): when wrt_preactivation is
    True, delta is dL/dZ of the final layer (sigmoid+bce and softmax+cce
    shortcuts); otherwise it is dL/dA.
    """
    size = A.size
    if loss == "mse":
        diff = A - Y
        return float(np.mean(diff * diff)), 2.0 * diff / size, False
    if loss == "mae":
        diff = A - Y
        return float(np.mean(np.abs(diff))), np.sign(diff) / size, False
    if loss == "binary_cross_entropy":
        P = np.clip(A, _PROB_EPS, 1.0 - _PROB_EPS)
        value = float(np.mean(-(Y * np.log(P) + (1.0 - Y) * np.log(1.0 - P))))
        return value, (A - Y) / size, True
    # categorical cross-entropy over softmax rows
    P = np.clip(A, _PROB_EPS, 1.0)
    value = float(np.mean(-np.sum(Y * np.log(P), axis=1)))
    return value, (A - Y) / A.shape[0], True


def train(model: MLPModel, X, Y, cfg: TrainConfig):
    """Mini-batch adam training; returns the per-epoch mean loss history.

    The model is updated in place and the run is reproducible from cfg.seed.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    n = X.shape[0]
    if Y.shape[0] != n:
        raise DimensionError(f"X has {n} rows but Y has {Y.shape[0]}")
    if X.shape[1] != model.input_dim or Y.shape[1] != model.output_dim:
        raise DimensionError("X/Y widths do not match the model")
    if cfg.batch_size > n:
        raise DomainError(f"batch_size {cfg.batch_size} exceeds dataset size {n}")
    final_act = model.layers[-1].activation
    if cfg.loss == "binary_cross_entropy" and final_act != "sigmoid":
        raise DomainError("binary_cross_entropy requires a sigmoid output layer")
    if cfg.loss == "categorical_cross_entropy" and final_act != "softmax":
        raise DomainError("categorical_cross_entropy requires a softmax output layer")
    if final_act == "softmax" and cfg.loss != "categorical_cross_entropy":
        raise DomainError("softmax output layers train with categorical_cross_entropy")

    rng = np.random.default_rng(cfg.seed)
    params = []
    for layer in model.layers:
        for p in (layer.weights, layer.bias):
            params.append((p, np.zeros_like(p), np.zeros_like(p)))

    history = []
    step = 0
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            Xb, Yb = X[idx], Y[idx]
            _, acts = forward_batch(model, Xb)
            value, delta, wrt_z = _loss_and_delta(cfg.loss, acts[-1], Yb)
            loss_sum += value * len(idx)
            if not np.isfinite(value):
                raise TrainingDivergedError(epoch)

            step += 1
            bc1 = 1.0 - cfg.beta1**step
            bc2 = 1.0 - cfg.beta2**step
            grads = _backward(model, Xb, acts, delta, wrt_z)
            for (p, m, v), g in zip(params, grads):
                kernels.adam_step(
                    p.ravel(), g.ravel(), m.ravel(), v.ravel(),
                    cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, bc1, bc2,
                )
        epoch_loss = loss_sum / n
        if not np.isfinite(epoch_loss):
            raise TrainingDivergedError(epoch)
        history.append(epoch_loss)
    return history


def _backward(model, Xb, acts, delta, wrt_z):
    """Gradients for every layer's (weights, bias), last layer first in the
    computation but returned in layer order."""
    grads = []
    for k in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[k]
        A = acts[k]
        if k == len(model.layers) - 1 and wrt_z:
            dZ = delta
        else:
            dZ = delta * kernels.activation_grad(A, _ACT_CODE[layer.activation])
        prev = acts[k - 1] if k > 0 else Xb
        dW = dZ.T @ prev
        db = dZ.sum(axis=0)
        grads.append((dW, db))
        if k > 0:
            delta = dZ @ layer.weights
    grads.reverse()
    return [g for pair in grads for g in pair]


def gradient_wrt_input(model: MLPModel, x, output_index: int):
    """d output[output_index] / d input via backpropagation."""
    x = np.asarray(x, dtype=np.float64)
    if not 0 <= output_index < model.output_dim:
        raise DimensionError(
            f"output_index {output_index} out of range for output dim {model.output_dim}"
        )
    _, acts = forward(model, x)
    g = np.zeros(model.output_dim)
    g[output_index] = 1.0
    for k in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[k]
        a = acts[k]
        if layer.activation == "softmax":
            dz = a * (g - float(a @ g))
        else:
            dz = g * kernels.activation_grad(a[None, :], _ACT_CODE[layer.activation])[0]
        g = layer.weights.T @ dz
    return g


def save_model(model: MLPModel, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path) -> MLPModel:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"model file is not valid JSON at byte {e.pos}: {e.msg}") from None
    return model_from_dict(doc)


def model_from_dict(doc) -> MLPModel:
    try:
        input_dim = int(doc["input_dim"])
        task = doc["task"]
        layer_docs = doc["layers"]
    except (KeyError, TypeError) as e:
        raise ModelFormatError(f"model document missing field: {e}") from None
    layers = []
    for k, ld in enumerate(layer_docs):
        try:
            rows, cols = int(ld["rows"]), int(ld["cols"])
            flat = np.asarray(ld["weights"], dtype=np.float64)
            bias = np.asarray(ld["bias"], dtype=np.float64)
            activation = ld["activation"]
        except (KeyError, TypeError, ValueError) as e:
            raise ModelFormatError(f"layer {k} malformed: {e}") from None
        if flat.size != rows * cols:
            raise ModelFormatError(
                f"layer {k}: {flat.size} weights for declared shape {rows}x{cols}"
            )
        if bias.size != rows:
            raise ModelFormatError(f"layer {k}: bias length {bias.size} != rows {rows}")
        layers.append(DenseLayer(flat.reshape(rows, cols), bias, activation))
    try:
        return MLPModel(layers, input_dim, task)
    except (StructureError, DomainError) as e:
        raise ModelFormatError(f"model validation failed: {e}") from None


def model_to_dict(model: MLPModel):
    return {
        "input_dim": model.input_dim,
        "task": model.task,
        "layers": [
            {
                "rows": layer.weights.shape[0],
                "cols": layer.weights.shape[1],
                "weights": layer.weights.ravel().tolist(),
                "bias": layer.bias.tolist(),
                "activation": layer.activation,
            }
            for layer in model.layers
        ],
    }
