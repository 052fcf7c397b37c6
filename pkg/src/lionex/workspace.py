"""Workspace: a flat directory of diffable pipeline artifacts (datasets,
vocabulary, models, feature stats, outputs) plus the orchestration that
builds and consumes them. Both the CLI and the HTTP service go through this
module, so every command is reproducible from the manifest and seeds alone.
"""

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import baselines, data, lionets, metrics, neural
from .errors import DomainError, WorkspaceError
from .numerics import FeatureStats, compute_feature_stats

MANIFEST = "manifest.json"
KINDS = ("toy", "text", "timeseries")

DEFAULTS = {
    "toy": {"n": 100, "features": 6, "split_ratio": 0.8},
    "text": {"sentences": 200, "max_features": 300, "split_ratio": 0.8},
    "timeseries": {
        "units": 10,
        "sensors": 5,
        "window": 20,
        "rul_threshold": 30.0,
        "split_ratio": 0.8,
        "ts_task": "binary_classification",
    },
}


class Workspace:
    def __init__(self, root):
        self.root = Path(root)
        self._manifest = None
        self._cache = {}

    # -- paths ------------------------------------------------------------

    def path(self, name) -> Path:
        return self.root / name

    @property
    def manifest_path(self):
        return self.path(MANIFEST)

    @property
    def predictor_path(self):
        return self.path("predictor.json")

    @property
    def decoder_path(self):
        return self.path("decoder.json")

    @property
    def stats_path(self):
        return self.path("stats.json")

    @property
    def vocab_path(self):
        return self.path("vocab.json")

    def out_dir(self) -> Path:
        out = self.path("out")
        out.mkdir(exist_ok=True)
        return out

    def require(self, *paths):
        for p in paths:
            if not Path(p).exists():
                raise WorkspaceError(f"missing required artifact: {p}")

    # -- manifest ----------------------------------------------------------

    @property
    def manifest(self):
        if self._manifest is None:
            self.require(self.manifest_path)
            with open(self.manifest_path, "r", encoding="utf-8") as fh:
                self._manifest = json.load(fh)
            if self._manifest.get("kind") not in KINDS:
                raise WorkspaceError(f"manifest kind must be one of {KINDS}")
        return self._manifest

    @property
    def kind(self):
        return self.manifest["kind"]

    # -- artifact loading (cached; artifacts are immutable once written) ---

    def predictor(self) -> neural.MLPModel:
        if "predictor" not in self._cache:
            self.require(self.predictor_path)
            self._cache["predictor"] = neural.load_model(self.predictor_path)
        return self._cache["predictor"]

    def decoder(self) -> neural.MLPModel:
        if "decoder" not in self._cache:
            self.require(self.decoder_path)
            self._cache["decoder"] = neural.load_model(self.decoder_path)
        return self._cache["decoder"]

    def stats(self) -> FeatureStats:
        if "stats" not in self._cache:
            self.require(self.stats_path)
            with open(self.stats_path, "r", encoding="utf-8") as fh:
                self._cache["stats"] = FeatureStats.from_dict(json.load(fh))
        return self._cache["stats"]

    def vocab(self) -> data.Vocabulary:
        if "vocab" not in self._cache:
            self.require(self.vocab_path)
            with open(self.vocab_path, "r", encoding="utf-8") as fh:
                self._cache["vocab"] = data.Vocabulary.from_dict(json.load(fh))
        return self._cache["vocab"]

    # -- instances ----------------------------------------------------------

    def instances(self, split: str) -> "InstanceSet":
        if split not in ("train", "test"):
            raise DomainError(f"split must be train or test, got {split!r}")
        key = f"instances_{split}"
        if key not in self._cache:
            self._cache[key] = self._load_instances(split)
        return self._cache[key]

    def _load_instances(self, split):
        kind = self.kind
        if kind == "toy":
            path = self.path(f"{split}.csv")
            self.require(path)
            X, y = data.read_dense_csv(path)
            raw = [row.tolist() for row in X]
        elif kind == "text":
            path = self.path(f"{split}.csv")
            self.require(path)
            texts, y = data.read_corpus_csv(path)
            vocab = self.vocab()
            X = np.array([data.tfidf_transform(vocab, data.prepare_text(t)) for t in texts])
            raw = texts
        else:
            path = self.path(f"{split}.csv")
            self.require(path)
            units = data.read_series_csv(path)
            ds = data.make_windows(units, self.manifest["window"])
            y = ds.labels
            if self.manifest.get("ts_task", "binary_classification") == "binary_classification":
                y = data.binarize_rul(y, self.manifest["rul_threshold"])
            X = ds.windows
            raw = None
        ids = [f"{split}-{i}" for i in range(X.shape[0])]
        return InstanceSet(split=split, ids=ids, X=np.asarray(X, dtype=np.float64), labels=np.asarray(y), raw=raw)

    def get_instance(self, instance_id: str):
        split, _, idx = instance_id.partition("-")
        try:
            i = int(idx)
        except ValueError:
            raise WorkspaceError(f"unknown instance id {instance_id!r}") from None
        inst = self.instances(split)
        if not 0 <= i < inst.X.shape[0]:
            raise WorkspaceError(f"unknown instance id {instance_id!r}")
        return inst, i

    def feature_names(self):
        kind = self.kind
        if kind == "text":
            return list(self.vocab().tokens)
        if kind == "timeseries":
            window, sensors = self.manifest["window"], self.manifest["sensors"]
            return [f"t{t}_s{s}" for t in range(window) for s in range(sensors)]
        features = self.manifest["features"]
        return [f"f{i}" for i in range(features)]

    def predict_fn(self):
        predictor = self.predictor()

        def predict(x):
            return float(neural.predict_batch(predictor, np.asarray(x, dtype=np.float64)[None, :])[0])

        return predict


@dataclass
class InstanceSet:
    split: str
    ids: list
    X: np.ndarray
    labels: np.ndarray
    raw: list | None  # texts for text workspaces, None otherwise


def resolve_root(explicit=None):
    """Workspace root: LIONEX_WORKSPACE overrides any explicit path."""
    env = os.environ.get("LIONEX_WORKSPACE")
    root = env or explicit
    if not root:
        raise WorkspaceError("no workspace given (flag or LIONEX_WORKSPACE)")
    return Path(root)


# ---------------------------------------------------------------------------
# Stage 1: data generation
# ---------------------------------------------------------------------------

def generate(kind: str, root, seed: int = 0, **overrides):
    """Write a synthetic dataset of the requested kind plus the manifest."""
    if kind not in KINDS:
        raise DomainError(f"kind must be one of {KINDS}")
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    params = dict(DEFAULTS[kind])
    params.update({k: v for k, v in overrides.items() if v is not None})
    manifest = {"kind": kind, "seed": seed, **params}

    if kind == "toy":
        X, y = data.synth_classification(params["n"], params["features"], seed=seed)
        cut = round(params["n"] * params["split_ratio"])
        rng = np.random.default_rng(seed)
        order = rng.permutation(params["n"])
        data.write_dense_csv(root / "train.csv", X[order[:cut]], y[order[:cut]])
        data.write_dense_csv(root / "test.csv", X[order[cut:]], y[order[cut:]])
    elif kind == "text":
        texts, labels = data.synth_text_corpus(params["sentences"], seed=seed)
        split = data.split_corpus(texts, labels, ratio=params["split_ratio"], seed=seed)
        data.write_corpus_csv(root / "train.csv", split.train_texts, split.train_labels)
        data.write_corpus_csv(root / "test.csv", split.test_texts, split.test_labels)
        prepared = [data.prepare_text(t) for t in split.train_texts]
        vocab = data.tfidf_fit(prepared, params["max_features"])
        with open(root / "vocab.json", "w", encoding="utf-8") as fh:
            json.dump(vocab.to_dict(), fh)
    else:
        units = data.synth_degradation(params["units"], params["sensors"], seed=seed)
        cut = max(1, round(params["units"] * params["split_ratio"]))
        data.write_series_csv(root / "train.csv", units[:cut])
        data.write_series_csv(root / "test.csv", units[cut:] or units[-1:])

    with open(root / MANIFEST, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    return Workspace(root)


# ---------------------------------------------------------------------------
# Stage 2/3: model training
# ---------------------------------------------------------------------------

_PREDICTOR_SPECS = {
    # hidden layer spec, lr, epochs, batch
    "toy": ([(8, "tanh"), (4, "tanh")], 0.01, 60, 16),
    "text": ([(32, "tanh"), (16, "tanh")], 0.01, 150, 16),
    "timeseries": ([(32, "tanh"), (16, "tanh")], 0.005, 60, 32),
}


def train_predictor(ws: Workspace, epochs=None, seed=0, lr=None):
    train = ws.instances("train")
    hidden, default_lr, default_epochs, batch = _PREDICTOR_SPECS[ws.kind]
    task = "binary_classification"
    loss = "binary_cross_entropy"
    if ws.kind == "timeseries" and ws.manifest.get("ts_task") == "regression":
        task = "regression"
        loss = "mse"
    out_act = "sigmoid" if task == "binary_classification" else "linear"
    specs = hidden + [(1, out_act)]
    model = neural.build_mlp(train.X.shape[1], specs, task, seed=seed)
    cfg = neural.TrainConfig(
        loss=loss,
        epochs=epochs or default_epochs,
        batch_size=min(batch, train.X.shape[0]),
        seed=seed,
        lr=lr or default_lr,
    )
    history = neural.train(model, train.X, train.labels, cfg)
    neural.save_model(model, ws.predictor_path)
    ws._cache.pop("predictor", None)
    return history


_DECODER_SPECS = {
    # loss, lr, epochs, batch
    "toy": ("mse", 0.01, 1200, 16),
    "text": ("binary_cross_entropy", 0.01, 200, 16),
    "timeseries": ("mse", 0.005, 80, 32),
}


def train_decoder(ws: Workspace, epochs=None, seed=0, lr=None):
    ws.require(ws.predictor_path)
    predictor = ws.predictor()
    train = ws.instances("train")
    latent = neural.encode_batch(predictor, train.X)
    decoder = neural.decoder_for(predictor, unit_range=True, seed=seed + 1)
    loss, default_lr, default_epochs, batch = _DECODER_SPECS[ws.kind]
    cfg = neural.TrainConfig(
        loss=loss,
        epochs=epochs or default_epochs,
        batch_size=min(batch, latent.shape[0]),
        seed=seed,
        lr=lr or default_lr,
    )
    history = neural.train(decoder, latent, train.X, cfg)
    neural.save_model(decoder, ws.decoder_path)
    ws._cache.pop("decoder", None)
    return history


def compute_stats(ws: Workspace):
    ws.require(ws.predictor_path)
    predictor = ws.predictor()
    train = ws.instances("train")
    latent = neural.encode_batch(predictor, train.X)
    stats = compute_feature_stats(latent)
    with open(ws.stats_path, "w", encoding="utf-8") as fh:
        json.dump(stats.to_dict(), fh)
    ws._cache.pop("stats", None)
    return stats


# ---------------------------------------------------------------------------
# Stage 4: explanation
# ---------------------------------------------------------------------------

EXPLAINERS = ("lionets", "lime", "gxi")


def make_explain_full(ws: Workspace, name: str, seed: int = 0, n_neighbours=None, lime_samples=None):
    """Adapter returning explain_full(x) -> (Explanation, f_preds, g_preds)
    in the shape the metrics module consumes."""
    predictor = ws.predictor()
    if name == "lionets":
        decoder = ws.decoder()
        stats = ws.stats()
        cfg = lionets.NeighbourhoodConfig(n_neighbours=n_neighbours or 2000, seed=seed)

        def full(x):
            expl, nb = lionets.explain(predictor, decoder, stats, x, cfg)
            g = nb.decoded @ expl.importances + expl.intercept
            return expl, nb.predictions, g

        return full
    if name == "lime":
        cfg = baselines.LimeConfig(num_samples=lime_samples or 5000, seed=seed)

        def full(x):
            return baselines.lime_text_explain_full(predictor, x, cfg)

        return full
    if name == "gxi":

        def full(x):
            return baselines.gradient_x_input_explain(predictor, x), None, None

        return full
    raise DomainError(f"unknown explainer {name!r}; choose from {EXPLAINERS}")


def explain_instance(ws: Workspace, instance_id: str, explainer: str, seed: int = 0,
                     n_neighbours=None, top_k: int = 10):
    """Explanation document (External-Interface JSON shape) for one stored
    instance, including counterfactuals for sparse text data and the
    per-sensor aggregation for windowed data."""
    inst, i = ws.get_instance(instance_id)
    x = inst.X[i]
    full = make_explain_full(ws, explainer, seed=seed, n_neighbours=n_neighbours)
    expl, _, _ = full(x)
    names = ws.feature_names()
    counter = None
    if ws.kind == "text" and explainer == "lionets":
        counter = lionets.counterfactual_features(expl, x, top_k=top_k)
    doc = lionets.explanation_to_dict(expl, x, names, instance_id, counterfactuals=counter)
    doc["explainer"] = explainer
    if ws.kind == "timeseries":
        agg = lionets.aggregate_sensor_importance(
            expl, ws.manifest["window"], ws.manifest["sensors"]
        )
        doc["sensor_summary"] = [
            {
                "sensor": s,
                "mean": float(agg.means[s]),
                "std": float(agg.stds[s]),
                "min": float(agg.mins[s]),
                "max": float(agg.maxs[s]),
            }
            for s in range(len(agg.means))
        ]
    return doc, expl, x


def what_if(ws: Workspace, instance_id: str, edits):
    """Re-run the preprocessing pipeline on an edited raw instance."""
    inst, i = ws.get_instance(instance_id)
    predictor = ws.predictor()
    if ws.kind == "text":
        return lionets.what_if_text(predictor, ws.vocab(), inst.raw[i], edits)
    if ws.kind == "timeseries":
        window = inst.X[i].reshape(ws.manifest["window"], ws.manifest["sensors"])
        return lionets.what_if_window(predictor, window, edits)
    window = inst.X[i].reshape(1, -1)  # dense rows behave as a 1-step window
    return lionets.what_if_window(predictor, window, edits)


# ---------------------------------------------------------------------------
# Stage 5: evaluation
# ---------------------------------------------------------------------------

def evaluate(ws: Workspace, explainers, split: str = "test", limit: int = 20,
             seed: int = 0, n_neighbours=None, lime_samples=None):
    inst = ws.instances(split)
    X = inst.X[:limit]
    predict = ws.predict_fn()
    if ws.kind == "text":
        mode, grouping = "text", "per-token"
        window = sensors = None
    elif ws.kind == "timeseries":
        mode, grouping = "dense", "per-sensor"
        window, sensors = ws.manifest["window"], ws.manifest["sensors"]
    else:
        mode, grouping = "dense", "per-feature"
        window = sensors = None
    reports = []
    for name in explainers:
        full = make_explain_full(ws, name, seed=seed, n_neighbours=n_neighbours,
                                 lime_samples=lime_samples)
        reports.append(
            metrics.evaluate_explainer(
                name, full, predict, X,
                mode=mode, grouping=grouping, split=split,
                window=window, sensors=sensors,
            )
        )
    return reports
