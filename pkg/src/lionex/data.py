"""Dataset pipelines: text preprocessing and TF-IDF vectorization,
time-series windowing with remaining-useful-life labels, CSV ingestion and
deterministic synthetic desk-scale generators."""

import csv
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, DimensionError, DomainError

# Phrase and word transformations, applied in order after lowercasing.
PHRASE_TRANSFORMS = (
    ("what's", "what is"),
    ("'ll", " will"),
    ("'s", " is"),
    ("don't", "do not"),
    ("i'm", "i am"),
    ("'ve", " have"),
    ("doesn't", "does not"),
    ("he's", "he is"),
    ("isn't", "is not"),
    ("that's", "that is"),
    ("she's", "she is"),
    ("'re", " are"),
    ("aren't", "are not"),
    ("it's", "it is"),
    ("'d", " would"),
    ("%", " percent"),
    ("e-mail", "e mail"),
)

_NON_ALNUM = re.compile(r"[^a-z0-9 ]+")
_WS = re.compile(r"\s+")


def preprocess_text(raw: str) -> str:
    """Lowercase, expand contractions, strip punctuation, normalize spaces.

    Idempotent: preprocess_text(preprocess_text(t)) == preprocess_text(t).
    """
    text = raw.lower()
    for old, new in PHRASE_TRANSFORMS:
        text = text.replace(old, new)
    text = _NON_ALNUM.sub(" ", text)
    return _WS.sub(" ", text).strip()


_SUFFIXES = ("ing", "ed", "es", "s")
_MIN_STEM = 3


def light_stem(token: str) -> str:
    """Rule-based suffix stripper standing in for a full stemmer."""
    for suffix in _SUFFIXES:
        stem = token[: -len(suffix)] if token.endswith(suffix) else None
        if stem is not None and len(stem) >= _MIN_STEM:
            return stem
    return token


def prepare_text(raw: str, stem: bool = True) -> str:
    """Full text normalization used by the corpus pipelines."""
    text = preprocess_text(raw)
    if stem:
        text = " ".join(light_stem(tok) for tok in text.split())
    return text


@dataclass(frozen=True)
class Vocabulary:
    """Fitted token list with dense indices and document frequencies."""

    tokens: list
    doc_freq: np.ndarray
    n_docs: int
    index: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.index:
            object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self):
        return len(self.tokens)

    def idf(self):
        return np.log((1.0 + self.n_docs) / (1.0 + self.doc_freq)) + 1.0

    def to_dict(self):
        return {
            "tokens": list(self.tokens),
            "doc_freq": self.doc_freq.tolist(),
            "n_docs": self.n_docs,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            tokens=list(d["tokens"]),
            doc_freq=np.asarray(d["doc_freq"], dtype=np.float64),
            n_docs=int(d["n_docs"]),
        )


def tfidf_fit(corpus, max_features: int) -> Vocabulary:
    """Select the top max_features tokens by total corpus count (ties broken
    lexicographically) and record their document frequencies.

    Texts are expected to be preprocessed already; tokens are split on
    whitespace.
    """
    if not corpus:
        raise DegenerateInputError("cannot fit a vocabulary on an empty corpus")
    counts = {}
    doc_freq = {}
    for text in corpus:
        toks = text.split()
        for t in toks:
            counts[t] = counts.get(t, 0) + 1
        for t in set(toks):
            doc_freq[t] = doc_freq.get(t, 0) + 1
    ranked = sorted(counts, key=lambda t: (-counts[t], t))[:max_features]
    tokens = sorted(ranked)
    return Vocabulary(
        tokens=tokens,
        doc_freq=np.array([doc_freq[t] for t in tokens], dtype=np.float64),
        n_docs=len(corpus),
    )


def tfidf_transform(vocab: Vocabulary, text: str):
    """L2-normalized tf-idf vector (tf = raw count, smoothed log idf);
    out-of-vocabulary tokens are dropped."""
    vec = np.zeros(len(vocab))
    for tok in text.split():
        i = vocab.index.get(tok)
        if i is not None:
            vec[i] += 1.0
    if vec.any():
        vec *= vocab.idf()
        vec /= math.sqrt(float(vec @ vec))
    return vec


@dataclass(frozen=True)
class CorpusSplit:
    train_texts: list
    train_labels: np.ndarray
    test_texts: list
    test_labels: np.ndarray
    seed: int
    ratio: float


def split_corpus(texts, labels, ratio: float = 0.8, seed: int = 0) -> CorpusSplit:
    """Shuffled disjoint train/test split honoring the ratio to +-1 instance."""
    if not 0 < ratio < 1:
        raise DomainError(f"ratio must lie in (0, 1), got {ratio}")
    labels = np.asarray(labels, dtype=np.float64)
    if len(texts) != len(labels):
        raise DimensionError("texts and labels lengths differ")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(texts))
    cut = round(len(texts) * ratio)
    tr, te = order[:cut], order[cut:]
    return CorpusSplit(
        train_texts=[texts[i] for i in tr],
        train_labels=labels[tr],
        test_texts=[texts[i] for i in te],
        test_labels=labels[te],
        seed=seed,
        ratio=ratio,
    )


@dataclass(frozen=True)
class UnitSeries:
    """One unit's full sensor history plus remaining-useful-life labels."""

    unit_id: int
    sensors: np.ndarray  # (timesteps, n_sensors)
    rul: np.ndarray  # (timesteps,)


@dataclass(frozen=True)
class TimeWindowDataset:
    """Flattened sliding windows; each row is timestep-major, sensor-minor."""

    windows: np.ndarray  # (n, window * sensors)
    labels: np.ndarray  # (n,)
    window: int
    sensors: int
    unit_ids: np.ndarray  # (n,)
    skipped_units: list


def make_windows(units, window: int) -> TimeWindowDataset:
    """One row per eligible end-timestep covering the window ending there;
    the label is the RUL at the window's end. Windows never cross units;
    units shorter than the window are skipped and reported."""
    if window < 1:
        raise DomainError("window must be >= 1")
    rows, labels, unit_ids, skipped = [], [], [], []
    sensors = None
    for unit in units:
        series = np.asarray(unit.sensors, dtype=np.float64)
        if sensors is None:
            sensors = series.shape[1]
        elif series.shape[1] != sensors:
            raise DimensionError("all units must share the sensor count")
        t_len = series.shape[0]
        if t_len < window:
            skipped.append(unit.unit_id)
            continue
        for end in range(window - 1, t_len):
            rows.append(series[end - window + 1 : end + 1].ravel())
            labels.append(float(unit.rul[end]))
            unit_ids.append(unit.unit_id)
    if not rows:
        raise DomainError("no unit is long enough for the requested window")
    return TimeWindowDataset(
        windows=np.asarray(rows),
        labels=np.asarray(labels),
        window=window,
        sensors=int(sensors),
        unit_ids=np.asarray(unit_ids, dtype=np.int64),
        skipped_units=skipped,
    )


def binarize_rul(labels, threshold: float):
    """1 where RUL <= threshold (maintenance needed), 0 otherwise."""
    if threshold <= 0:
        raise DomainError(f"threshold must be > 0, got {threshold}")
    labels = np.asarray(labels, dtype=np.float64)
    return (labels <= threshold).astype(np.float64)


def synth_classification(n: int, features: int, seed: int = 0):
    """Two Gaussian clusters min-max scaled into [0, 1] with a 50/50 (+-1)
    label split.

    A low-dimensional informative signal is mixed into most features (so the
    data has low intrinsic dimension and is reconstructible from a narrow
    latent code); the last feature is pure low-amplitude noise.
    """
    if n < 2 or features < 2:
        raise DomainError("need n >= 2 and features >= 2")
    rng = np.random.default_rng(seed)
    n_pos = n // 2
    intrinsic = max(2, features // 3)
    offset = rng.uniform(2.0, 3.0, size=intrinsic) * rng.choice([-1.0, 1.0], size=intrinsic)
    Z = rng.normal(0.0, 1.0, size=(n, intrinsic))
    Z[:n_pos] += offset
    mixing = rng.uniform(-1.0, 1.0, size=(intrinsic, features))
    mixing[:, -1] = 0.0  # last column carries no signal
    X = Z @ mixing + rng.normal(0.0, 0.05, size=(n, features))
    X[:, -1] += rng.normal(0.0, 0.25, size=n)
    y = np.zeros(n)
    y[:n_pos] = 1.0
    order = rng.permutation(n)
    X, y = X[order], y[order]
    lo, hi = X.min(), X.max()
    return (X - lo) / (hi - lo), y


def synth_degradation(units: int, sensors: int, seed: int = 0):
    """Per-unit monotone degradation signals with noise, in [0, 1], with
    lifetimes in [120, 250] and RUL counting down to 0 at the final step."""
    if units < 1 or sensors < 1:
        raise DomainError("need units >= 1 and sensors >= 1")
    rng = np.random.default_rng(seed)
    direction = rng.choice([-1.0, 1.0], size=sensors)
    amplitude = rng.uniform(0.35, 0.6, size=sensors)
    exponent = rng.uniform(1.0, 2.5, size=sensors)
    base = rng.uniform(0.3, 0.5, size=sensors)
    out = []
    for unit_id in range(1, units + 1):
        lifetime = int(rng.integers(120, 251))
        t = np.arange(1, lifetime + 1, dtype=np.float64)
        frac = (t / lifetime)[:, None]
        signal = base + direction * amplitude * frac ** exponent
        signal = signal + rng.normal(0.0, 0.02, size=signal.shape)
        out.append(
            UnitSeries(
                unit_id=unit_id,
                sensors=np.clip(signal, 0.0, 1.0),
                rul=lifetime - t,
            )
        )
    return out


_CLASS1_WORDS = (
    "win", "prize", "free", "offer", "claim", "cash", "urgent",
    "bonus", "reward", "winner", "discount", "jackpot",
)
_CLASS0_WORDS = (
    "meeting", "lunch", "home", "report", "family", "weather",
    "game", "music", "coffee", "friend", "travel", "garden",
)
_FILLER_WORDS = (
    "the", "a", "is", "on", "at", "we", "you", "today", "please",
    "now", "this", "that", "will", "can", "see", "get", "for", "to",
)


def synth_text_corpus(n_sentences: int, seed: int = 0):
    """Two-class synthetic corpus: each sentence mixes filler words with
    2-4 words drawn from its class pool. Vocabulary stays under 50 tokens."""
    if n_sentences < 2:
        raise DomainError("need at least 2 sentences")
    rng = np.random.default_rng(seed)
    texts, labels = [], []
    for i in range(n_sentences):
        label = i % 2
        pool = _CLASS1_WORDS if label == 1 else _CLASS0_WORDS
        n_class = int(rng.integers(2, 5))
        n_fill = int(rng.integers(3, 7))
        words = list(rng.choice(pool, size=n_class, replace=True))
        words += list(rng.choice(_FILLER_WORDS, size=n_fill, replace=True))
        rng.shuffle(words)
        texts.append(" ".join(words))
        labels.append(float(label))
    return texts, np.asarray(labels)


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------

def write_corpus_csv(path, texts, labels):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "text"])
        for label, text in zip(labels, texts):
            writer.writerow([int(label), text])


def read_corpus_csv(path):
    texts, labels = [], []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            labels.append(float(row["label"]))
            texts.append(row["text"])
    return texts, np.asarray(labels)


def write_series_csv(path, units):
    sensors = units[0].sensors.shape[1]
    header = ["unit", "timestep"] + [f"sensor_{i + 1}" for i in range(sensors)] + ["rul"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for unit in units:
            for t in range(unit.sensors.shape[0]):
                row = [unit.unit_id, t + 1]
                row += [repr(float(v)) for v in unit.sensors[t]]
                row.append(repr(float(unit.rul[t])))
                writer.writerow(row)


def read_series_csv(path):
    by_unit = {}
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        sensor_cols = [c for c in reader.fieldnames if c.startswith("sensor_")]
        for row in reader:
            uid = int(row["unit"])
            by_unit.setdefault(uid, []).append(
                (
                    int(row["timestep"]),
                    [float(row[c]) for c in sensor_cols],
                    float(row["rul"]),
                )
            )
    units = []
    for uid in sorted(by_unit):
        entries = sorted(by_unit[uid])
        units.append(
            UnitSeries(
                unit_id=uid,
                sensors=np.array([e[1] for e in entries]),
                rul=np.array([e[2] for e in entries]),
            )
        )
    return units


def write_dense_csv(path, X, y):
    features = X.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(features)] + ["label"])
        for row, label in zip(X, y):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(label))])


def read_dense_csv(path):
    rows, labels = [], []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n_features = len(header) - 1
        for row in reader:
            rows.append([float(v) for v in row[:n_features]])
            labels.append(float(row[n_features]))
    return np.asarray(rows), np.asarray(labels)
