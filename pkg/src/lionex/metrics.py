"""Quantitative evaluation of explainers: fidelity, explanation size,
relaxed robustness, faithfulness and truthfulness (sign-consistency of
importances under feature perturbation), aggregated into per-explainer
reports.

Explainers enter as callables: ``explain_fn(x) -> Explanation`` and, where
a surrogate exists, ``explain_full(x) -> (Explanation, f_preds, g_preds)``
with the predictor/surrogate outputs on the explainer's own neighbourhood.
Predictors enter as ``predict_fn(x) -> float``.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError

ZERO_IMPORTANCE = 1e-12
_TOL = 1e-12


def ks_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic: the supremum distance
    between the empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise DomainError("both samples must be non-empty")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_critical_value(n: int, m: int, alpha: float = 0.05) -> float:
    """Asymptotic two-sample KS rejection threshold c(alpha)*sqrt((n+m)/nm)."""
    c = {0.10: 1.22, 0.05: 1.358, 0.01: 1.628}.get(alpha)
    if c is None:
        raise DomainError("alpha must be one of 0.10, 0.05, 0.01")
    return c * np.sqrt((n + m) / (n * m))


@dataclass(frozen=True)
class FidelityResult:
    fidelity: float  # 1 - mean |g - f|
    r2: float
    r2_defined: bool


def fidelity(f_preds, g_preds) -> FidelityResult:
    """Fidelity 1 - mean|g - f| and the r-squared of g against f."""
    f = np.asarray(f_preds, dtype=np.float64)
    g = np.asarray(g_preds, dtype=np.float64)
    if f.shape != g.shape or f.ndim != 1:
        raise DimensionError("prediction vectors must be 1-D and equal length")
    if f.size < 1:
        raise DomainError("need at least one prediction")
    fid = 1.0 - float(np.mean(np.abs(g - f)))
    ss_tot = float(np.sum((f - f.mean()) ** 2))
    if f.size < 2 or ss_tot == 0.0:
        return FidelityResult(fidelity=fid, r2=float("nan"), r2_defined=False)
    ss_res = float(np.sum((f - g) ** 2))
    return FidelityResult(fidelity=fid, r2=1.0 - ss_res / ss_tot, r2_defined=True)


def avg_nonzero(explanations) -> float:
    """Mean count of non-zero importances per explanation (|imp| <= 1e-12
    counts as zero)."""
    if not explanations:
        raise DomainError("need at least one explanation")
    counts = [
        int(np.sum(np.abs(np.asarray(e.importances)) > ZERO_IMPORTANCE)) for e in explanations
    ]
    return float(np.mean(counts))


@dataclass(frozen=True)
class RobustnessResult:
    score: float
    evaluated: int
    skipped: int


def relaxed_robustness(explain_fn, instances, mode: str, feature_stds=None) -> RobustnessResult:
    """Mean explanation change after perturbing each instance's least
    important feature; lower is more stable.

    The tweak zeroes the minimum-|importance| non-zero feature in text mode
    and subtracts one feature std in dense mode. The change is the mean
    elementwise absolute difference of the two importance vectors.
    Instances where the explainer fails on the tweaked input are skipped
    and counted.
    """
    if mode not in ("text", "dense"):
        raise DomainError(f"unknown robustness mode {mode!r}")
    X = np.asarray(instances, dtype=np.float64)
    if mode == "dense":
        stds = (
            np.asarray(feature_stds, dtype=np.float64)
            if feature_stds is not None
            else X.std(axis=0)
        )
    diffs = []
    skipped = 0
    for x in X:
        e_orig = np.asarray(explain_fn(x).importances, dtype=np.float64)
        candidates = np.flatnonzero(np.abs(e_orig) > ZERO_IMPORTANCE)
        if candidates.size == 0:
            diffs.append(0.0)
            continue
        j = candidates[np.argmin(np.abs(e_orig[candidates]))]
        tweaked = x.copy()
        if mode == "text":
            tweaked[j] = 0.0
        else:
            tweaked[j] -= stds[j]
        try:
            e_tweak = np.asarray(explain_fn(tweaked).importances, dtype=np.float64)
        except Exception:
            skipped += 1
            continue
        diffs.append(float(np.mean(np.abs(e_orig - e_tweak))))
    score = float(np.mean(diffs)) if diffs else float("nan")
    return RobustnessResult(score=score, evaluated=len(diffs), skipped=skipped)


def faithfulness(predict_fn, explain_fn, instances, removal=None) -> float:
    """Mean prediction drop after zeroing each instance's strongest
    positive-importance feature; higher means the importances point at
    features the predictor really uses."""
    X = np.asarray(instances, dtype=np.float64)
    if X.shape[0] == 0:
        raise DomainError("need at least one instance")
    if removal is None:
        def removal(x, j):
            out = x.copy()
            out[j] = 0.0
            return out
    deltas = []
    for x in X:
        imp = np.asarray(explain_fn(x).importances, dtype=np.float64)
        positive = np.flatnonzero(imp > ZERO_IMPORTANCE)
        if positive.size == 0:
            deltas.append(0.0)
            continue
        j = positive[np.argmax(imp[positive])]
        deltas.append(float(predict_fn(x) - predict_fn(removal(x, j))))
    return float(np.mean(deltas))


@dataclass(frozen=True)
class AltruistResult:
    mean_count: float
    mean_pct: float
    excluded_units: int


def _truthful(z, p0, p_inc, p_dec):
    if z > 0:
        return p_inc >= p0 - _TOL and p_dec <= p0 + _TOL
    return p_inc <= p0 + _TOL and p_dec >= p0 - _TOL


def altruist_untruthfulness(
    predict_fn,
    explain_fn,
    instances,
    grouping: str = "per-feature",
    window: int | None = None,
    sensors: int | None = None,
    feature_stds=None,
) -> AltruistResult:
    """Count importances whose sign disagrees with the prediction's response
    to perturbing the underlying unit.

    Units and perturbations per grouping: per-feature tweaks each non-zero
    importance by +-1 feature std; per-token evaluates the instance's
    non-zero features under removal only; per-sensor evaluates each sensor's
    mean importance under +-1 std applied to all its timesteps. Zero
    importances and zero-std units are excluded (the latter reported).
    Returns the mean untruthful count per instance and the mean percentage
    of evaluated units.
    """
    if grouping not in ("per-feature", "per-token", "per-sensor"):
        raise DomainError(f"unknown grouping {grouping!r}")
    X = np.asarray(instances, dtype=np.float64)
    if grouping == "per-sensor":
        if window is None or sensors is None:
            raise DomainError("per-sensor grouping needs window and sensors")
        if window * sensors != X.shape[1]:
            raise DimensionError("window * sensors must equal the feature count")
        if feature_stds is not None:
            sensor_stds = np.asarray(feature_stds, dtype=np.float64)
        else:
            sensor_stds = X.reshape(X.shape[0], window, sensors).std(axis=(0, 1))
    elif grouping == "per-feature":
        stds = (
            np.asarray(feature_stds, dtype=np.float64)
            if feature_stds is not None
            else X.std(axis=0)
        )

    counts, pcts = [], []
    excluded = 0
    for x in X:
        imp = np.asarray(explain_fn(x).importances, dtype=np.float64)
        p0 = predict_fn(x)
        untruthful = 0
        evaluated = 0

        if grouping == "per-sensor":
            z_sensor = imp.reshape(window, sensors).mean(axis=0)
            for s in range(sensors):
                z = z_sensor[s]
                if abs(z) <= ZERO_IMPORTANCE:
                    continue
                if sensor_stds[s] == 0.0:
                    excluded += 1
                    continue
                shift = np.zeros_like(x).reshape(window, sensors)
                shift[:, s] = sensor_stds[s]
                shift = shift.ravel()
                evaluated += 1
                if not _truthful(z, p0, predict_fn(x + shift), predict_fn(x - shift)):
                    untruthful += 1
        elif grouping == "per-token":
            for j in np.flatnonzero(x):
                z = imp[j]
                if abs(z) <= ZERO_IMPORTANCE:
                    continue
                removed = x.copy()
                removed[j] = 0.0
                p_rem = predict_fn(removed)
                evaluated += 1
                # removal is the decrease direction; no increase perturbation
                truthful = p_rem <= p0 + _TOL if z > 0 else p_rem >= p0 - _TOL
                if not truthful:
                    untruthful += 1
        else:
            for j in np.flatnonzero(np.abs(imp) > ZERO_IMPORTANCE):
                z = imp[j]
                if stds[j] == 0.0:
                    excluded += 1
                    continue
                up, down = x.copy(), x.copy()
                up[j] += stds[j]
                down[j] -= stds[j]
                evaluated += 1
                if not _truthful(z, p0, predict_fn(up), predict_fn(down)):
                    untruthful += 1

        counts.append(untruthful)
        pcts.append(100.0 * untruthful / evaluated if evaluated else 0.0)
    return AltruistResult(
        mean_count=float(np.mean(counts)) if counts else 0.0,
        mean_pct=float(np.mean(pcts)) if pcts else 0.0,
        excluded_units=excluded,
    )


@dataclass(frozen=True)
class MetricReport:
    explainer: str
    split: str
    instances: int
    fidelity_mae: float | None  # mean |g - f| on the explainer's neighbourhood
    fidelity_r2: float | None
    avg_nonzero: float
    relaxed_robustness: float
    faithfulness: float
    altruist_count: float
    altruist_pct: float
    failures: int = 0

    def __post_init__(self):
        if not 0.0 <= self.altruist_pct <= 100.0:
            raise DomainError(f"altruist_pct out of [0, 100]: {self.altruist_pct}")


def evaluate_explainer(
    name,
    explain_full,
    predict_fn,
    instances,
    mode: str,
    grouping: str,
    split: str = "train",
    window: int | None = None,
    sensors: int | None = None,
    feature_stds=None,
) -> MetricReport:
    """Run every metric for one explainer over an instance set.

    explain_full(x) returns (Explanation, f_preds, g_preds); the prediction
    vectors are None for explainers without a surrogate, which then report
    no fidelity.
    """
    X = np.asarray(instances, dtype=np.float64)
    explanations = []
    maes, r2s = [], []
    failures = 0
    kept_rows = []
    for x in X:
        try:
            expl, f_preds, g_preds = explain_full(x)
        except Exception:
            failures += 1
            continue
        kept_rows.append(x)
        explanations.append(expl)
        if f_preds is not None:
            res = fidelity(f_preds, g_preds)
            maes.append(float(np.mean(np.abs(np.asarray(g_preds) - np.asarray(f_preds)))))
            if res.r2_defined:
                r2s.append(res.r2)
    if not explanations:
        raise DomainError(f"explainer {name} failed on every instance")
    kept = np.asarray(kept_rows)

    def explain_fn(x):
        return explain_full(x)[0]

    robust = relaxed_robustness(explain_fn, kept, mode=mode, feature_stds=feature_stds)
    faith = faithfulness(predict_fn, explain_fn, kept)
    alt = altruist_untruthfulness(
        predict_fn,
        explain_fn,
        kept,
        grouping=grouping,
        window=window,
        sensors=sensors,
        feature_stds=feature_stds if grouping == "per-sensor" else None,
    )
    return MetricReport(
        explainer=name,
        split=split,
        instances=len(explanations),
        fidelity_mae=float(np.mean(maes)) if maes else None,
        fidelity_r2=float(np.mean(r2s)) if r2s else None,
        avg_nonzero=avg_nonzero(explanations),
        relaxed_robustness=robust.score,
        faithfulness=faith,
        altruist_count=alt.mean_count,
        altruist_pct=alt.mean_pct,
        failures=failures,
    )


_CSV_COLUMNS = (
    "explainer",
    "split",
    "instances",
    "altruist_pct",
    "altruist_count",
    "relaxed_robustness",
    "avg_nonzero",
    "fidelity_mae",
    "fidelity_r2",
    "faithfulness",
    "failures",
)


def write_report_csv(path, reports):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for r in reports:
            writer.writerow(
                [
                    r.explainer,
                    r.split,
                    str(r.instances),
                    repr(r.altruist_pct),
                    repr(r.altruist_count),
                    repr(r.relaxed_robustness),
                    repr(r.avg_nonzero),
                    "" if r.fidelity_mae is None else repr(r.fidelity_mae),
                    "" if r.fidelity_r2 is None else repr(r.fidelity_r2),
                    repr(r.faithfulness),
                    str(r.failures),
                ]
            )


def write_report_markdown(path, reports):
    def fmt(v, pct=False):
        if v is None:
            return "-"
        return f"{v:.2f}%" if pct else f"{v:.3e}"

    lines = [
        "| Explainer | Split | Altruist | Robustness | NonZero | Fidelity (mae) | Fidelity (r2) | Faithfulness |",
        "|---|---|---|---|---|---|---|---|",
    ]
    for r in reports:
        lines.append(
            "| {} | {} | {} | {} | {:.2f} | {} | {} | {} |".format(
                r.explainer,
                r.split,
                fmt(r.altruist_pct, pct=True),
                fmt(r.relaxed_robustness),
                r.avg_nonzero,
                fmt(r.fidelity_mae),
                fmt(r.fidelity_r2),
                fmt(r.faithfulness),
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
