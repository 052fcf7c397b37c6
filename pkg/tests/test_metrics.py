import numpy as np
import pytest

from lionex.errors import DimensionError, DomainError
from lionex.lionets import Explanation
from lionex.metrics import (
    altruist_untruthfulness,
    avg_nonzero,
    evaluate_explainer,
    faithfulness,
    fidelity,
    ks_critical_value,
    ks_statistic,
    relaxed_robustness,
    write_report_csv,
    write_report_markdown,
)


def _expl(importances):
    imp = np.asarray(importances, dtype=np.float64)
    return Explanation(
        importances=imp, intercept=0.0, local_prediction=0.0,
        model_prediction=0.0, local_fidelity_mae=0.0, chosen_alpha=1.0, seed=0,
    )


class TestFidelity:
    def test_perfect_agreement(self):
        res = fidelity([0.1, 0.5, 0.9], [0.1, 0.5, 0.9])
        assert res.fidelity == 1.0
        assert res.r2 == 1.0

    def test_hand_example(self):
        res = fidelity([0.2, 0.8], [0.3, 0.6])
        assert res.fidelity == pytest.approx(1 - (0.1 + 0.2) / 2)

    def test_constant_surrogate_r2_zero(self):
        f = np.array([0.2, 0.4, 0.9])
        res = fidelity(f, np.full(3, f.mean()))
        assert res.r2 == pytest.approx(0.0)

    def test_zero_variance_flagged(self):
        res = fidelity([0.5, 0.5], [0.4, 0.6])
        assert not res.r2_defined
        assert np.isnan(res.r2)

    def test_order_invariant(self):
        f = np.array([0.1, 0.6, 0.3])
        g = np.array([0.2, 0.5, 0.4])
        perm = [2, 0, 1]
        a = fidelity(f, g)
        b = fidelity(f[perm], g[perm])
        assert a.fidelity == pytest.approx(b.fidelity)
        assert a.r2 == pytest.approx(b.r2)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            fidelity([1.0], [1.0, 2.0])


class TestAvgNonzero:
    def test_mean_of_counts(self):
        explanations = [_expl([1, 0, 2, 0, 3]), _expl([1, 2, 3, 4, 5])]
        assert avg_nonzero(explanations) == 4.0

    def test_all_zero(self):
        assert avg_nonzero([_expl(np.zeros(4))]) == 0.0

    def test_tiny_counts_as_zero(self):
        assert avg_nonzero([_expl([1e-13, 1.0])]) == 1.0

    def test_dense_explanations_count_full_width(self):
        assert avg_nonzero([_expl(np.linspace(1, 2, 700))]) == 700.0

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            avg_nonzero([])


class TestRelaxedRobustness:
    def test_constant_explainer_scores_zero(self):
        fixed = _expl([1.0, 2.0])
        res = relaxed_robustness(lambda x: fixed, np.random.default_rng(0).uniform(size=(5, 2)), "dense")
        assert res.score == 0.0
        assert res.skipped == 0

    def test_hand_example(self):
        state = {"first": True}

        def explain_fn(x):
            if state["first"]:
                state["first"] = False
                return _expl([1.0, 2.0])
            return _expl([1.0, 1.0])

        res = relaxed_robustness(explain_fn, np.array([[0.5, 0.5]]), "text")
        assert res.score == pytest.approx(0.5)  # mean(|1-1|, |2-1|)

    def test_identity_explainer_scores_tweak_magnitude(self):
        X = np.random.default_rng(1).uniform(0.5, 1.5, size=(6, 3))
        stds = X.std(axis=0)

        def explain_fn(x):
            return _expl(x)

        res = relaxed_robustness(explain_fn, X, "dense", feature_stds=stds)
        expected = []
        for x in X:
            j = np.argmin(np.abs(x))
            expected.append(stds[j] / 3.0)  # one coordinate moved by std, mean over 3
        assert res.score == pytest.approx(np.mean(expected))

    def test_failures_skipped_and_counted(self):
        calls = {"n": 0}

        def explain_fn(x):
            calls["n"] += 1
            if calls["n"] % 2 == 0:  # fail on every tweaked call
                raise RuntimeError("boom")
            return _expl([1.0, 2.0])

        res = relaxed_robustness(explain_fn, np.ones((3, 2)), "text")
        assert res.skipped == 3
        assert res.evaluated == 0


class TestFaithfulness:
    def test_single_instance_drop(self):
        preds = {(1.0, 1.0): 0.9, (0.0, 1.0): 0.6}

        def predict(x):
            return preds[tuple(x)]

        score = faithfulness(predict, lambda x: _expl([0.8, 0.1]), np.array([[1.0, 1.0]]))
        assert score == pytest.approx(0.3)

    def test_indifferent_predictor_zero(self):
        score = faithfulness(
            lambda x: 0.5, lambda x: _expl([1.0, 2.0]), np.ones((4, 2))
        )
        assert score == 0.0

    def test_can_be_negative(self):
        def predict(x):
            return 0.2 if x[0] == 0.0 else 0.1

        score = faithfulness(predict, lambda x: _expl([1.0, 0.0]), np.array([[1.0, 1.0]]))
        assert score == pytest.approx(-0.1)


class TestAltruist:
    def test_true_weights_fully_truthful(self):
        w = np.array([1.5, -2.0, 0.5])
        X = np.random.default_rng(2).uniform(0.1, 1.0, size=(5, 3))
        res = altruist_untruthfulness(
            lambda x: float(w @ x), lambda x: _expl(w), X, grouping="per-feature"
        )
        assert res.mean_count == 0.0
        assert res.mean_pct == 0.0

    def test_sign_flipped_fully_untruthful(self):
        w = np.array([1.5, -2.0, 0.5])
        X = np.random.default_rng(2).uniform(0.1, 1.0, size=(5, 3))
        res = altruist_untruthfulness(
            lambda x: float(w @ x), lambda x: _expl(-w), X, grouping="per-feature"
        )
        assert res.mean_pct == 100.0

    def test_hand_example_two_of_five(self):
        # 5 units, 2 untruthful each -> mean count 2, mean pct 40
        w = np.array([1.0, 1.0, 1.0, -1.0, -1.0])
        flipped = np.array([-1.0, -1.0, 1.0, -1.0, -1.0])  # first two signs wrong
        X = np.random.default_rng(3).uniform(0.2, 1.0, size=(2, 5))
        res = altruist_untruthfulness(
            lambda x: float(w @ x), lambda x: _expl(flipped), X, grouping="per-feature"
        )
        assert res.mean_count == 2.0
        assert res.mean_pct == pytest.approx(40.0)

    def test_per_token_removal_rule(self):
        w = np.array([2.0, -1.0, 0.5])

        def predict(x):
            return float(w @ x)

        X = np.array([[1.0, 1.0, 0.0]])  # third token absent
        res = altruist_untruthfulness(
            predict, lambda x: _expl(w), X, grouping="per-token"
        )
        assert res.mean_count == 0.0
        flipped = altruist_untruthfulness(
            predict, lambda x: _expl(-w), X, grouping="per-token"
        )
        assert flipped.mean_pct == 100.0

    def test_per_sensor_grouping(self):
        # two sensors over three timesteps; predictor reads sensor sums
        w = np.array([1.0, -1.0] * 3)

        def predict(x):
            return float(w @ x)

        X = np.random.default_rng(4).uniform(0.2, 0.8, size=(3, 6))
        res = altruist_untruthfulness(
            predict, lambda x: _expl(w), X, grouping="per-sensor", window=3, sensors=2
        )
        assert res.mean_pct == 0.0
        res_flip = altruist_untruthfulness(
            predict, lambda x: _expl(-w), X, grouping="per-sensor", window=3, sensors=2
        )
        assert res_flip.mean_pct == 100.0

    def test_zero_std_units_excluded(self):
        w = np.array([1.0, 1.0])
        X = np.ones((3, 2))  # zero variance everywhere
        res = altruist_untruthfulness(
            lambda x: float(w @ x), lambda x: _expl(w), X, grouping="per-feature"
        )
        assert res.excluded_units == 6
        assert res.mean_count == 0.0


class TestKsStatistic:
    def test_matches_scipy(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        rng = np.random.default_rng(5)
        a = rng.normal(size=300)
        b = rng.normal(0.3, 1.2, size=400)
        ours = ks_statistic(a, b)
        ref = scipy_stats.ks_2samp(a, b, method="asymp").statistic
        assert ours == pytest.approx(ref, abs=1e-12)

    def test_identical_samples_zero(self):
        a = np.arange(10.0)
        assert ks_statistic(a, a) == 0.0

    def test_critical_value(self):
        assert ks_critical_value(2000, 2000, 0.05) == pytest.approx(
            1.358 * np.sqrt(4000 / 4e6)
        )


class TestEvaluateAndReports:
    def test_full_report_roundtrip(self, tmp_path):
        w = np.array([1.0, -0.5, 0.8])
        X = np.random.default_rng(6).uniform(0.1, 1.0, size=(4, 3))

        def predict(x):
            return float(w @ x)

        def explain_full(x):
            f = np.array([predict(x), predict(0.9 * x)])
            return _expl(w), f, f + 0.01

        report = evaluate_explainer(
            "oracle", explain_full, predict, X, mode="dense", grouping="per-feature"
        )
        assert report.instances == 4
        assert report.fidelity_mae == pytest.approx(0.01)
        assert report.altruist_pct == 0.0
        csv_path = tmp_path / "report.csv"
        write_report_csv(csv_path, [report])
        lines = csv_path.read_text().strip().splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("explainer,split,")
        md_path = tmp_path / "report.md"
        write_report_markdown(md_path, [report])
        assert "| oracle |" in md_path.read_text()

    def test_no_surrogate_reports_no_fidelity(self):
        w = np.array([1.0, 1.0])
        X = np.random.default_rng(7).uniform(0.1, 1.0, size=(3, 2))

        def explain_full(x):
            return _expl(w), None, None

        report = evaluate_explainer(
            "grad", explain_full, lambda x: float(w @ x), X,
            mode="dense", grouping="per-feature",
        )
        assert report.fidelity_mae is None
        assert report.fidelity_r2 is None
