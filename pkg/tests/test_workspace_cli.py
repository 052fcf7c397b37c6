import json

import pytest

from lionex import cli
from lionex import workspace as ws_mod


@pytest.fixture(autouse=True)
def _no_env_workspace(monkeypatch):
    monkeypatch.delenv("LIONEX_WORKSPACE", raising=False)


def _run(*argv):
    return cli.main(list(argv))


@pytest.fixture(scope="module")
def cli_ws(tmp_path_factory):
    """Workspace built end-to-end through the CLI with small budgets."""
    root = tmp_path_factory.mktemp("cli") / "toy"
    assert _run("generate-data", "--kind", "toy", "--seed", "7", "-w", str(root)) == 0
    assert _run("train-predictor", "-w", str(root), "--seed", "7") == 0
    assert _run("train-decoder", "-w", str(root), "--seed", "7") == 0
    assert _run("compute-stats", "-w", str(root)) == 0
    return root


class TestPipelineCommands:
    def test_generate_writes_manifest_and_data(self, tmp_path):
        root = tmp_path / "ws"
        assert _run("generate-data", "--kind", "toy", "--seed", "3", "-w", str(root)) == 0
        manifest = json.loads((root / "manifest.json").read_text())
        assert manifest["kind"] == "toy"
        assert manifest["seed"] == 3
        assert (root / "train.csv").exists()
        assert (root / "test.csv").exists()

    def test_decoder_before_predictor_fails(self, tmp_path, capsys):
        root = tmp_path / "ws"
        _run("generate-data", "--kind", "toy", "--seed", "1", "-w", str(root))
        code = _run("train-decoder", "-w", str(root))
        captured = capsys.readouterr()
        assert code == 2
        assert "predictor model not found" in captured.err
        assert "predictor.json" in captured.err

    def test_training_prints_per_epoch_losses(self, tmp_path, capsys):
        root = tmp_path / "ws"
        _run("generate-data", "--kind", "toy", "--seed", "2", "-w", str(root))
        assert _run("train-predictor", "-w", str(root), "--epochs", "5") == 0
        out = capsys.readouterr().out
        assert out.count("loss") >= 5
        assert "epoch 1/5" in out

    def test_stats_match_latent_width(self, cli_ws):
        ws = ws_mod.Workspace(cli_ws)
        stats = json.loads(ws.stats_path.read_text())
        assert len(stats["mins"]) == ws.predictor().latent_dim

    def test_missing_workspace_is_validation_error(self, capsys):
        code = _run("compute-stats", "-w", "/nonexistent/path")
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_env_var_overrides_flag(self, cli_ws, tmp_path, monkeypatch):
        monkeypatch.setenv("LIONEX_WORKSPACE", str(cli_ws))
        # flag points somewhere invalid; the env var wins
        assert _run("compute-stats", "-w", str(tmp_path / "nowhere")) == 0


class TestExplainCommand:
    def test_byte_identical_given_seed(self, cli_ws, tmp_path):
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        for out in (out1, out2):
            code = _run(
                "explain", "-w", str(cli_ws), "--instance", "test-0",
                "--explainer", "lionets", "--seed", "7",
                "--neighbourhood-size", "200", "--out", str(out),
            )
            assert code == 0
        name = "explanation_test-0_lionets.json"
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        csv_name = "explanation_test-0_lionets_importances.csv"
        assert (out1 / csv_name).read_bytes() == (out2 / csv_name).read_bytes()

    def test_gxi_has_no_fidelity(self, cli_ws, tmp_path):
        out = tmp_path / "gxi"
        assert _run(
            "explain", "-w", str(cli_ws), "--instance", "test-1",
            "--explainer", "gxi", "--out", str(out),
        ) == 0
        doc = json.loads((out / "explanation_test-1_gxi.json").read_text())
        assert doc["fidelity_mae"] is None
        assert doc["alpha"] is None

    def test_unknown_instance_rejected(self, cli_ws, capsys):
        assert _run("explain", "-w", str(cli_ws), "--instance", "test-9999") == 2
        assert "unknown instance" in capsys.readouterr().err

    def test_timeseries_explain_writes_sensor_csv(self, ts_ws, tmp_path):
        out = tmp_path / "ts_out"
        code = _run(
            "explain", "-w", str(ts_ws.root), "--instance", "test-0",
            "--explainer", "lionets", "--seed", "3",
            "--neighbourhood-size", "300", "--out", str(out),
        )
        assert code == 0
        csv_path = out / "explanation_test-0_lionets_sensors.csv"
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "sensor,mean,std,min,max"
        assert len(lines) == 1 + ts_ws.manifest["sensors"]


class TestEvaluateCommand:
    def test_reports_deterministic_and_ranked(self, text_ws, tmp_path):
        args = [
            "evaluate", "-w", str(text_ws.root),
            "--explainers", "lionets,lime,gxi", "--split", "test",
            "--limit", "4", "--seed", "5",
            "--neighbourhood-size", "300", "--lime-samples", "500",
        ]
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert _run(*args, "--out", str(out1)) == 0
        assert _run(*args, "--out", str(out2)) == 0
        assert (out1 / "report_test.csv").read_bytes() == (out2 / "report_test.csv").read_bytes()
        rows = (out1 / "report_test.csv").read_text().strip().splitlines()
        assert len(rows) == 4  # header + three explainers
        header = rows[0].split(",")
        by_name = {r.split(",")[0]: dict(zip(header, r.split(","))) for r in rows[1:]}
        # mask surrogate cannot out-approximate the latent surrogate here
        assert float(by_name["lionets"]["fidelity_mae"]) < float(by_name["lime"]["fidelity_mae"])
        assert by_name["gxi"]["fidelity_mae"] == ""
        assert (out1 / "report_test.md").exists()

    def test_single_explainer_single_row(self, cli_ws, tmp_path):
        out = tmp_path / "single"
        assert _run(
            "evaluate", "-w", str(cli_ws), "--explainers", "gxi",
            "--limit", "3", "--out", str(out),
        ) == 0
        rows = (out / "report_test.csv").read_text().strip().splitlines()
        assert len(rows) == 2


class TestStudyCommand:
    def test_histogram_csv_written(self, cli_ws, tmp_path):
        out = tmp_path / "study"
        assert _run(
            "study", "-w", str(cli_ws), "--instance", "train-0",
            "--seed", "2", "--neighbourhood-size", "200", "--out", str(out),
        ) == 0
        path = out / "distance_histograms_train-0.csv"
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "series,bin_low,bin_high,count"
        series = {line.split(",")[0] for line in lines[1:]}
        assert len(series) == 4
