import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from lionex import workspace as ws_mod  # noqa: E402


def _build(kind, root, seed):
    ws = ws_mod.generate(kind, root, seed=seed)
    ws_mod.train_predictor(ws, seed=seed)
    ws_mod.train_decoder(ws, seed=seed)
    ws_mod.compute_stats(ws)
    return ws


@pytest.fixture(scope="session")
def toy_ws(tmp_path_factory):
    """Fully trained dense toy workspace (100 instances, 6 features)."""
    return _build("toy", tmp_path_factory.mktemp("ws") / "toy", seed=7)


@pytest.fixture(scope="session")
def text_ws(tmp_path_factory):
    """Fully trained synthetic-corpus text workspace (200 sentences)."""
    return _build("text", tmp_path_factory.mktemp("ws") / "text", seed=11)


@pytest.fixture(scope="session")
def ts_ws(tmp_path_factory):
    """Fully trained degradation time-series workspace (20x5 windows)."""
    return _build("timeseries", tmp_path_factory.mktemp("ws") / "ts", seed=13)
