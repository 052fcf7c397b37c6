import json
import threading
import urllib.error
import urllib.request

import pytest

from lionex.service import make_server


@pytest.fixture(scope="module")
def server_url(text_ws):
    server = make_server(text_ws, port=0)
    port = server.server_address[1]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{port}"
    server.shutdown()
    server.server_close()


def _get(url):
    with urllib.request.urlopen(url) as resp:
        return resp.status, json.loads(resp.read().decode())


def _post(url, payload):
    req = urllib.request.Request(
        url, data=json.dumps(payload).encode(), headers={"Content-Type": "application/json"}
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as e:
        return e.code, e.read()


def _post_json(url, payload):
    status, body = _post(url, payload)
    return status, json.loads(body.decode())


class TestReadEndpoints:
    def test_instances_listing(self, server_url):
        status, doc = _get(f"{server_url}/api/instances?split=test&limit=5")
        assert status == 200
        assert doc["count"] == 5
        entry = doc["instances"][0]
        assert {"id", "split", "prediction", "label", "preview"} <= set(entry)

    def test_instance_detail_has_tokens(self, server_url):
        status, doc = _get(f"{server_url}/api/instances/test-0")
        assert status == 200
        assert doc["kind"] == "text"
        assert isinstance(doc["tokens"], list) and doc["tokens"]

    def test_model_info(self, server_url, text_ws):
        status, doc = _get(f"{server_url}/api/model-info")
        assert status == 200
        assert doc["kind"] == "text"
        assert doc["latent_dim"] == text_ws.predictor().latent_dim
        assert "lionets" in doc["explainers"]

    def test_unknown_api_path_404(self, server_url):
        status, body = _post(f"{server_url}/api/nope", {})
        assert status == 404
        assert "error" in json.loads(body.decode())


class TestPredictAndWhatIf:
    def test_empty_edits_match_predict(self, server_url):
        _, pred = _post_json(f"{server_url}/api/predict", {"instance_id": "test-1"})
        _, whatif = _post_json(
            f"{server_url}/api/whatif", {"instance_id": "test-1", "edits": []}
        )
        assert whatif["prediction"] == pred["prediction"]
        assert whatif["original_prediction"] == pred["prediction"]

    def test_remove_then_readd_restores(self, server_url):
        _, detail = _get(f"{server_url}/api/instances/test-2")
        token = detail["tokens"][0]
        _, base = _post_json(f"{server_url}/api/predict", {"instance_id": "test-2"})
        _, removed = _post_json(
            f"{server_url}/api/whatif",
            {"instance_id": "test-2", "edits": [{"op": "remove_token", "token": token}]},
        )
        _, restored = _post_json(
            f"{server_url}/api/whatif",
            {
                "instance_id": "test-2",
                "edits": [
                    {"op": "remove_token", "token": token},
                    {"op": "add_token", "token": token},
                ],
            },
        )
        assert removed["prediction"] != base["prediction"]
        assert restored["prediction"] == pytest.approx(base["prediction"], abs=1e-12)

    def test_whatif_requires_instance(self, server_url):
        status, doc = _post_json(f"{server_url}/api/whatif", {"edits": []})
        assert status == 400
        assert "error" in doc

    def test_bad_json_body_400(self, server_url):
        req = urllib.request.Request(
            f"{server_url}/api/predict", data=b"{notjson", headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(req) as resp:
                status = resp.status
                body = resp.read()
        except urllib.error.HTTPError as e:
            status, body = e.code, e.read()
        assert status == 400
        assert "error" in json.loads(body.decode())


class TestNoSideEffects:
    def test_requests_never_mutate_workspace_files(self, server_url, text_ws):
        files = sorted(p for p in text_ws.root.rglob("*") if p.is_file())
        before = {p: p.read_bytes() for p in files}
        _get(f"{server_url}/api/instances")
        _post_json(f"{server_url}/api/explain",
                   {"instance_id": "test-0", "seed": 3, "neighbourhood_size": 150})
        _post_json(f"{server_url}/api/whatif",
                   {"instance_id": "test-0",
                    "edits": [{"op": "add_token", "token": "win"}]})
        after = sorted(p for p in text_ws.root.rglob("*") if p.is_file())
        assert after == files
        for p in files:
            assert p.read_bytes() == before[p], f"{p} changed"


class TestExplainEndpoint:
    def test_same_seed_identical_bodies(self, server_url):
        payload = {
            "instance_id": "test-3",
            "explainer": "lionets",
            "seed": 11,
            "neighbourhood_size": 200,
        }
        _, body1 = _post(f"{server_url}/api/explain", payload)
        _, body2 = _post(f"{server_url}/api/explain", payload)
        assert body1 == body2

    def test_schema_matches_cli_document(self, server_url):
        _, doc = _post_json(
            f"{server_url}/api/explain",
            {"instance_id": "test-0", "explainer": "lionets", "seed": 2,
             "neighbourhood_size": 200, "top_k": 5},
        )
        for key in ("instance_id", "model_prediction", "local_prediction",
                    "fidelity_mae", "alpha", "seed", "importances", "counterfactuals"):
            assert key in doc
        assert len(doc["counterfactuals"]) <= 5
        assert all(set(e) == {"feature", "value", "importance"} for e in doc["importances"])

    def test_gxi_explain_no_fidelity(self, server_url):
        _, doc = _post_json(
            f"{server_url}/api/explain", {"instance_id": "test-0", "explainer": "gxi"}
        )
        assert doc["fidelity_mae"] is None

    def test_unknown_instance_400(self, server_url):
        status, doc = _post_json(
            f"{server_url}/api/explain", {"instance_id": "test-12345"}
        )
        assert status == 400
        assert "error" in doc
