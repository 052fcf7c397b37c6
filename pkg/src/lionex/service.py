"""Small JSON-over-HTTP service exposing prediction, explanation and
what-if endpoints over a workspace, plus static serving of the explorer UI.

All shared state (models, vocabulary, stats) is loaded once at startup and
treated as immutable; per-request randomness is seeded from the request, so
endpoints are side-effect-free and reproducible.
"""

import json
import mimetypes
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from . import lionets, neural, workspace as ws_mod
from .errors import LionexError, WorkspaceError


class ServiceState:
    def __init__(self, ws: ws_mod.Workspace, ui_dir=None):
        self.ws = ws
        self.ui_dir = Path(ui_dir) if ui_dir else None
        # eager-load all artifacts so requests never touch disk
        ws.predictor()
        if ws.decoder_path.exists():
            ws.decoder()
        if ws.stats_path.exists():
            ws.stats()
        if ws.kind == "text":
            ws.vocab()
        for split in ("train", "test"):
            ws.instances(split)

    # -- payload helpers ----------------------------------------------------

    def vector_from_payload(self, payload):
        ws = self.ws
        if "instance_id" in payload:
            inst, i = ws.get_instance(payload["instance_id"])
            return inst.X[i]
        if "vector" in payload:
            return np.asarray(payload["vector"], dtype=np.float64)
        if "text" in payload and ws.kind == "text":
            from .data import prepare_text, tfidf_transform

            return tfidf_transform(ws.vocab(), prepare_text(payload["text"]))
        if "window" in payload and ws.kind in ("timeseries", "toy"):
            return np.asarray(payload["window"], dtype=np.float64).ravel()
        raise WorkspaceError("payload needs one of instance_id, vector, text or window")

    def instance_summary(self, inst, i, prediction):
        entry = {
            "id": inst.ids[i],
            "split": inst.split,
            "prediction": prediction,
            "label": float(inst.labels[i]),
        }
        if self.ws.kind == "text":
            entry["preview"] = inst.raw[i][:80]
        else:
            entry["preview"] = f"{self.ws.kind} instance {i}"
        return entry

    def instance_detail(self, instance_id):
        ws = self.ws
        inst, i = ws.get_instance(instance_id)
        x = inst.X[i]
        pred = ws.predict_fn()(x)
        doc = self.instance_summary(inst, i, pred)
        doc["kind"] = ws.kind
        if ws.kind == "text":
            from .data import prepare_text

            doc["text"] = inst.raw[i]
            doc["tokens"] = prepare_text(inst.raw[i]).split()
        elif ws.kind == "timeseries":
            window, sensors = ws.manifest["window"], ws.manifest["sensors"]
            doc["window"] = x.reshape(window, sensors).tolist()
            doc["window_size"] = window
            doc["sensors"] = sensors
        else:
            doc["values"] = x.tolist()
            doc["window"] = x.reshape(1, -1).tolist()
            doc["window_size"] = 1
            doc["sensors"] = int(x.shape[0])
        return doc

    def model_info(self):
        ws = self.ws
        predictor = ws.predictor()
        info = {
            "kind": ws.kind,
            "task": predictor.task,
            "input_dim": predictor.input_dim,
            "latent_dim": predictor.latent_dim,
            "widths": predictor.widths(),
            "explainers": list(ws_mod.EXPLAINERS),
            "seed": ws.manifest.get("seed", 0),
        }
        if ws.kind == "text":
            info["vocab_size"] = len(ws.vocab())
        if ws.kind == "timeseries":
            info["window"] = ws.manifest["window"]
            info["sensors"] = ws.manifest["sensors"]
        return info

    # -- endpoint handlers ----------------------------------------------------

    def handle_instances(self, query):
        ws = self.ws
        splits = [query["split"]] if query.get("split") in ("train", "test") else ["train", "test"]
        limit = int(query.get("limit", 0)) or None
        predict = ws.predict_fn()
        out = []
        for split in splits:
            inst = ws.instances(split)
            n = len(inst.ids) if limit is None else min(limit, len(inst.ids))
            preds = neural.predict_batch(ws.predictor(), inst.X[:n])
            out.extend(
                self.instance_summary(inst, i, float(preds[i])) for i in range(n)
            )
        return {"instances": out, "count": len(out)}

    def handle_predict(self, payload):
        x = self.vector_from_payload(payload)
        return {"prediction": self.ws.predict_fn()(x)}

    def handle_explain(self, payload):
        ws = self.ws
        explainer = payload.get("explainer", "lionets")
        seed = int(payload.get("seed", 0))
        n_neighbours = payload.get("neighbourhood_size")
        top_k = int(payload.get("top_k", 10))
        if "instance_id" in payload:
            doc, _, _ = ws_mod.explain_instance(
                ws,
                payload["instance_id"],
                explainer,
                seed=seed,
                n_neighbours=int(n_neighbours) if n_neighbours else None,
                top_k=top_k,
            )
            return doc
        x = self.vector_from_payload(payload)
        full = ws_mod.make_explain_full(
            ws, explainer, seed=seed, n_neighbours=int(n_neighbours) if n_neighbours else None
        )
        expl, _, _ = full(x)
        counter = None
        if ws.kind == "text" and explainer == "lionets":
            counter = lionets.counterfactual_features(expl, x, top_k=top_k)
        doc = lionets.explanation_to_dict(
            expl, x, ws.feature_names(), "ad-hoc", counterfactuals=counter
        )
        doc["explainer"] = explainer
        return doc

    def handle_whatif(self, payload):
        ws = self.ws
        instance_id = payload.get("instance_id")
        if instance_id is None:
            raise WorkspaceError("whatif requires instance_id")
        edits = payload.get("edits", [])
        inst, i = ws.get_instance(instance_id)
        original = ws.predict_fn()(inst.X[i])
        result = ws_mod.what_if(ws, instance_id, edits)
        doc = {
            "instance_id": instance_id,
            "original_prediction": original,
            "prediction": result.prediction,
            "warnings": list(result.warnings),
        }
        if result.text is not None:
            doc["edited_text"] = result.text
            doc["edited_tokens"] = result.text.split()
        if result.window is not None:
            doc["edited_window"] = result.window.tolist()
        return doc


def make_handler(state: ServiceState):
    class Handler(BaseHTTPRequestHandler):
        server_version = "lionex-service"

        def log_message(self, fmt, *args):  # keep test output quiet
            pass

        def _send_json(self, doc, status=200):
            body = json.dumps(doc).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _send_error_json(self, message, status):
            self._send_json({"error": message}, status=status)

        def _route(self, method):
            path, _, query_string = self.path.partition("?")
            query = {}
            for part in query_string.split("&"):
                if "=" in part:
                    k, _, v = part.partition("=")
                    query[k] = v
            try:
                if method == "GET":
                    if path == "/api/instances":
                        return self._send_json(state.handle_instances(query))
                    if path.startswith("/api/instances/"):
                        return self._send_json(
                            state.instance_detail(path[len("/api/instances/") :])
                        )
                    if path == "/api/model-info":
                        return self._send_json(state.model_info())
                    if path.startswith("/api/"):
                        return self._send_error_json("not found", 404)
                    return self._serve_static(path)
                # POST
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length) if length else b"{}"
                try:
                    payload = json.loads(raw.decode("utf-8")) if raw else {}
                except json.JSONDecodeError as e:
                    return self._send_error_json(f"invalid JSON body: {e.msg}", 400)
                if path == "/api/predict":
                    return self._send_json(state.handle_predict(payload))
                if path == "/api/explain":
                    return self._send_json(state.handle_explain(payload))
                if path == "/api/whatif":
                    return self._send_json(state.handle_whatif(payload))
                return self._send_error_json("not found", 404)
            except LionexError as e:
                return self._send_error_json(str(e), 400)
            except Exception as e:  # pragma: no cover - defensive
                return self._send_error_json(f"internal error: {e}", 500)

        def do_GET(self):
            self._route("GET")

        def do_POST(self):
            self._route("POST")

        def _serve_static(self, path):
            if state.ui_dir is None:
                return self._send_json(
                    {"service": "lionex", "ui": "not bundled", "api": "/api/*"}
                )
            rel = path.lstrip("/") or "index.html"
            target = (state.ui_dir / rel).resolve()
            if not str(target).startswith(str(state.ui_dir.resolve())) or not target.is_file():
                target = state.ui_dir / "index.html"  # SPA fallback
                if not target.is_file():
                    return self._send_error_json("not found", 404)
            ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
            body = target.read_bytes()
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


def make_server(ws: ws_mod.Workspace, port: int = 8080, ui_dir=None) -> ThreadingHTTPServer:
    """Bind the service; raises OSError when the port is busy."""
    state = ServiceState(ws, ui_dir=ui_dir)
    return ThreadingHTTPServer(("127.0.0.1", port), make_handler(state))
