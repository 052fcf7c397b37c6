"""Command-line entry points for the full pipeline.

Exit codes: 0 success, 2 validation failure (missing artifacts, bad
arguments), 3 port busy on serve.
"""

import argparse
import errno
import sys
from pathlib import Path

import numpy as np

from . import lionets, workspace as ws_mod
from .errors import LionexError
from .metrics import write_report_csv, write_report_markdown


def _add_workspace_arg(p):
    p.add_argument(
        "--workspace",
        "-w",
        default=None,
        help="workspace directory (env LIONEX_WORKSPACE overrides)",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lionex",
        description="latent-space neighbourhood explanations: data, training, "
        "explanation, evaluation and serving",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-data", help="write a synthetic dataset and manifest")
    _add_workspace_arg(p)
    p.add_argument("--kind", choices=ws_mod.KINDS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sentences", type=int)
    p.add_argument("--max-features", type=int, dest="max_features")
    p.add_argument("--n", type=int)
    p.add_argument("--features", type=int)
    p.add_argument("--units", type=int)
    p.add_argument("--sensors", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--rul-threshold", type=float, dest="rul_threshold")
    p.add_argument("--ts-task", choices=("binary_classification", "regression"), dest="ts_task")

    for name in ("train-predictor", "train-decoder"):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} and save it")
        _add_workspace_arg(p)
        p.add_argument("--epochs", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--lr", type=float)

    p = sub.add_parser("compute-stats", help="per-latent-dimension stats of the encoded training set")
    _add_workspace_arg(p)

    p = sub.add_parser("explain", help="explain one stored instance")
    _add_workspace_arg(p)
    p.add_argument("--instance", required=True, help="instance id such as test-0")
    p.add_argument("--explainer", choices=ws_mod.EXPLAINERS, default="lionets")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--neighbourhood-size", type=int, dest="n_neighbours")
    p.add_argument("--top-k", type=int, default=10, dest="top_k")
    p.add_argument("--out", default=None, help="output directory (default <workspace>/out)")

    p = sub.add_parser("evaluate", help="metric report over a split")
    _add_workspace_arg(p)
    p.add_argument("--explainers", default="lionets,lime", help="comma-separated names")
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.add_argument("--limit", type=int, default=20, help="instances to evaluate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--neighbourhood-size", type=int, dest="n_neighbours")
    p.add_argument("--lime-samples", type=int, dest="lime_samples")
    p.add_argument("--out", default=None)

    p = sub.add_parser("study", help="neighbour-distance distribution histograms")
    _add_workspace_arg(p)
    p.add_argument("--instance", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--neighbourhood-size", type=int, default=2000, dest="n_neighbours")
    p.add_argument("--out", default=None)

    p = sub.add_parser("serve", help="HTTP service for the explorer UI")
    _add_workspace_arg(p)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--ui-dir", default=None, help="static UI bundle to serve at /")
    return parser


def _workspace(args) -> ws_mod.Workspace:
    root = ws_mod.resolve_root(args.workspace)
    return ws_mod.Workspace(root)


def _print_history(history):
    for epoch, loss in enumerate(history, start=1):
        print(f"epoch {epoch}/{len(history)} loss {loss:.6g}")


def cmd_generate_data(args):
    root = ws_mod.resolve_root(args.workspace)
    overrides = {
        k: getattr(args, k, None)
        for k in (
            "sentences", "max_features", "n", "features",
            "units", "sensors", "window", "rul_threshold", "ts_task",
        )
    }
    ws_mod.generate(args.kind, root, seed=args.seed, **overrides)
    print(f"wrote {args.kind} dataset and manifest to {root}")
    return 0


def cmd_train_predictor(args):
    ws = _workspace(args)
    history = ws_mod.train_predictor(ws, epochs=args.epochs, seed=args.seed, lr=args.lr)
    _print_history(history)
    print(f"saved predictor to {ws.predictor_path}")
    return 0


def cmd_train_decoder(args):
    ws = _workspace(args)
    if not ws.predictor_path.exists():
        print(f"error: predictor model not found: {ws.predictor_path}", file=sys.stderr)
        return 2
    history = ws_mod.train_decoder(ws, epochs=args.epochs, seed=args.seed, lr=args.lr)
    _print_history(history)
    print(f"saved decoder to {ws.decoder_path}")
    return 0


def cmd_compute_stats(args):
    ws = _workspace(args)
    stats = ws_mod.compute_stats(ws)
    print(f"saved stats for {len(stats)} latent dimensions to {ws.stats_path}")
    return 0


def cmd_explain(args):
    ws = _workspace(args)
    doc, expl, _ = ws_mod.explain_instance(
        ws,
        args.instance,
        args.explainer,
        seed=args.seed,
        n_neighbours=args.n_neighbours,
        top_k=args.top_k,
    )
    out = Path(args.out) if args.out else ws.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    stem = f"explanation_{args.instance}_{args.explainer}"
    json_path = out / f"{stem}.json"
    lionets.write_explanation_json(json_path, doc)
    lionets.write_importance_csv(out / f"{stem}_importances.csv", doc)
    if ws.kind == "timeseries":
        agg = lionets.aggregate_sensor_importance(
            expl, ws.manifest["window"], ws.manifest["sensors"]
        )
        lionets.write_sensor_aggregation_csv(out / f"{stem}_sensors.csv", agg)
    print(f"wrote {json_path}")
    print(f"model prediction {doc['model_prediction']:.6g}, local {doc['local_prediction']:.6g}")
    return 0


def cmd_evaluate(args):
    ws = _workspace(args)
    explainers = [e.strip() for e in args.explainers.split(",") if e.strip()]
    reports = ws_mod.evaluate(
        ws,
        explainers,
        split=args.split,
        limit=args.limit,
        seed=args.seed,
        n_neighbours=args.n_neighbours,
        lime_samples=args.lime_samples,
    )
    out = Path(args.out) if args.out else ws.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"report_{args.split}.csv"
    write_report_csv(csv_path, reports)
    write_report_markdown(out / f"report_{args.split}.md", reports)
    print(f"wrote {csv_path}")
    failed = [r for r in reports if r.failures > 0.1 * max(r.instances + r.failures, 1)]
    for r in reports:
        fid = "-" if r.fidelity_mae is None else f"{r.fidelity_mae:.3e}"
        print(
            f"{r.explainer}: altruist {r.altruist_pct:.1f}%, robustness "
            f"{r.relaxed_robustness:.3e}, nonzero {r.avg_nonzero:.2f}, fidelity-mae {fid}"
        )
    if failed:
        names = ", ".join(r.explainer for r in failed)
        print(f"error: explainer(s) failed on more than 10% of instances: {names}", file=sys.stderr)
        return 1
    return 0


def cmd_study(args):
    ws = _workspace(args)
    inst, i = ws.get_instance(args.instance)
    x = inst.X[i]
    cfg = lionets.NeighbourhoodConfig(n_neighbours=args.n_neighbours, seed=args.seed)
    if ws.kind == "text":
        generator = lionets.zeroing_mask_perturber()
    else:
        generator = lionets.gaussian_column_perturber(ws.instances("train").X)
    study = lionets.distance_distributions(
        ws.predictor(), ws.decoder(), ws.stats(), x, generator, cfg
    )
    out = Path(args.out) if args.out else ws.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"distance_histograms_{args.instance}.csv"
    lionets.write_histogram_csv(path, study)
    for name in lionets.SERIES_NAMES:
        s = study.series[name]
        print(f"{name}: mean {np.mean(s):.4g}, std {np.std(s):.4g}")
    print(f"wrote {path}")
    return 0


def cmd_serve(args):
    from .service import make_server

    ws = _workspace(args)
    ui_dir = args.ui_dir
    if ui_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        if candidate.is_dir():
            ui_dir = candidate
    try:
        server = make_server(ws, port=args.port, ui_dir=ui_dir)
    except OSError as e:
        if e.errno == errno.EADDRINUSE:
            print(f"error: port {args.port} is busy", file=sys.stderr)
            return 3
        raise
    print(f"serving workspace {ws.root} on http://127.0.0.1:{args.port}")
    if ui_dir:
        print(f"ui: {ui_dir}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


_COMMANDS = {
    "generate-data": cmd_generate_data,
    "train-predictor": cmd_train_predictor,
    "train-decoder": cmd_train_decoder,
    "compute-stats": cmd_compute_stats,
    "explain": cmd_explain,
    "evaluate": cmd_evaluate,
    "study": cmd_study,
    "serve": cmd_serve,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except LionexError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
