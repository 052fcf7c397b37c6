"""Benchmark the jitted kernels against their pure-numpy fallbacks.

Micro-benchmarks run both lanes in-process (the numba lane must be
importable). `--end-to-end` additionally times a full explanation pipeline
in two subprocesses, one per lane, since the active lane is fixed at import
time via LIONEX_NO_NUMBA.

Usage: python benchmarks/bench_kernels.py [--repeats 200] [--end-to-end]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from lionex import kernels  # noqa: E402


def _time(fn, *args, repeats):
    fn(*args)  # warmup (and numba compile)
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def micro_benchmarks(repeats):
    if not kernels.USE_NUMBA:
        print("numba lane unavailable (LIONEX_NO_NUMBA set or numba missing); nothing to compare")
        return
    rng = np.random.default_rng(0)
    n, dims = 2000, 64
    Z = np.ascontiguousarray(rng.normal(size=(n, dims)))
    A = np.ascontiguousarray(rng.uniform(0.01, 0.99, size=(n, dims)))
    v = rng.normal(size=dims)
    p = rng.normal(size=n)
    g = rng.normal(size=n)
    m = np.zeros(n)
    w = np.zeros(n)
    base = rng.uniform(0.2, 0.8, size=dims)
    lo, hi = np.zeros(dims), np.ones(dims)
    mean, std = rng.uniform(0, 0.1, dims), rng.uniform(0.05, 0.2, dims)
    noise3 = rng.standard_normal((dims, 3))
    masks = rng.random((n, dims)) < 0.5
    noise = rng.standard_normal((n, dims))
    d = np.abs(rng.normal(size=n))

    cases = [
        ("apply_activation(sigmoid)", (Z, kernels.SIGMOID)),
        ("apply_activation(tanh)", (Z, kernels.TANH)),
        ("activation_grad(sigmoid)", (A, kernels.SIGMOID)),
        ("adam_step", (p, g, m, w, 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001)),
        ("rows_euclidean", (Z, v)),
        ("rows_cosine_distance", (Z, v)),
        ("kernel_weights", (d, float(np.log(100)))),
        ("first_order_rows", (base, lo, hi, mean, std, noise3)),
        ("masked_weak_rows", (base, lo, hi, mean, std, masks, noise)),
    ]
    name_of = {
        "apply_activation(sigmoid)": "apply_activation",
        "apply_activation(tanh)": "apply_activation",
        "activation_grad(sigmoid)": "activation_grad",
    }
    print(f"{'kernel':34} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for label, args in cases:
        key = name_of.get(label, label)
        t_np = _time(kernels.NUMPY_IMPLS[key], *args, repeats=repeats)
        t_nb = _time(kernels.NUMBA_IMPLS[key], *args, repeats=repeats)
        print(f"{label:34} {t_np * 1e6:10.1f}us {t_nb * 1e6:10.1f}us {t_np / t_nb:8.2f}x")


_END_TO_END = r"""
import time
import numpy as np
from lionex import data, lionets, neural
from lionex.numerics import compute_feature_stats

X, y = data.synth_classification(100, 6, seed=7)
predictor = neural.build_mlp(6, [(8, "tanh"), (4, "tanh"), (1, "sigmoid")],
                             "binary_classification", seed=7)
neural.train(predictor, X, y, neural.TrainConfig(
    loss="binary_cross_entropy", epochs=60, batch_size=16, seed=7, lr=0.01))
decoder = neural.decoder_for(predictor, unit_range=True, seed=8)
latent = neural.encode_batch(predictor, X)
neural.train(decoder, latent, X, neural.TrainConfig(
    loss="mse", epochs=400, batch_size=16, seed=7, lr=0.01))
stats = compute_feature_stats(latent)
cfg = lionets.NeighbourhoodConfig(seed=1)
lionets.explain(predictor, decoder, stats, X[0], cfg)  # warmup
start = time.perf_counter()
for i in range(30):
    lionets.explain(predictor, decoder, stats, X[i % 100], cfg)
print((time.perf_counter() - start) / 30)
"""


def end_to_end():
    print("\nend-to-end explain (2000 neighbours, toy pipeline, mean of 30):")
    for lane, env_extra in (("numba", {}), ("numpy", {"LIONEX_NO_NUMBA": "1"})):
        env = dict(os.environ)
        env.update(env_extra)
        out = subprocess.run(
            [sys.executable, "-c", _END_TO_END], capture_output=True, text=True, env=env
        )
        if out.returncode != 0:
            print(f"  {lane}: failed\n{out.stderr}")
            continue
        seconds = float(out.stdout.strip().splitlines()[-1])
        print(f"  {lane:6} {seconds * 1e3:8.2f} ms/explanation")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=200)
    parser.add_argument("--end-to-end", action="store_true")
    args = parser.parse_args()
    micro_benchmarks(args.repeats)
    if args.end_to_end:
        end_to_end()


if __name__ == "__main__":
    main()
