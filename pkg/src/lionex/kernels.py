"""Elementwise and loop-heavy numeric kernels, in two interchangeable lanes.

Every kernel exists as a pure-numpy implementation and, when numba is
importable, as an ``@njit``-compiled loop version. The active lane is chosen
once at import time: numba by default, numpy when the environment variable
``LIONEX_NO_NUMBA`` is set to a non-empty value (or numba is missing).

Two classes of work stay on vectorized numpy in both lanes, because the
benchmark (benchmarks/bench_kernels.py) shows jit loops losing there:
matrix products (BLAS) and transcendental-dense activation application
(`apply_activation`; numpy's SIMD exp/tanh beat scalar-libm loops 3-15x).
The jitted implementations remain exported for the benchmark comparison.

The clamped-noise kernels (`first_order_rows`, `masked_weak_rows`) take
pre-drawn standard normals so that random-number consumption stays in the
caller's numpy generator and both lanes produce bit-identical output.

Activation codes: 0 linear, 1 relu, 2 tanh, 3 sigmoid, 4 softmax (row-wise).
"""

import math
import os

import numpy as np

LINEAR, RELU, TANH, SIGMOID, SOFTMAX = 0, 1, 2, 3, 4

# sigma scale per noise level, in generation order: normal, weak, strong
LEVEL_SCALES = np.array([1.0, 0.5, 2.0])

_disabled = bool(os.environ.get("LIONEX_NO_NUMBA", ""))
if not _disabled:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - depends on environment
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _disabled
ACTIVE_LANE = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy lane
# ---------------------------------------------------------------------------

def _np_apply_activation(z, code):
    if code == LINEAR:
        return z.copy()
    if code == RELU:
        return np.maximum(z, 0.0)
    if code == TANH:
        return np.tanh(z)
    if code == SIGMOID:
        out = np.empty_like(z)
        np.negative(z, out=out)
        np.exp(out, out=out)
        out += 1.0
        np.divide(1.0, out, out=out)
        return out
    if code == SOFTMAX:
        shifted = z - z.max(axis=-1, keepdims=True)
        np.exp(shifted, out=shifted)
        shifted /= shifted.sum(axis=-1, keepdims=True)
        return shifted
    raise ValueError(f"unknown activation code {code}")


def _np_activation_grad(a, code):
    # derivative wrt pre-activation, expressed through the post-activation a;
    # softmax is excluded (full Jacobian handled by the caller)
    if code == LINEAR:
        return np.ones_like(a)
    if code == RELU:
        return (a > 0.0).astype(np.float64)
    if code == TANH:
        return 1.0 - a * a
    if code == SIGMOID:
        return a * (1.0 - a)
    raise ValueError(f"no elementwise gradient for activation code {code}")


def _np_adam_step(param, grad, m, v, lr, beta1, beta2, eps, bc1, bc2):
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    param -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def _np_rows_euclidean(rows, v):
    d = rows - v
    return np.sqrt(np.einsum("ij,ij->i", d, d))


def _np_rows_cosine_distance(rows, v):
    vn = math.sqrt(float(v @ v))
    rn = np.sqrt(np.einsum("ij,ij->i", rows, rows))
    dots = rows @ v
    out = np.ones(rows.shape[0])
    ok = (rn > 0.0) & (vn > 0.0)
    out[ok] = 1.0 - dots[ok] / (rn[ok] * vn)
    return out


def _np_kernel_weights(distances, log_dims):
    return np.exp(distances * (-0.5 * log_dims)) * log_dims


def _np_first_order_rows(base, lo, hi, mean, std, noise3):
    dims = base.shape[0]
    rows = np.tile(base, (3 * dims, 1))
    idx = np.repeat(np.arange(dims), 3)
    scales = np.tile(LEVEL_SCALES, dims)
    shift = mean[idx] + scales * std[idx] * noise3.ravel()
    rows[np.arange(3 * dims), idx] = np.minimum(
        np.maximum(base[idx] + shift, lo[idx]), hi[idx]
    )
    return rows


def _np_masked_weak_rows(base, lo, hi, mean, std, masks, noise):
    shifted = np.minimum(np.maximum(base + (mean + 0.5 * std * noise), lo), hi)
    return np.where(masks, shifted, base)


# ---------------------------------------------------------------------------
# numba lane
# ---------------------------------------------------------------------------

if USE_NUMBA:

    @njit(cache=True)
    def _nb_apply_activation(z, code):
        n, m = z.shape
        out = np.empty_like(z)
        if code == 4:  # softmax, row-wise
            for i in range(n):
                mx = z[i, 0]
                for j in range(1, m):
                    if z[i, j] > mx:
                        mx = z[i, j]
                s = 0.0
                for j in range(m):
                    e = math.exp(z[i, j] - mx)
                    out[i, j] = e
                    s += e
                for j in range(m):
                    out[i, j] /= s
            return out
        for i in range(n):
            for j in range(m):
                x = z[i, j]
                if code == 0:
                    out[i, j] = x
                elif code == 1:
                    out[i, j] = x if x > 0.0 else 0.0
                elif code == 2:
                    out[i, j] = math.tanh(x)
                else:
                    out[i, j] = 1.0 / (1.0 + math.exp(-x))
        return out

    @njit(cache=True)
    def _nb_activation_grad(a, code):
        n, m = a.shape
        out = np.empty_like(a)
        for i in range(n):
            for j in range(m):
                x = a[i, j]
                if code == 0:
                    out[i, j] = 1.0
                elif code == 1:
                    out[i, j] = 1.0 if x > 0.0 else 0.0
                elif code == 2:
                    out[i, j] = 1.0 - x * x
                else:
                    out[i, j] = x * (1.0 - x)
        return out

    @njit(cache=True)
    def _nb_adam_step(param, grad, m, v, lr, beta1, beta2, eps, bc1, bc2):
        for i in range(param.shape[0]):
            g = grad[i]
            m[i] = beta1 * m[i] + (1.0 - beta1) * g
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g
            param[i] -= lr * (m[i] / bc1) / (math.sqrt(v[i] / bc2) + eps)

    @njit(cache=True)
    def _nb_rows_euclidean(rows, v):
        n, m = rows.shape
        out = np.empty(n)
        for i in range(n):
            s = 0.0
            for j in range(m):
                d = rows[i, j] - v[j]
                s += d * d
            out[i] = math.sqrt(s)
        return out

    @njit(cache=True)
    def _nb_rows_cosine_distance(rows, v):
        n, m = rows.shape
        vn = 0.0
        for j in range(m):
            vn += v[j] * v[j]
        vn = math.sqrt(vn)
        out = np.empty(n)
        for i in range(n):
            dot = 0.0
            rn = 0.0
            for j in range(m):
                dot += rows[i, j] * v[j]
                rn += rows[i, j] * rows[i, j]
            rn = math.sqrt(rn)
            if rn > 0.0 and vn > 0.0:
                out[i] = 1.0 - dot / (rn * vn)
            else:
                out[i] = 1.0
        return out

    @njit(cache=True)
    def _nb_kernel_weights(distances, log_dims):
        out = np.empty_like(distances)
        for i in range(distances.shape[0]):
            out[i] = math.exp(distances[i] * (-0.5 * log_dims)) * log_dims
        return out

    @njit(cache=True)
    def _nb_first_order_rows(base, lo, hi, mean, std, noise3):
        dims = base.shape[0]
        rows = np.empty((3 * dims, dims))
        for i in range(dims):
            for level in range(3):
                r = 3 * i + level
                for j in range(dims):
                    rows[r, j] = base[j]
                scale = LEVEL_SCALES[level]
                val = base[i] + (mean[i] + scale * std[i] * noise3[i, level])
                if val < lo[i]:
                    val = lo[i]
                if val > hi[i]:
                    val = hi[i]
                rows[r, i] = val
        return rows

    @njit(cache=True)
    def _nb_masked_weak_rows(base, lo, hi, mean, std, masks, noise):
        n, dims = masks.shape
        rows = np.empty((n, dims))
        for r in range(n):
            for j in range(dims):
                if masks[r, j]:
                    val = base[j] + (mean[j] + 0.5 * std[j] * noise[r, j])
                    if val < lo[j]:
                        val = lo[j]
                    if val > hi[j]:
                        val = hi[j]
                    rows[r, j] = val
                else:
                    rows[r, j] = base[j]
        return rows


NUMPY_IMPLS = {
    "apply_activation": _np_apply_activation,
    "activation_grad": _np_activation_grad,
    "adam_step": _np_adam_step,
    "rows_euclidean": _np_rows_euclidean,
    "rows_cosine_distance": _np_rows_cosine_distance,
    "kernel_weights": _np_kernel_weights,
    "first_order_rows": _np_first_order_rows,
    "masked_weak_rows": _np_masked_weak_rows,
}

if USE_NUMBA:
    NUMBA_IMPLS = {
        "apply_activation": _nb_apply_activation,
        "activation_grad": _nb_activation_grad,
        "adam_step": _nb_adam_step,
        "rows_euclidean": _nb_rows_euclidean,
        "rows_cosine_distance": _nb_rows_cosine_distance,
        "kernel_weights": _nb_kernel_weights,
        "first_order_rows": _nb_first_order_rows,
        "masked_weak_rows": _nb_masked_weak_rows,
    }
    _active = NUMBA_IMPLS
else:
    NUMBA_IMPLS = None
    _active = NUMPY_IMPLS

apply_activation = _np_apply_activation  # vectorized libm wins in both lanes
activation_grad = _active["activation_grad"]
adam_step = _active["adam_step"]
rows_euclidean = _active["rows_euclidean"]
rows_cosine_distance = _active["rows_cosine_distance"]
kernel_weights = _active["kernel_weights"]
first_order_rows = _active["first_order_rows"]
masked_weak_rows = _active["masked_weak_rows"]
