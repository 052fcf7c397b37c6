"""Dense vector/matrix primitives: distances, the neighbour-weighting kernel,
per-column statistics and closed-form weighted ridge regression.

All operations are pure functions of float64 numpy arrays and reject
non-finite input, so results are safe to share across threads.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateInputError, DimensionError, DomainError, RankDeficiencyError

KERNEL_DIM_FLOOR = 100


def as_vector(x, name="vector"):
    """Coerce to a finite 1-D float64 array."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{name} contains non-finite entries")
    return v


def as_matrix(x, name="matrix"):
    """Coerce to a finite 2-D row-major float64 array."""
    m = np.ascontiguousarray(x, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{name} contains non-finite entries")
    return m


def euclidean_distance(a, b) -> float:
    """sqrt of the summed squared coordinate differences."""
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    d = a - b
    return math.sqrt(float(d @ d))


def cosine_distance(a, b) -> float:
    """1 minus the cosine similarity; lies in [0, 2].

    Raises
    ------
    DegenerateInputError
        If either vector is all-zero (cosine similarity undefined).
    """
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    na = math.sqrt(float(a @ a))
    nb = math.sqrt(float(b @ b))
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("cosine distance undefined for all-zero vectors")
    return 1.0 - float(a @ b) / (na * nb)


def kernel_weight(distance: float, latent_dim: int) -> float:
    """Neighbour weight exp(-distance * ln(D)/2) * ln(D), D = max(latent_dim, 100).

    Strictly decreasing in distance; a zero-distance neighbour gets the
    maximum weight ln(D).
    """
    if distance < 0:
        raise DomainError(f"distance must be >= 0, got {distance}")
    if latent_dim < 1:
        raise DomainError(f"latent_dim must be >= 1, got {latent_dim}")
    log_d = math.log(max(latent_dim, KERNEL_DIM_FLOOR))
    return math.exp(-distance * log_d / 2.0) * log_d


def kernel_weights(distances, latent_dim: int):
    """Vectorized `kernel_weight` over a 1-D array of distances."""
    d = as_vector(distances, "distances")
    if d.size and d.min() < 0:
        raise DomainError("distances must be >= 0")
    if latent_dim < 1:
        raise DomainError(f"latent_dim must be >= 1, got {latent_dim}")
    log_d = math.log(max(latent_dim, KERNEL_DIM_FLOOR))
    return kernels.kernel_weights(d, log_d)


@dataclass(frozen=True)
class FeatureStats:
    """Per-dimension (min, max, mean, population std) over a training matrix."""

    mins: np.ndarray
    maxs: np.ndarray
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        for name in ("mins", "maxs", "means", "stds"):
            object.__setattr__(
                self, name, np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            )
        n = len(self.mins)
        if not (len(self.maxs) == len(self.means) == len(self.stds) == n):
            raise DimensionError("feature stats arrays must share one length")
        if np.any(self.stds < 0):
            raise DomainError("std must be >= 0")
        if np.any(self.mins > self.means) or np.any(self.means > self.maxs):
            raise DomainError("per-dimension ordering min <= mean <= max violated")

    def __len__(self):
        return len(self.mins)

    def dim(self, i: int):
        """(min, max, mean, std) of dimension i."""
        return (
            float(self.mins[i]),
            float(self.maxs[i]),
            float(self.means[i]),
            float(self.stds[i]),
        )

    def to_dict(self):
        return {
            "mins": self.mins.tolist(),
            "maxs": self.maxs.tolist(),
            "means": self.means.tolist(),
            "stds": self.stds.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            mins=np.asarray(d["mins"], dtype=np.float64),
            maxs=np.asarray(d["maxs"], dtype=np.float64),
            means=np.asarray(d["means"], dtype=np.float64),
            stds=np.asarray(d["stds"], dtype=np.float64),
        )


def compute_feature_stats(X) -> FeatureStats:
    """Column-wise min/max/mean/population-std of a (rows >= 2) matrix."""
    X = as_matrix(X, "X")
    if X.shape[0] < 2:
        raise DomainError(f"need at least 2 rows to compute feature stats, got {X.shape[0]}")
    return FeatureStats(
        mins=X.min(axis=0),
        maxs=X.max(axis=0),
        means=X.mean(axis=0),
        stds=X.std(axis=0),
    )


@dataclass(frozen=True)
class RidgeFit:
    """Solved weighted ridge model: y ~ intercept + X @ coefficients."""

    coefficients: np.ndarray
    intercept: float
    alpha: float

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        return X @ self.coefficients + self.intercept


def weighted_ridge_fit(X, y, sample_weights, alpha: float) -> RidgeFit:
    """Closed-form weighted ridge regression with an unpenalized intercept.

    Minimizes ``sum_i w_i (y_i - b - x_i . beta)^2 + alpha * ||beta||^2`` by
    weighted-mean centering X and y (the intercept absorbs the means) and
    solving the penalized normal equations on the centered system by Cholesky
    factorization. On factorization failure a single 1e-10 jitter retry is
    attempted; with ``alpha == 0`` a singular system raises instead.

    Parameters
    ----------
    X : (n, p) array
    y : (n,) array
    sample_weights : (n,) array, all >= 0 with at least one positive
    alpha : float >= 0, L2 penalty on the coefficients
    """
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    w = as_vector(sample_weights, "sample_weights")
    n, p = X.shape
    if len(y) != n or len(w) != n:
        raise DimensionError(
            f"rows(X)={n}, len(y)={len(y)}, len(weights)={len(w)} must all match"
        )
    if np.any(w < 0):
        raise DomainError("sample weights must be >= 0")
    w_sum = float(w.sum())
    if w_sum <= 0:
        raise DomainError("at least one sample weight must be positive")
    if alpha < 0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")

    x_mean = (w @ X) / w_sum
    y_mean = float(w @ y) / w_sum
    Xc = X - x_mean
    yc = y - y_mean

    wX = Xc * w[:, None]
    gram = Xc.T @ wX
    rhs = wX.T @ yc
    gram.flat[:: p + 1] += alpha

    try:
        coef = _solve_spd(gram, rhs, check_rank=(alpha == 0.0))
    except np.linalg.LinAlgError:
        if alpha == 0.0:
            raise RankDeficiencyError(
                "singular normal equations with alpha=0; use alpha > 0"
            ) from None
        gram.flat[:: p + 1] += 1e-10
        try:
            coef = _solve_spd(gram, rhs)
        except np.linalg.LinAlgError:
            raise RankDeficiencyError("penalized normal equations not positive definite") from None

    intercept = y_mean - float(x_mean @ coef)
    return RidgeFit(coefficients=coef, intercept=intercept, alpha=float(alpha))


def _solve_spd(A, b, check_rank=False):
    L = np.linalg.cholesky(A)
    if check_rank:
        # LAPACK may factor an exactly singular Gram matrix with a
        # rounding-level pivot; treat eps-scale pivots as rank deficiency
        pivots = np.diag(L) ** 2
        floor = 8 * np.finfo(np.float64).eps * A.shape[0] * max(A.diagonal().max(), 0.0)
        if not np.all(pivots > floor):
            raise np.linalg.LinAlgError("rank-deficient system")
    z = np.linalg.solve(L, b)
    return np.linalg.solve(L.T, z)
