"""Feature vectors and PCA reduction.

Per signature two vectors are built: the 477-value transform vector
(9 channels x 53 coefficients, channel-major) and the 54-value statistics
vector (9 channels x 6 moments).  Each gets its own PCA; the retained
components (8 + 2 by default) are concatenated and z-scored with
training-set statistics into the 10-value classifier input.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateData, DimensionMismatch, KTooLarge, NoConvergence, NotFitted, TooShort
from .signals import N_CHANNELS, ChannelSet
from .transforms import Mode, WaveletFilterBank, coeff_length, make_db4, preprocess_channel

N_COEFFS = 53
TRANSFORM_DIM = N_CHANNELS * N_COEFFS
N_STATS = 6
STATS_DIM = N_CHANNELS * N_STATS
TRANSFORM_K = 8
STATS_K = 2

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def channel_stats(channel) -> np.ndarray:
    """``[mean, std, min, max, skewness, excess kurtosis]`` with population moments.

    Skewness and kurtosis of a flat channel are defined as 0.
    """
    x = np.asarray(channel, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2:
        raise TooShort(f"channel_stats needs >= 2 samples, got {x.shape}")
    mean = x.mean()
    c = x - mean
    var = np.mean(c * c)
    sigma = np.sqrt(var)
    if sigma <= 1e-12 * max(1.0, abs(mean)):
        skew = 0.0
        kurt = 0.0
    else:
        skew = np.mean(c**3) / sigma**3
        kurt = np.mean(c**4) / var**2 - 3.0
    return np.array([mean, sigma, x.min(), x.max(), skew, kurt])


def stat_features(cs: ChannelSet) -> np.ndarray:
    return np.concatenate([channel_stats(c) for c in cs.data])


def assemble_transform_features(
    cs: ChannelSet, mode=Mode.DWT_DCT, fb: WaveletFilterBank | None = None, levels: int = 1
) -> np.ndarray:
    fb = fb or make_db4()
    return np.concatenate(
        [preprocess_channel(c, mode, fb, expected_length=cs.length, levels=levels) for c in cs.data]
    )


def transform_dim(resample_length: int = 100, filter_length: int = 8, levels: int = 1) -> int:
    n = resample_length
    for _ in range(levels):
        n = coeff_length(n, filter_length)
    return N_CHANNELS * n


@dataclass(frozen=True)
class PCAModel:
    mean: np.ndarray
    loadings: np.ndarray  # (k, d), rows are principal directions
    eigenvalues: np.ndarray
    total_variance: float

    @property
    def k(self) -> int:
        return self.loadings.shape[0]

    @property
    def d(self) -> int:
        return self.loadings.shape[1]

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "loadings": self.loadings.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "total_variance": self.total_variance,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PCAModel":
        return cls(
            np.asarray(obj["mean"], dtype=np.float64),
            np.asarray(obj["loadings"], dtype=np.float64).reshape(len(obj["eigenvalues"]), -1),
            np.asarray(obj["eigenvalues"], dtype=np.float64),
            float(obj["total_variance"]),
        )


def symmetric_eigh(a: np.ndarray):
    """Eigenpairs of a symmetric matrix by cyclic Jacobi, sorted descending."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    a = 0.5 * (a + a.T)
    w, v, sweeps, converged = _kernels.jacobi(a, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if not converged:
        raise NoConvergence(f"Jacobi did not converge in {sweeps} sweeps", {"sweeps": sweeps})
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def _complete_basis(vectors: list, d: int) -> np.ndarray:
    basis = list(vectors)
    for i in range(d):
        if len(basis) == d:
            break
        e = np.zeros(d)
        e[i] = 1.0
        for b in basis:
            e -= np.dot(b, e) * b
        nrm = np.linalg.norm(e)
        if nrm > 1e-6:
            basis.append(e / nrm)
    return np.array(basis)


def pca_fit(samples, k: int) -> PCAModel:
    """Fit a ``k``-component PCA on the rows of ``samples``.

    The covariance is diagonalized directly when ``d <= m``; otherwise the
    ``m x m`` Gram matrix is used and its eigenvectors mapped back.
    Each direction is signed so its largest-magnitude entry is positive.
    """
    X = np.asarray(samples, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DegenerateData(f"pca_fit needs an (m >= 2, d) matrix, got shape {X.shape}")
    m, d = X.shape
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > min(m - 1, d):
        raise KTooLarge(f"k={k} exceeds min(m - 1, d) = {min(m - 1, d)} (m={m} samples, d={d})")
    mean = X.mean(axis=0)
    Xc = X - mean
    total = float(np.sum(Xc * Xc) / (m - 1))
    if not np.any(Xc):
        raise DegenerateData("all samples are identical")
    if d <= m:
        w, V = symmetric_eigh(Xc.T @ Xc / (m - 1))
        w = w[:k]
        V = V[:, :k].T
    else:
        w, U = symmetric_eigh(Xc @ Xc.T / (m - 1))
        w = w[:k]
        cutoff = 1e-10 * max(total, np.finfo(float).tiny)
        dirs = []
        for i in range(k):
            if w[i] <= cutoff:
                break
            v = Xc.T @ U[:, i] / np.sqrt((m - 1) * w[i])
            dirs.append(v / np.linalg.norm(v))
        V = _complete_basis(dirs, d)[:k] if len(dirs) < k else np.array(dirs)
    w = np.where(w < 0.0, 0.0, w)
    for row in V:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return PCAModel(mean, V, w, total)


def pca_project(model: PCAModel, a) -> np.ndarray:
    """``b_k = sum_n t_kn (a_n - mean_n)``; accepts one vector or a stack of rows."""
    a = np.asarray(a, dtype=np.float64)
    if a.shape[-1] != model.d:
        raise DimensionMismatch(f"expected dimension {model.d}, got {a.shape[-1]}")
    return (a - model.mean) @ model.loadings.T


def pca_reconstruct(model: PCAModel, b) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    if b.shape[-1] != model.k:
        raise DimensionMismatch(f"expected {model.k} components, got {b.shape[-1]}")
    return b @ model.loadings + model.mean


def explained_variance(model: PCAModel):
    """Per-component and cumulative share of total variance."""
    if model.k < 1:
        raise ValueError("model has no components")
    if model.total_variance <= 0:
        ratio = np.zeros(model.k)
    else:
        ratio = model.eigenvalues / model.total_variance
    return ratio, np.cumsum(ratio)


class FeatureReducer:
    """Two PCAs plus a z-score, fitted on one signer's training split."""

    def __init__(self, transform_k: int = TRANSFORM_K, stats_k: int = STATS_K):
        self.transform_k = transform_k
        self.stats_k = stats_k
        self.transform_pca = None
        self.stats_pca = None
        self.center = None
        self.scale = None

    @property
    def fitted(self) -> bool:
        return self.transform_pca is not None

    @property
    def dim(self) -> int:
        return self.transform_k + self.stats_k

    def fit(self, transform_rows, stat_rows) -> "FeatureReducer":
        self.transform_pca = pca_fit(transform_rows, self.transform_k)
        self.stats_pca = pca_fit(stat_rows, self.stats_k)
        raw = self._project(transform_rows, stat_rows)
        self.center = raw.mean(axis=0)
        spread = raw.std(axis=0)
        self.scale = np.where(spread > 1e-12, spread, 1.0)
        return self

    def _project(self, transform_rows, stat_rows) -> np.ndarray:
        return np.concatenate(
            [pca_project(self.transform_pca, transform_rows), pca_project(self.stats_pca, stat_rows)],
            axis=-1,
        )

    def transform(self, transform_rows, stat_rows) -> np.ndarray:
        if not self.fitted:
            raise NotFitted("FeatureReducer.fit has not been called")
        return (self._project(transform_rows, stat_rows) - self.center) / self.scale

    def to_dict(self) -> dict:
        if not self.fitted:
            raise NotFitted("cannot serialize an unfitted reducer")
        return {
            "transform_k": self.transform_k,
            "stats_k": self.stats_k,
            "transform_pca": self.transform_pca.to_dict(),
            "stats_pca": self.stats_pca.to_dict(),
            "center": self.center.tolist(),
            "scale": self.scale.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "FeatureReducer":
        r = cls(int(obj["transform_k"]), int(obj["stats_k"]))
        r.transform_pca = PCAModel.from_dict(obj["transform_pca"])
        r.stats_pca = PCAModel.from_dict(obj["stats_pca"])
        r.center = np.asarray(obj["center"], dtype=np.float64)
        r.scale = np.asarray(obj["scale"], dtype=np.float64)
        return r


def reduce(reducer: FeatureReducer | None, transform_vec, stat_vec) -> np.ndarray:
    if reducer is None or not reducer.fitted:
        raise NotFitted("reduce needs a fitted FeatureReducer")
    return reducer.transform(transform_vec, stat_vec)
