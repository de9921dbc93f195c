"""Binary SVM trained with simplified SMO.

Genuine samples are labeled +1 and forgeries -1.  The decision value is
kept real-valued because the evaluation sweeps thresholds over it.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, NoConvergence, SingleClass

KERNELS = ("linear", "rbf")
SUPPORT_EPS = 1e-12


@dataclass(frozen=True)
class SvmParams:
    kernel: str = "rbf"
    C: float = 1.0
    gamma: float | None = None  # None -> 1 / n_features at training time
    tol: float = 1e-3
    max_passes: int = 100
    max_sweeps: int = 20000
    seed: int = 0

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if not self.C > 0:
            raise ValueError(f"C must be > 0, got {self.C}")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.max_passes < 1 or self.max_sweeps < 1:
            raise ValueError("max_passes and max_sweeps must be >= 1")


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray
    alphas: np.ndarray
    labels: np.ndarray
    bias: float
    params: SvmParams
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def alphas_times_labels(self) -> np.ndarray:
        return self.alphas * self.labels

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]

    def to_dict(self) -> dict:
        return {
            "support_vectors": self.support_vectors.tolist(),
            "alphas": self.alphas.tolist(),
            "labels": self.labels.tolist(),
            "bias": self.bias,
            "params": asdict(self.params),
            "dim": self.dim,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SvmModel":
        sv = np.asarray(obj["support_vectors"], dtype=np.float64).reshape(-1, int(obj["dim"]))
        return cls(
            sv,
            np.asarray(obj["alphas"], dtype=np.float64),
            np.asarray(obj["labels"], dtype=np.float64),
            float(obj["bias"]),
            SvmParams(**obj["params"]),
        )


def _gamma(params: SvmParams, dim: int) -> float:
    return params.gamma if params.gamma is not None else 1.0 / dim


def kernel_matrix(params: SvmParams, U, V) -> np.ndarray:
    U = np.atleast_2d(np.asarray(U, dtype=np.float64))
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    if U.shape[1] != V.shape[1]:
        raise DimensionMismatch(f"dimension {U.shape[1]} vs {V.shape[1]}")
    G = U @ V.T
    if params.kernel == "linear":
        return G
    sq = np.sum(U * U, axis=1)[:, None] + np.sum(V * V, axis=1)[None, :] - 2.0 * G
    return np.exp(-_gamma(params, U.shape[1]) * np.maximum(sq, 0.0))


def kernel_eval(params: SvmParams, u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatch(f"dimension {u.shape} vs {v.shape}")
    if params.kernel == "linear":
        return float(np.dot(u, v))
    diff = u - v
    return float(np.exp(-_gamma(params, u.shape[0]) * np.dot(diff, diff)))


def svm_train(X, y, params: SvmParams | None = None) -> SvmModel:
    """Solve the soft-margin dual with simplified SMO.

    Raises :class:`NoConvergence` if the sweep budget runs out while some
    KKT condition is still violated by more than ``tol``; the partially
    trained model is in ``err.diagnostics["model"]``.
    """
    params = params or SvmParams()
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X {X.shape} and y {y.shape} disagree")
    if X.shape[0] < 2:
        raise SingleClass("need at least two training samples")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    if np.all(y == y[0]):
        raise SingleClass(f"all {y.shape[0]} labels are {int(y[0]):+d}")
    if params.gamma is None and params.kernel == "rbf":
        params = SvmParams(**{**asdict(params), "gamma": 1.0 / X.shape[1]})
    K = np.ascontiguousarray(kernel_matrix(params, X, X))
    alpha, b, sweeps, violation = _kernels.smo(
        K, y, float(params.C), float(params.tol), int(params.max_passes), int(params.max_sweeps), int(params.seed)
    )
    keep = alpha > SUPPORT_EPS * params.C
    decision = (alpha * y) @ K + b
    diagnostics = {
        "sweeps": int(sweeps),
        "max_kkt_violation": float(violation),
        "n_support": int(keep.sum()),
        "train_accuracy": float(np.mean(np.where(decision >= 0, 1.0, -1.0) == y)),
        "dual_residual": float(np.dot(alpha, y)),
        "alpha": alpha.copy(),
    }
    model = SvmModel(X[keep].copy(), alpha[keep].copy(), y[keep].copy(), float(b), params, diagnostics)
    if violation > params.tol:
        raise NoConvergence(
            f"SMO stopped after {sweeps} sweeps with KKT violation {violation:.3g} > tol {params.tol}",
            {**diagnostics, "model": model},
        )
    return model


def svm_decision(model: SvmModel, x) -> np.ndarray | float:
    """``sum_i alpha_i y_i K(sv_i, x) + bias`` for one vector or a stack of rows."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if x.shape[-1] != model.dim:
        raise DimensionMismatch(f"model expects dimension {model.dim}, got {x.shape[-1]}")
    K = kernel_matrix(model.params, np.atleast_2d(x), model.support_vectors)
    scores = K @ model.alphas_times_labels + model.bias
    return float(scores[0]) if single else scores
