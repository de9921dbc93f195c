"""Per-signer training, scoring and evaluation, plus config and model persistence."""

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .classifier import SvmModel, SvmParams, svm_decision, svm_train
from .datasets import DatasetDescriptor, SignerRecord, split
from .errors import ConfigError, NotEnoughSamples
from .evaluation import ScoreSet, aggregate, compute_eer, evaluate_scores
from .features import FeatureReducer, assemble_transform_features, stat_features
from .signals import RawSignature, derive_channels
from .transforms import Mode, make_daubechies

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class PcaConfig:
    transform_k: int = 8
    stats_k: int = 2


@dataclass(frozen=True)
class SvmConfig:
    kernel: str = "rbf"
    C: float = 1.0
    gamma: float | None = None
    tol: float = 1e-3
    max_passes: int = 100
    seed: int = 0


@dataclass(frozen=True)
class SplitConfig:
    train_genuine: int = 10
    train_forgery: int = 10
    seed: int = 0


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "dwt-dct"
    resample_length: int = 100
    wavelet: str = "db4"
    levels: int = 1
    smooth: int | None = None
    pca: PcaConfig = field(default_factory=PcaConfig)
    svm: SvmConfig = field(default_factory=SvmConfig)
    split: SplitConfig = field(default_factory=SplitConfig)

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", Mode.parse(self.mode).value)
        except ValueError:
            raise ConfigError(f"mode must be one of dwt, dct, dwt-dct; got {self.mode!r}") from None
        if not self.wavelet.startswith("db") or not self.wavelet[2:].isdigit() or int(self.wavelet[2:]) < 1:
            raise ConfigError(f"wavelet must look like 'db<order>', got {self.wavelet!r}")
        if self.resample_length < 2 * self.filter_length:
            raise ConfigError(f"resample_length must be >= {2 * self.filter_length}")
        if self.levels < 1:
            raise ConfigError("levels must be >= 1")
        if self.smooth is not None and (self.smooth < 1 or self.smooth % 2 == 0):
            raise ConfigError(f"smooth must be an odd window >= 1 or null, got {self.smooth}")
        if self.pca.transform_k < 1 or self.pca.stats_k < 1:
            raise ConfigError("pca.transform_k and pca.stats_k must be >= 1")
        if self.split.train_genuine < 1 or self.split.train_forgery < 0:
            raise ConfigError("split.train_genuine must be >= 1 and split.train_forgery >= 0")
        try:
            self.svm_params()
        except ValueError as exc:
            raise ConfigError(f"svm: {exc}") from None
        n_train = self.split.train_genuine + self.split.train_forgery
        k_max = max(self.pca.transform_k, self.pca.stats_k)
        if self.split.train_forgery > 0 and k_max > n_train - 1:
            raise ConfigError(
                f"PCA needs k <= training samples - 1: k={k_max}, training samples="
                f"{self.split.train_genuine}+{self.split.train_forgery}={n_train}"
            )

    @property
    def filter_length(self) -> int:
        return 2 * int(self.wavelet[2:])

    def svm_params(self) -> SvmParams:
        return SvmParams(**asdict(self.svm))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "PipelineConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        nested = {"pca": PcaConfig, "svm": SvmConfig, "split": SplitConfig}
        kwargs = _checked_keys(cls, obj, "")
        for key, sub in nested.items():
            if key in kwargs:
                if not isinstance(kwargs[key], dict):
                    raise ConfigError(f"{key} must be an object")
                kwargs[key] = sub(**_checked_keys(sub, kwargs[key], key + "."))
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def _checked_keys(cls, obj: dict, prefix: str) -> dict:
    allowed = {f.name: f for f in fields(cls)}
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(prefix + k for k in unknown)}")
    out = dict(obj)
    for name, value in out.items():
        ftype = allowed[name].type
        if isinstance(value, bool):
            raise ConfigError(f"{prefix}{name} must not be a boolean")
        if ftype in (int, int | None) and isinstance(value, float):
            raise ConfigError(f"{prefix}{name} must be an integer, got {value!r}")
    return out


def load_config(path) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return PipelineConfig.from_dict(obj)


# ---------------------------------------------------------------------------


def signature_features(sig: RawSignature, cfg: PipelineConfig):
    """``(transform_vector, stats_vector)`` for one signature."""
    raw = derive_channels(sig, cfg.resample_length, normalize=False, smooth_window=cfg.smooth)
    fb = make_daubechies(cfg.filter_length // 2)
    tvec = assemble_transform_features(raw.normalized(), cfg.mode, fb, cfg.levels)
    return tvec, stat_features(raw)


def _feature_rows(sigs, cfg):
    pairs = [signature_features(s, cfg) for s in sigs]
    return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])


@dataclass(frozen=True)
class SignerModel:
    signer_id: str
    reducer: FeatureReducer
    svm: SvmModel
    threshold: float
    train_eer: float

    def score_features(self, tvec, svec):
        return svm_decision(self.svm, self.reducer.transform(tvec, svec))

    def to_dict(self) -> dict:
        return {
            "signer_id": self.signer_id,
            "reducer": self.reducer.to_dict(),
            "svm": self.svm.to_dict(),
            "threshold": self.threshold,
            "train_eer": self.train_eer,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SignerModel":
        return cls(
            obj["signer_id"],
            FeatureReducer.from_dict(obj["reducer"]),
            SvmModel.from_dict(obj["svm"]),
            float(obj["threshold"]),
            float(obj["train_eer"]),
        )


def _signer_seed(base: int, signer_id: str) -> int:
    # stable across processes, unlike hash()
    return (int(base) * 1_000_003 + sum((i + 1) * b for i, b in enumerate(signer_id.encode()))) % (2**31 - 1)


def _random_forgeries(signer_id: str, pool: dict, n: int, seed: int, part: str):
    """Genuine samples of other signers used as impostors."""
    others = [sig for sid in sorted(pool) if sid != signer_id for sig in pool[sid]]
    if not others or n <= 0:
        return ()
    rng = np.random.default_rng([_signer_seed(seed, signer_id), 0 if part == "train" else 1])
    idx = rng.choice(len(others), size=min(n, len(others)), replace=False)
    return tuple(others[i] for i in sorted(idx))


@dataclass(frozen=True)
class SignerPlan:
    signer_id: str
    train_genuine: tuple
    train_forgery: tuple
    test_genuine: tuple
    test_forgery: tuple


def plan_signers(ds: DatasetDescriptor, cfg: PipelineConfig) -> list:
    """Split every signer; fill missing forgeries with other signers' genuine samples."""
    splits = {}
    for rec in ds.signers:
        n_forg = cfg.split.train_forgery if rec.forgeries else 0
        splits[rec.signer_id] = split(rec, cfg.split.train_genuine, n_forg, cfg.split.seed)
    train_pool = {sid: sp.train_genuine for sid, sp in splits.items()}
    test_pool = {sid: sp.test_genuine for sid, sp in splits.items()}
    plans = []
    for rec in ds.signers:
        sp = splits[rec.signer_id]
        tf, ef = sp.train_forgery, sp.test_forgery
        if not rec.forgeries:
            n_neg = cfg.split.train_forgery or cfg.split.train_genuine
            tf = _random_forgeries(rec.signer_id, train_pool, n_neg, cfg.split.seed, "train")
            ef = _random_forgeries(rec.signer_id, test_pool, len(sp.test_genuine), cfg.split.seed, "test")
            if not tf:
                raise NotEnoughSamples(f"signer {rec.signer_id} has no forgeries and no other signers to borrow from")
        plans.append(SignerPlan(rec.signer_id, sp.train_genuine, tf, sp.test_genuine, ef))
    return plans


def train_signer(plan: SignerPlan, cfg: PipelineConfig) -> SignerModel:
    n_train = len(plan.train_genuine) + len(plan.train_forgery)
    if max(cfg.pca.transform_k, cfg.pca.stats_k) > n_train - 1:
        raise ConfigError(
            f"signer {plan.signer_id}: PCA needs k <= training samples - 1 "
            f"(k={max(cfg.pca.transform_k, cfg.pca.stats_k)}, training samples={n_train})"
        )
    T, S = _feature_rows(plan.train_genuine + plan.train_forgery, cfg)
    y = np.concatenate([np.ones(len(plan.train_genuine)), -np.ones(len(plan.train_forgery))])
    reducer = FeatureReducer(cfg.pca.transform_k, cfg.pca.stats_k).fit(T, S)
    X = reducer.transform(T, S)
    params = replace(cfg.svm_params(), seed=_signer_seed(cfg.svm.seed, plan.signer_id))
    svm = svm_train(X, y, params)
    scores = svm_decision(svm, X)
    eer, thr = compute_eer(ScoreSet(scores[y > 0], scores[y < 0]))
    return SignerModel(plan.signer_id, reducer, svm, thr, eer)


def score_signatures(model: SignerModel, sigs, cfg: PipelineConfig) -> np.ndarray:
    if not sigs:
        return np.zeros(0)
    T, S = _feature_rows(sigs, cfg)
    return np.atleast_1d(model.score_features(T, S))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SIGVERIFY_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def train_all(ds: DatasetDescriptor, cfg: PipelineConfig) -> dict:
    plans = plan_signers(ds, cfg)
    models = _map(lambda p: train_signer(p, cfg), plans)
    return {m.signer_id: m for m in models}


def evaluate_dataset(ds: DatasetDescriptor, cfg: PipelineConfig):
    """Train and test every signer; returns ``(EvalReport, {signer_id: SignerModel})``."""
    plans = plan_signers(ds, cfg)

    def run(plan):
        model = train_signer(plan, cfg)
        s = ScoreSet(score_signatures(model, plan.test_genuine, cfg), score_signatures(model, plan.test_forgery, cfg))
        return model, evaluate_scores(plan.signer_id, s)

    out = _map(run, plans)
    report = aggregate([r for _, r in out], cfg.mode, cfg.to_dict())
    return report, {m.signer_id: m for m, _ in out}


# ---------------------------------------------------------------------------
# persisted model file (JSON)


def model_to_dict(cfg: PipelineConfig, models: dict) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "config": cfg.to_dict(),
        "signers": [models[k].to_dict() for k in sorted(models)],
    }


def save_model(path, cfg: PipelineConfig, models: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(cfg, models), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path):
    """Returns ``(PipelineConfig, {signer_id: SignerModel})``."""
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version {version!r}")
    cfg = PipelineConfig.from_dict(obj["config"])
    models = {s["signer_id"]: SignerModel.from_dict(s) for s in obj["signers"]}
    return cfg, models
