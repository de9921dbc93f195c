"""Online signature verification: db4 DWT / DCT features, PCA reduction, SMO-trained SVM, FAR/FRR/EER."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .classifier import SvmModel, SvmParams, kernel_eval, svm_decision, svm_train
from .datasets import (
    DatasetDescriptor,
    SignerRecord,
    SynthParams,
    generate_synthetic,
    parse_svc2004_file,
    scan_svc2004_dir,
    split,
)
from .evaluation import EvalReport, ScoreSet, aggregate, compute_eer, far_frr_at, roc_points
from .features import (
    FeatureReducer,
    PCAModel,
    assemble_transform_features,
    channel_stats,
    explained_variance,
    pca_fit,
    pca_project,
)
from .pipeline import PipelineConfig, evaluate_dataset
from .signals import ChannelSet, Label, RawSignature, SamplePoint, derive_channels, normalize_z, resample, smooth, validate
from .transforms import Mode, dct, dwt_single, idct, idwt_single, make_db4, preprocess_channel, wavedec, waverec
