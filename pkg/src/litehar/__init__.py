"""Lightweight CSI activity recognition.

Pipeline: random convolution kernels embed each subcarrier's amplitude
signal into (ppv, max) feature pairs; one ridge classifier per subcarrier
(regularization chosen by generalized cross-validation) predicts an
activity; an indicator-function majority vote across subcarriers gives the
final label. The evaluate module wraps it all in a reproducible k-fold
harness, and synth generates datasets for testing without recordings.
"""

from .data import (
    CLASS_ORDER,
    SEVEN_CLASSES,
    SIX_CLASSES,
    DatasetConfig,
    LoadReport,
    SampleWindow,
    canonical_class_order,
    downsample,
    load_dataset,
    load_dataset_report,
    load_signals,
    normalize,
    parse_label,
    save_recordings_csv,
)
from .evaluate import (
    ConfusionMatrix,
    CvPredictions,
    EvalConfig,
    EvalReport,
    TimingInfo,
    collect_predictions,
    mask_sweep,
    masked_accuracy,
    per_subcarrier_report,
    report_from_predictions,
    run_cv,
    write_confusion_csv,
    write_report_csv,
    write_subcarrier_csv,
    write_timing_csv,
)
from .kernels import (
    KERNEL_LENGTHS,
    KernelSet,
    KernelSpec,
    generate_kernel,
    generate_kernels,
    load_kernels,
    save_kernels,
)
from .ridge import (
    DEFAULT_ALPHAS,
    ClassifierBank,
    RidgeModel,
    fit_bank,
    fit_ridge,
    load_bank,
    predict_bank_indices,
    predict_class,
    predict_scores,
    save_bank,
)
from .synth import SynthSpec, generate
from .transform import (
    FeatureMatrix,
    convolve,
    load_features,
    output_length,
    pool,
    save_features,
    transform_dataset,
    transform_sample,
    transform_signals,
)
from .voting import ChannelMask, VoteRecord, parse_mask, vote

__version__ = "0.1.0"

__all__ = [
    "CLASS_ORDER",
    "ChannelMask",
    "ClassifierBank",
    "ConfusionMatrix",
    "CvPredictions",
    "DEFAULT_ALPHAS",
    "DatasetConfig",
    "EvalConfig",
    "EvalReport",
    "FeatureMatrix",
    "KERNEL_LENGTHS",
    "KernelSet",
    "KernelSpec",
    "LoadReport",
    "RidgeModel",
    "SEVEN_CLASSES",
    "SIX_CLASSES",
    "SampleWindow",
    "SynthSpec",
    "TimingInfo",
    "VoteRecord",
    "canonical_class_order",
    "collect_predictions",
    "convolve",
    "downsample",
    "fit_bank",
    "fit_ridge",
    "generate",
    "generate_kernel",
    "generate_kernels",
    "load_bank",
    "load_dataset",
    "load_dataset_report",
    "load_features",
    "load_kernels",
    "load_signals",
    "mask_sweep",
    "masked_accuracy",
    "normalize",
    "output_length",
    "parse_label",
    "parse_mask",
    "per_subcarrier_report",
    "pool",
    "predict_bank_indices",
    "predict_class",
    "predict_scores",
    "report_from_predictions",
    "run_cv",
    "save_bank",
    "save_features",
    "save_kernels",
    "save_recordings_csv",
    "transform_dataset",
    "transform_sample",
    "transform_signals",
    "vote",
    "write_confusion_csv",
    "write_report_csv",
    "write_subcarrier_csv",
    "write_timing_csv",
    "__version__",
]
