"""Cross-validation harness: accuracy, confusion, per-subcarrier diversity, timing.

The evaluation runs `runs` independent k-fold cross-validations that differ
only in how the samples are shuffled into folds (substream (run_seed, run)),
pools every (truth, prediction) pair across folds and runs, and computes all
metrics from the pooled counts. Features are extracted once up front with a
fixed kernel set, so per-fold cost is just ridge fitting and prediction;
set vary_kernel_seed to also redraw kernels each run.

Timing uses a monotonic clock around the extract / fit / predict phases
only. Extraction happens once for the whole dataset, so it is attributed
pro rata: training time charges extraction for every training row a fold
consumed, inference time for every test row.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import canonical_class_order
from .kernels import generate_kernels
from .ridge import DEFAULT_ALPHAS, fit_bank, predict_bank_indices
from .transform import transform_dataset
from .voting import ChannelMask, vote

_REPORT_MAGIC = "litehar-report"
_CONFUSION_MAGIC = "litehar-confusion"
_SUBCARRIER_MAGIC = "litehar-subcarrier-accuracy"
_TIMING_MAGIC = "litehar-timing"
_CSV_VERSION = 1


@dataclass(frozen=True)
class EvalConfig:
    """Knobs for run_cv; defaults match the benchmark protocol (D=10k, 10x10 CV)."""

    num_kernels: int = 10_000
    kernel_seed: int = 0
    run_seed: int = 0
    folds: int = 10
    runs: int = 10
    alphas: tuple = tuple(DEFAULT_ALPHAS)
    mask: ChannelMask | None = None
    stratified: bool = True
    vary_kernel_seed: bool = False

    def __post_init__(self):
        if self.num_kernels < 1:
            raise ValueError("num_kernels must be >= 1")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


@dataclass(frozen=True)
class ConfusionMatrix:
    """Pooled counts; counts[i, j] = samples of class i predicted as class j."""

    counts: np.ndarray
    class_labels: tuple

    def __post_init__(self):
        c = len(self.class_labels)
        if self.counts.shape != (c, c):
            raise ValueError(
                f"counts shape {self.counts.shape} does not match {c} classes"
            )
        if (self.counts < 0).any():
            raise ValueError("negative confusion counts")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def overall_accuracy(self) -> float:
        return float(np.trace(self.counts) / self.total)

    @property
    def per_class_accuracy(self) -> np.ndarray:
        row_totals = self.counts.sum(axis=1)
        safe = np.maximum(row_totals, 1)
        return np.where(row_totals > 0, np.diag(self.counts) / safe, 0.0)

    def normalized(self) -> np.ndarray:
        """Row-normalized matrix; all-zero rows stay zero."""
        row_totals = self.counts.sum(axis=1, keepdims=True)
        return np.where(row_totals > 0, self.counts / np.maximum(row_totals, 1), 0.0)


@dataclass(frozen=True)
class TimingInfo:
    total_train_s: float
    total_infer_s: float
    infer_per_sample_s: float
    extract_s: float
    fit_s: float
    predict_s: float


@dataclass(frozen=True)
class EvalReport:
    class_labels: tuple
    per_class_accuracy: np.ndarray
    average_accuracy: float
    overall_accuracy: float
    confusion: ConfusionMatrix
    per_subcarrier_accuracy: np.ndarray
    timing: TimingInfo
    fold_count: int
    run_count: int
    run_seed: int
    kernel_seed: int
    num_kernels: int
    num_samples: int
    num_channels: int


@dataclass(frozen=True)
class CvPredictions:
    """Pooled per-sample material every report is computed from."""

    class_labels: tuple
    truths: np.ndarray          # (T,) 0-based true class indices
    channel_preds: np.ndarray   # (T, M) 1-based per-subcarrier predictions
    extract_s: float
    fit_s: float
    predict_s: float
    n_extracted: int
    n_train_total: int
    n_test_total: int
    num_samples: int
    num_channels: int


def _fold_assignment(y: np.ndarray, k: int, rng, stratified: bool) -> np.ndarray:
    """Fold index per sample; stratified = per-class shuffle + round-robin."""
    fold_of = np.empty(y.shape[0], dtype=np.int64)
    if stratified:
        for c in range(int(y.max()) + 1):
            idx = np.flatnonzero(y == c)
            idx = rng.permutation(idx)
            fold_of[idx] = np.arange(idx.size) % k
    else:
        perm = rng.permutation(y.shape[0])
        for f, chunk in enumerate(np.array_split(perm, k)):
            fold_of[chunk] = f
    return fold_of


def collect_predictions(samples, config: EvalConfig | None = None) -> CvPredictions:
    """Run the CV loop and pool per-subcarrier predictions with their truths.

    This is the expensive step; reports and mask sweeps are cheap
    re-aggregations of the result.
    """
    config = config or EvalConfig()
    labels = [s.label for s in samples]
    class_labels = canonical_class_order(labels)
    if len(class_labels) < 2:
        raise ValueError("need at least 2 classes to evaluate")
    index = {label: i for i, label in enumerate(class_labels)}
    y = np.array([index[label] for label in labels], dtype=np.int64)
    counts = np.bincount(y, minlength=len(class_labels))
    for c, label in enumerate(class_labels):
        if counts[c] < config.folds:
            raise ValueError(
                f"class {label!r} has only {counts[c]} samples, fewer than "
                f"{config.folds} folds"
            )
    l_input = min(s.length for s in samples)

    extract_s = fit_s = predict_s = 0.0
    n_extracted = 0
    features = None

    def extract(seed: int):
        nonlocal extract_s, n_extracted
        t0 = time.perf_counter()
        kernel_set = generate_kernels(seed, config.num_kernels, l_input)
        out = transform_dataset(samples, kernel_set)
        extract_s += time.perf_counter() - t0
        n_extracted += len(samples)
        return out

    if not config.vary_kernel_seed:
        features = extract(config.kernel_seed)

    truths = []
    channel_preds = []
    n_train_total = n_test_total = 0
    for run in range(config.runs):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((config.run_seed, run))))
        if config.vary_kernel_seed:
            features = extract(config.kernel_seed + run)
        fold_of = _fold_assignment(y, config.folds, rng, config.stratified)
        for f in range(config.folds):
            test = fold_of == f
            train = ~test
            train_labels = [labels[i] for i in np.flatnonzero(train)]
            t0 = time.perf_counter()
            bank = fit_bank(
                features[train], train_labels, config.alphas,
                class_labels=class_labels, kernel_seed=config.kernel_seed,
            )
            fit_s += time.perf_counter() - t0
            t0 = time.perf_counter()
            preds = predict_bank_indices(bank, features[test])
            predict_s += time.perf_counter() - t0
            truths.append(y[test])
            channel_preds.append(preds)
            n_train_total += int(train.sum())
            n_test_total += int(test.sum())
    return CvPredictions(
        class_labels=class_labels,
        truths=np.concatenate(truths),
        channel_preds=np.concatenate(channel_preds, axis=0),
        extract_s=extract_s,
        fit_s=fit_s,
        predict_s=predict_s,
        n_extracted=n_extracted,
        n_train_total=n_train_total,
        n_test_total=n_test_total,
        num_samples=len(samples),
        num_channels=samples[0].num_channels,
    )


def _voted_confusion(pred: CvPredictions, mask: ChannelMask | None) -> ConfusionMatrix:
    c = len(pred.class_labels)
    if mask is not None and mask.num_channels != pred.channel_preds.shape[1]:
        raise ValueError(
            f"mask covers {mask.num_channels} channels, dataset has "
            f"{pred.channel_preds.shape[1]}"
        )
    counts = np.zeros((c, c), dtype=np.int64)
    for truth, row in zip(pred.truths, pred.channel_preds):
        final = vote(row, c, mask).final
        counts[truth, final - 1] += 1
    return ConfusionMatrix(counts=counts, class_labels=pred.class_labels)


def masked_accuracy(pred: CvPredictions, mask: ChannelMask | None = None) -> float:
    """Voted accuracy of already-collected predictions under a mask."""
    return _voted_confusion(pred, mask).overall_accuracy


def report_from_predictions(pred: CvPredictions, config: EvalConfig) -> EvalReport:
    t0 = time.perf_counter()
    confusion = _voted_confusion(pred, config.mask)
    vote_s = time.perf_counter() - t0

    solo_correct = (pred.channel_preds - 1 == pred.truths[:, None]).mean(axis=0)
    per_class = confusion.per_class_accuracy
    # Extraction ran once for the whole dataset; split its cost between the
    # phases by how many rows each consumed, so the two totals add up to the
    # real wall time. infer_per_sample_s is different: the marginal cost of
    # classifying one unseen sample (extract it, score it, vote).
    uses = max(pred.n_train_total + pred.n_test_total, 1)
    extract_per_sample = pred.extract_s / max(pred.n_extracted, 1)
    predict_total = pred.predict_s + vote_s
    total_train = pred.fit_s + pred.extract_s * (pred.n_train_total / uses)
    total_infer = predict_total + pred.extract_s * (pred.n_test_total / uses)
    timing = TimingInfo(
        total_train_s=total_train,
        total_infer_s=total_infer,
        infer_per_sample_s=extract_per_sample + predict_total / max(pred.n_test_total, 1),
        extract_s=pred.extract_s,
        fit_s=pred.fit_s,
        predict_s=predict_total,
    )
    return EvalReport(
        class_labels=pred.class_labels,
        per_class_accuracy=per_class,
        average_accuracy=float(per_class.mean()),
        overall_accuracy=confusion.overall_accuracy,
        confusion=confusion,
        per_subcarrier_accuracy=solo_correct,
        timing=timing,
        fold_count=config.folds,
        run_count=config.runs,
        run_seed=config.run_seed,
        kernel_seed=config.kernel_seed,
        num_kernels=config.num_kernels,
        num_samples=pred.num_samples,
        num_channels=pred.num_channels,
    )


def run_cv(samples, config: EvalConfig | None = None) -> EvalReport:
    """Evaluate the full pipeline with pooled k-fold cross-validation."""
    config = config or EvalConfig()
    return report_from_predictions(collect_predictions(samples, config), config)


def per_subcarrier_report(samples, config: EvalConfig | None = None) -> np.ndarray:
    """Accuracy of each subcarrier's classifier alone (no voting)."""
    return run_cv(samples, config).per_subcarrier_accuracy


def mask_sweep(samples, masks, config: EvalConfig | None = None) -> list[float]:
    """Voted accuracy under each mask, from one shared set of predictions.

    The per-subcarrier predictions are computed once and re-voted per mask,
    so sweeping masks costs no refitting.
    """
    masks = list(masks)
    if not masks:
        raise ValueError("no masks to sweep")
    pred = collect_predictions(samples, config)
    return [masked_accuracy(pred, mask) for mask in masks]


def _open_csv(path):
    return open(path, "w", newline="")


def write_report_csv(report: EvalReport, path) -> None:
    """report.csv: metadata and accuracy rows (deterministic content only).

    Wall-clock timing lives in timing.csv (see write_timing_csv) so this
    file is byte-identical across reruns with the same seeds.
    """
    with _open_csv(path) as fh:
        fh.write(f"# {_REPORT_MAGIC} v{_CSV_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(["section", "name", "value"])
        w.writerow(["meta", "kernel_seed", report.kernel_seed])
        w.writerow(["meta", "run_seed", report.run_seed])
        w.writerow(["meta", "folds", report.fold_count])
        w.writerow(["meta", "runs", report.run_count])
        w.writerow(["meta", "num_kernels", report.num_kernels])
        w.writerow(["meta", "num_samples", report.num_samples])
        w.writerow(["meta", "num_channels", report.num_channels])
        w.writerow(["meta", "num_classes", len(report.class_labels)])
        for label, acc in zip(report.class_labels, report.per_class_accuracy):
            w.writerow(["accuracy", label, repr(float(acc))])
        w.writerow(["accuracy", "average", repr(report.average_accuracy)])
        w.writerow(["accuracy", "overall", repr(report.overall_accuracy)])


def write_confusion_csv(confusion: ConfusionMatrix, path) -> None:
    """confusion.csv: raw count rows then row-normalized rows."""
    with _open_csv(path) as fh:
        fh.write(f"# {_CONFUSION_MAGIC} v{_CSV_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(["kind", "actual"] + list(confusion.class_labels))
        for label, row in zip(confusion.class_labels, confusion.counts):
            w.writerow(["raw", label] + [int(v) for v in row])
        for label, row in zip(confusion.class_labels, confusion.normalized()):
            w.writerow(["normalized", label] + [repr(float(v)) for v in row])


def write_subcarrier_csv(per_subcarrier_accuracy, path, channels_per_antenna: int = 30) -> None:
    """subcarrier_accuracy.csv: (antenna, subcarrier, accuracy) rows."""
    with _open_csv(path) as fh:
        fh.write(f"# {_SUBCARRIER_MAGIC} v{_CSV_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(["antenna", "subcarrier", "accuracy"])
        for m, acc in enumerate(per_subcarrier_accuracy):
            w.writerow([m // channels_per_antenna + 1, m + 1, repr(float(acc))])


def write_timing_csv(timing: TimingInfo, path) -> None:
    """timing.csv: wall-clock seconds (not deterministic, informational)."""
    with _open_csv(path) as fh:
        fh.write(f"# {_TIMING_MAGIC} v{_CSV_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(["name", "seconds"])
        w.writerow(["total_train_s", f"{timing.total_train_s:.6f}"])
        w.writerow(["total_infer_s", f"{timing.total_infer_s:.6f}"])
        w.writerow(["infer_per_sample_s", f"{timing.infer_per_sample_s:.6f}"])
        w.writerow(["extract_s", f"{timing.extract_s:.6f}"])
        w.writerow(["fit_s", f"{timing.fit_s:.6f}"])
        w.writerow(["predict_s", f"{timing.predict_s:.6f}"])
