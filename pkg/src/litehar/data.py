"""Dataset ingestion and preprocessing for CSI amplitude recordings.

A recording is one CSV file, one time step per row, with the activity label
encoded in the file name (e.g. ``input_161219_siamak_bed_1.csv`` is a Lie
down sample). Loading parses the amplitude columns, decimates from the
source rate to the target rate, and normalizes each subcarrier signal to
zero mean and unit l2 norm. Channels are antenna-major: with 30 subcarriers
per antenna, rows 0..29 belong to antenna 1, 30..59 to antenna 2, and so on.

Preprocessed datasets can be cached to a versioned .npz keyed by the config
and the file contents, and exported back to the same CSV layout (see
save_recordings_csv); exported data is already preprocessed, so reload it
with source_rate_hz == target_rate_hz and normalize_signals=False.
"""

from __future__ import annotations

import hashlib
import logging
import re
import zipfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

CLASS_ORDER = ("Lie down", "Fall", "Walk", "Run", "Sit down", "Stand up", "Pick up")
SIX_CLASSES = tuple(c for c in CLASS_ORDER if c != "Pick up")
SEVEN_CLASSES = CLASS_ORDER

NORM_EPS = 1e-12

_CACHE_MAGIC = "litehar-dataset-cache"
_CACHE_VERSION = 1

_TOKEN_TO_LABEL = {
    "bed": "Lie down",
    "liedown": "Lie down",
    "fall": "Fall",
    "walk": "Walk",
    "run": "Run",
    "sitdown": "Sit down",
    "standup": "Stand up",
    "pickup": "Pick up",
}
_LABEL_TO_TOKEN = {
    "Lie down": "bed",
    "Fall": "fall",
    "Walk": "walk",
    "Run": "run",
    "Sit down": "sitdown",
    "Stand up": "standup",
    "Pick up": "pickup",
}
_GENERIC_CLASS = re.compile(r"^class\d+$")


def parse_label(name: str) -> str:
    """Extract the activity label from a file name, case-insensitively."""
    tokens = re.split(r"[^a-z0-9]+", Path(name).name.lower())
    for tok in tokens:
        if tok in _TOKEN_TO_LABEL:
            return _TOKEN_TO_LABEL[tok]
        if _GENERIC_CLASS.match(tok):
            return tok
    known = ", ".join(sorted(_TOKEN_TO_LABEL))
    raise ValueError(f"no activity token in file name {name!r} (known: {known}, classNN)")


def label_token(label: str) -> str:
    """File-name token for a label (inverse of parse_label)."""
    if label in _LABEL_TO_TOKEN:
        return _LABEL_TO_TOKEN[label]
    tok = label.lower()
    if _GENERIC_CLASS.match(tok):
        return tok
    raise ValueError(f"no file-name token defined for label {label!r}")


def canonical_class_order(labels) -> tuple:
    """Stable class ordering: the seven known activities first, extras sorted after."""
    present = set(labels)
    known = [c for c in CLASS_ORDER if c in present]
    extra = sorted(l for l in present if l not in CLASS_ORDER)
    return tuple(known + extra)


@dataclass(frozen=True, eq=False)
class SampleWindow:
    """One labeled recording: signals[m] is subcarrier m over time."""

    signals: np.ndarray
    label: str
    sample_rate_hz: float
    source_id: str

    def __post_init__(self):
        if self.signals.ndim != 2 or self.signals.shape[0] < 1:
            raise ValueError(f"signals must be (M, L) with M >= 1, got {self.signals.shape}")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")

    @property
    def num_channels(self) -> int:
        return self.signals.shape[0]

    @property
    def length(self) -> int:
        return self.signals.shape[1]


@dataclass(frozen=True)
class DatasetConfig:
    """File schema and preprocessing knobs for a recording directory.

    The defaults describe the public dataset: 1 kHz recordings, a timestamp
    in column 0, then 90 amplitude columns, decimated to 500 Hz. class_set
    "six" drops Pick up recordings; "seven" keeps everything.
    """

    class_set: str = "six"
    source_rate_hz: float = 1000.0
    target_rate_hz: float = 500.0
    amplitude_columns: tuple[int, int] = (1, 91)
    has_timestamp_column: bool = True
    file_glob: str = "**/input_*.csv"
    delimiter: str = ","
    channels_per_antenna: int = 30
    normalize_signals: bool = True

    def __post_init__(self):
        if self.class_set not in ("six", "seven"):
            raise ValueError(f"class_set must be 'six' or 'seven', got {self.class_set!r}")
        if self.source_rate_hz <= 0 or self.target_rate_hz <= 0:
            raise ValueError("sample rates must be positive")
        ratio = self.source_rate_hz / self.target_rate_hz
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError(
                f"target rate {self.target_rate_hz} must divide source rate "
                f"{self.source_rate_hz} for integer decimation"
            )
        start, stop = self.amplitude_columns
        if not (0 <= start < stop):
            raise ValueError(f"bad amplitude_columns {self.amplitude_columns}")
        if self.channels_per_antenna < 1:
            raise ValueError("channels_per_antenna must be >= 1")

    @property
    def decimation_factor(self) -> int:
        return int(round(self.source_rate_hz / self.target_rate_hz))

    @property
    def num_channels(self) -> int:
        return self.amplitude_columns[1] - self.amplitude_columns[0]


@dataclass
class LoadReport:
    files_found: int = 0
    files_loaded: int = 0
    files_skipped: tuple = ()
    dropped_by_class_filter: int = 0
    per_class_counts: tuple = ()
    from_cache: bool = False

    def summary(self) -> str:
        lines = [
            f"files found:   {self.files_found}",
            f"files loaded:  {self.files_loaded}"
            + (" (from cache)" if self.from_cache else ""),
            f"files skipped: {len(self.files_skipped)}",
        ]
        for path, reason in self.files_skipped:
            lines.append(f"  skipped {path}: {reason}")
        if self.dropped_by_class_filter:
            lines.append(f"dropped by class filter: {self.dropped_by_class_filter}")
        lines.append("per-class counts:")
        for label, count in self.per_class_counts:
            lines.append(f"  {label}: {count}")
        return "\n".join(lines)


def downsample(signal: np.ndarray, factor: int) -> np.ndarray:
    """Keep every factor-th sample starting at index 0."""
    if int(factor) != factor or factor < 1:
        raise ValueError(f"decimation factor must be an integer >= 1, got {factor}")
    return np.asarray(signal)[::int(factor)]


def normalize(signal: np.ndarray) -> np.ndarray:
    """Subtract the mean, then divide by the l2 norm of the centered signal.

    A (near-)constant signal would have a zero norm; those map to all zeros.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot normalize an empty signal")
    y = x - x.mean()
    norm = float(np.sqrt(np.sum(y * y)))
    if norm > NORM_EPS:
        return y / norm
    return np.zeros_like(y)


def _preprocess(amplitudes: np.ndarray, config: DatasetConfig) -> np.ndarray:
    """(L_raw, M) amplitude block -> (M, L) preprocessed signals."""
    signals = np.ascontiguousarray(amplitudes.T, dtype=np.float64)
    factor = config.decimation_factor
    if factor > 1:
        signals = np.ascontiguousarray(signals[:, ::factor])
    if config.normalize_signals:
        signals = np.vstack([normalize(row) for row in signals])
    return signals


def _read_recording(path: Path, config: DatasetConfig) -> np.ndarray:
    """Parse one CSV into its (L_raw, M) amplitude block; raises on any defect.

    float_precision="round_trip" matters: the default pandas float parser can
    be off by one ulp, which would break bit-exact re-ingestion of exported
    recordings.
    """
    frame = pd.read_csv(
        path, header=None, sep=config.delimiter, float_precision="round_trip"
    )
    arr = frame.to_numpy(dtype=np.float64)
    start, stop = config.amplitude_columns
    if arr.ndim != 2 or arr.shape[1] != stop:
        got = arr.shape[1] if arr.ndim == 2 else 0
        raise _ColumnMismatch(f"{path}: expected {stop} columns, found {got}")
    if arr.shape[0] < 1:
        raise _ColumnMismatch(f"{path}: no rows")
    block = arr[:, start:stop]
    if not np.isfinite(block).all():
        r, c = np.argwhere(~np.isfinite(block))[0]
        raise _NonFinite(f"{path}: non-finite value at row {r}, column {start + c}")
    return block


class _ColumnMismatch(ValueError):
    pass


class _NonFinite(ValueError):
    pass


def _config_fingerprint(config: DatasetConfig) -> str:
    return repr(config)


def _cache_key(files: list[Path], root: Path, config: DatasetConfig) -> str:
    h = hashlib.sha256()
    h.update(f"{_CACHE_MAGIC} v{_CACHE_VERSION}\n".encode())
    h.update(_config_fingerprint(config).encode())
    for path in files:
        h.update(b"\n")
        h.update(path.relative_to(root).as_posix().encode())
        h.update(b"\n")
        h.update(hashlib.sha256(path.read_bytes()).hexdigest().encode())
    return h.hexdigest()


def _save_cache(cache_path: Path, key: str, samples, report: LoadReport) -> None:
    arrays = {
        "magic": np.array(_CACHE_MAGIC),
        "version": np.array(_CACHE_VERSION, dtype=np.int64),
        "key": np.array(key),
        "labels": np.array([s.label for s in samples]),
        "source_ids": np.array([s.source_id for s in samples]),
        "rates": np.array([s.sample_rate_hz for s in samples]),
        "files_found": np.array(report.files_found, dtype=np.int64),
        "skipped_paths": np.array([p for p, _ in report.files_skipped]),
        "skipped_reasons": np.array([r for _, r in report.files_skipped]),
        "dropped": np.array(report.dropped_by_class_filter, dtype=np.int64),
    }
    for i, s in enumerate(samples):
        arrays[f"signals_{i:05d}"] = s.signals
    cache_path.parent.mkdir(parents=True, exist_ok=True)
    tmp = cache_path.with_suffix(".tmp.npz")
    np.savez(tmp, **arrays)
    tmp.replace(cache_path)


def _load_cache(cache_path: Path, key: str):
    if not cache_path.exists():
        return None
    try:
        with np.load(cache_path, allow_pickle=False) as z:
            if str(z["magic"]) != _CACHE_MAGIC or int(z["version"]) != _CACHE_VERSION:
                return None
            if str(z["key"]) != key:
                return None
            labels = [str(v) for v in z["labels"]]
            source_ids = [str(v) for v in z["source_ids"]]
            rates = z["rates"]
            samples = [
                SampleWindow(
                    signals=z[f"signals_{i:05d}"],
                    label=labels[i],
                    sample_rate_hz=float(rates[i]),
                    source_id=source_ids[i],
                )
                for i in range(len(labels))
            ]
            report = LoadReport(
                files_found=int(z["files_found"]),
                files_loaded=len(samples),
                files_skipped=tuple(
                    zip([str(p) for p in z["skipped_paths"]],
                        [str(r) for r in z["skipped_reasons"]])
                ),
                dropped_by_class_filter=int(z["dropped"]),
                per_class_counts=_class_counts(labels),
                from_cache=True,
            )
            return samples, report
    except (OSError, KeyError, ValueError, zipfile.BadZipFile):
        return None


def _class_counts(labels) -> tuple:
    counts: dict = {}
    for label in labels:
        counts[label] = counts.get(label, 0) + 1
    return tuple((label, counts[label]) for label in canonical_class_order(counts))


def load_dataset_report(root, config: DatasetConfig | None = None, cache_dir=None):
    """Load every recording under root; returns (samples, LoadReport).

    Samples come back sorted by source_id so seeded downstream shuffles are
    reproducible. Unparseable files are skipped with a logged warning; an
    unknown activity token, a column-count mismatch, or a non-finite value
    is a hard error. Loading nothing at all is a hard error too.
    """
    config = config or DatasetConfig()
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset directory {root} does not exist")
    files = sorted(root.glob(config.file_glob), key=lambda p: p.relative_to(root).as_posix())
    if not files:
        raise ValueError(f"no samples: nothing under {root} matches {config.file_glob!r}")

    cache_path = key = None
    if cache_dir is not None:
        key = _cache_key(files, root, config)
        cache_path = Path(cache_dir) / f"{_CACHE_MAGIC}-{key[:16]}.npz"
        hit = _load_cache(cache_path, key)
        if hit is not None:
            return hit

    samples: list[SampleWindow] = []
    skipped: list[tuple[str, str]] = []
    dropped = 0
    for path in files:
        rel = path.relative_to(root).as_posix()
        label = parse_label(path.name)
        if config.class_set == "six" and label == "Pick up":
            dropped += 1
            continue
        try:
            block = _read_recording(path, config)
        except (_ColumnMismatch, _NonFinite):
            raise
        except (OSError, ValueError, pd.errors.ParserError) as exc:
            logger.warning("skipping unreadable %s: %s", rel, exc)
            skipped.append((rel, str(exc)))
            continue
        signals = _preprocess(block, config)
        samples.append(
            SampleWindow(
                signals=signals,
                label=label,
                sample_rate_hz=config.source_rate_hz / config.decimation_factor,
                source_id=rel,
            )
        )
    if not samples:
        raise ValueError(f"no samples loaded from {root} (class_set={config.class_set!r})")
    samples.sort(key=lambda s: s.source_id)
    report = LoadReport(
        files_found=len(files),
        files_loaded=len(samples),
        files_skipped=tuple(skipped),
        dropped_by_class_filter=dropped,
        per_class_counts=_class_counts([s.label for s in samples]),
    )
    if cache_path is not None:
        _save_cache(cache_path, key, samples, report)
    return samples, report


def load_dataset(root, config: DatasetConfig | None = None, cache_dir=None):
    """Like load_dataset_report but returns just the samples."""
    samples, _ = load_dataset_report(root, config, cache_dir)
    return samples


def load_signals(path, config: DatasetConfig | None = None) -> np.ndarray:
    """Parse and preprocess a single recording file to its (M, L) signals.

    No label is required in the file name; use this for prediction inputs.
    """
    config = config or DatasetConfig()
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"recording {path} does not exist")
    return _preprocess(_read_recording(path, config), config)


def _export_name(sample: SampleWindow) -> str:
    base = Path(sample.source_id).name
    if not (base.startswith("input_") and base.endswith(".csv")):
        safe = re.sub(r"[^A-Za-z0-9.]+", "_", sample.source_id).strip("_")
        base = f"input_{safe}.csv"
    try:
        parsed = parse_label(base)
    except ValueError:
        parsed = None
    if parsed != sample.label:
        stem = base[len("input_"):-len(".csv")]
        base = f"input_{label_token(sample.label)}_{stem}.csv"
    return base


def save_recordings_csv(samples, out_dir, include_timestamp: bool = True) -> list[Path]:
    """Write samples back out in the loader's CSV layout; returns the paths.

    Values are printed with repr precision so a reload parses bit-identical
    amplitudes. The file name embeds the activity token.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    names = set()
    for sample in samples:
        name = _export_name(sample)
        if name in names:
            raise ValueError(f"duplicate export file name {name!r}")
        names.add(name)
        path = out_dir / name
        columns = [sample.signals.T]
        if include_timestamp:
            t = np.arange(sample.length) / sample.sample_rate_hz
            columns.insert(0, t[:, None])
        np.savetxt(path, np.hstack(columns), fmt="%.17g", delimiter=",")
        written.append(path)
    return written
