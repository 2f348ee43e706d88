"""Dilated convolution of subcarrier signals against a kernel bank, pooled to (ppv, max).

Each kernel maps a length-L signal to two numbers: the proportion of positive
convolution outputs and their maximum. A bank of D kernels therefore embeds
every signal, whatever its length, into exactly 2*D features stored
interleaved as (ppv_0, max_0, ppv_1, max_1, ...).

:func:`convolve` and :func:`pool` are the plain-numpy contract operations;
:func:`transform_sample` / :func:`transform_signals` run the same arithmetic
through a compiled kernel loop. Summation order inside a window is fixed
(bias first, then ascending tap index), so all code paths agree bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit, prange

from .kernels import KernelSet, KernelSpec

_FEATURES_CSV_MAGIC = "litehar-features"
_FEATURES_CSV_VERSION = 1


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-subcarrier embedding of one sample: row m holds subcarrier m's 2*D features."""

    values: np.ndarray

    @property
    def num_channels(self) -> int:
        return self.values.shape[0]

    @property
    def num_kernels(self) -> int:
        return self.values.shape[1] // 2


def output_length(signal_length: int, kernel: KernelSpec) -> int:
    """Number of window placements of ``kernel`` over a zero-padded signal."""
    return signal_length + 2 * kernel.padding - (kernel.length - 1) * kernel.dilation


def convolve(signal: np.ndarray, kernel: KernelSpec) -> np.ndarray:
    """Slide ``kernel`` over ``signal`` (stride 1, zero padding) and return all window sums.

    output[i] = bias + sum_j weights[j] * padded_signal[i + j*dilation].
    """
    x = np.ascontiguousarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"signal must be 1-D, got shape {x.shape}")
    n_out = output_length(x.shape[0], kernel)
    if n_out <= 0:
        raise ValueError(
            f"signal of length {x.shape[0]} is shorter than the kernel receptive "
            f"field {kernel.receptive_field} (dilation {kernel.dilation}, "
            f"padding {kernel.padding})"
        )
    out = np.full(n_out, kernel.bias)
    # Bounded slices are equivalent to materializing the zero-padded signal:
    # taps that fall in the padding contribute exactly zero.
    for j in range(kernel.length):
        shift = j * kernel.dilation - kernel.padding
        lo = max(0, -shift)
        hi = min(n_out, x.shape[0] - shift)
        if lo < hi:
            out[lo:hi] += kernel.weights[j] * x[lo + shift : hi + shift]
    return out


def pool(conv_output: np.ndarray) -> tuple[float, float]:
    """Pool one convolution output to (proportion of positive values, maximum)."""
    v = np.asarray(conv_output, dtype=np.float64)
    if v.size == 0:
        raise ValueError("cannot pool an empty convolution output")
    return float(np.count_nonzero(v > 0.0) / v.size), float(v.max())


@njit(cache=True)
def _conv_ppv_max(x, weights, bias, dilation, padding, acc):  # pragma: no cover - compiled
    n = x.shape[0]
    m = weights.shape[0]
    d = dilation
    n_out = n + 2 * padding - (m - 1) * d
    # Window positions in [lo, hi) have every tap inside the signal; the (at
    # most 2*padding) positions outside touch the zero padding and are filled
    # tap-major over bounded ranges. Skipped taps contribute exactly zero, so
    # the per-element summation order (bias, then ascending tap index) is the
    # same everywhere.
    lo = padding
    hi = n + padding - (m - 1) * d
    if lo > n_out:
        lo = n_out
    if hi < lo:
        hi = lo
    for i in range(0, lo):
        acc[i] = bias
    for i in range(hi, n_out):
        acc[i] = bias
    for j in range(m):
        shift = j * d - padding
        w = weights[j]
        a = 0 if shift >= 0 else -shift
        b = lo if lo + shift <= n else n - shift
        for i in range(a, b):
            acc[i] += w * x[i + shift]
        a = hi if hi + shift >= 0 else -shift
        b = n_out if n_out + shift <= n else n - shift
        for i in range(a, b):
            acc[i] += w * x[i + shift]
    # Fixed-length interior loops so the compiler can vectorize across
    # positions; the three branches mirror the allowed kernel lengths.
    if m == 7:
        w0, w1, w2, w3, w4, w5, w6 = (
            weights[0], weights[1], weights[2], weights[3], weights[4],
            weights[5], weights[6],
        )
        for i in range(lo, hi):
            q = i - padding
            acc[i] = (
                bias
                + w0 * x[q]
                + w1 * x[q + d]
                + w2 * x[q + 2 * d]
                + w3 * x[q + 3 * d]
                + w4 * x[q + 4 * d]
                + w5 * x[q + 5 * d]
                + w6 * x[q + 6 * d]
            )
    elif m == 9:
        w0, w1, w2, w3, w4, w5, w6, w7, w8 = (
            weights[0], weights[1], weights[2], weights[3], weights[4],
            weights[5], weights[6], weights[7], weights[8],
        )
        for i in range(lo, hi):
            q = i - padding
            acc[i] = (
                bias
                + w0 * x[q]
                + w1 * x[q + d]
                + w2 * x[q + 2 * d]
                + w3 * x[q + 3 * d]
                + w4 * x[q + 4 * d]
                + w5 * x[q + 5 * d]
                + w6 * x[q + 6 * d]
                + w7 * x[q + 7 * d]
                + w8 * x[q + 8 * d]
            )
    elif m == 11:
        w0, w1, w2, w3, w4, w5, w6, w7, w8, w9, w10 = (
            weights[0], weights[1], weights[2], weights[3], weights[4],
            weights[5], weights[6], weights[7], weights[8], weights[9],
            weights[10],
        )
        for i in range(lo, hi):
            q = i - padding
            acc[i] = (
                bias
                + w0 * x[q]
                + w1 * x[q + d]
                + w2 * x[q + 2 * d]
                + w3 * x[q + 3 * d]
                + w4 * x[q + 4 * d]
                + w5 * x[q + 5 * d]
                + w6 * x[q + 6 * d]
                + w7 * x[q + 7 * d]
                + w8 * x[q + 8 * d]
                + w9 * x[q + 9 * d]
                + w10 * x[q + 10 * d]
            )
    else:
        for i in range(lo, hi):
            q = i - padding
            s = bias
            for j in range(m):
                s += weights[j] * x[q + j * d]
            acc[i] = s
    positive = 0
    best = acc[0]
    for i in range(n_out):
        v = acc[i]
        if v > 0.0:
            positive += 1
        if v > best:
            best = v
    return positive / n_out, best


@njit(cache=True, parallel=True)
def _apply_bank(flat, offsets, weights, w_offsets, biases, dilations, paddings, out):  # pragma: no cover - compiled
    n_signals = offsets.shape[0] - 1
    num_kernels = w_offsets.shape[0] - 1
    # Output length never exceeds the signal length under the generation rule
    # (padding is at most half the receptive field), but kernels read from a
    # file can say anything, so size the scratch buffer from the kernels.
    max_extra = 0
    for d in range(num_kernels):
        m = w_offsets[d + 1] - w_offsets[d]
        extra = 2 * paddings[d] - (m - 1) * dilations[d]
        if extra > max_extra:
            max_extra = extra
    for s in prange(n_signals):
        x = flat[offsets[s] : offsets[s + 1]]
        acc = np.empty(x.shape[0] + max_extra, np.float64)
        for d in range(num_kernels):
            w = weights[w_offsets[d] : w_offsets[d + 1]]
            ppv, mx = _conv_ppv_max(x, w, biases[d], dilations[d], paddings[d], acc)
            out[s, 2 * d] = ppv
            out[s, 2 * d + 1] = mx


def _pack_kernels(kernel_set: KernelSet):
    lengths = np.array([k.length for k in kernel_set.kernels], dtype=np.int64)
    w_offsets = np.zeros(len(kernel_set) + 1, dtype=np.int64)
    np.cumsum(lengths, out=w_offsets[1:])
    weights = np.empty(int(w_offsets[-1]), dtype=np.float64)
    for d, k in enumerate(kernel_set.kernels):
        weights[w_offsets[d] : w_offsets[d + 1]] = k.weights
    biases = np.array([k.bias for k in kernel_set.kernels], dtype=np.float64)
    dilations = np.array([k.dilation for k in kernel_set.kernels], dtype=np.int64)
    paddings = np.array([k.padding for k in kernel_set.kernels], dtype=np.int64)
    return weights, w_offsets, biases, dilations, paddings


def _check_fit(kernel_set: KernelSet, signal_length: int, where: str) -> None:
    for d, k in enumerate(kernel_set.kernels):
        if output_length(signal_length, k) <= 0:
            raise ValueError(
                f"kernel {d} (receptive field {k.receptive_field}, padding "
                f"{k.padding}) does not fit {where} of length {signal_length}"
            )


def transform_signals(signals: list[np.ndarray] | np.ndarray, kernel_set: KernelSet) -> np.ndarray:
    """Apply the whole bank to a batch of 1-D signals; returns (n_signals, 2*D).

    Signals may have different lengths; every row of the result still has
    exactly 2*D columns.
    """
    arrays = [np.ascontiguousarray(s, dtype=np.float64) for s in signals]
    for i, a in enumerate(arrays):
        if a.ndim != 1:
            raise ValueError(f"signal {i} must be 1-D, got shape {a.shape}")
        _check_fit(kernel_set, a.shape[0], f"signal {i}")
    out = np.empty((len(arrays), 2 * len(kernel_set)), dtype=np.float64)
    if not arrays or len(kernel_set) == 0:
        return out
    offsets = np.zeros(len(arrays) + 1, dtype=np.int64)
    np.cumsum([a.shape[0] for a in arrays], out=offsets[1:])
    flat = np.concatenate(arrays) if arrays else np.empty(0)
    weights, w_offsets, biases, dilations, paddings = _pack_kernels(kernel_set)
    _apply_bank(flat, offsets, weights, w_offsets, biases, dilations, paddings, out)
    return out


def transform_sample(signals: np.ndarray, kernel_set: KernelSet) -> FeatureMatrix:
    """Embed one sample (M x L subcarrier matrix) as an M x 2*D feature matrix."""
    mat = np.ascontiguousarray(signals, dtype=np.float64)
    if mat.ndim != 2:
        raise ValueError(f"sample signals must be an M x L matrix, got shape {mat.shape}")
    _check_fit(kernel_set, mat.shape[1], f"subcarrier signals (M={mat.shape[0]})")
    out = np.empty((mat.shape[0], 2 * len(kernel_set)), dtype=np.float64)
    if mat.shape[0] and len(kernel_set):
        offsets = np.arange(mat.shape[0] + 1, dtype=np.int64) * mat.shape[1]
        weights, w_offsets, biases, dilations, paddings = _pack_kernels(kernel_set)
        _apply_bank(mat.ravel(), offsets, weights, w_offsets, biases, dilations, paddings, out)
    return FeatureMatrix(values=out)


def transform_dataset(samples, kernel_set: KernelSet) -> np.ndarray:
    """Embed a list of samples; returns (n_samples, M, 2*D).

    All samples must share the same subcarrier count M.
    """
    if not samples:
        return np.empty((0, 0, 2 * len(kernel_set)), dtype=np.float64)
    channel_counts = {s.signals.shape[0] for s in samples}
    if len(channel_counts) != 1:
        raise ValueError(f"samples disagree on subcarrier count: {sorted(channel_counts)}")
    m = channel_counts.pop()
    rows = [s.signals[c] for s in samples for c in range(m)]
    flat_features = transform_signals(rows, kernel_set)
    return flat_features.reshape(len(samples), m, 2 * len(kernel_set))


def save_features(features: np.ndarray, sample_ids, path: str | Path) -> None:
    """Write an (n_samples, M, 2D) feature array as ``features.csv``.

    One row per (sample, subcarrier); float cells use 17 significant digits so
    a reload is bit-exact.
    """
    n, m, width = features.shape
    if len(sample_ids) != n:
        raise ValueError(f"expected {n} sample ids, got {len(sample_ids)}")
    feature_names = []
    for d in range(width // 2):
        feature_names.append(f"k{d}_ppv")
        feature_names.append(f"k{d}_max")
    with open(path, "w") as fh:
        fh.write(f"# {_FEATURES_CSV_MAGIC} v{_FEATURES_CSV_VERSION} ppv-max-interleaved\n")
        fh.write(",".join(["sample_id", "subcarrier"] + feature_names) + "\n")
        for i in range(n):
            for c in range(m):
                row = features[i, c]
                fh.write(f"{sample_ids[i]},{c},")
                fh.write(",".join("%.17g" % v for v in row))
                fh.write("\n")


def load_features(path: str | Path) -> tuple[np.ndarray, list[str]]:
    """Read ``features.csv`` back into an (n_samples, M, 2D) array plus sample ids."""
    with open(path) as fh:
        magic = fh.readline()
        if not magic.startswith(f"# {_FEATURES_CSV_MAGIC} "):
            raise ValueError(f"{path}: not a feature file")
        fh.readline()  # header
        sample_ids: list[str] = []
        rows = []
        for line in fh:
            cells = line.rstrip("\n").split(",")
            if cells[0] not in sample_ids[-1:]:
                sample_ids.append(cells[0])
            rows.append(np.array([float(c) for c in cells[2:]], dtype=np.float64))
    if not rows:
        raise ValueError(f"{path}: no feature rows")
    values = np.stack(rows)
    m = values.shape[0] // len(sample_ids)
    return values.reshape(len(sample_ids), m, values.shape[1]), sample_ids
