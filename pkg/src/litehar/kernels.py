"""Random convolution kernel bank: seeded generation and CSV persistence.

Every kernel parameter is drawn from a per-kernel PCG64 substream keyed by
``(seed, kernel_index)``, so the bank can be regenerated element-wise in any
order (or in parallel) and always comes out identical on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

KERNEL_LENGTHS = (7, 9, 11)

_KERNELS_CSV_MAGIC = "litehar-kernels"
_KERNELS_CSV_VERSION = 1


@dataclass(frozen=True)
class KernelSpec:
    """One random convolution kernel. Stride is 1 everywhere and not stored."""

    length: int
    weights: np.ndarray
    bias: float
    dilation: int
    padding: int

    @property
    def receptive_field(self) -> int:
        """Input span covered by one placement of the kernel."""
        return (self.length - 1) * self.dilation + 1


@dataclass(frozen=True)
class KernelSet:
    """An ordered, immutable bank of kernels plus the generation parameters."""

    kernels: tuple[KernelSpec, ...]
    seed: int
    l_input: int
    center_weights: bool = True
    with_bias: bool = True

    @property
    def num_kernels(self) -> int:
        return len(self.kernels)

    def __len__(self) -> int:
        return len(self.kernels)

    def __getitem__(self, index: int) -> KernelSpec:
        return self.kernels[index]


def generate_kernel(
    seed: int,
    index: int,
    l_input: int,
    center_weights: bool = True,
    with_bias: bool = True,
) -> KernelSpec:
    """Generate kernel ``index`` of the bank keyed by ``seed``.

    Draw order within the substream is fixed: length, weights, bias,
    dilation exponent, padding coin. Length is uniform over {7, 9, 11};
    weights are i.i.d. standard normal (mean-centered per kernel unless
    disabled); bias is uniform on [-1, 1]; dilation is floor(2**a) with
    a uniform on [0, log2((l_input-1)/(length-1))]; padding is either 0
    or (length-1)*dilation/2, each with probability one half.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, index))))
    length = KERNEL_LENGTHS[rng.integers(0, len(KERNEL_LENGTHS))]
    weights = rng.standard_normal(length)
    if center_weights:
        weights = weights - weights.mean()
    bias = float(rng.uniform(-1.0, 1.0)) if with_bias else 0.0
    max_exponent = math.log2((l_input - 1) / (length - 1))
    dilation = int(2.0 ** rng.uniform(0.0, max_exponent))
    padded = rng.integers(0, 2) == 1
    padding = ((length - 1) * dilation) // 2 if padded else 0
    weights.setflags(write=False)
    return KernelSpec(
        length=int(length),
        weights=weights,
        bias=bias,
        dilation=dilation,
        padding=int(padding),
    )


def generate_kernels(
    seed: int,
    num_kernels: int,
    l_input: int,
    center_weights: bool = True,
    with_bias: bool = True,
) -> KernelSet:
    """Generate a bank of ``num_kernels`` random kernels for signals of length ``l_input``.

    Regeneration with the same (seed, num_kernels, l_input) yields an
    element-wise identical bank.
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    if num_kernels < 0:
        raise ValueError(f"num_kernels must be non-negative, got {num_kernels}")
    if l_input <= max(KERNEL_LENGTHS):
        raise ValueError(
            f"l_input must exceed the longest kernel ({max(KERNEL_LENGTHS)}), got {l_input}"
        )
    kernels = tuple(
        generate_kernel(seed, i, l_input, center_weights, with_bias)
        for i in range(num_kernels)
    )
    return KernelSet(
        kernels=kernels,
        seed=seed,
        l_input=l_input,
        center_weights=center_weights,
        with_bias=with_bias,
    )


def save_kernels(kernel_set: KernelSet, path: str | Path) -> None:
    """Write a kernel bank to ``kernels.csv`` (versioned, exact decimal text)."""
    max_len = max(KERNEL_LENGTHS)
    header = ",".join(
        ["index", "length", "bias", "dilation", "padding"]
        + [f"w{j}" for j in range(max_len)]
    )
    lines = [
        f"# {_KERNELS_CSV_MAGIC} v{_KERNELS_CSV_VERSION} "
        f"seed={kernel_set.seed} l_input={kernel_set.l_input} "
        f"center_weights={int(kernel_set.center_weights)} "
        f"with_bias={int(kernel_set.with_bias)}",
        header,
    ]
    for i, k in enumerate(kernel_set.kernels):
        cells = [str(i), str(k.length), repr(k.bias), str(k.dilation), str(k.padding)]
        cells.extend(repr(float(w)) for w in k.weights)
        cells.extend("" for _ in range(max_len - k.length))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def load_kernels(path: str | Path) -> KernelSet:
    """Read a kernel bank written by :func:`save_kernels`."""
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith(f"# {_KERNELS_CSV_MAGIC} "):
        raise ValueError(f"{path}: not a kernel bank file")
    meta_fields = dict(
        item.split("=", 1) for item in text[0].split() if "=" in item
    )
    version = text[0].split()[2]
    if version != f"v{_KERNELS_CSV_VERSION}":
        raise ValueError(f"{path}: unsupported kernel file version {version}")
    kernels = []
    for line in text[2:]:
        if not line.strip():
            continue
        cells = line.split(",")
        length = int(cells[1])
        weights = np.array([float(c) for c in cells[5 : 5 + length]])
        weights.setflags(write=False)
        kernels.append(
            KernelSpec(
                length=length,
                weights=weights,
                bias=float(cells[2]),
                dilation=int(cells[3]),
                padding=int(cells[4]),
            )
        )
    return KernelSet(
        kernels=tuple(kernels),
        seed=int(meta_fields["seed"]),
        l_input=int(meta_fields["l_input"]),
        center_weights=bool(int(meta_fields["center_weights"])),
        with_bias=bool(int(meta_fields["with_bias"])),
    )
