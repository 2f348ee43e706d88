"""Shared oracles and fixtures.

The reference implementations here are deliberately naive (explicit zero
padding, dense normal equations, brute-force counting) so the fast paths in
the package have something independent to agree with.
"""

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def naive_convolve(signal, kernel):
    """Dilated convolution over an explicitly zero-padded signal."""
    x = np.asarray(signal, dtype=np.float64)
    padded = np.concatenate(
        [np.zeros(kernel.padding), x, np.zeros(kernel.padding)]
    )
    n_out = x.shape[0] + 2 * kernel.padding - (kernel.length - 1) * kernel.dilation
    out = np.empty(n_out)
    for i in range(n_out):
        acc = kernel.bias
        for j in range(kernel.length):
            acc += kernel.weights[j] * padded[i + j * kernel.dilation]
        out[i] = acc
    return out


def naive_pool(conv_output):
    v = np.asarray(conv_output)
    return float(np.sum(v > 0) / v.size), float(v.max())


def ridge_oracle_coefficients(features, labels, alpha, class_labels):
    """Dense normal-equations solve on the standardized design, centered targets."""
    x = np.asarray(features, dtype=np.float64)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    scale = np.where(std <= 1e-12 * np.maximum(1.0, np.abs(mean)), 1.0, std)
    xs = (x - mean) / scale
    index = {label: i for i, label in enumerate(class_labels)}
    targets = np.full((len(labels), len(class_labels)), -1.0)
    for i, label in enumerate(labels):
        targets[i, index[label]] = 1.0
    centered = targets - targets.mean(axis=0)
    f = xs.shape[1]
    w = np.linalg.solve(xs.T @ xs + alpha * np.eye(f), xs.T @ centered)
    return w.T


def brute_force_vote(per_subcarrier, num_classes, included=None):
    """Count ballots the slow way; returns (counts, final)."""
    if included is None:
        included = [True] * len(per_subcarrier)
    counts = []
    for c in range(1, num_classes + 1):
        counts.append(
            sum(1 for p, inc in zip(per_subcarrier, included) if inc and p == c)
        )
    best = max(counts)
    final = counts.index(best) + 1
    return counts, final


@pytest.fixture(scope="session")
def tiny_samples():
    """Small, very separable synthetic dataset shared by the slower tests."""
    from litehar.synth import SynthSpec, generate

    return generate(
        SynthSpec(
            classes=3,
            channels=6,
            length=300,
            samples_per_class=6,
            snr_db=20.0,
            seed=3,
        )
    )


@pytest.fixture()
def blob_problem():
    """Two well-separated Gaussian blobs in 2 features, N=40, fixed seed."""
    rng = np.random.default_rng(12)
    train = np.vstack([rng.normal(0.0, 0.3, (20, 2)), rng.normal(3.0, 0.3, (20, 2))])
    labels = ["a"] * 20 + ["b"] * 20
    test = np.vstack([rng.normal(0.0, 0.3, (40, 2)), rng.normal(3.0, 0.3, (40, 2))])
    test_labels = ["a"] * 40 + ["b"] * 40
    return train, labels, test, test_labels
