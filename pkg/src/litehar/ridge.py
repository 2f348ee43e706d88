"""One-vs-rest ridge classifiers with closed-form GCV over a regularization grid.

One RidgeModel is fitted per subcarrier. Features are standardized with the
training mean and standard deviation, targets are +1/-1 one-vs-rest columns,
and the intercept is fitted implicitly by centering. All grid alphas are
scored from a single eigendecomposition of the N x N Gram matrix, so adding
alphas to the grid costs almost nothing; the GCV score used is

    GCV(alpha) = N * ||Y - Yhat_alpha||^2 / (N - tr(H_alpha))^2

with tr(H_alpha) = sum_i lam_i / (lam_i + alpha) over the Gram eigenvalues.

A ClassifierBank stacks the M per-subcarrier models and persists them to a
single .npz file.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEFAULT_ALPHAS = tuple(np.logspace(-3.0, 3.0, 10))

_BANK_MAGIC = "litehar-bank"
_BANK_VERSION = 1

# A column is treated as constant when its standard deviation is this small
# relative to its magnitude; the scale is then forced to 1 so the centered
# (all zero) column passes through the division unchanged.
_SCALE_FLOOR = 1e-12


@dataclass(frozen=True)
class RidgeModel:
    """Fitted one-vs-rest linear classifier for a single subcarrier."""

    class_labels: tuple
    coefficients: np.ndarray
    intercepts: np.ndarray
    feature_means: np.ndarray
    feature_scales: np.ndarray
    alpha: float

    @property
    def num_classes(self) -> int:
        return len(self.class_labels)

    @property
    def num_features(self) -> int:
        return self.coefficients.shape[1]


def _check_finite(x: np.ndarray, what: str) -> None:
    if np.isfinite(x).all():
        return
    bad = np.argwhere(~np.isfinite(np.atleast_2d(x)))
    r, c = bad[0]
    raise ValueError(f"non-finite value in {what} at row {r}, column {c}")


def _as_features(features, expected: int | None = None) -> tuple[np.ndarray, bool]:
    """Coerce to a (N, F) float matrix; returns (matrix, was_single_vector)."""
    x = np.asarray(features, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2:
        raise ValueError(f"features must be a vector or matrix, got shape {x.shape}")
    if expected is not None and x.shape[1] != expected:
        raise ValueError(
            f"feature length mismatch: model expects {expected}, got {x.shape[1]}"
        )
    return x, single


def _standardize_fit(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    floor = _SCALE_FLOOR * np.maximum(1.0, np.abs(mean))
    scale = np.where(std <= floor, 1.0, std)
    return mean, scale


def _encode_labels(labels, class_labels) -> tuple[tuple, np.ndarray]:
    labels = list(labels)
    if class_labels is None:
        class_labels = tuple(sorted(set(labels)))
    else:
        class_labels = tuple(class_labels)
        if len(set(class_labels)) != len(class_labels):
            raise ValueError("class_labels contains duplicates")
    index = {label: i for i, label in enumerate(class_labels)}
    try:
        y = np.array([index[label] for label in labels], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"label {exc.args[0]!r} not in class_labels") from None
    counts = np.bincount(y, minlength=len(class_labels))
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise ValueError(f"class {class_labels[empty[0]]!r} has zero samples")
    return class_labels, y


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def fit_ridge(features, labels, alphas=DEFAULT_ALPHAS, class_labels=None) -> RidgeModel:
    """Fit a one-vs-rest ridge classifier, selecting alpha by GCV.

    features: (N, F) matrix. labels: N class identifiers. alphas: candidate
    regularization strengths, searched in the given order (first minimum of
    the GCV score wins). class_labels fixes the class ordering; by default
    the sorted unique labels are used.
    """
    x, _ = _as_features(features)
    _check_finite(x, "features")
    alphas = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
    if alphas.size == 0:
        raise ValueError("alphas must be non-empty")
    if not np.isfinite(alphas).all() or (alphas <= 0).any():
        raise ValueError("alphas must be positive and finite")
    class_labels, y = _encode_labels(labels, class_labels)
    n, f = x.shape
    c = len(class_labels)
    if len(y) != n:
        raise ValueError(f"got {n} feature rows but {len(y)} labels")
    if c < 2:
        raise ValueError("need at least 2 classes")
    if n < c:
        raise ValueError(f"need at least as many samples ({n}) as classes ({c})")

    mean, scale = _standardize_fit(x)
    xs = (x - mean) / scale
    targets = np.full((n, c), -1.0)
    targets[np.arange(n), y] = 1.0
    intercepts = targets.mean(axis=0)
    yc = targets - intercepts

    # Gram-side ridge path: one factorization serves every alpha on the grid.
    gram = xs @ xs.T
    lam, q = np.linalg.eigh(gram)
    lam = np.maximum(lam, 0.0)
    qty = q.T @ yc
    best_alpha = None
    best_score = np.inf
    for alpha in alphas:
        shrink = lam / (lam + alpha)
        resid = (1.0 - shrink)[:, None] * qty
        rss = float(np.sum(resid * resid))
        denom = n - float(shrink.sum())
        score = n * rss / (denom * denom)
        if score < best_score:
            best_score = score
            best_alpha = float(alpha)

    dual = q @ (qty / (lam + best_alpha)[:, None])
    coefficients = (xs.T @ dual).T
    return RidgeModel(
        class_labels=class_labels,
        coefficients=_frozen(coefficients),
        intercepts=_frozen(intercepts),
        feature_means=_frozen(mean),
        feature_scales=_frozen(scale),
        alpha=best_alpha,
    )


def predict_scores(model: RidgeModel, features) -> np.ndarray:
    """Linear scores coefficients . standardize(features) + intercepts.

    Accepts a single feature vector (returns C scores) or an (N, F) matrix
    (returns N x C scores).
    """
    x, single = _as_features(features, expected=model.num_features)
    _check_finite(x, "features")
    xs = (x - model.feature_means) / model.feature_scales
    scores = xs @ model.coefficients.T + model.intercepts
    return scores[0] if single else scores


def predict_class(model: RidgeModel, features):
    """Argmax-decoded class; ties go to the lowest index in class_labels."""
    scores = predict_scores(model, features)
    if scores.ndim == 1:
        return model.class_labels[int(np.argmax(scores))]
    return [model.class_labels[i] for i in np.argmax(scores, axis=1)]


@dataclass(frozen=True)
class ClassifierBank:
    """M per-subcarrier RidgeModels sharing one class ordering.

    kernel_seed records the kernel set the feature columns came from (None
    when the features were not produced by this package's transform).
    """

    models: tuple[RidgeModel, ...]
    kernel_seed: int | None
    num_kernels: int

    def __post_init__(self):
        if not self.models:
            raise ValueError("a classifier bank needs at least one model")
        first = self.models[0]
        for m, model in enumerate(self.models):
            if model.class_labels != first.class_labels:
                raise ValueError(f"model {m} disagrees on class_labels")
            if model.num_features != first.num_features:
                raise ValueError(f"model {m} disagrees on feature length")

    @property
    def num_channels(self) -> int:
        return len(self.models)

    @property
    def num_classes(self) -> int:
        return self.models[0].num_classes

    @property
    def num_features(self) -> int:
        return self.models[0].num_features

    @property
    def class_labels(self) -> tuple:
        return self.models[0].class_labels


def fit_bank(
    features: np.ndarray,
    labels,
    alphas=DEFAULT_ALPHAS,
    class_labels=None,
    kernel_seed: int | None = None,
) -> ClassifierBank:
    """Fit one ridge model per channel from (n_samples, M, F) features.

    The models are mutually independent (no shared mutable state), so callers
    may fit them in parallel; this implementation loops.
    """
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 3:
        raise ValueError(f"expected (n_samples, channels, features), got {feats.shape}")
    labels = list(labels)
    if class_labels is None:
        class_labels = tuple(sorted(set(labels)))
    models = []
    for m in range(feats.shape[1]):
        try:
            models.append(fit_ridge(feats[:, m, :], labels, alphas, class_labels))
        except ValueError as exc:
            raise ValueError(f"channel {m}: {exc}") from None
    return ClassifierBank(
        models=tuple(models),
        kernel_seed=kernel_seed,
        num_kernels=feats.shape[2] // 2,
    )


def predict_bank_indices(bank: ClassifierBank, features: np.ndarray) -> np.ndarray:
    """Per-channel 1-based class predictions for (n_samples, M, F) features.

    Returns an (n_samples, M) integer matrix ready for voting: entry (i, m)
    is channel m's predicted class identifier in 1..C for sample i.
    """
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 3:
        raise ValueError(f"expected (n_samples, channels, features), got {feats.shape}")
    if feats.shape[1] != bank.num_channels:
        raise ValueError(
            f"channel count mismatch: bank has {bank.num_channels}, got {feats.shape[1]}"
        )
    out = np.empty((feats.shape[0], bank.num_channels), dtype=np.int64)
    for m, model in enumerate(bank.models):
        scores = predict_scores(model, feats[:, m, :])
        out[:, m] = np.argmax(scores, axis=1) + 1
    return out


def save_bank(bank: ClassifierBank, path) -> None:
    """Persist a bank to one .npz file, bit-exact."""
    path = Path(path)
    coefficients = np.stack([m.coefficients for m in bank.models])
    intercepts = np.stack([m.intercepts for m in bank.models])
    means = np.stack([m.feature_means for m in bank.models])
    scales = np.stack([m.feature_scales for m in bank.models])
    alphas = np.array([m.alpha for m in bank.models])
    np.savez_compressed(
        path,
        magic=np.array(_BANK_MAGIC),
        version=np.array(_BANK_VERSION, dtype=np.int64),
        class_labels=np.array([str(c) for c in bank.class_labels]),
        coefficients=coefficients,
        intercepts=intercepts,
        feature_means=means,
        feature_scales=scales,
        alphas=alphas,
        kernel_seed=np.array(-1 if bank.kernel_seed is None else bank.kernel_seed, dtype=np.int64),
        num_kernels=np.array(bank.num_kernels, dtype=np.int64),
    )


def load_bank(path) -> ClassifierBank:
    path = Path(path)
    with np.load(path, allow_pickle=False) as z:
        if "magic" not in z or str(z["magic"]) != _BANK_MAGIC:
            raise ValueError(f"{path} is not a {_BANK_MAGIC} file")
        version = int(z["version"])
        if version != _BANK_VERSION:
            raise ValueError(
                f"{path}: unsupported bank version {version} (expected {_BANK_VERSION})"
            )
        class_labels = tuple(str(c) for c in z["class_labels"])
        coefficients = z["coefficients"]
        intercepts = z["intercepts"]
        means = z["feature_means"]
        scales = z["feature_scales"]
        alphas = z["alphas"]
        seed = int(z["kernel_seed"])
        num_kernels = int(z["num_kernels"])
    models = tuple(
        RidgeModel(
            class_labels=class_labels,
            coefficients=_frozen(coefficients[m]),
            intercepts=_frozen(intercepts[m]),
            feature_means=_frozen(means[m]),
            feature_scales=_frozen(scales[m]),
            alpha=float(alphas[m]),
        )
        for m in range(coefficients.shape[0])
    )
    return ClassifierBank(
        models=models,
        kernel_seed=None if seed < 0 else seed,
        num_kernels=num_kernels,
    )
