"""Linear probe for checking how much task signal survives the pipeline.

Images are block-averaged to a small grid, flattened, standardized with
training statistics, and fed to softmax regression trained by full-batch
gradient descent from zero init. Everything is deterministic: no sampling,
no randomized solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import ValidationError

FEATURE_GRID = 8


def downsample_features(image: np.ndarray, grid: int = FEATURE_GRID) -> np.ndarray:
    """Block-average a (C, H, W) image to (C, grid, grid) and flatten."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3:
        raise ValidationError(f"expected (C, H, W) image, got shape {arr.shape}")
    channels, height, width = arr.shape
    if height < grid or width < grid:
        raise ValidationError(f"image {height}x{width} smaller than {grid}x{grid} grid")
    ys = (np.arange(grid + 1) * height) // grid
    xs = (np.arange(grid + 1) * width) // grid
    out = np.empty((channels, grid, grid))
    for i in range(grid):
        for j in range(grid):
            out[:, i, j] = arr[:, ys[i]:ys[i + 1], xs[j]:xs[j + 1]].mean(axis=(1, 2))
    return out.reshape(-1)


@dataclass
class LinearProbe:
    classes: List[str]
    weights: np.ndarray  # (n_features + 1, n_classes); last row is the bias
    feature_mean: np.ndarray
    feature_scale: np.ndarray

    def predict(self, features: np.ndarray) -> np.ndarray:
        x = (np.atleast_2d(features) - self.feature_mean) / self.feature_scale
        logits = x @ self.weights[:-1] + self.weights[-1]
        return np.argmax(logits, axis=1)


def train_probe(features: np.ndarray, labels: Sequence[str], *,
                epochs: int = 400, learning_rate: float = 0.5) -> LinearProbe:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != len(labels):
        raise ValidationError("features must be (n_samples, n_features) matching labels")
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ValidationError("need at least two classes to train a probe")
    index = {c: i for i, c in enumerate(classes)}
    y = np.array([index[l] for l in labels])
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale < 1e-12] = 1.0
    xs = (x - mean) / scale
    n, d = xs.shape
    k = len(classes)
    weights = np.zeros((d + 1, k))
    onehot = np.zeros((n, k))
    onehot[np.arange(n), y] = 1.0
    for _ in range(epochs):
        logits = xs @ weights[:-1] + weights[-1]
        logits -= logits.max(axis=1, keepdims=True)
        probs = np.exp(logits)
        probs /= probs.sum(axis=1, keepdims=True)
        err = (probs - onehot) / n
        weights[:-1] -= learning_rate * (xs.T @ err)
        weights[-1] -= learning_rate * err.sum(axis=0)
    return LinearProbe(classes=classes, weights=weights, feature_mean=mean, feature_scale=scale)


@dataclass
class SplitMetrics:
    accuracy: float
    precision: float  # macro average
    recall: float
    f1: float
    count: int


def score_predictions(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> SplitMetrics:
    """Accuracy plus macro precision/recall/F1.

    F1 is the harmonic mean of each class's precision and recall before the
    macro average; empty denominators count as zero.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0:
        raise ValidationError("cannot score an empty split")
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        confusion[t, p] += 1
    precisions, recalls, f1s = [], [], []
    for c in range(n_classes):
        tp = confusion[c, c]
        fp = confusion[:, c].sum() - tp
        fn = confusion[c, :].sum() - tp
        prec = tp / (tp + fp) if tp + fp > 0 else 0.0
        rec = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2.0 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
        precisions.append(prec)
        recalls.append(rec)
        f1s.append(f1)
    return SplitMetrics(
        accuracy=float(np.trace(confusion)) / float(y_true.size),
        precision=float(np.mean(precisions)),
        recall=float(np.mean(recalls)),
        f1=float(np.mean(f1s)),
        count=int(y_true.size),
    )


@dataclass
class UtilityResult:
    classifier: str
    trained_on: str  # which image variant supplied the pixels
    classes: List[str]
    splits: Dict[str, SplitMetrics] = field(default_factory=dict)

    def accuracy(self, split: str = "test") -> float:
        return self.splits[split].accuracy


def run_utility(train_images: Sequence[np.ndarray], train_labels: Sequence[str],
                test_images: Sequence[np.ndarray], test_labels: Sequence[str],
                trained_on: str = "images") -> UtilityResult:
    """Train the probe on one split and score both."""
    if len(train_images) != len(train_labels) or len(test_images) != len(test_labels):
        raise ValidationError("images and labels must pair up")
    if not train_images or not test_images:
        raise ValidationError("both splits must be non-empty")
    x_train = np.stack([downsample_features(img) for img in train_images])
    x_test = np.stack([downsample_features(img) for img in test_images])
    probe = train_probe(x_train, train_labels)
    index = {c: i for i, c in enumerate(probe.classes)}
    unknown = sorted(set(test_labels) - set(probe.classes))
    if unknown:
        raise ValidationError(f"test labels missing from training split: {unknown}")
    result = UtilityResult(classifier="softmax-regression", trained_on=trained_on,
                           classes=list(probe.classes))
    for split, x, labels in (("train", x_train, train_labels), ("test", x_test, test_labels)):
        y_true = np.array([index[l] for l in labels])
        y_pred = probe.predict(x)
        result.splits[split] = score_predictions(y_true, y_pred, len(probe.classes))
    return result
