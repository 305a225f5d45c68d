"""Multinomial logistic regression on embedding rows.

Training is deterministic full-batch proximal gradient descent on the mean
softmax cross-entropy plus ``(l2_strength / 2) * ||W||^2`` (bias not
penalized). Features are standardized with training-split statistics; the
returned model has the standardization folded into its weights, so it acts on
raw embedding rows.

Regularization is stored as ``l2_strength``; an inverse-regularization grid
value ``C`` maps to ``l2_strength = 1 / C``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import log_softmax

from .errors import DataError, NumericError, ShapeMismatchError
from .funcsim import OutputMatrix, error_rate
from .graph import PathType, SplitSpec

log = logging.getLogger(__name__)

# Inverse-regularization grid C = 10^i, -8 <= i <= 5.
INVERSE_REG_GRID = tuple(10.0 ** i for i in range(-8, 6))
DEFAULT_L2_GRID = tuple(1.0 / c for c in INVERSE_REG_GRID)


@dataclass(frozen=True)
class LogRegModel:
    weights: np.ndarray  # (C, D)
    bias: np.ndarray  # (C,)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True)
        b = np.array(self.bias, dtype=np.float64, copy=True)
        if w.ndim != 2 or b.shape != (w.shape[0],):
            raise DataError("weights must be (C, D) and bias (C,)")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise NumericError("model has non-finite parameters")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    l2_strength: float = 1e-4
    learning_rate: float = 1.0
    max_epochs: int = 500
    tolerance: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.l2_strength < 0:
            raise DataError("l2_strength must be >= 0")
        if self.learning_rate <= 0:
            raise DataError("learning_rate must be positive")
        if self.max_epochs < 1:
            raise DataError("max_epochs must be >= 1")


def loss_and_grad(w: np.ndarray, b: np.ndarray, x: np.ndarray, y: np.ndarray, l2: float):
    """Objective value and gradients ``(loss, dW, db)`` for labels ``y``."""
    n = x.shape[0]
    logp = log_softmax(x @ w.T + b, axis=1)
    loss = -logp[np.arange(n), y].mean() + 0.5 * l2 * float(np.sum(w * w))
    resid = np.exp(logp)
    resid[np.arange(n), y] -= 1.0
    resid /= n
    return float(loss), resid.T @ x + l2 * w, resid.sum(axis=0)


def _standardize_stats(x: np.ndarray):
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    sd[sd == 0] = 1.0
    return mu, sd


def _step_size(x: np.ndarray, cap: float) -> float:
    # 1/L for the cross-entropy part, L <= 0.5 * lambda_max([X 1]^T [X 1] / n)
    xa = np.hstack([x, np.ones((x.shape[0], 1))])
    lam = np.linalg.eigvalsh(xa.T @ xa / x.shape[0])[-1]
    return min(cap, 1.0 / (0.5 * lam)) if lam > 0 else cap


def train_logreg(z, labels, split: SplitSpec, config: TrainConfig = TrainConfig(),
                 num_classes: Optional[int] = None) -> LogRegModel:
    """Fit a softmax classifier on the training rows of ``z``.

    ``num_classes`` defaults to one more than the largest label. Raises
    ``DataError`` for an empty or single-class training set.
    """
    zv = np.asarray(getattr(z, "values", z), dtype=np.float64)
    y_all = np.asarray(labels, dtype=np.int64)
    if y_all.shape != (zv.shape[0],) or split.train_mask.shape != y_all.shape:
        raise ShapeMismatchError("embedding, labels and split must cover the same nodes")
    train = split.train_mask
    x, y = zv[train], y_all[train]
    if len(y) == 0:
        raise DataError("empty training set")
    if np.any(y < 0):
        raise DataError("unlabeled node in training mask")
    c = int(num_classes if num_classes is not None else y_all.max() + 1)
    if len(np.unique(y)) < 2:
        raise DataError("training set has a single class")

    mu, sd = _standardize_stats(x)
    xs = (x - mu) / sd
    lr = _step_size(xs, config.learning_rate)
    w, b = _descend(xs, y, c, lr, config.l2_strength, config.max_epochs, config.tolerance)
    w_raw = w / sd
    return LogRegModel(w_raw, b - w_raw @ mu)


def _descend(xs, y, c, lr, l2, max_epochs, tol, history=None):
    w = np.zeros((c, xs.shape[1]))
    b = np.zeros(c)
    for epoch in range(max_epochs):
        loss, gw, gb = loss_and_grad(w, b, xs, y, l2)
        if not np.isfinite(loss):
            raise NumericError(f"non-finite training loss at epoch {epoch}")
        if history is not None:
            history.append(loss)
        if np.sqrt(np.sum(gw * gw) + np.sum(gb * gb)) < tol:
            break
        # proximal step on the L2 term keeps any l2_strength stable
        w = (w - lr * (gw - l2 * w)) / (1.0 + lr * l2)
        b = b - lr * gb
    return w, b


def training_curve(z, labels, split: SplitSpec, config: TrainConfig) -> np.ndarray:
    """Objective per epoch in standardized space at the uncapped ``learning_rate``."""
    zv = np.asarray(getattr(z, "values", z), dtype=np.float64)
    y_all = np.asarray(labels, dtype=np.int64)
    x, y = zv[split.train_mask], y_all[split.train_mask]
    mu, sd = _standardize_stats(x)
    history = []
    _descend((x - mu) / sd, y, int(y_all.max()) + 1, config.learning_rate, config.l2_strength,
             config.max_epochs, 0.0, history)
    return np.array(history)


def predict_proba(model: LogRegModel, z, mask: Optional[np.ndarray] = None) -> OutputMatrix:
    """Softmax outputs for the masked nodes, in ascending node order."""
    zv = np.asarray(getattr(z, "values", z), dtype=np.float64)
    if zv.ndim != 2 or zv.shape[1] != model.dim:
        raise ShapeMismatchError(f"model expects dim {model.dim}, embedding has shape {zv.shape}")
    if mask is not None:
        zv = zv[np.asarray(mask, dtype=bool)]
    p = np.exp(log_softmax(zv @ model.weights.T + model.bias, axis=1))
    return OutputMatrix(p / p.sum(axis=1, keepdims=True))


def accuracy(o, labels) -> float:
    return 1.0 - error_rate(o, labels)


def select_l2(z, labels, split: SplitSpec, grid: Sequence[float] = DEFAULT_L2_GRID,
              config: TrainConfig = TrainConfig(), num_classes: Optional[int] = None) -> float:
    """Grid value with the best validation accuracy; ties go to the larger value."""
    if len(grid) == 0:
        raise DataError("empty regularization grid")
    if not np.any(split.val_mask):
        raise DataError("validation mask is empty")
    y_val = np.asarray(labels, dtype=np.int64)[split.val_mask]
    best, best_acc = None, -1.0
    for l2 in sorted(grid, reverse=True):
        model = train_logreg(z, labels, split, replace(config, l2_strength=float(l2)), num_classes)
        acc = accuracy(predict_proba(model, z, split.val_mask), y_val)
        log.debug("l2=%g val_acc=%.4f", l2, acc)
        if acc > best_acc:
            best, best_acc = float(l2), acc
    return best


def save_model(model: LogRegModel, path: PathType) -> None:
    with open(path, "w") as fh:
        fh.write(f"LRM1 {model.num_classes} {model.dim}\n")
        for row in model.weights:
            fh.write(" ".join(format(x, ".17g") for x in row) + "\n")
        fh.write(" ".join(format(x, ".17g") for x in model.bias) + "\n")


def load_model(path: PathType) -> LogRegModel:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != "LRM1":
            raise DataError(f"{path}: bad header, expected 'LRM1 <C> <D>'")
        c, d = int(header[1]), int(header[2])
        rows = [line.split() for line in fh if line.strip()]
    if len(rows) != c + 1 or any(len(r) != d for r in rows[:c]) or len(rows[-1]) != c:
        raise DataError(f"{path}: expected {c} weight rows of {d} values and one bias row of {c}")
    try:
        w = np.array([[float(t) for t in r] for r in rows[:c]]).reshape(c, d)
        b = np.array([float(t) for t in rows[-1]])
    except ValueError:
        raise DataError(f"{path}: non-numeric token") from None
    return LogRegModel(w, b)
