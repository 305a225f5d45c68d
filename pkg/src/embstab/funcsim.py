"""Functional similarity between classifier outputs, plus the ``OUT1`` format.

Outputs are ``(n, C)`` row-stochastic matrices of class probabilities. Hard
predictions are row-wise argmaxes with ties going to the lowest class index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError, DegenerateNormalizationError, ShapeMismatchError
from .graph import Graph, PathType, load_labels

ROW_SUM_TOL = 1e-6
JSD_EPS = 1e-12


@dataclass(frozen=True)
class OutputMatrix:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim != 2:
            raise DataError("output matrix must be 2-D")
        if not np.all(np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
            raise DataError("output entries must lie in [0, 1]")
        if v.shape[0] and np.max(np.abs(v.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise DataError(f"output rows must sum to 1 within {ROW_SUM_TOL}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def num_classes(self) -> int:
        return self.values.shape[1]


def _values(o) -> np.ndarray:
    if isinstance(o, OutputMatrix):
        return o.values
    return OutputMatrix(o).values


def _pair(o1, o2):
    a, b = _values(o1), _values(o2)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"output shapes differ: {a.shape} vs {b.shape}")
    return a, b


def _labels(labels, n: int) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != (n,):
        raise ShapeMismatchError(f"expected {n} labels, got shape {y.shape}")
    return y


def hard_predictions(o) -> np.ndarray:
    # np.argmax returns the first maximal index
    return np.argmax(_values(o), axis=1)


def disagreement(o1, o2) -> float:
    a, b = _pair(o1, o2)
    if a.shape[0] == 0:
        raise DataError("no instances")
    return float(np.mean(hard_predictions(a) != hard_predictions(b)))


def error_rate(o, labels) -> float:
    v = _values(o)
    y = _labels(labels, v.shape[0])
    if v.shape[0] == 0:
        raise DataError("no instances")
    if np.any(y < 0) or np.any(y >= v.shape[1]):
        raise DataError("label out of class range")
    return float(np.mean(hard_predictions(v) != y))


def minmax_normalized_disagreement(o1, o2, labels) -> float:
    """Disagreement rescaled between its minimum and maximum given both error rates.

    Raises ``DegenerateNormalizationError`` when the bounds coincide.
    """
    a, b = _pair(o1, o2)
    d = disagreement(a, b)
    e1, e2 = error_rate(a, labels), error_rate(b, labels)
    d_min = abs(e1 - e2)
    d_max = min(e1 + e2, 1.0)
    if d_max - d_min <= 0.0:
        raise DegenerateNormalizationError(
            f"norm_disagreement undefined: error rates {e1:.6g} and {e2:.6g} give d_max == d_min")
    return (d - d_min) / (d_max - d_min)


def stable_core(outputs: Sequence) -> float:
    """Fraction of instances on which every output predicts the same class."""
    if len(outputs) < 2:
        raise DataError("stable core needs at least two outputs")
    vals = [_values(o) for o in outputs]
    if any(v.shape != vals[0].shape for v in vals):
        raise ShapeMismatchError("outputs must share one shape")
    stacked = np.stack([hard_predictions(v) for v in vals])
    if stacked.shape[1] == 0:
        raise DataError("no instances")
    return float(np.mean(np.all(stacked == stacked[0], axis=0)))


def _smooth(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, JSD_EPS, 1.0)
    return p / p.sum(axis=1, keepdims=True)


def mean_jsd(o1, o2, base: float = math.e) -> float:
    """Mean Jensen-Shannon divergence over instance rows (natural log by default)."""
    a, b = _pair(o1, o2)
    if a.shape[0] == 0:
        raise DataError("no instances")
    p, q = _smooth(a), _smooth(b)
    m = 0.5 * (p + q)
    kl_pm = np.sum(p * np.log(p / m), axis=1)
    kl_qm = np.sum(q * np.log(q / m), axis=1)
    jsd = 0.5 * math.fsum(kl_pm + kl_qm) / a.shape[0]
    jsd = min(max(jsd, 0.0), math.log(2.0))
    return jsd / math.log(base)


PAIRWISE = {
    "disagreement": lambda a, b, y=None: disagreement(a, b),
    "norm_disagreement": minmax_normalized_disagreement,
    "jsd": lambda a, b, y=None: mean_jsd(a, b),
}


def write_output(o, path: PathType) -> None:
    v = _values(o)
    with open(path, "w") as fh:
        fh.write(f"OUT1 {v.shape[0]} {v.shape[1]}\n")
        for row in v:
            fh.write(" ".join(format(x, ".17g") for x in row) + "\n")


def read_output(path: PathType) -> OutputMatrix:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != "OUT1":
            raise DataError(f"{path}: bad header, expected 'OUT1 <n> <C>'")
        try:
            n, c = int(header[1]), int(header[2])
        except ValueError:
            raise DataError(f"{path}: bad header sizes") from None
        rows = []
        for lineno, line in enumerate(fh, 2):
            tok = line.split()
            if not tok:
                continue
            if len(tok) != c:
                raise DataError(f"{path}:{lineno}: expected {c} values, got {len(tok)}")
            try:
                rows.append([float(t) for t in tok])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric token") from None
    if len(rows) != n:
        raise DataError(f"{path}: header says n={n} but found {len(rows)} rows")
    return OutputMatrix(np.array(rows, dtype=np.float64).reshape(n, c))


def write_eval_labels(labels, path: PathType) -> None:
    """Labels of evaluated instances, ``position class`` per line in file order."""
    with open(path, "w") as fh:
        for i, y in enumerate(np.asarray(labels, dtype=np.int64)):
            fh.write(f"{i} {y}\n")


def read_eval_labels(path: PathType, n: int) -> np.ndarray:
    g = load_labels(path, Graph(n, np.empty((0, 2), np.int64)))
    if np.any(g.labels < 0):
        raise DataError(f"{path}: every evaluated instance needs a label")
    return g.labels.copy()
