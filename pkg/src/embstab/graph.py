"""Graphs: edge-list/label ingestion, SBM generation and stratified splits.

Graphs are undirected and unweighted. Edges are stored canonically as an
``(M, 2)`` int64 array with ``u < v`` in each row, rows sorted
lexicographically. Node labels use ``-1`` for unlabeled nodes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from os import PathLike
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DataError

log = logging.getLogger(__name__)

PathType = Union[str, PathLike]

UNLABELED = -1


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def canonical_edges(pairs: np.ndarray) -> Tuple[np.ndarray, int]:
    """Symmetrize, deduplicate and sort an array of node pairs.

    Returns the canonical ``(M, 2)`` edge array and the number of self-loop
    entries that were dropped.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    loops = pairs[:, 0] == pairs[:, 1]
    n_loops = int(loops.sum())
    pairs = pairs[~loops]
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    edges = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(lo) else np.empty((0, 2), np.int64)
    return edges.astype(np.int64, copy=False), n_loops


@dataclass(frozen=True)
class Graph:
    num_nodes: int
    edges: np.ndarray
    labels: Optional[np.ndarray] = None
    num_classes: Optional[int] = None

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.num_nodes < 0:
            raise DataError("num_nodes must be nonnegative")
        if len(edges):
            if edges.min() < 0 or edges.max() >= self.num_nodes:
                raise DataError("edge endpoint out of range [0, %d)" % self.num_nodes)
            if np.any(edges[:, 0] == edges[:, 1]):
                raise DataError("self-loops are not allowed")
            canon, _ = canonical_edges(edges)
            if len(canon) != len(edges):
                raise DataError("duplicate undirected edges")
            edges = canon
        object.__setattr__(self, "edges", _frozen(edges.copy()))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64).copy()
            if labels.shape != (self.num_nodes,):
                raise DataError("labels must have length num_nodes")
            num_classes = self.num_classes
            if num_classes is None:
                num_classes = int(labels.max()) + 1 if np.any(labels >= 0) else 0
            if np.any(labels < UNLABELED) or np.any(labels >= num_classes):
                raise DataError("labels must lie in {-1, 0, ..., C-1}")
            object.__setattr__(self, "labels", _frozen(labels))
            object.__setattr__(self, "num_classes", int(num_classes))
        elif self.num_classes is not None:
            raise DataError("num_classes given without labels")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def is_labeled(self) -> bool:
        return self.labels is not None

    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.edges.ravel(), minlength=self.num_nodes)
        return deg.astype(np.int64)

    def csr(self) -> Tuple[np.ndarray, np.ndarray]:
        """Symmetric adjacency in CSR form with sorted neighbor lists."""
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        order = np.lexsort((dst, src))
        indptr = np.zeros(self.num_nodes + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.num_nodes), out=indptr[1:])
        return indptr, dst[order].astype(np.int64)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.num_nodes, self.num_nodes))
        a[self.edges[:, 0], self.edges[:, 1]] = 1.0
        a[self.edges[:, 1], self.edges[:, 0]] = 1.0
        return a

    def with_labels(self, labels, num_classes: Optional[int] = None) -> "Graph":
        return Graph(self.num_nodes, self.edges, labels, num_classes)


@dataclass(frozen=True)
class SplitSpec:
    train_mask: np.ndarray
    val_mask: np.ndarray
    test_mask: np.ndarray

    def __post_init__(self):
        masks = [np.asarray(m, dtype=bool).copy() for m in (self.train_mask, self.val_mask, self.test_mask)]
        if not (masks[0].shape == masks[1].shape == masks[2].shape) or masks[0].ndim != 1:
            raise DataError("split masks must be 1-D and of equal length")
        if np.any(masks[0] & masks[1]) or np.any(masks[0] & masks[2]) or np.any(masks[1] & masks[2]):
            raise DataError("split masks overlap")
        for name, m in zip(("train_mask", "val_mask", "test_mask"), masks):
            object.__setattr__(self, name, _frozen(m))


@dataclass(frozen=True)
class SbmConfig:
    block_sizes: Tuple[int, ...]
    p_in: float
    p_out: float
    seed: int = 0

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.block_sizes)
        object.__setattr__(self, "block_sizes", sizes)
        if not sizes or any(s <= 0 for s in sizes):
            raise DataError("block_sizes must be nonempty and positive")
        if not (0.0 <= self.p_out <= self.p_in <= 1.0):
            raise DataError("need 0 <= p_out <= p_in <= 1")
        if self.seed < 0:
            raise DataError("seed must be nonnegative")


def _parse_int_pairs(path: PathType, what: str) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            tok = s.split()
            if len(tok) != 2:
                raise DataError(f"{path}:{lineno}: expected two integers in {what}, got {s!r}")
            try:
                rows.append((int(tok[0]), int(tok[1])))
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer token in {what}: {s!r}") from None
    return np.array(rows, dtype=np.int64).reshape(-1, 2)


def load_edge_list(path: PathType, num_nodes: Optional[int] = None) -> Graph:
    """Read a whitespace-separated ``u v`` edge list.

    Directed duplicates are collapsed and self-loops dropped (with a logged
    count). ``num_nodes`` defaults to the largest index plus one.
    """
    pairs = _parse_int_pairs(path, "edge list")
    if len(pairs) and pairs.min() < 0:
        raise DataError(f"{path}: negative node index")
    n = int(pairs.max()) + 1 if len(pairs) else 0
    if num_nodes is not None:
        if n > num_nodes:
            raise DataError(f"{path}: node index {n - 1} >= declared num_nodes {num_nodes}")
        n = int(num_nodes)
    edges, n_loops = canonical_edges(pairs)
    if n_loops:
        log.warning("%s: dropped %d self-loop entries", path, n_loops)
    return Graph(n, edges)


def save_edge_list(graph: Graph, path: PathType) -> None:
    with open(path, "w") as fh:
        fh.write(f"# nodes {graph.num_nodes} edges {graph.num_edges}\n")
        for u, v in graph.edges:
            fh.write(f"{u} {v}\n")


def load_labels(path: PathType, graph: Graph) -> Graph:
    """Attach ``node class`` labels to ``graph``; nodes not listed stay unlabeled."""
    pairs = _parse_int_pairs(path, "label file")
    labels = np.full(graph.num_nodes, UNLABELED, dtype=np.int64)
    seen = np.zeros(graph.num_nodes, dtype=bool)
    for node, cls in pairs:
        if not 0 <= node < graph.num_nodes:
            raise DataError(f"{path}: node index {node} out of range")
        if cls < 0:
            raise DataError(f"{path}: negative class {cls} for node {node}")
        if seen[node]:
            raise DataError(f"{path}: duplicate label for node {node}")
        seen[node] = True
        labels[node] = cls
    return graph.with_labels(labels)


def save_labels(graph: Graph, path: PathType) -> None:
    if graph.labels is None:
        raise DataError("graph has no labels")
    with open(path, "w") as fh:
        for node, cls in enumerate(graph.labels):
            if cls >= 0:
                fh.write(f"{node} {cls}\n")


def generate_sbm(config: SbmConfig) -> Graph:
    """Sample a stochastic block model graph; labels are block memberships."""
    rng = np.random.default_rng(config.seed)
    sizes = config.block_sizes
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    chunks = []
    for a in range(len(sizes)):
        for b in range(a, len(sizes)):
            p = config.p_in if a == b else config.p_out
            draw = rng.random((sizes[a], sizes[b])) < p
            if a == b:
                draw = np.triu(draw, k=1)
            u, v = np.nonzero(draw)
            chunks.append(np.stack([u + offsets[a], v + offsets[b]], axis=1))
    edges, _ = canonical_edges(np.concatenate(chunks) if chunks else np.empty((0, 2)))
    labels = np.repeat(np.arange(len(sizes)), sizes)
    return Graph(int(offsets[-1]), edges, labels, len(sizes))


def split_nodes(graph: Graph, fractions: Sequence[float] = (0.7, 0.1, 0.2), seed: int = 0) -> SplitSpec:
    """Stratified random train/val/test split over labeled nodes.

    Per class, counts are rounded to the nearest node; if rounding
    overshoots the class size, test then validation counts are trimmed.
    A class with any requested train fraction keeps at least one train node.
    """
    if graph.labels is None:
        raise DataError("split_nodes needs a labeled graph")
    fr = [float(f) for f in fractions]
    if len(fr) != 3 or min(fr) < 0 or sum(fr) > 1 + 1e-12:
        raise DataError("fractions must be three nonnegative values summing to <= 1")
    rng = np.random.default_rng(seed)
    masks = [np.zeros(graph.num_nodes, dtype=bool) for _ in range(3)]
    for cls in range(graph.num_classes):
        members = np.flatnonzero(graph.labels == cls)
        n_c = len(members)
        if n_c == 0:
            continue
        members = rng.permutation(members)
        counts = [int(round(f * n_c)) for f in fr]
        if fr[0] > 0 and counts[0] == 0:
            counts[0] = 1
        for j in (2, 1, 0):
            excess = sum(counts) - n_c
            if excess <= 0:
                break
            counts[j] -= min(excess, counts[j] - (1 if j == 0 and fr[0] > 0 else 0))
        start = 0
        for m, c in zip(masks, counts):
            m[members[start:start + c]] = True
            start += c
    return SplitSpec(*masks)
