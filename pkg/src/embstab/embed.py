"""Node embedders and the ``EMB1`` embedding file format.

Two embedders are provided: ``node2vec_lite`` (biased random walks fed to
skip-gram with negative sampling) and ``spectral_embed``, a deterministic
baseline whose repeated runs are identical and therefore perfectly stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from . import _kernels
from .errors import DataError
from .graph import Graph, PathType


@dataclass(frozen=True)
class EmbeddingMatrix:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim != 2:
            raise DataError("embedding must be a 2-D matrix")
        if not np.all(np.isfinite(v)):
            raise DataError("embedding contains non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def num_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Node2vecConfig:
    dim: int
    walks_per_node: int = 10
    walk_length: int = 50
    context_size: int = 5
    p: float = 1.0
    q: float = 1.0
    negative_samples: int = 5
    epochs: int = 1
    learning_rate: float = 0.025
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise DataError("dim must be >= 1")
        if self.walks_per_node < 1 or self.epochs < 1:
            raise DataError("walks_per_node and epochs must be >= 1")
        if not 1 <= self.context_size < self.walk_length:
            raise DataError("need 1 <= context_size < walk_length")
        if self.p <= 0 or self.q <= 0:
            raise DataError("p and q must be positive")
        if self.negative_samples < 1:
            raise DataError("negative_samples must be >= 1")
        if self.learning_rate <= 0:
            raise DataError("learning_rate must be positive")
        if self.seed < 0:
            raise DataError("seed must be nonnegative")


# Final learning rate as a fraction of the initial one.
LR_FLOOR = 1e-4


def node2vec_lite(graph: Graph, config: Node2vecConfig) -> EmbeddingMatrix:
    """Train a node2vec embedding.

    Walks start from every non-isolated node ``walks_per_node`` times (start
    order permuted per round). Training is sequential SGNS with a linearly
    decaying learning rate; the walk order is reshuffled every epoch. Only the
    input vectors are returned; isolated nodes keep their random
    initialization.
    """
    if graph.num_edges == 0:
        raise DataError("node2vec_lite needs a graph with at least one edge")
    n, dim = graph.num_nodes, config.dim
    init_rng, walk_rng, order_rng, neg_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(4)
    )
    emb_in = init_rng.uniform(-0.5 / dim, 0.5 / dim, size=(n, dim))
    emb_out = np.zeros((n, dim))

    indptr, indices = graph.csr()
    deg = graph.degrees()
    active = np.flatnonzero(deg > 0)
    starts = np.concatenate([walk_rng.permutation(active) for _ in range(config.walks_per_node)])
    uniforms = walk_rng.random((len(starts), config.walk_length - 1))
    walks = _kernels.biased_walks(indptr, indices, starts, uniforms, config.walk_length,
                                  1.0 / config.p, 1.0 / config.q)

    noise_prob, noise_alias = _kernels.alias_table(deg.astype(np.float64) ** 0.75)
    pairs_per_epoch = len(walks) * _kernels.count_pairs(config.walk_length, config.context_size)
    total = config.epochs * pairs_per_epoch
    step = 0
    state = np.uint64(neg_rng.integers(0, 2**63, dtype=np.uint64))
    for _ in range(config.epochs):
        order = order_rng.permutation(len(walks))
        step, state = _kernels.sgns_epoch(walks, order, emb_in, emb_out, noise_prob, noise_alias,
                                          config.negative_samples, np.uint64(state), config.context_size,
                                          config.learning_rate, LR_FLOOR, step, total)
    return EmbeddingMatrix(emb_in)


def normalized_adjacency(graph: Graph) -> np.ndarray:
    deg = graph.degrees().astype(np.float64)
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    return inv_sqrt[:, None] * graph.adjacency() * inv_sqrt[None, :]


def spectral_embed(graph: Graph, dim: int) -> EmbeddingMatrix:
    """Top-``dim`` eigenvectors of the symmetric normalized adjacency.

    Eigenpairs are ordered by decreasing ``|lambda|``, then decreasing
    ``lambda``. Each eigenvector's largest-magnitude entry (first one on ties)
    is made positive.
    """
    if not 1 <= dim <= graph.num_nodes:
        raise DataError(f"dim must be in [1, {graph.num_nodes}], got {dim}")
    evals, evecs = linalg.eigh(normalized_adjacency(graph))
    order = np.lexsort((-evals, -np.abs(evals)))[:dim]
    vecs = evecs[:, order]
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(dim)])
    signs[signs == 0] = 1.0
    return EmbeddingMatrix(vecs * signs)


def spectral_eigenvalues(graph: Graph, dim: int) -> np.ndarray:
    evals = linalg.eigvalsh(normalized_adjacency(graph))
    order = np.lexsort((-evals, -np.abs(evals)))[:dim]
    return evals[order]


def write_embedding(matrix: EmbeddingMatrix, path: PathType) -> None:
    n, d = matrix.values.shape
    with open(path, "w") as fh:
        fh.write(f"EMB1 {n} {d}\n")
        for i, row in enumerate(matrix.values):
            fh.write(str(i))
            for x in row:
                fh.write(" " + format(x, ".17g"))
            fh.write("\n")


def read_embedding(path: PathType, num_nodes: Optional[int] = None) -> EmbeddingMatrix:
    """Read an ``EMB1`` file; ``num_nodes``, if given, must match the header."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != "EMB1":
            raise DataError(f"{path}: bad header, expected 'EMB1 <N> <D>'")
        try:
            n, d = int(header[1]), int(header[2])
        except ValueError:
            raise DataError(f"{path}: bad header sizes") from None
        if num_nodes is not None and n != num_nodes:
            raise DataError(f"{path}: header says N={n}, expected {num_nodes}")
        values = np.empty((n, d))
        row = 0
        for lineno, line in enumerate(fh, 2):
            tok = line.split()
            if not tok:
                continue
            if row >= n:
                raise DataError(f"{path}:{lineno}: more than {n} rows")
            if len(tok) != d + 1:
                raise DataError(f"{path}:{lineno}: expected {d + 1} fields, got {len(tok)}")
            if tok[0] != str(row):
                raise DataError(f"{path}:{lineno}: expected node index {row}, got {tok[0]}")
            try:
                vals = [float(t) for t in tok[1:]]
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric token") from None
            if not all(math.isfinite(x) for x in vals):
                raise DataError(f"{path}:{lineno}: non-finite value")
            values[row] = vals
            row += 1
    if row != n:
        raise DataError(f"{path}: header says N={n} but found {row} rows")
    return EmbeddingMatrix(values)
