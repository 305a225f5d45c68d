"""Representational similarity between two embeddings of the same nodes.

Four measures are implemented: aligned cosine similarity (after orthogonal
Procrustes alignment), distance correlation over double-centered Euclidean
distance matrices, k-NN Jaccard similarity and second-order cosine
similarity. All take ``(N, D)`` and ``(N, D')`` arrays (or
``EmbeddingMatrix``) and return a float.

Conventions:

* cosine similarity involving a zero vector is 0;
* zero-norm rows rank last as k-NN candidates;
* k-NN ties are broken by ascending node index; a node is never its own
  neighbor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from .errors import DataError, NumericError, ShapeMismatchError, ZeroCovarianceError

DEFAULT_K = 10

# Row block size for k-NN queries; bounds memory at O(block * N).
_KNN_BLOCK = 1024
_PROFILE_BUDGET = 1 << 22  # gathered floats per block


def _as_array(z) -> np.ndarray:
    a = np.asarray(getattr(z, "values", z), dtype=np.float64)
    if a.ndim != 2:
        raise DataError(f"expected a 2-D embedding, got shape {a.shape}")
    return a


def _check_same_nodes(z1: np.ndarray, z2: np.ndarray) -> None:
    if z1.shape[0] != z2.shape[0]:
        raise ShapeMismatchError(f"node counts differ: {z1.shape[0]} vs {z2.shape[0]}")


def _check_finite(*arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericError("embedding contains non-finite values")


def _unit_rows(z: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(z, axis=1)
    out = np.zeros_like(z)
    nz = norms > 0
    out[nz] = z[nz] / norms[nz, None]
    return out


def _row_cosines(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", _unit_rows(a), _unit_rows(b))


# -- RSMs ------------------------------------------------------------------


@dataclass(frozen=True)
class RsmMatrix:
    values: np.ndarray
    centered: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DataError("RSM must be square")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def build_rsm(z, kind: str = "cosine") -> RsmMatrix:
    """Pairwise ``euclidean_distance`` or ``cosine`` matrix of the rows of ``z``."""
    z = _as_array(z)
    if kind == "euclidean_distance":
        s = cdist(z, z, metric="euclidean")
    elif kind == "cosine":
        u = _unit_rows(z)
        s = u @ u.T
        np.clip(s, -1.0, 1.0, out=s)
        # exact symmetry regardless of BLAS blocking
        s = 0.5 * (s + s.T)
        nz = np.linalg.norm(z, axis=1) > 0
        s[np.diag_indices_from(s)] = np.where(nz, 1.0, 0.0)
    else:
        raise DataError(f"unknown RSM kind {kind!r}")
    return RsmMatrix(s)


def double_center(s: np.ndarray) -> np.ndarray:
    """Subtract row and column means and add back the grand mean."""
    s = np.asarray(s, dtype=np.float64)
    row = s.mean(axis=1, keepdims=True)
    col = s.mean(axis=0, keepdims=True)
    grand = math.fsum(s.sum(axis=1)) / s.size
    return s - row - col + grand


def _dcov2(a: np.ndarray, b: np.ndarray) -> float:
    # per-row pairwise sums, then an exactly rounded sum over rows
    return math.fsum(np.einsum("ij,ij->i", a, b)) / a.size


# -- measures --------------------------------------------------------------


@dataclass(frozen=True)
class AlignmentMatrix:
    q: np.ndarray


def procrustes_align(z1, z2) -> AlignmentMatrix:
    """Orthogonal ``Q`` minimizing ``||z1 @ Q - z2||_F``.

    ``Q = U @ Vt`` for the SVD ``z1.T @ z2 = U diag(s) Vt``.
    """
    z1, z2 = _as_array(z1), _as_array(z2)
    if z1.shape != z2.shape:
        raise ShapeMismatchError(f"shapes differ: {z1.shape} vs {z2.shape}")
    _check_finite(z1, z2)
    try:
        u, _, vt = linalg.svd(z1.T @ z2)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"SVD failed: {exc}") from exc
    return AlignmentMatrix(u @ vt)


def aligned_cosine_similarity(z1, z2) -> float:
    z1, z2 = _as_array(z1), _as_array(z2)
    q = procrustes_align(z1, z2).q
    return float(np.mean(_row_cosines(z1 @ q, z2)))


def distance_correlation(z1, z2) -> float:
    """Sample distance correlation of two point clouds on the same nodes.

    Dimensions may differ. Raises ``ZeroCovarianceError`` if all points of
    either cloud coincide.
    """
    z1, z2 = _as_array(z1), _as_array(z2)
    _check_same_nodes(z1, z2)
    if z1.shape[0] < 2:
        raise DataError("distance correlation needs at least two nodes")
    _check_finite(z1, z2)
    a = double_center(build_rsm(z1, "euclidean_distance").values)
    b = double_center(build_rsm(z2, "euclidean_distance").values)
    vaa, vbb = _dcov2(a, a), _dcov2(b, b)
    if vaa <= 0.0 or vbb <= 0.0:
        raise ZeroCovarianceError("zero distance variance: all points coincide")
    vab = max(_dcov2(a, b), 0.0)
    return min(math.sqrt(vab / math.sqrt(vaa * vbb)), 1.0)


@dataclass(frozen=True)
class NeighborIndex:
    neighbors: np.ndarray  # (N, min(k, N-1)) node indices, nearest first
    k: int


def knn_index(z, k: int = DEFAULT_K) -> NeighborIndex:
    """Exact cosine k-NN lists, self excluded, ties by ascending index."""
    if k < 1:
        raise DataError("k must be >= 1")
    z = _as_array(z)
    n = z.shape[0]
    kk = min(k, n - 1)
    u = _unit_rows(z)
    zero = np.linalg.norm(z, axis=1) == 0
    out = np.empty((n, max(kk, 0)), dtype=np.int64)
    if kk <= 0:
        return NeighborIndex(out, k)
    # GEMM may round columns differently; scoring against unique rows makes duplicates tie exactly
    uniq, inv = np.unique(u, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    for start in range(0, n, _KNN_BLOCK):
        stop = min(start + _KNN_BLOCK, n)
        # rank key: -cos in [-1, 1]; zero rows 2; self 3 so it never enters the top kk
        key = -(u[start:stop] @ uniq.T)[:, inv]
        key[:, zero] = 2.0
        key[zero[start:stop], :] = 2.0
        rows = np.arange(stop - start)
        key[rows, rows + start] = 3.0
        part = np.argpartition(key, kk - 1, axis=1)[:, :kk]
        pk = np.take_along_axis(key, part, axis=1)
        order = np.lexsort((part, pk), axis=-1)
        block = np.take_along_axis(part, order, axis=1)
        # a tie at the boundary value may have been cut arbitrarily; redo those rows exactly
        tied = np.count_nonzero(key <= pk.max(axis=1, keepdims=True), axis=1) > kk
        if np.any(tied):
            block[tied] = np.argsort(key[tied], axis=1, kind="stable")[:, :kk]
        out[start:stop] = block
    return NeighborIndex(out, k)


def _overlap(n1: np.ndarray, n2: np.ndarray) -> np.ndarray:
    """(n, k) mask: which entries of each ``n2`` row also occur in the ``n1`` row."""
    return (n2[:, :, None] == n1[:, None, :]).any(axis=2)


def knn_jaccard(z1, z2, k: int = DEFAULT_K) -> float:
    z1, z2 = _as_array(z1), _as_array(z2)
    _check_same_nodes(z1, z2)
    n1, n2 = knn_index(z1, k).neighbors, knn_index(z2, k).neighbors
    if n1.shape[1] == 0:
        raise DataError("k-NN needs at least two nodes")
    inter = _overlap(n1, n2).sum(axis=1)
    return float(np.mean(inter / (2 * n1.shape[1] - inter)))


def _profiles(u: np.ndarray, rows: np.ndarray, cand: np.ndarray) -> np.ndarray:
    return np.clip(np.einsum("bjd,bd->bj", u[cand], u[rows]), -1.0, 1.0)


def second_order_cosine(z1, z2, k: int = DEFAULT_K) -> float:
    """Mean cosine between cosine-similarity profiles over the union of k-NN sets.

    An instance whose profile is all zeros in either embedding contributes 0.
    """
    z1, z2 = _as_array(z1), _as_array(z2)
    _check_same_nodes(z1, z2)
    n1, n2 = knn_index(z1, k).neighbors, knn_index(z2, k).neighbors
    if n1.shape[1] == 0:
        raise DataError("k-NN needs at least two nodes")
    u1, u2 = _unit_rows(z1), _unit_rows(z2)
    # union = n1 row plus the n2 entries it lacks; repeated entries get weight 0
    cand = np.concatenate([n1, n2], axis=1)
    keep = np.concatenate([np.ones(n1.shape, bool), ~_overlap(n1, n2)], axis=1)
    n = len(n1)
    scores = np.empty(n)
    block = max(1, _PROFILE_BUDGET // (cand.shape[1] * max(z1.shape[1], z2.shape[1])))
    for start in range(0, n, block):
        sl = slice(start, min(start + block, n))
        rows = np.arange(sl.start, sl.stop)
        p1 = _profiles(u1, rows, cand[sl]) * keep[sl]
        p2 = _profiles(u2, rows, cand[sl]) * keep[sl]
        norm = np.linalg.norm(p1, axis=1) * np.linalg.norm(p2, axis=1)
        dot = np.sum(p1 * p2, axis=1)
        ok = norm > 0
        scores[sl] = np.where(ok, dot / np.where(ok, norm, 1.0), 0.0)
    return float(np.mean(scores))


MEASURES = {
    "aligned_cos": lambda a, b, k=DEFAULT_K: aligned_cosine_similarity(a, b),
    "dist_corr": lambda a, b, k=DEFAULT_K: distance_correlation(a, b),
    "knn_jaccard": knn_jaccard,
    "second_cos": second_order_cosine,
}


def compare(measure: str, z1, z2, k: int = DEFAULT_K) -> float:
    """Evaluate a representational measure by its report name."""
    try:
        fn = MEASURES[measure]
    except KeyError:
        raise DataError(f"unknown representational measure {measure!r}") from None
    return fn(z1, z2, k)
