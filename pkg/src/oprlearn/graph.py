"""k-nearest-neighbour similarity graphs and their normalized adjacency.

Edge weights use the Gaussian kernel ``exp(-||x_i - x_j||^2 / sigma^2)``
where ``sigma`` is the mean distance from each point to its k-th nearest
neighbour. A pair is connected when either endpoint selects the other.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp


def _sq_dists_to(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    # single formula shared by batch and incremental paths so both agree bitwise
    return ((points - x) ** 2).sum(axis=1)


def compute_bandwidth(points, k: int) -> float:
    """Mean l2 distance from each point to its k-th nearest neighbour."""
    points = np.asarray(points, dtype=np.float64)
    t = points.shape[0]
    if t < 2:
        raise ValueError("bandwidth undefined for fewer than two points")
    if not 1 <= k <= t - 1:
        raise ValueError(f"k must lie in [1, {t - 1}]")
    total = 0.0
    for i in range(t):
        d2 = _sq_dists_to(points, points[i])
        d2[i] = np.inf
        total += np.sqrt(np.partition(d2, k - 1)[k - 1])
    return total / t


@dataclass(frozen=True)
class SparseAdjacency:
    """Snapshot of a k-NN similarity graph.

    ``neighbors[i]`` lists the (up to) ``knn_k`` nearest other points of node
    ``i`` ordered by (distance, index); unused slots hold -1 and ``inf``.
    """

    neighbors: np.ndarray
    sq_dists: np.ndarray
    knn_k: int
    bandwidth: float | None
    freeze_bandwidth: bool = False

    @property
    def n(self) -> int:
        return self.neighbors.shape[0]

    def kernel(self, sq_dist):
        sigma = self.bandwidth
        sq_dist = np.asarray(sq_dist, dtype=np.float64)
        if sigma is None or sigma == 0.0:
            return (sq_dist == 0.0).astype(np.float64)
        return np.exp(-sq_dist / sigma**2)

    @property
    def weights(self) -> sp.csr_matrix:
        """Symmetric weight matrix without self-loops."""
        rows, slots = np.nonzero(self.neighbors >= 0)
        cols = self.neighbors[rows, slots]
        w = self.kernel(self.sq_dists[rows, slots])
        W = sp.csr_matrix((w, (rows, cols)), shape=(self.n, self.n))
        return W.maximum(W.T).tocsr()

    def edges(self) -> list[tuple[int, int, float]]:
        W = sp.triu(self.weights, k=1).tocoo()
        return sorted(zip(W.row.tolist(), W.col.tolist(), W.data.tolist()))


def _bandwidth_from_lists(sq_dists: np.ndarray, k: int) -> float | None:
    n = sq_dists.shape[0]
    if n < 2:
        return None
    m = min(k, n - 1)
    return float(np.mean(np.sqrt(sq_dists[:, m - 1])))


def build_knn_adjacency(points, k: int = 5, bandwidth: float | None = None) -> SparseAdjacency:
    """Build the k-NN graph over all rows of ``points`` from scratch.

    While fewer than ``k + 1`` points exist, every point links to all others
    and the bandwidth uses the farthest available neighbour. A fixed
    ``bandwidth`` may be supplied instead of the data-driven one.
    """
    points = np.asarray(points, dtype=np.float64)
    t = points.shape[0]
    if k < 1:
        raise ValueError("k must be positive")
    neighbors = np.full((t, k), -1, dtype=np.int64)
    sq_dists = np.full((t, k), np.inf)
    idx = np.arange(t)
    for i in range(t):
        d2 = _sq_dists_to(points, points[i])
        mask = idx != i
        cand_d, cand_i = d2[mask], idx[mask]
        order = np.lexsort((cand_i, cand_d))[:k]
        neighbors[i, : order.size] = cand_i[order]
        sq_dists[i, : order.size] = cand_d[order]
    frozen = bandwidth is not None
    sigma = bandwidth if frozen else _bandwidth_from_lists(sq_dists, k)
    return SparseAdjacency(neighbors, sq_dists, k, sigma, frozen)


def append_node(adj: SparseAdjacency, points, new_point) -> SparseAdjacency:
    """Return the graph over ``points`` plus ``new_point``.

    Equal to :func:`build_knn_adjacency` on the extended point set; only
    neighbour lists that the new point enters are touched. The bandwidth is
    recomputed unless the snapshot has it frozen (then a missing bandwidth
    is set once and kept).
    """
    points = np.asarray(points, dtype=np.float64)
    x = np.asarray(new_point, dtype=np.float64).ravel()
    t, k = adj.n, adj.knn_k
    if points.shape[0] != t:
        raise ValueError(f"graph has {t} nodes but {points.shape[0]} points given")
    if t and points.shape[1] != x.size:
        raise ValueError(f"dimension mismatch: {x.size} vs {points.shape[1]}")

    d2 = _sq_dists_to(points, x) if t else np.empty(0)
    neighbors = np.vstack([adj.neighbors, np.full((1, k), -1, dtype=np.int64)])
    sq_dists = np.vstack([adj.sq_dists, np.full((1, k), np.inf)])

    order = np.lexsort((np.arange(t), d2))[:k]
    neighbors[t, : order.size] = order
    sq_dists[t, : order.size] = d2[order]

    # the new index is the largest, so it loses every distance tie
    for i in np.flatnonzero(d2 < adj.sq_dists[:, k - 1]) if t else ():
        row_d = adj.sq_dists[i]
        pos = int(np.searchsorted(row_d, d2[i], side="right"))
        neighbors[i] = np.insert(adj.neighbors[i], pos, t)[:k]
        sq_dists[i] = np.insert(row_d, pos, d2[i])[:k]

    if adj.freeze_bandwidth and adj.bandwidth is not None:
        sigma = adj.bandwidth
    else:
        sigma = _bandwidth_from_lists(sq_dists, k)
    return SparseAdjacency(neighbors, sq_dists, k, sigma, adj.freeze_bandwidth)


def empty_adjacency(k: int = 5, freeze_bandwidth: bool = False) -> SparseAdjacency:
    return SparseAdjacency(
        np.empty((0, k), dtype=np.int64), np.empty((0, k)), k, None, freeze_bandwidth
    )


def edges_to_matrix(edges, n: int) -> sp.csr_matrix:
    """Unit-weight symmetric adjacency from undirected ``(i, j)`` pairs."""
    if not edges:
        return sp.csr_matrix((n, n))
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    e = e[e[:, 0] != e[:, 1]]
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    A = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    A.data[:] = 1.0  # collapse duplicate pairs
    return A


def normalize_adjacency(adj) -> sp.csr_matrix:
    """Symmetric degree normalization with self-connections.

    Computes ``(D + I)^-1/2 (A + I) (D + I)^-1/2`` with ``D_ii = sum_j A_ij``.
    ``adj`` may be a :class:`SparseAdjacency`, a sparse or dense symmetric
    matrix.
    """
    if isinstance(adj, SparseAdjacency):
        A = adj.weights
    else:
        A = sp.csr_matrix(adj, dtype=np.float64)
    n = A.shape[0]
    deg = np.asarray(A.sum(axis=1)).ravel()
    s = 1.0 / np.sqrt(deg + 1.0)
    M = (A + sp.identity(n, format="csr")).tocoo()
    # scale by the product s_i * s_j so mirrored entries round identically
    data = M.data * (s[M.row] * s[M.col])
    return sp.csr_matrix((data, (M.row, M.col)), shape=(n, n))


def dump_edges(adj: SparseAdjacency, path) -> None:
    """Write the edge list as ``i,j,weight`` rows (debugging aid)."""
    with open(path, "w") as fh:
        fh.write("i,j,weight\n")
        for i, j, w in adj.edges():
            fh.write(f"{i},{j},{w:.17g}\n")


class KnnGraph:
    """Online k-NN graph: points arrive one at a time.

    With ``freeze_after`` set, the bandwidth stops being recomputed once the
    graph holds that many nodes.
    """

    def __init__(self, dim: int, k: int = 5, freeze_after: int | None = None):
        self.k = k
        self.freeze_after = freeze_after
        self._buf = np.empty((64, dim))
        self.adjacency = empty_adjacency(k)
        self._normalized = None

    @property
    def n(self) -> int:
        return self.adjacency.n

    def append(self, x, key=None) -> None:
        n = self.n
        if n == self._buf.shape[0]:
            self._buf = np.vstack([self._buf, np.empty_like(self._buf)])
        adj = append_node(self.adjacency, self._buf[:n], x)
        if self.freeze_after is not None and adj.n >= max(self.freeze_after, 2):
            adj = replace(adj, freeze_bandwidth=True)
        self.adjacency = adj
        self._buf[n] = x
        self._normalized = None

    def normalized(self) -> sp.csr_matrix:
        if self._normalized is None:
            self._normalized = normalize_adjacency(self.adjacency)
        return self._normalized


class NativeGraph:
    """Online view of a known graph: nodes join in arrival order.

    Parameters
    ----------
    edges : iterable of (int, int)
        Undirected pairs in dataset-row coordinates; ``append`` takes the
        dataset row as ``key``.
    """

    def __init__(self, edges):
        self._adj: dict[int, list[int]] = {}
        for i, j in edges:
            if i != j:
                self._adj.setdefault(i, []).append(j)
                self._adj.setdefault(j, []).append(i)
        self._position: dict[int, int] = {}
        self._rows: list[int] = []
        self._cols: list[int] = []
        self._normalized = None

    @property
    def n(self) -> int:
        return len(self._position)

    def append(self, x=None, key=None) -> None:
        if key is None:
            raise ValueError("native graphs need the dataset row as key")
        if key in self._position:
            raise ValueError(f"node {key} already present")
        t = len(self._position)
        self._position[key] = t
        for other in set(self._adj.get(key, ())):
            j = self._position.get(other)
            if j is not None:
                self._rows += [t, j]
                self._cols += [j, t]
        self._normalized = None

    def matrix(self) -> sp.csr_matrix:
        n = self.n
        return sp.csr_matrix(
            (np.ones(len(self._rows)), (self._rows, self._cols)), shape=(n, n)
        )

    def normalized(self) -> sp.csr_matrix:
        if self._normalized is None:
            self._normalized = normalize_adjacency(self.matrix())
        return self._normalized
