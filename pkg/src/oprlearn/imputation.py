"""Missing-reward imputers and the bounded clipping rule.

An imputer maps the current observation to a probability vector over the
arms. All imputers share two calls: ``observe(x, key)`` refreshes the
imputer with the incoming observation and returns its vector, and
``feedback(arm, h)`` reports the environment response for the arm that was
played on that observation.
"""

from __future__ import annotations

import numpy as np


def bounded_clip(imputed, mu, sigma):
    """Clamp an imputed reward into ``[mu - sigma, mu + sigma]``."""
    return np.maximum(mu - sigma, np.minimum(imputed, mu + sigma))


def to_simplex(values: np.ndarray) -> np.ndarray:
    values = np.clip(np.asarray(values, dtype=np.float64), 0.0, None)
    total = values.sum()
    if total <= 0:
        return np.full(values.size, 1.0 / values.size)
    return values / total


class KMeansImputer:
    """Online mini-batch k-means with per-cluster, per-arm reward averages.

    The first ``n_clusters`` distinct observations seed the centroids; later
    observations move their nearest centroid by ``1 / count``. A response
    ``h = 1`` records reward 1 for the played arm and 0 for every other arm
    (the label is then known); ``h = 0`` records 0 for the played arm.
    Arms without records in a cluster fall back to ``1 / num_arms`` before
    the vector is normalized onto the simplex.
    """

    def __init__(self, num_arms: int, n_clusters: int = 10):
        self.num_arms = num_arms
        self.n_clusters = n_clusters
        self.centroids = None
        self.counts = np.zeros(0, dtype=np.int64)
        self.reward_sum = np.zeros((0, num_arms))
        self.reward_n = np.zeros((0, num_arms))
        self._last = None

    def assign(self, x) -> int:
        d2 = ((self.centroids - x) ** 2).sum(axis=1)
        return int(np.argmin(d2))

    def _add_centroid(self, x) -> int:
        self.centroids = x[None, :].copy() if self.centroids is None else np.vstack([self.centroids, x])
        self.counts = np.append(self.counts, 1)
        self.reward_sum = np.vstack([self.reward_sum, np.zeros(self.num_arms)])
        self.reward_n = np.vstack([self.reward_n, np.zeros(self.num_arms)])
        return len(self.counts) - 1

    def partial_fit(self, x) -> int:
        x = np.asarray(x, dtype=np.float64).ravel()
        if self.centroids is None:
            return self._add_centroid(x)
        # seeding centroids never move, so "distinct from a centroid" = "distinct so far"
        if len(self.counts) < self.n_clusters and not (self.centroids == x).all(axis=1).any():
            return self._add_centroid(x)
        c = self.assign(x)
        self.counts[c] += 1
        self.centroids[c] += (x - self.centroids[c]) / self.counts[c]
        return c

    def cluster_averages(self, c: int) -> np.ndarray:
        n = self.reward_n[c]
        return np.where(n > 0, self.reward_sum[c] / np.maximum(n, 1), 1.0 / self.num_arms)

    def impute(self, c: int) -> np.ndarray:
        return to_simplex(self.cluster_averages(c))

    def observe(self, x, key=None) -> np.ndarray:
        self._last = self.partial_fit(x)
        return self.impute(self._last)

    def record(self, c: int, arm: int, h: int) -> None:
        if h == 1:
            self.reward_n[c] += 1
            self.reward_sum[c, arm] += 1.0
        elif h == 0:
            self.reward_n[c, arm] += 1

    def feedback(self, arm: int, h: int) -> None:
        if self._last is None:
            raise RuntimeError("feedback before observe")
        self.record(self._last, arm, h)

    def warm_start(self, X, y) -> None:
        """Feed labelled rows as if each had been answered correctly."""
        for x, label in zip(np.atleast_2d(X), y):
            self.record(self.partial_fit(x), int(label), 1)


class RandomImputer:
    """Draws from the flat Dirichlet distribution over the simplex."""

    def __init__(self, num_arms: int, seed=None):
        self.num_arms = num_arms
        self.rng = np.random.default_rng(seed)

    def observe(self, x=None, key=None) -> np.ndarray:
        return self.rng.dirichlet(np.ones(self.num_arms))

    def feedback(self, arm: int, h: int) -> None:
        pass


class GcnImputer:
    """Softmax output of an online ROGCN model that sees every observation.

    A correct response writes the played arm into the model's labels.
    """

    def __init__(self, rogcn):
        self.rogcn = rogcn

    def observe(self, x, key=None) -> np.ndarray:
        self.rogcn.observe(x, key)
        return self.rogcn.node_probs(self.rogcn.num_nodes - 1)

    def probs_for(self, node: int) -> np.ndarray:
        if not 0 <= node < self.rogcn.num_nodes:
            raise IndexError(f"node {node} is not in the graph")
        return self.rogcn.node_probs(node)

    def feedback(self, arm: int, h: int) -> None:
        if h == 1:
            self.rogcn.set_label(self.rogcn.num_nodes - 1, arm)


class OracleImputer:
    """One-hot of the true label; for ablations on synthetic data only."""

    def __init__(self, num_arms: int, labels_by_key):
        self.num_arms = num_arms
        self.labels_by_key = labels_by_key

    def observe(self, x, key=None) -> np.ndarray:
        out = np.zeros(self.num_arms)
        out[self.labels_by_key[key]] = 1.0
        return out

    def feedback(self, arm: int, h: int) -> None:
        pass
