"""Online policies for partially rewarded prediction.

Every policy follows the same two-call protocol per observation::

    y_hat = policy.predict(x, key)   # key: dataset row, used by native graphs
    policy.feedback(h)               # h in {-1, 0, 1}

Policies are constructed from the warm-start rows (one labelled observation
per class). After each ``predict`` the attribute ``last_ucb`` holds the
per-arm score used for the decision, ``last_contexts`` the per-arm context
vectors and ``last_thetas`` the per-arm weight vectors where applicable.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import gcn
from .graph import KnnGraph, NativeGraph
from .imputation import bounded_clip
from .linucb import init_arms, ridge_stats, score_arm, select_arm, update


class ProtocolError(RuntimeError):
    """Raised when predict/feedback calls are out of order."""


class FeatureBuffer:
    """Rows of the growing data matrix, optionally exposed as CSR."""

    def __init__(self, dim: int, sparse: bool = False):
        self._buf = np.empty((64, dim))
        self.n = 0
        self.sparse = sparse
        self._csr = None
        self._csr_rows = 0

    def append(self, x) -> None:
        if self.n == self._buf.shape[0]:
            self._buf = np.vstack([self._buf, np.empty_like(self._buf)])
        self._buf[self.n] = x
        self.n += 1

    def matrix(self):
        if not self.sparse:
            return self._buf[: self.n]
        if self._csr_rows != self.n:
            new = sp.csr_matrix(self._buf[self._csr_rows: self.n])
            self._csr = new if self._csr is None else sp.vstack([self._csr, new], format="csr")
            self._csr_rows = self.n
        return self._csr


def seed_sequence(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def make_graph(dim: int, native_edges=None, knn_k: int = 5, freeze_after=None):
    if native_edges is not None:
        return NativeGraph(native_edges)
    return KnnGraph(dim, knn_k, freeze_after)


class _Policy:
    name = "policy"

    def __init__(self, num_arms: int):
        self.num_arms = num_arms
        self.t = 0
        self._pending = None
        self.last_ucb = None
        self.last_contexts = None
        self.last_thetas = None

    def _begin(self, prediction: int) -> int:
        if self._pending is not None:
            raise ProtocolError("predict called twice without feedback")
        self._pending = prediction
        return prediction

    def _end(self, h: int) -> int:
        if self._pending is None:
            raise ProtocolError("feedback before prediction")
        if h not in (-1, 0, 1):
            raise ValueError(f"response must be -1, 0 or 1, got {h!r}")
        pred, self._pending = self._pending, None
        self.t += 1
        return pred


class LinUCBPolicy(_Policy):
    """Baseline LinUCB on the raw context; missing responses are ignored."""

    name = "linucb"

    def __init__(self, warm_X, warm_y, num_arms: int, alpha: float = 0.25, classic: bool = False):
        super().__init__(num_arms)
        self.alpha = alpha
        self.classic = classic
        self.arms = init_arms(warm_X, warm_y, num_arms)
        self._x = None

    def scores(self, x):
        return [score_arm(arm, x, self.alpha) for arm in self.arms]

    def predict(self, x, key=None) -> int:
        self._x = np.asarray(x, dtype=np.float64)
        scores = self.scores(self._x)
        self.last_ucb = np.array([s.ucb for s in scores])
        self.last_contexts = np.tile(self._x, (self.num_arms, 1))
        self.last_thetas = np.array([arm.theta() for arm in self.arms])
        return self._begin(select_arm(scores))

    def feedback(self, h: int) -> None:
        pred = self._end(h)
        update(self.arms, pred, self._x, h, None, self.classic)


class RogcnPolicy(_Policy):
    """Online GCN classifier; correct predictions become training labels."""

    name = "rogcn"

    def __init__(self, warm_X, warm_y, num_arms: int, graph, hyper: gcn.GcnHyper | None = None,
                 seed=None, warm_keys=None, sparse_features: bool = False):
        super().__init__(num_arms)
        warm_X = np.atleast_2d(np.asarray(warm_X, dtype=np.float64))
        self.hyper = hyper or gcn.GcnHyper()
        init_seed, train_seed = seed_sequence(seed).spawn(2)
        self.model = gcn.init_model(warm_X.shape[1], num_arms, self.hyper, init_seed)
        self.rng = np.random.default_rng(train_seed)
        self.graph = graph
        self.X = FeatureBuffer(warm_X.shape[1], sparse_features)
        self.labels: list[int] = []
        keys = warm_keys if warm_keys is not None else [None] * len(warm_X)
        for x, y, key in zip(warm_X, warm_y, keys):
            self._append(x, key, int(y))
        self._train()

    @property
    def num_nodes(self) -> int:
        return self.X.n

    def _append(self, x, key, label=-1) -> None:
        self.graph.append(x, key)
        self.X.append(x)
        self.labels.append(label)

    def _train(self) -> None:
        X, A = self.X.matrix(), self.graph.normalized()
        gcn.train(self.model, X, A, np.array(self.labels), self.hyper.train_steps, self.rng)
        self.embedding, self.probs = gcn.forward(self.model, X, A)

    def observe(self, x, key=None) -> None:
        """Add a node, run the configured training steps, refresh outputs."""
        self._append(x, key)
        self._train()

    def node_probs(self, node: int) -> np.ndarray:
        return self.probs[node]

    def set_label(self, node: int, label: int) -> None:
        self.labels[node] = int(label)

    def predict(self, x, key=None) -> int:
        self.observe(x, key)
        p = self.probs[-1]
        self.last_ucb = p.copy()
        return self._begin(int(np.argmax(p)))

    def feedback(self, h: int) -> None:
        pred = self._end(h)
        if h == 1:
            self.set_label(self.num_nodes - 1, pred)


class BilinucbPolicy(_Policy):
    """LinUCB that learns from missing responses through an imputer.

    For ``h = -1`` the played arm receives the imputed reward, clamped into
    ``[mu - sigma, mu + sigma]`` of that arm unless ``bounded`` is False.
    During the first ``warmup`` online steps the policy acts and updates
    exactly like baseline LinUCB while the imputer keeps learning.
    """

    name = "bilinucb"

    def __init__(self, warm_X, warm_y, num_arms: int, imputer, alpha: float = 0.25,
                 bounded: bool = True, warmup: int = 300, classic: bool = False):
        super().__init__(num_arms)
        self.alpha = alpha
        self.bounded = bounded
        self.warmup = warmup
        self.classic = classic
        self.imputer = imputer
        self.arms = init_arms(warm_X, warm_y, num_arms)
        self._step = None

    @property
    def in_warmup(self) -> bool:
        return self.t < self.warmup

    def predict(self, x, key=None) -> int:
        x = np.asarray(x, dtype=np.float64)
        imputed = self.imputer.observe(x, key)
        scores = [score_arm(arm, x, self.alpha) for arm in self.arms]
        self.last_ucb = np.array([s.ucb for s in scores])
        self.last_contexts = np.tile(x, (self.num_arms, 1))
        self.last_thetas = np.array([arm.theta() for arm in self.arms])
        pred = select_arm(scores)
        self._step = (x, scores[pred], imputed)
        return self._begin(pred)

    def feedback(self, h: int) -> None:
        warm = self.in_warmup
        pred = self._end(h)
        x, score, imputed = self._step
        reward = None
        if h == -1 and not warm:
            reward = float(imputed[pred])
            if self.bounded:
                reward = float(bounded_clip(reward, score.mu, score.sigma))
        update(self.arms, pred, x, h, reward, self.classic)
        self.imputer.feedback(pred, h)


class GcnucbPolicy(_Policy):
    """Contextual bandit over per-class binary GCN embeddings.

    Arm ``k`` scores the l2-normalized embedding of the current node under
    GCN ``k``; its ridge statistics are rebuilt every step from the index set
    of past nodes credited to it, because embeddings drift as training
    continues. The binary GCNs use output column 1 for "is class k".
    """

    name = "gcnucb"

    def __init__(self, warm_X, warm_y, num_arms: int, graph, hyper: gcn.GcnHyper | None = None,
                 alpha: float = 0.25, warmup: int = 300, seed=None, warm_keys=None,
                 classic: bool = False, sparse_features: bool = False):
        super().__init__(num_arms)
        warm_X = np.atleast_2d(np.asarray(warm_X, dtype=np.float64))
        warm_y = np.asarray(warm_y, dtype=np.int64)
        self.alpha = alpha
        self.warmup = warmup
        self.hyper = hyper or gcn.GcnHyper()
        self.graph = graph
        self.X = FeatureBuffer(warm_X.shape[1], sparse_features)
        self.baseline = LinUCBPolicy(warm_X, warm_y, num_arms, alpha, classic)

        seeds = seed_sequence(seed).spawn(2 * num_arms)
        self.models = [
            gcn.init_model(warm_X.shape[1], 2, self.hyper, seeds[2 * k]) for k in range(num_arms)
        ]
        self.rngs = [np.random.default_rng(seeds[2 * k + 1]) for k in range(num_arms)]
        self.labels = [[] for _ in range(num_arms)]
        self.index_sets = [[] for _ in range(num_arms)]
        self.rewards = [[] for _ in range(num_arms)]

        keys = warm_keys if warm_keys is not None else [None] * len(warm_X)
        for node, (x, y, key) in enumerate(zip(warm_X, warm_y, keys)):
            self.graph.append(x, key)
            self.X.append(x)
            for k in range(num_arms):
                known = y >= 0
                self.labels[k].append(int(y == k) if known else -1)
                if known:
                    self.index_sets[k].append(node)
                    self.rewards[k].append(float(y == k))
        self._train()

    @property
    def in_warmup(self) -> bool:
        return self.t < self.warmup

    @property
    def num_nodes(self) -> int:
        return self.X.n

    def _train(self) -> None:
        X, A = self.X.matrix(), self.graph.normalized()
        self.contexts, self.pos_probs = [], []
        for k, model in enumerate(self.models):
            gcn.train(model, X, A, np.array(self.labels[k]), self.hyper.train_steps, self.rngs[k])
            E, P = gcn.forward(model, X, A)
            norms = np.linalg.norm(E, axis=1, keepdims=True)
            self.contexts.append(np.divide(E, norms, out=np.zeros_like(E), where=norms > 0))
            self.pos_probs.append(P[:, 1])

    def arm_statistics(self, k: int):
        """Ridge ``(A_k, theta_k)`` over the current contexts of arm ``k``'s index set."""
        ctx = self.contexts[k][self.index_sets[k]]
        return ridge_stats(ctx, self.rewards[k], self.hyper.hidden)

    def predict(self, x, key=None) -> int:
        x = np.asarray(x, dtype=np.float64)
        self.graph.append(x, key)
        self.X.append(x)
        for lab in self.labels:
            lab.append(-1)
        self._train()

        node = self.num_nodes - 1
        ucb = np.empty(self.num_arms)
        thetas = []
        for k in range(self.num_arms):
            A, theta = self.arm_statistics(k)
            g = self.contexts[k][node]
            mu = theta @ g
            sigma = self.alpha * np.sqrt(max(g @ np.linalg.solve(A, g), 0.0))
            ucb[k] = mu + sigma
            thetas.append(theta)
        self.last_contexts = np.array([c[node] for c in self.contexts])
        self.last_thetas = np.array(thetas)

        if self.in_warmup:
            pred = self.baseline.predict(x, key)
            self.last_ucb = self.baseline.last_ucb
        else:
            pred = select_arm(ucb)
            self.last_ucb = ucb
        return self._begin(pred)

    def feedback(self, h: int) -> None:
        warm = self.in_warmup
        pred = self._end(h)
        if warm:
            self.baseline.feedback(h)
        node = self.num_nodes - 1
        if h == 1:
            for k in range(self.num_arms):
                self.labels[k][node] = int(k == pred)
                self.index_sets[k].append(node)
                self.rewards[k].append(float(k == pred))
        elif h == 0:
            self.labels[pred][node] = 0
            self.index_sets[pred].append(node)
            self.rewards[pred].append(0.0)
        else:
            self.index_sets[pred].append(node)
            self.rewards[pred].append(float(self.pos_probs[pred][node]))
