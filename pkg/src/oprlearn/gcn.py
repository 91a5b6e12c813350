"""Two-layer graph convolutional network in plain numpy.

The embedding of the node set is ``E = A_hat @ relu(A_hat @ X @ W1)`` and
class probabilities are ``softmax(E @ W2)``. Labels use -1 for a missing
entry and a 0-based output column otherwise. Features may be a dense array
or a scipy sparse matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

BETA1 = 0.9
BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class GcnHyper:
    hidden: int = 16
    learn_rate: float = 0.01
    weight_decay: float = 5e-4
    dropout: float = 0.5
    train_steps: int = 5
    decay_second_layer: bool = False

    def __post_init__(self):
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")


@dataclass
class GcnModel:
    W1: np.ndarray
    W2: np.ndarray
    hyper: GcnHyper = field(default_factory=GcnHyper)
    m1: np.ndarray = None
    v1: np.ndarray = None
    m2: np.ndarray = None
    v2: np.ndarray = None
    step: int = 0

    def __post_init__(self):
        self.W1 = np.asarray(self.W1, dtype=np.float64)
        self.W2 = np.asarray(self.W2, dtype=np.float64)
        if self.W1.shape[1] != self.W2.shape[0]:
            raise ValueError("W1 columns must match W2 rows")
        for name, like in (("m1", self.W1), ("v1", self.W1), ("m2", self.W2), ("v2", self.W2)):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros_like(like))

    @property
    def num_outputs(self) -> int:
        return self.W2.shape[1]

    def copy(self) -> "GcnModel":
        return GcnModel(
            self.W1.copy(), self.W2.copy(), GcnHyper(**vars(self.hyper)),
            self.m1.copy(), self.v1.copy(), self.m2.copy(), self.v2.copy(), self.step,
        )

    def save(self, path) -> None:
        """Checkpoint weights and optimizer state to ``.npz`` (debugging aid)."""
        np.savez(path, W1=self.W1, W2=self.W2, m1=self.m1, v1=self.v1,
                 m2=self.m2, v2=self.v2, step=self.step)


def glorot(shape, rng) -> np.ndarray:
    limit = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-limit, limit, size=shape)


def init_model(num_features: int, num_outputs: int, hyper: GcnHyper | None = None,
               seed=None) -> GcnModel:
    """Glorot-uniform weights and a fresh Adam state."""
    hyper = hyper or GcnHyper()
    rng = np.random.default_rng(seed)
    return GcnModel(
        glorot((num_features, hyper.hidden), rng),
        glorot((hyper.hidden, num_outputs), rng),
        hyper,
    )


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _dropout(X, rate, rng):
    if rate == 0.0:
        return X, None
    keep = 1.0 - rate
    if sp.issparse(X):
        X = sp.csr_matrix(X, copy=True)
        mask = rng.random(X.data.size) < keep
        X.data *= mask / keep
        return X, None
    mask = (rng.random(X.shape) < keep) / keep
    return X * mask, mask


@dataclass
class _Cache:
    X_in: object
    Z1: np.ndarray
    H_mask: np.ndarray | None
    E: np.ndarray
    probs: np.ndarray


def _check(model: GcnModel, X, A_hat) -> None:
    T = X.shape[0]
    if X.shape[1] != model.W1.shape[0]:
        raise ValueError(f"X has {X.shape[1]} features, model expects {model.W1.shape[0]}")
    if A_hat.shape != (T, T):
        raise ValueError(f"adjacency shape {A_hat.shape} does not match {T} nodes")


def _forward(model: GcnModel, X, A_hat, rng) -> _Cache:
    _check(model, X, A_hat)
    rate = model.hyper.dropout if rng is not None else 0.0
    X_in, _ = _dropout(X, rate, rng)
    Z1 = A_hat @ (X_in @ model.W1)
    H = np.maximum(Z1, 0.0)
    H_in, H_mask = _dropout(H, rate, rng)
    E = A_hat @ H_in
    return _Cache(X_in, Z1, H_mask, E, softmax(E @ model.W2))


def forward(model: GcnModel, X, A_hat, seed=None, train=False):
    """Return ``(embedding, probs)``.

    With ``train=True`` dropout (inverted scaling) is applied to the input
    features and to the hidden activations, drawn from ``seed``.
    """
    rng = np.random.default_rng(seed) if train else None
    cache = _forward(model, X, A_hat, rng)
    return cache.E, cache.probs


def _loss_and_gradients(model, X, A_hat, labels, rng):
    labels = np.asarray(labels)
    labeled = np.flatnonzero(labels >= 0)
    if labeled.size == 0:
        raise ValueError("empty label mask")
    c = _forward(model, X, A_hat, rng)
    n = labeled.size
    y = labels[labeled]
    p_true = c.probs[labeled, y]
    hp = model.hyper
    loss = -np.mean(np.log(np.maximum(p_true, 1e-300)))
    loss += 0.5 * hp.weight_decay * np.sum(model.W1**2)
    if hp.decay_second_layer:
        loss += 0.5 * hp.weight_decay * np.sum(model.W2**2)

    d_logits = np.zeros_like(c.probs)
    d_logits[labeled] = c.probs[labeled]
    d_logits[labeled, y] -= 1.0
    d_logits /= n
    dW2 = c.E.T @ d_logits
    dH = A_hat.T @ (d_logits @ model.W2.T)
    if c.H_mask is not None:
        dH = dH * c.H_mask
    dZ1 = dH * (c.Z1 > 0)
    dW1 = np.asarray(c.X_in.T @ (A_hat.T @ dZ1))
    dW1 += hp.weight_decay * model.W1
    if hp.decay_second_layer:
        dW2 = dW2 + hp.weight_decay * model.W2
    return float(loss), {"W1": dW1, "W2": dW2}


def loss_and_gradients(model: GcnModel, X, A_hat, labels, seed=None, train=True):
    """Masked cross-entropy plus L2 decay, and its exact gradient.

    Only nodes with ``labels >= 0`` contribute to the data term, which is
    averaged over those nodes. Decay ``weight_decay * ||W1||^2 / 2`` applies
    to the first layer (both layers when ``decay_second_layer``). With
    ``train=True`` the gradient is exact for the dropout draw of ``seed``.
    """
    rng = np.random.default_rng(seed) if train else None
    return _loss_and_gradients(model, X, A_hat, labels, rng)


def adam_step(model: GcnModel, grads) -> GcnModel:
    """Bias-corrected Adam update in place; returns ``model``."""
    model.step += 1
    lr = model.hyper.learn_rate
    bc1 = 1.0 - BETA1**model.step
    bc2 = 1.0 - BETA2**model.step
    for w, m, v, g in (
        (model.W1, model.m1, model.v1, grads["W1"]),
        (model.W2, model.m2, model.v2, grads["W2"]),
    ):
        m *= BETA1
        m += (1.0 - BETA1) * g
        v *= BETA2
        v += (1.0 - BETA2) * g * g
        w -= lr * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)
    return model


def train(model: GcnModel, X, A_hat, labels, steps: int | None = None, seed=None) -> GcnModel:
    """Run ``steps`` gradient steps (default ``hyper.train_steps``) in place.

    ``seed`` may be an int or a ``numpy.random.Generator``; each step draws
    fresh dropout masks from it.
    """
    steps = model.hyper.train_steps if steps is None else steps
    if steps <= 0:
        return model
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(steps):
        _, grads = _loss_and_gradients(model, X, A_hat, labels, rng)
        adam_step(model, grads)
    return model


def predict(model: GcnModel, X, A_hat):
    """Eval-mode argmax per node (lowest index wins ties) and the probabilities."""
    _, probs = forward(model, X, A_hat)
    return probs.argmax(axis=1), probs
