"""
A two-layer graph convolutional network
=======================================

Forward pass, hand-written gradients checked against finite differences,
then Adam training on two clusters with a handful of labels.
"""

import numpy as np

from oprlearn import gcn
from oprlearn.graph import build_knn_adjacency, normalize_adjacency

rng = np.random.default_rng(3)
y = np.repeat([0, 1], 30)
X = np.abs(rng.standard_normal((60, 6))) * 0.2
X[y == 0, :3] += 1.0
X[y == 1, 3:] += 1.0
A_hat = normalize_adjacency(build_knn_adjacency(X, k=5))

# only four nodes carry a label, the rest are -1
labels = -np.ones(60, dtype=int)
labels[[0, 1, 30, 31]] = y[[0, 1, 30, 31]]

model = gcn.init_model(6, 2, gcn.GcnHyper(hidden=8, dropout=0.0), seed=0)

# analytic vs numerical gradient for one weight
loss, grads = gcn.loss_and_gradients(model, X, A_hat, labels, train=False)
h = 1e-6
model.W1[0, 0] += h
up = gcn.loss_and_gradients(model, X, A_hat, labels, train=False)[0]
model.W1[0, 0] -= 2 * h
down = gcn.loss_and_gradients(model, X, A_hat, labels, train=False)[0]
model.W1[0, 0] += h
print("dL/dW1[0,0] analytic", grads["W1"][0, 0], " numeric", (up - down) / (2 * h))

# train and look at every node, labelled or not
gcn.train(model, X, A_hat, labels, steps=100, seed=1)
pred, probs = gcn.predict(model, X, A_hat)
print("loss before", round(loss, 4), "after",
      round(gcn.loss_and_gradients(model, X, A_hat, labels, train=False)[0], 4))
print("accuracy on all 60 nodes:", (pred == y).mean())
