"""
Growing a k-nearest-neighbour graph
===================================

Nodes arrive one at a time. The incremental graph ends up identical to a
graph built from all points at once.
"""

import numpy as np

from oprlearn.graph import KnnGraph, build_knn_adjacency, normalize_adjacency

rng = np.random.default_rng(0)
points = rng.standard_normal((60, 4))

# feed the points in one by one
graph = KnnGraph(dim=4, k=5)
for p in points:
    graph.append(p)

batch = build_knn_adjacency(points, k=5)
diff = abs(graph.adjacency.weights - batch.weights).max()
print("edges:", len(batch.edges()), " max weight difference vs batch:", diff)
print("kernel bandwidth (mean 5th-neighbour distance):", round(batch.bandwidth, 4))

# the propagation matrix adds self loops and scales symmetrically
A_hat = normalize_adjacency(batch).toarray()
print("symmetric:", np.array_equal(A_hat, A_hat.T))
print("largest eigenvalue:", np.linalg.eigvalsh(A_hat).max().round(6))
