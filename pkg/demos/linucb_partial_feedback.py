"""
LinUCB with partial feedback
============================

One linear upper-confidence model per class, trained from a stream where
some observations never get a response.
"""

import numpy as np

from oprlearn import make_blobs, mask_and_order, l1_row_normalize
from oprlearn.environment import respond
from oprlearn.policies import LinUCBPolicy

# a small three-class problem, rows scaled to unit l1 norm
data = make_blobs(400, num_classes=3, num_features=8, separation=2.0, seed=0)
X = l1_row_normalize(data.features)

# the stream: one labelled row per class first, then a shuffle of the rest
# with half of the online observations concealed
stream = mask_and_order(data, missing_fraction=0.5, seed=1)
print("warm-start rows:", stream.warm_start_indices)
print("concealed online steps:", int(stream.concealed.sum()))

warm = stream.warm_start_indices
policy = LinUCBPolicy(X[warm], data.labels[warm], data.num_classes, alpha=0.25)

# predict, hear back 1 / 0 / -1, update
correct = 0
for n, idx in enumerate(stream.online_order, start=1):
    guess = policy.predict(X[idx])
    policy.feedback(respond(stream, idx, guess))
    correct += guess == data.labels[idx]
    if n % 100 == 0:
        print(f"step {n:4d}  running accuracy {correct / n:.3f}")

# each arm's weight vector is a unit vector; its score is mu + sigma
scores = policy.scores(X[stream.online_order[-1]])
print("last scores (mu, sigma):", [(round(s.mu, 3), round(s.sigma, 3)) for s in scores])
