"""Response oracle for the partially rewarded stream."""

from __future__ import annotations

from .data import MaskedStream

MISSING = -1
WRONG = 0
CORRECT = 1


def respond(stream: MaskedStream, index: int, prediction: int) -> int:
    """Environment response to ``prediction`` for dataset row ``index``.

    Returns -1 when the row is concealed, otherwise 1 if the prediction is
    the true label and 0 if not. The true label itself is never returned.
    """
    K = stream.dataset.num_classes
    if not 0 <= prediction < K:
        raise ValueError(f"prediction {prediction} outside 0..{K - 1}")
    if stream.concealed[index]:
        return MISSING
    return CORRECT if prediction == stream.dataset.labels[index] else WRONG
