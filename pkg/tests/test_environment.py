import numpy as np
import pytest

from oprlearn.data import Dataset, MaskedStream
from oprlearn.environment import respond


@pytest.fixture
def stream():
    ds = Dataset(np.eye(4), [0, 1, 2, 1], 3)
    concealed = np.array([False, False, False, True])
    return MaskedStream(ds, np.array([0, 1, 2, 3]), concealed, np.array([0, 1, 2]))


def test_concealed_always_missing(stream):
    assert [respond(stream, 3, k) for k in range(3)] == [-1, -1, -1]


def test_revealed_correct_and_wrong(stream):
    assert respond(stream, 1, 1) == 1
    assert respond(stream, 1, 2) == 0


def test_prediction_out_of_range(stream):
    with pytest.raises(ValueError):
        respond(stream, 0, 3)


def test_response_depends_only_on_equality(stream):
    wrong = {respond(stream, 2, k) for k in (0, 1)}
    assert wrong == {0}
    assert all(type(respond(stream, i, 0)) is int for i in range(4))
