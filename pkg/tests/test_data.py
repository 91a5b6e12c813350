import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oprlearn.data import (Dataset, DatasetError, l1_row_normalize, load_dataset, make_blobs,
                           mask_and_order)


@pytest.fixture
def small_csv(tmp_path):
    p = tmp_path / "small.csv"
    p.write_text("f1,f2,f3,f4,label\n1,2,3,4,a\n5,6,7,8,b\n9,10,11,12,a\n")
    return p


def test_csv_labels_encoded_by_first_appearance(small_csv):
    ds = load_dataset(small_csv, label_column="label")
    assert ds.num_classes == 2
    assert ds.labels.tolist() == [0, 1, 0]
    assert ds.features.shape == (3, 4)
    assert ds.class_names == ("a", "b")


def test_csv_drop_columns(small_csv):
    ds = load_dataset(small_csv, label_column="label", drop_columns=["f3"])
    assert ds.num_features == 3
    np.testing.assert_array_equal(ds.features[0], [1, 2, 4])


def test_csv_without_header_by_index(tmp_path):
    p = tmp_path / "noheader.csv"
    p.write_text("x,0.5,1\ny,0.25,0\nx,1.0,2\n")
    ds = load_dataset(p, label_column=0)
    assert ds.labels.tolist() == [0, 1, 0]
    np.testing.assert_array_equal(ds.features, [[0.5, 1], [0.25, 0], [1.0, 2]])


def test_csv_malformed_row_reports_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("f1,f2,label\n1,2,a\n3,b\n")
    with pytest.raises(DatasetError, match=":3:"):
        load_dataset(p, label_column="label")


def test_csv_non_numeric_reports_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2,a\n3,zz,b\n")
    with pytest.raises(DatasetError, match=":2:"):
        load_dataset(p, label_column=2, header=False)


def test_csv_unknown_label_column(small_csv):
    with pytest.raises(DatasetError, match="unknown column"):
        load_dataset(small_csv, label_column="nope")


@pytest.fixture
def cora_dir(tmp_path):
    (tmp_path / "toy.content").write_text("10\t1\t0\tA\n20\t0\t1\tB\n30\t1\t1\tA\n")
    (tmp_path / "toy.cites").write_text("10\t20\n20\t30\n")
    return tmp_path


def test_cora_edges(cora_dir):
    ds = load_dataset(cora_dir, format="cora")
    assert ds.native_edges == [(0, 1), (1, 2)]
    assert ds.labels.tolist() == [0, 1, 0]
    assert ds.num_features == 2
    same = load_dataset(cora_dir / "toy.content", format="cora")
    assert same.native_edges == ds.native_edges


def test_cora_unknown_node(cora_dir):
    (cora_dir / "toy.cites").write_text("10\t20\n20\t99\n")
    with pytest.raises(DatasetError, match="unknown node id"):
        load_dataset(cora_dir, format="cora")


def test_dataset_invariants():
    with pytest.raises(DatasetError):
        Dataset(np.zeros((2, 2)), [0, 0], 1)
    with pytest.raises(DatasetError):
        Dataset(np.zeros((2, 2)), [0, 2], 2)
    with pytest.raises(DatasetError):
        Dataset(np.array([[np.nan, np.nan], [1, 2]]), [0, 1], 2)
    with pytest.raises(DatasetError):
        Dataset(np.zeros((2, 2)), [0, 1], 2, native_edges=[(0, 5)])


@pytest.mark.parametrize("row, expected", [
    ([2, -2], [0.5, -0.5]),
    ([0, 0], [0, 0]),
    ([1, 3], [0.25, 0.75]),
])
def test_l1_examples(row, expected):
    np.testing.assert_allclose(l1_row_normalize(np.array([row], float))[0], expected)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 6)),
              elements=st.floats(-1e6, 1e6)))
def test_l1_unit_norm(X):
    Y = l1_row_normalize(X)
    norms = np.abs(Y).sum(axis=1)
    nonzero = np.abs(X).sum(axis=1) > 0
    assert np.all(np.abs(norms[nonzero] - 1) <= 1e-12)
    assert np.all(Y[~nonzero] == 0)


def test_l1_sparse_matches_dense():
    import scipy.sparse as sp
    X = np.array([[0, 2, 0, 2], [0, 0, 0, 0], [1, 0, -3, 0]], float)
    np.testing.assert_allclose(l1_row_normalize(sp.csr_matrix(X)).toarray(), l1_row_normalize(X))


def _labels_dataset(labels, D=3, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.asarray(labels)
    return Dataset(rng.standard_normal((labels.size, D)), labels, labels.max() + 1)


def test_mask_zero_and_full():
    ds = _labels_dataset([0, 1, 0, 1, 0, 1, 0, 1])
    assert not mask_and_order(ds, 0.0, 3).concealed.any()
    s = mask_and_order(ds, 1.0, 3)
    expected = np.ones(8, bool)
    expected[s.warm_start_indices] = False
    np.testing.assert_array_equal(s.concealed, expected)


def test_mask_exact_count():
    ds = _labels_dataset([0, 1] * 6)
    s = mask_and_order(ds, 0.5, 11)
    assert s.concealed.sum() == 5


def test_mask_structure():
    ds = _labels_dataset([0, 0, 1, 2, 2, 2, 1, 0, 2, 1])
    s = mask_and_order(ds, 0.75, 5)
    assert sorted(ds.labels[s.warm_start_indices].tolist()) == [0, 1, 2]
    assert ds.labels[s.warm_start_indices].tolist() == [0, 1, 2]
    assert not s.concealed[s.warm_start_indices].any()
    assert sorted(s.order.tolist()) == list(range(10))
    np.testing.assert_array_equal(s.order[:3], s.warm_start_indices)
    assert s.concealed.sum() == round(0.75 * 7)


def test_mask_missing_class():
    ds = Dataset(np.zeros((3, 2)), [0, 0, 2], 3)
    with pytest.raises(DatasetError, match="class 1"):
        mask_and_order(ds, 0.5, 0)


def test_mask_deterministic_serialization():
    ds = make_blobs(40, 3, 4, seed=2)
    a = mask_and_order(ds, 0.5, 99).to_json().encode()
    b = mask_and_order(ds, 0.5, 99).to_json().encode()
    assert a == b
    assert a != mask_and_order(ds, 0.5, 100).to_json().encode()


def test_mask_ignores_features():
    ds = make_blobs(50, 3, 5, seed=4)
    shuffled = Dataset(ds.features[:, ::-1] * 7.0, ds.labels, ds.num_classes)
    a, b = mask_and_order(ds, 0.25, 8), mask_and_order(shuffled, 0.25, 8)
    np.testing.assert_array_equal(a.concealed, b.concealed)
    np.testing.assert_array_equal(a.order, b.order)


def test_warm_start_uniform_within_class():
    ds = _labels_dataset([0, 0, 0, 0, 1])
    picks = [mask_and_order(ds, 0.0, s).warm_start_indices[0] for s in range(4000)]
    counts = np.bincount(picks, minlength=4)
    # binomial sd for 4000 draws at p = 1/4 is ~27
    assert np.all(np.abs(counts - 1000) < 120)


def test_make_blobs_shapes():
    ds = make_blobs(30, 3, 7, seed=0)
    assert ds.features.shape == (30, 7)
    assert np.bincount(ds.labels).tolist() == [10, 10, 10]
