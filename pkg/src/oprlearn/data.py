"""Datasets, preprocessing and the concealed-label observation stream.

Class labels are 0-based throughout the package: a dataset with ``K``
classes carries labels in ``0..K-1`` and node indices start at 0.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class DatasetError(ValueError):
    """Raised when a dataset file cannot be parsed or is inconsistent."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with integer labels and an optional native graph.

    Attributes
    ----------
    features : ndarray, shape (T, D)
    labels : ndarray of int, shape (T,)
        Values in ``0..num_classes-1``.
    num_classes : int
    native_edges : list of (int, int) or None
        Undirected pairs of observation indices.
    name : str
    """

    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    native_edges: list[tuple[int, int]] | None = None
    name: str = "dataset"
    class_names: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise DatasetError("features must be a 2-D matrix")
        if labels.shape != (features.shape[0],):
            raise DatasetError("labels must have one entry per observation")
        if self.num_classes < 2:
            raise DatasetError("need at least two classes")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise DatasetError("label outside 0..num_classes-1")
        if features.size and np.isnan(features).all(axis=1).any():
            raise DatasetError("an observation has only NaN features")
        if self.native_edges is not None:
            T = features.shape[0]
            for i, j in self.native_edges:
                if not (0 <= i < T and 0 <= j < T):
                    raise DatasetError(f"edge ({i}, {j}) references unknown node")
        object.__setattr__(self, "features", _readonly(features))
        object.__setattr__(self, "labels", _readonly(labels))

    @property
    def num_observations(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]


def _encode_labels(raw: Sequence[str]) -> tuple[np.ndarray, tuple[str, ...]]:
    codes: dict[str, int] = {}
    out = np.empty(len(raw), dtype=np.int64)
    for i, value in enumerate(raw):
        out[i] = codes.setdefault(value, len(codes))
    return out, tuple(codes)


def _parse_float(token: str, lineno: int, path) -> float:
    try:
        return float(token)
    except ValueError:
        raise DatasetError(f"{path}:{lineno}: non-numeric feature value {token!r}") from None


def _looks_like_header(row: list[str], label_idx: int | None) -> bool:
    for k, token in enumerate(row):
        if k == label_idx:
            continue
        try:
            float(token)
        except ValueError:
            return True
    return False


def _load_csv(path: Path, label_column, drop_columns, header) -> Dataset:
    with open(path, newline="") as fh:
        rows = [(n, r) for n, r in enumerate(csv.reader(fh), start=1) if r]
    if not rows:
        raise DatasetError(f"{path}: empty file")

    first = rows[0][1]
    if header is None:
        idx_guess = label_column if isinstance(label_column, int) else None
        header = isinstance(label_column, str) or _looks_like_header(first, idx_guess)
    names = [c.strip() for c in first] if header else [str(k) for k in range(len(first))]
    body = rows[1:] if header else rows

    def resolve(col) -> int:
        if isinstance(col, (int, np.integer)):
            if not -len(names) <= col < len(names):
                raise DatasetError(f"label column index {col} out of range")
            return int(col) % len(names)
        if col in names:
            return names.index(col)
        if isinstance(col, str) and col.lstrip("-").isdigit() and not header:
            return resolve(int(col))
        raise DatasetError(f"unknown column {col!r}")

    label_idx = resolve(label_column)
    dropped = {resolve(c) for c in drop_columns}
    if label_idx in dropped:
        raise DatasetError("cannot drop the label column")
    keep = [k for k in range(len(names)) if k != label_idx and k not in dropped]

    feats = np.empty((len(body), len(keep)))
    raw_labels = []
    for r, (lineno, row) in enumerate(body):
        if len(row) != len(names):
            raise DatasetError(
                f"{path}:{lineno}: expected {len(names)} fields, found {len(row)}"
            )
        feats[r] = [_parse_float(row[k], lineno, path) for k in keep]
        raw_labels.append(row[label_idx].strip())
    labels, classes = _encode_labels(raw_labels)
    return Dataset(feats, labels, len(classes), None, path.stem, classes)


def _cora_paths(path: Path) -> tuple[Path, Path]:
    if path.is_dir():
        contents = sorted(path.glob("*.content"))
        if len(contents) != 1:
            raise DatasetError(f"{path}: expected exactly one *.content file")
        content = contents[0]
    else:
        content = path
    cites = content.with_suffix(".cites")
    if not cites.exists():
        raise DatasetError(f"{cites}: citation file not found")
    return content, cites


def _load_cora(path: Path, drop_columns) -> Dataset:
    content, cites = _cora_paths(path)
    ids: dict[str, int] = {}
    rows, raw_labels = [], []
    width = None
    with open(content) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split("\t")
            if parts == [""]:
                continue
            if len(parts) < 3:
                raise DatasetError(f"{content}:{lineno}: expected id, features, label")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise DatasetError(
                    f"{content}:{lineno}: expected {width} fields, found {len(parts)}"
                )
            if parts[0] in ids:
                raise DatasetError(f"{content}:{lineno}: duplicate node id {parts[0]!r}")
            ids[parts[0]] = len(ids)
            rows.append([_parse_float(v, lineno, content) for v in parts[1:-1]])
            raw_labels.append(parts[-1])

    edges: set[tuple[int, int]] = set()
    with open(cites) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise DatasetError(f"{cites}:{lineno}: expected two node ids")
            for p in parts:
                if p not in ids:
                    raise DatasetError(f"{cites}:{lineno}: unknown node id {p!r}")
            i, j = ids[parts[0]], ids[parts[1]]
            if i != j:
                edges.add((min(i, j), max(i, j)))

    feats = np.array(rows, dtype=np.float64)
    if drop_columns:
        keep = np.setdiff1d(np.arange(feats.shape[1]), np.asarray(drop_columns, dtype=int))
        feats = feats[:, keep]
    labels, classes = _encode_labels(raw_labels)
    return Dataset(feats, labels, len(classes), sorted(edges), content.stem, classes)


def load_dataset(path, format="csv", label_column=-1, drop_columns=(), header=None) -> Dataset:
    """Read a dataset from disk.

    Parameters
    ----------
    path : path-like
        CSV file, or for ``format="cora"`` either the ``.content`` file or a
        directory holding one ``.content`` and matching ``.cites`` file.
    format : {"csv", "cora"}
    label_column : int or str
        CSV only. 0-based index (negative counts from the end) or header name.
    drop_columns : sequence
        Feature columns to discard (names or indices; indices for cora are
        positions within the feature block).
    header : bool or None
        CSV only. ``None`` infers a header when the first row is not numeric.

    Labels are re-encoded to ``0..K-1`` in order of first appearance.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"{path}: no such file or directory")
    if format == "csv":
        return _load_csv(path, label_column, list(drop_columns), header)
    if format == "cora":
        return _load_cora(path, list(drop_columns))
    raise DatasetError(f"unknown dataset format {format!r}")


def l1_row_normalize(features):
    """Scale every nonzero row to unit l1 norm; zero rows stay zero.

    Accepts dense arrays and scipy sparse matrices.
    """
    import scipy.sparse as sp

    if sp.issparse(features):
        X = sp.csr_matrix(features, dtype=np.float64, copy=True)
        norms = np.asarray(abs(X).sum(axis=1)).ravel()
        scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
        return sp.diags(scale) @ X
    X = np.asarray(features, dtype=np.float64)
    norms = np.abs(X).sum(axis=1, keepdims=True)
    return np.divide(X, norms, out=np.zeros_like(X), where=norms > 0)


@dataclass(frozen=True)
class MaskedStream:
    """An ordering of a dataset with a fixed set of concealed labels.

    ``order`` starts with the warm-start indices (one per class, in class
    order) followed by the remaining observations in random order.
    ``concealed[i]`` refers to dataset row ``i``.
    """

    dataset: Dataset
    order: np.ndarray
    concealed: np.ndarray
    warm_start_indices: np.ndarray
    missing_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("order", "concealed", "warm_start_indices"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))

    @property
    def num_warm(self) -> int:
        return len(self.warm_start_indices)

    @property
    def online_order(self) -> np.ndarray:
        return self.order[self.num_warm:]

    def to_json(self) -> str:
        return json.dumps(
            {
                "dataset": self.dataset.name,
                "missing_fraction": self.missing_fraction,
                "seed": self.seed,
                "order": self.order.tolist(),
                "warm_start_indices": self.warm_start_indices.tolist(),
                "concealed": np.flatnonzero(self.concealed).tolist(),
            },
            sort_keys=True,
        )


def round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def mask_and_order(dataset: Dataset, missing_fraction: float, seed: int) -> MaskedStream:
    """Shuffle the dataset, pick one warm-start row per class and conceal labels.

    Exactly ``round(missing_fraction * (T - K))`` of the non-warm-start rows
    are concealed. The draw depends only on ``seed``, the labels and ``T``.
    """
    if not 0.0 <= missing_fraction <= 1.0:
        raise ValueError("missing_fraction must lie in [0, 1]")
    K = dataset.num_classes
    T = dataset.num_observations
    rng = np.random.default_rng(seed)

    warm = np.empty(K, dtype=np.int64)
    for c in range(K):
        members = np.flatnonzero(dataset.labels == c)
        if members.size == 0:
            raise DatasetError(f"class {c} has no observations")
        warm[c] = rng.choice(members)

    rest = np.setdiff1d(np.arange(T), warm)
    rest = rest[rng.permutation(rest.size)]
    n_hidden = round_half_up(missing_fraction * rest.size)
    concealed = np.zeros(T, dtype=bool)
    concealed[rest[rng.choice(rest.size, size=n_hidden, replace=False)]] = True

    return MaskedStream(
        dataset,
        np.concatenate([warm, rest]),
        concealed,
        warm,
        float(missing_fraction),
        int(seed),
    )


def make_blobs(n_samples, num_classes=3, num_features=10, separation=4.0, seed=0,
               name="blobs") -> Dataset:
    """Gaussian clusters with unit noise around random class centres.

    Centres are drawn on a sphere of radius ``separation``; class sizes are
    as equal as possible.
    """
    rng = np.random.default_rng(seed)
    centres = rng.standard_normal((num_classes, num_features))
    centres *= separation / np.linalg.norm(centres, axis=1, keepdims=True)
    labels = np.arange(n_samples) % num_classes
    labels = labels[rng.permutation(n_samples)]
    X = centres[labels] + rng.standard_normal((n_samples, num_features))
    return Dataset(X, labels, num_classes, None, name)
