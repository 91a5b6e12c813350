"""Experiment runner: replicas, running accuracy, summaries and result files."""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import gcn
from .data import Dataset, l1_row_normalize, load_dataset, mask_and_order
from .environment import respond
from .imputation import GcnImputer, KMeansImputer, OracleImputer, RandomImputer
from .policies import (BilinucbPolicy, GcnucbPolicy, LinUCBPolicy, RogcnPolicy,
                       make_graph)

log = logging.getLogger(__name__)

ALGORITHMS = ("linucb", "rogcn", "bilinucb", "gcnucb")
IMPUTERS = ("none", "kmeans", "gcn", "random", "oracle")


@dataclass
class ExperimentConfig:
    """All knobs of one experiment; defaults follow the published protocol."""

    dataset: str | None = None
    format: str = "csv"
    label_column: int | str = -1
    drop_columns: list = field(default_factory=list)
    algorithm: str = "linucb"
    imputer: str = "none"
    bounded: bool = True
    missing: float = 0.25
    alpha: float = 0.25
    warmup: int = 300
    knn: int = 5
    hidden: int = 16
    lr: float = 0.01
    weight_decay: float = 5e-4
    dropout: float = 0.5
    train_steps: int = 5
    resamples: int = 10
    seed: int = 0
    out: str | None = None
    classic_update: bool = False
    freeze_bandwidth_after: int | None = None
    native_graph: bool = True
    sparse_features: bool | None = None
    kmeans_clusters: int = 10
    workers: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.imputer not in IMPUTERS:
            raise ValueError(f"unknown imputer {self.imputer!r}")
        if self.algorithm == "bilinucb" and self.imputer == "none":
            raise ValueError("bilinucb needs an imputer")
        if not 0.0 <= self.missing <= 1.0:
            raise ValueError("missing fraction must lie in [0, 1]")
        if self.resamples < 1:
            raise ValueError("resamples must be at least 1")

    @property
    def hyper(self) -> gcn.GcnHyper:
        return gcn.GcnHyper(self.hidden, self.lr, self.weight_decay, self.dropout, self.train_steps)

    @property
    def label(self) -> str:
        if self.algorithm != "bilinucb":
            return self.algorithm.upper()
        prefix = "BILINUCB" if self.bounded else "ILINUCB"
        return f"{prefix}-{self.imputer}"

    @classmethod
    def from_mapping(cls, mapping) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        clean = {k.replace("-", "_"): v for k, v in mapping.items()}
        unknown = set(clean) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**clean)


@dataclass
class StepRecord:
    step: int
    index: int
    prediction: int
    label: int
    concealed: bool
    response: int
    running_accuracy: float


@dataclass
class RunResult:
    seed: int
    records: list[StepRecord]
    wall_time: float
    vectors: dict | None = None

    @property
    def final_accuracy(self) -> float:
        return self.records[-1].running_accuracy if self.records else float("nan")

    @property
    def curve(self) -> np.ndarray:
        return np.array([r.running_accuracy for r in self.records])

    def predictions(self) -> list[int]:
        return [r.prediction for r in self.records]


@dataclass
class ExperimentSummary:
    config: ExperimentConfig
    replica_seeds: list[int]
    finals: list[float]
    curve: np.ndarray
    wall_times: list[float]
    runs: list[RunResult] = field(default_factory=list, repr=False)

    @property
    def mean(self) -> float:
        return float(np.mean(self.finals))

    @property
    def std(self) -> float:
        return float(np.std(self.finals, ddof=1)) if len(self.finals) > 1 else 0.0


def prepare_dataset(config: ExperimentConfig) -> Dataset:
    if config.dataset is None:
        raise ValueError("config has no dataset path")
    return load_dataset(config.dataset, config.format, config.label_column, config.drop_columns)


def make_policy(config: ExperimentConfig, stream, features: np.ndarray, seed):
    """Build the configured policy from the stream's warm-start rows."""
    ds = stream.dataset
    K = ds.num_classes
    warm = stream.warm_start_indices
    warm_X, warm_y = features[warm], ds.labels[warm]
    edges = ds.native_edges if config.native_graph else None
    sparse = config.sparse_features
    if sparse is None:
        sparse = np.count_nonzero(features) < 0.1 * features.size

    def graph():
        return make_graph(features.shape[1], edges, config.knn, config.freeze_bandwidth_after)

    seeds = np.random.SeedSequence(seed).spawn(2)
    if config.algorithm == "linucb":
        return LinUCBPolicy(warm_X, warm_y, K, config.alpha, config.classic_update)
    if config.algorithm == "rogcn":
        return RogcnPolicy(warm_X, warm_y, K, graph(), config.hyper, seeds[0], warm, sparse)
    if config.algorithm == "gcnucb":
        return GcnucbPolicy(warm_X, warm_y, K, graph(), config.hyper, config.alpha,
                            config.warmup, seeds[0], warm, config.classic_update, sparse)

    if config.imputer == "kmeans":
        imputer = KMeansImputer(K, config.kmeans_clusters)
        imputer.warm_start(warm_X, warm_y)
    elif config.imputer == "gcn":
        imputer = GcnImputer(
            RogcnPolicy(warm_X, warm_y, K, graph(), config.hyper, seeds[0], warm, sparse)
        )
    elif config.imputer == "random":
        imputer = RandomImputer(K, seeds[1])
    else:
        imputer = OracleImputer(K, ds.labels)
    return BilinucbPolicy(warm_X, warm_y, K, imputer, config.alpha, config.bounded,
                          config.warmup, config.classic_update)


def run_replica(config: ExperimentConfig, replica_seed: int, dataset: Dataset | None = None,
                trace_hook=None, keep_vectors: bool = False) -> RunResult:
    """Play one shuffled, masked pass over the dataset.

    ``trace_hook(step, prediction, response, ucb)`` is called after each
    response. Running accuracy at step ``t`` counts correct predictions over
    the online steps ``T0 + 1 .. t``.
    """
    start = time.perf_counter()
    dataset = dataset if dataset is not None else prepare_dataset(config)
    features = l1_row_normalize(dataset.features)
    stream = mask_and_order(dataset, config.missing, replica_seed)
    policy = make_policy(config, stream, features, [replica_seed, 1])

    T0 = stream.num_warm
    correct = 0
    records = []
    contexts, thetas = [], None
    for n, idx in enumerate(stream.online_order, start=1):
        idx = int(idx)
        pred = policy.predict(features[idx], idx)
        h = respond(stream, idx, pred)
        policy.feedback(h)
        label = int(dataset.labels[idx])
        correct += pred == label
        records.append(StepRecord(T0 + n, idx, pred, label, bool(stream.concealed[idx]),
                                  h, correct / n))
        if trace_hook is not None:
            trace_hook(T0 + n, pred, h, policy.last_ucb)
        if keep_vectors and policy.last_contexts is not None:
            contexts.append(policy.last_contexts)
            thetas = policy.last_thetas

    vectors = None
    if keep_vectors and contexts:
        vectors = {"contexts": np.array(contexts), "thetas": np.array(thetas),
                   "labels": np.array([r.label for r in records])}
    return RunResult(int(replica_seed), records, time.perf_counter() - start, vectors)


def replica_seeds(master_seed: int, n: int) -> list[int]:
    children = np.random.SeedSequence(master_seed).spawn(n)
    return [int(c.generate_state(1)[0]) for c in children]


def _run_one(args):
    config, seed, dataset = args
    return run_replica(config, seed, dataset)


def run_experiment(config: ExperimentConfig, dataset: Dataset | None = None) -> ExperimentSummary:
    """Run ``config.resamples`` replicas; seeds come from ``config.seed``.

    The seeds, and therefore permutations, masks and warm-start rows, do not
    depend on the algorithm, so every algorithm faces the same streams.
    """
    dataset = dataset if dataset is not None else prepare_dataset(config)
    seeds = replica_seeds(config.seed, config.resamples)
    jobs = [(config, s, dataset) for s in seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            runs = list(pool.map(_run_one, jobs))
    else:
        runs = [_run_one(j) for j in jobs]
    for s, r in zip(seeds, runs):
        log.info("%s seed=%d final=%.4f (%.1fs)", config.label, s, r.final_accuracy, r.wall_time)
    curve = np.mean([r.curve for r in runs], axis=0)
    return ExperimentSummary(config, seeds, [r.final_accuracy for r in runs], curve,
                             [r.wall_time for r in runs], runs)


def summary_dict(summary: ExperimentSummary) -> dict:
    cfg = summary.config
    return {
        "algorithm": cfg.algorithm,
        "label": cfg.label,
        "imputer": cfg.imputer,
        "bounded": cfg.bounded,
        "missing_fraction": cfg.missing,
        "resamples": len(summary.finals),
        "mean": summary.mean,
        "std": summary.std,
        "finals": list(summary.finals),
        "replica_seeds": list(summary.replica_seeds),
        "wall_times": list(summary.wall_times),
        "config": asdict(cfg),
    }


def emit_results(summary: ExperimentSummary, path, format: str = "json",
                 traces: bool = False) -> list[Path]:
    """Write ``curve.csv`` plus ``summary.json`` or ``summary.csv`` into ``path``.

    With ``traces`` each replica's per-step records go to
    ``trace_<seed>.csv``; replicas that kept context/weight vectors get a
    ``vectors_<seed>.npz``.
    """
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    curve_path = out / "curve.csv"
    with open(curve_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "mean_accuracy"])
        first = summary.runs[0].records[0].step if summary.runs else 1
        for i, v in enumerate(summary.curve):
            w.writerow([first + i, repr(float(v))])
    written.append(curve_path)

    data = summary_dict(summary)
    if format == "json":
        p = out / "summary.json"
        p.write_text(json.dumps(data, indent=2))
    elif format == "csv":
        p = out / "summary.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["algorithm", "label", "missing_fraction", "resamples", "mean", "std",
                        "finals"])
            w.writerow([data["algorithm"], data["label"], data["missing_fraction"],
                        data["resamples"], repr(data["mean"]), repr(data["std"]),
                        ";".join(repr(f) for f in data["finals"])])
    else:
        raise ValueError(f"unknown output format {format!r}")
    written.append(p)

    for run in summary.runs:
        if traces:
            p = out / f"trace_{run.seed}.csv"
            with open(p, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow([f.name for f in fields(StepRecord)])
                for r in run.records:
                    w.writerow(list(astuple_record(r)))
            written.append(p)
        if run.vectors is not None:
            p = out / f"vectors_{run.seed}.npz"
            np.savez(p, **run.vectors)
            written.append(p)
    return written


def astuple_record(r: StepRecord):
    return (r.step, r.index, r.prediction, r.label, int(r.concealed), r.response,
            repr(r.running_accuracy))
