import numpy as np
import pytest

from oprlearn import gcn
from oprlearn.data import l1_row_normalize, make_blobs, mask_and_order
from oprlearn.environment import respond
from oprlearn.graph import KnnGraph
from oprlearn.harness import ExperimentConfig, run_replica
from oprlearn.imputation import OracleImputer
from oprlearn.policies import (BilinucbPolicy, GcnucbPolicy, LinUCBPolicy, ProtocolError,
                               RogcnPolicy)


def separable_stream(T=200, seed=0, missing=0.0, K=2):
    ds = make_blobs(T, K, 6, separation=6.0, seed=seed)
    return mask_and_order(ds, missing, seed), l1_row_normalize(ds.features)


def play(policy, stream, X):
    preds, hs = [], []
    for idx in stream.online_order:
        pred = policy.predict(X[idx], int(idx))
        h = respond(stream, int(idx), pred)
        policy.feedback(h)
        preds.append(pred)
        hs.append(h)
    labels = stream.dataset.labels[stream.online_order]
    return np.array(preds), np.array(hs), labels


def warm(stream, X):
    w = stream.warm_start_indices
    return X[w], stream.dataset.labels[w]


# --- ROGCN -----------------------------------------------------------------

def rogcn_for(stream, X, **kw):
    wX, wy = warm(stream, X)
    return RogcnPolicy(wX, wy, stream.dataset.num_classes, KnnGraph(X.shape[1], 5),
                       gcn.GcnHyper(**kw), seed=0)


def test_rogcn_correct_response_adds_label():
    stream, X = separable_stream(20)
    pol = rogcn_for(stream, X)
    pred = pol.predict(X[stream.online_order[0]])
    n_before = sum(l >= 0 for l in pol.labels)
    pol.feedback(1)
    assert sum(l >= 0 for l in pol.labels) == n_before + 1
    assert pol.labels[-1] == pred


@pytest.mark.parametrize("h", [0, -1])
def test_rogcn_other_responses_keep_label_missing(h):
    stream, X = separable_stream(20)
    pol = rogcn_for(stream, X)
    pol.predict(X[stream.online_order[0]])
    n_before = sum(l >= 0 for l in pol.labels)
    pol.feedback(h)
    assert sum(l >= 0 for l in pol.labels) == n_before
    assert pol.labels[-1] == -1


def test_rogcn_protocol_errors():
    stream, X = separable_stream(20)
    pol = rogcn_for(stream, X)
    with pytest.raises(ProtocolError):
        pol.feedback(1)
    pol.predict(X[stream.online_order[0]])
    with pytest.raises(ProtocolError):
        pol.predict(X[stream.online_order[1]])


def test_rogcn_learns_separable_stream():
    stream, X = separable_stream(202)
    preds, _, labels = play(rogcn_for(stream, X), stream, X)
    correct = preds == labels
    assert correct.mean() >= 0.95
    assert correct[-100:].all()


# --- BILINUCB --------------------------------------------------------------

class FixedImputer:
    def __init__(self, vector):
        self.vector = np.asarray(vector, float)
        self.feedbacks = []

    def observe(self, x, key=None):
        return self.vector

    def feedback(self, arm, h):
        self.feedbacks.append((arm, h))


def test_bilinucb_missing_response_inside_band():
    wX = np.array([[1.0, 0.0], [0.0, 1.0]])
    x = np.array([0.6, 0.4])
    probe = LinUCBPolicy(wX, [0, 1], 2, alpha=0.25)
    scores = probe.scores(x)
    k = int(np.argmax([s.ucb for s in scores]))
    inside = scores[k].mu + 0.5 * scores[k].sigma
    vec = np.zeros(2)
    vec[k] = inside
    vec[1 - k] = 1 - inside
    pol = BilinucbPolicy(wX, [0, 1], 2, FixedImputer(vec), warmup=0)
    b_before = pol.arms[k].b.copy()
    assert pol.predict(x) == k
    pol.feedback(-1)
    np.testing.assert_allclose(pol.arms[k].b - b_before, inside * x, atol=1e-15)
    assert pol.imputer.feedbacks == [(k, -1)]


def test_bilinucb_bounded_vs_unbounded():
    wX = np.array([[1.0, 0.0], [0.0, 1.0]])
    x = np.array([0.6, 0.4])
    imputed = np.array([1.0, 0.0])
    bounded = BilinucbPolicy(wX, [0, 1], 2, FixedImputer(imputed), warmup=0)
    raw = BilinucbPolicy(wX, [0, 1], 2, FixedImputer(imputed), bounded=False, warmup=0)
    k = bounded.predict(x)
    assert raw.predict(x) == k
    mu_sigma = [(sc.mu, sc.sigma) for sc in LinUCBPolicy(wX, [0, 1], 2).scores(x)][k]
    b0 = bounded.arms[k].b.copy()
    bounded.feedback(-1)
    raw.feedback(-1)
    expected = float(np.clip(imputed[k], mu_sigma[0] - mu_sigma[1], mu_sigma[0] + mu_sigma[1]))
    np.testing.assert_allclose(bounded.arms[k].b - b0, expected * x, atol=1e-15)
    np.testing.assert_allclose(raw.arms[k].b - b0, imputed[k] * x, atol=1e-15)


def test_bilinucb_warmup_ignores_missing_rewards():
    wX = np.array([[1.0, 0.0], [0.0, 1.0]])
    pol = BilinucbPolicy(wX, [0, 1], 2, FixedImputer([0.9, 0.1]), warmup=1)
    k = pol.predict(np.array([0.5, 0.5]))
    before = pol.arms[k].A.copy()
    pol.feedback(-1)
    np.testing.assert_array_equal(pol.arms[k].A, before)
    pol.predict(np.array([0.5, 0.5]))
    pol.feedback(-1)
    assert not np.array_equal(pol.arms[k].A, before) or not np.array_equal(pol.arms[1 - k].A, before)


def test_bilinucb_oracle_imputer_close_to_fully_observed():
    ds = make_blobs(400, 3, 8, separation=3.0, seed=5)
    accs = {}
    for name, cfg in {
        "full": ExperimentConfig(algorithm="linucb", missing=0.0),
        "oracle": ExperimentConfig(algorithm="bilinucb", imputer="oracle", missing=1.0, warmup=0),
    }.items():
        accs[name] = np.mean([run_replica(cfg, s, ds).final_accuracy for s in range(3)])
    assert abs(accs["full"] - accs["oracle"]) < 0.03


# --- GCNUCB ----------------------------------------------------------------

def gcnucb_for(stream, X, warmup=0, **kw):
    wX, wy = warm(stream, X)
    return GcnucbPolicy(wX, wy, stream.dataset.num_classes, KnnGraph(X.shape[1], 5),
                        gcn.GcnHyper(**kw), warmup=warmup, seed=0)


def test_gcnucb_arm_statistics_empty_and_single():
    stream, X = separable_stream(20)
    pol = gcnucb_for(stream, X, hidden=2)
    pol.index_sets[0], pol.rewards[0] = [], []
    A, theta = pol.arm_statistics(0)
    np.testing.assert_array_equal(A, np.eye(2))
    np.testing.assert_array_equal(theta, 0)
    pol.contexts[0][0] = [1.0, 0.0]
    pol.index_sets[0], pol.rewards[0] = [0], [1.0]
    A, theta = pol.arm_statistics(0)
    np.testing.assert_array_equal(A, [[2, 0], [0, 1]])
    np.testing.assert_allclose(theta, [1, 0])


def test_gcnucb_arm_statistics_dense_oracle():
    stream, X = separable_stream(40, K=2)
    pol = gcnucb_for(stream, X, hidden=3)
    for idx in stream.online_order[:10]:
        pol.predict(X[idx])
        pol.feedback(1)
    rng = np.random.default_rng(0)
    C = rng.choice(pol.num_nodes, 8, replace=False).tolist()
    r = rng.random(8).tolist()
    pol.index_sets[1], pol.rewards[1] = C, r
    A, theta = pol.arm_statistics(1)
    G = pol.contexts[1]
    A_dense = np.eye(3)
    rhs = np.zeros(3)
    for t, rt in zip(C, r):
        A_dense += np.outer(G[t], G[t])
        rhs += rt * G[t]
    th = np.linalg.inv(A_dense) @ rhs
    th /= np.linalg.norm(th)
    np.testing.assert_allclose(A, A_dense, atol=1e-9)
    np.testing.assert_allclose(theta, th, atol=1e-9)


def test_gcnucb_correct_response_three_arms():
    stream, X = separable_stream(30, K=3)
    pol = gcnucb_for(stream, X)
    sizes = [len(c) for c in pol.index_sets]
    pred = pol.predict(X[stream.online_order[0]])
    pol.feedback(1)
    assert [len(c) for c in pol.index_sets] == [s + 1 for s in sizes]
    assert [r[-1] for r in pol.rewards] == [float(k == pred) for k in range(3)]
    assert [lab[-1] for lab in pol.labels] == [int(k == pred) for k in range(3)]


def test_gcnucb_wrong_response():
    stream, X = separable_stream(30, K=3)
    pol = gcnucb_for(stream, X)
    sizes = [len(c) for c in pol.index_sets]
    pred = pol.predict(X[stream.online_order[0]])
    pol.feedback(0)
    grown = [len(c) - s for c, s in zip(pol.index_sets, sizes)]
    assert grown == [int(k == pred) for k in range(3)]
    assert pol.labels[pred][-1] == 0
    assert pol.rewards[pred][-1] == 0.0
    assert all(pol.labels[k][-1] == -1 for k in range(3) if k != pred)


def test_gcnucb_missing_response_uses_gcn_output():
    stream, X = separable_stream(30, K=3)
    pol = gcnucb_for(stream, X)
    pred = pol.predict(X[stream.online_order[0]])
    pol.pos_probs[pred][-1] = 0.8
    pol.feedback(-1)
    assert pol.rewards[pred][-1] == 0.8
    assert pol.index_sets[pred][-1] == pol.num_nodes - 1
    assert all(lab[-1] == -1 for lab in pol.labels)


def test_gcnucb_missing_reward_is_positive_class_probability():
    stream, X = separable_stream(30, K=3)
    pol = gcnucb_for(stream, X)
    pred = pol.predict(X[stream.online_order[0]])
    _, P = gcn.forward(pol.models[pred], pol.X.matrix(), pol.graph.normalized())
    pol.feedback(-1)
    assert pol.rewards[pred][-1] == P[-1, 1]


def test_gcnucb_bookkeeping_invariants():
    stream, X = separable_stream(80, K=3, missing=0.5)
    pol = gcnucb_for(stream, X)
    total = sum(len(c) for c in pol.index_sets)
    for idx in stream.online_order:
        pol.predict(X[idx])
        norms = np.linalg.norm(pol.last_contexts, axis=1)
        assert np.all((norms == 0) | (np.abs(norms - 1) <= 1e-9))
        h = respond(stream, int(idx), pol._pending)
        pol.feedback(h)
        new_total = sum(len(c) for c in pol.index_sets)
        assert new_total - total == (3 if h == 1 else 1)
        total = new_total
        for c, r in zip(pol.index_sets, pol.rewards):
            assert len(c) == len(r)
            assert all(0.0 <= v <= 1.0 for v in r)


def test_gcnucb_protocol_errors():
    stream, X = separable_stream(20)
    pol = gcnucb_for(stream, X)
    with pytest.raises(ProtocolError):
        pol.feedback(0)


@pytest.mark.parametrize("algorithm, imputer", [("bilinucb", "kmeans"), ("bilinucb", "random"),
                                                ("gcnucb", "none")])
def test_warmup_matches_linucb_trace(algorithm, imputer):
    ds = make_blobs(320, 3, 6, separation=1.5, seed=9)
    base = run_replica(ExperimentConfig(algorithm="linucb", missing=0.5), 4, ds)
    other = run_replica(ExperimentConfig(algorithm=algorithm, imputer=imputer, missing=0.5,
                                         warmup=300, train_steps=1), 4, ds)
    assert base.predictions()[:300] == other.predictions()[:300]


def test_linucb_policy_exposes_trace_vectors():
    stream, X = separable_stream(20, K=3)
    wX, wy = warm(stream, X)
    pol = LinUCBPolicy(wX, wy, 3)
    pol.predict(X[stream.online_order[0]])
    assert pol.last_ucb.shape == (3,)
    assert pol.last_thetas.shape == (3, X.shape[1])
