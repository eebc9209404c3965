import numpy as np
import pytest

import commkit as ck
from commkit.errors import DataError, ModelError, StaleStateError
from commkit.modularity import LocalMoveState, modularity_value

from conftest import random_graph

WEIGHTED = ck.NullModel.CONFIGURATION_WEIGHTED
BINARY = ck.NullModel.CONFIGURATION_BINARY
SIGNED = ck.NullModel.SIGNED_CONFIGURATION
PRE = ck.NullModel.PRECOMPUTED


def test_two_triangle_planted_q(two_triangle):
    g, truth = two_triangle
    assert ck.modularity(g, truth.assignment, WEIGHTED).q == pytest.approx(5 / 14, abs=1e-14)
    assert ck.modularity(g, truth.assignment, BINARY).q == pytest.approx(5 / 14, abs=1e-14)


def test_all_in_one_is_zero_under_configuration_models(rng):
    for _ in range(20):
        g = random_graph(rng, int(rng.integers(5, 40)), directed=True)
        ones = np.zeros(g.n, dtype=np.int64)
        assert ck.modularity(g, ones, WEIGHTED).q == pytest.approx(0.0, abs=1e-12)
        gs = random_graph(rng, 20, weights="signed")
        assert ck.modularity(gs, np.zeros(20, dtype=np.int64), SIGNED).q == pytest.approx(
            0.0, abs=1e-12
        )


def test_singletons_q_nonpositive(rng):
    # each singleton contributes only self-loop terms; without self-loops Q < 0
    g = random_graph(rng, 25)
    q = ck.modularity(g, np.arange(25), WEIGHTED).q
    assert q <= 1e-12


def test_signed_reduces_to_weighted_on_nonnegative(rng):
    for _ in range(10):
        g = random_graph(rng, 20)
        a = rng.integers(0, 4, size=20)
        qw = ck.modularity(g, a, WEIGHTED).q
        qs = ck.modularity(g, a, SIGNED).q
        assert qs == pytest.approx(qw, abs=1e-12)


def test_binary_requires_unit_weights(rng):
    g = random_graph(rng, 10)
    with pytest.raises(ModelError):
        ck.modularity(g, np.zeros(10, dtype=np.int64), BINARY)


def test_weighted_rejects_signed(rng):
    g = random_graph(rng, 10, weights="signed")
    with pytest.raises(ModelError):
        ck.modularity(g, np.zeros(10, dtype=np.int64), WEIGHTED)


def test_expected_weight_values(two_triangle):
    g, _ = two_triangle
    m = g.marginals()
    # node 2 and 3 both have degree 3; L = 14
    assert ck.expected_weight(m, BINARY, 2, 3) == pytest.approx(9 / 14)
    assert ck.expected_weight(m, WEIGHTED, 2, 3) == pytest.approx(9 / 14)
    with pytest.raises(ModelError):
        ck.expected_weight(m, PRE, 0, 1)


def test_expected_weight_signed_pair(rng):
    g = random_graph(rng, 12, weights="signed")
    m = g.marginals()
    p_plus, p_minus = ck.expected_weight(m, SIGNED, 1, 2)
    assert p_plus == pytest.approx(m.s_in_plus[1] * m.s_out_plus[2] / m.w_plus)
    assert p_minus == pytest.approx(m.s_in_minus[1] * m.s_out_minus[2] / m.w_minus)


def test_precomputed_is_normalized_intra_weight(rng):
    g = random_graph(rng, 15, weights="signed")
    a = rng.integers(0, 3, size=15)
    intra = g.weight[a[g.src] == a[g.dst]].sum()
    norm = np.abs(g.weight).sum()
    assert ck.modularity(g, a, PRE).q == pytest.approx(intra / norm, abs=1e-12)


def test_delta_matches_full_reevaluation(rng):
    """Incremental gains against the O(m) re-evaluation oracle, all models."""
    cases = [
        (random_graph(rng, 30, directed=True), WEIGHTED),
        (random_graph(rng, 30, directed=False), WEIGHTED),
        (random_graph(rng, 25, weights="signed"), SIGNED),
        (random_graph(rng, 25, weights="signed"), PRE),
        (random_graph(rng, 30, weights="unit"), BINARY),
    ]
    for g, model in cases:
        a = rng.integers(0, 5, size=g.n).astype(np.int64)
        state = LocalMoveState(g, model, assignment=a.copy())
        for _ in range(200):
            node = int(rng.integers(g.n))
            to = int(rng.integers(6))
            before = modularity_value(g, state.comm, model)
            got = state.delta(node, to)
            trial = state.comm.copy()
            trial[node] = to
            want = modularity_value(g, trial, model) - before
            assert got == pytest.approx(want, abs=1e-10)
            state.apply(node, to)


def test_delta_modularity_move_guards(rng):
    g = random_graph(rng, 10)
    state = LocalMoveState(g, WEIGHTED)
    assert ck.delta_modularity_move(state, 3, 3, 5) == pytest.approx(state.delta(3, 5))
    with pytest.raises(StaleStateError, match="community"):
        ck.delta_modularity_move(state, 3, 7, 5)


def test_score_same_footing(two_triangle, rng):
    g, truth = two_triangle
    s1 = ck.modularity(g, truth.assignment, WEIGHTED)
    s2 = ck.modularity(g, truth.assignment, BINARY)
    s1.same_footing(s1)
    with pytest.raises(ModelError):
        s1.same_footing(s2)
    other = random_graph(rng, 6, weights="unit")
    s3 = ck.modularity(other, truth.assignment, WEIGHTED)
    with pytest.raises(ModelError):
        s1.same_footing(s3)


def test_epsilon_optimal_set():
    qs = [0.3, 0.5, 0.499, 0.1, 0.5]
    assert ck.epsilon_optimal_set(qs, 0.0) == [1, 4]
    assert ck.epsilon_optimal_set(qs, 0.002) == [1, 2, 4]
    assert ck.epsilon_optimal_set(qs, float("inf")) == [0, 1, 2, 3, 4]
    with pytest.raises(DataError):
        ck.epsilon_optimal_set(qs, -0.1)
    with pytest.raises(DataError):
        ck.epsilon_optimal_set([], 0.1)


def test_epsilon_optimal_set_accepts_ensemble(two_triangle):
    g, _ = two_triangle
    ens = ck.run_ensemble(g, WEIGHTED, 5, 0)
    idx = ck.epsilon_optimal_set(ens, 0.0)
    assert idx  # two-triangle optimum is unique, all runs find it
    assert idx == list(range(5))
