import numpy as np
import pytest

import commkit as ck
from commkit.errors import DataError
from commkit.modularity import LocalMoveState, modularity_value

from conftest import random_graph, set_partitions

WEIGHTED = ck.NullModel.CONFIGURATION_WEIGHTED


def exhaustive_max_q(g, model):
    best_q, best_blocks = -np.inf, None
    for blocks in set_partitions(list(range(g.n))):
        a = np.empty(g.n, dtype=np.int64)
        for ci, block in enumerate(blocks):
            a[block] = ci
        q = modularity_value(g, a, model)
        if q > best_q:
            best_q, best_blocks = q, blocks
    return best_q, best_blocks


def test_two_triangle_exhaustive_optimum(two_triangle):
    g, truth = two_triangle
    count = sum(1 for _ in set_partitions(list(range(6))))
    assert count == 203  # Bell(6)
    best_q, blocks = exhaustive_max_q(g, WEIGHTED)
    assert best_q == pytest.approx(5 / 14, abs=1e-14)
    assert sorted(sorted(b) for b in blocks) == [[0, 1, 2], [3, 4, 5]]


def test_louvain_attains_two_triangle_optimum(two_triangle):
    g, truth = two_triangle
    for seed in range(30):
        part, score = ck.louvain_once(g, WEIGHTED, ck.LouvainParams(seed=seed))
        assert part == truth
        assert score.q == pytest.approx(5 / 14, abs=1e-12)


def test_louvain_deterministic_given_seed(rng):
    g = random_graph(rng, 60, density=0.15, directed=False)
    p1, s1 = ck.louvain_once(g, WEIGHTED, ck.LouvainParams(seed=99))
    p2, s2 = ck.louvain_once(g, WEIGHTED, ck.LouvainParams(seed=99))
    assert p1 == p2
    assert s1.q == s2.q


def test_louvain_local_optimality(rng):
    """No single-node move can improve the returned partition."""
    for trial in range(5):
        g = random_graph(rng, 40, density=0.2, directed=False)
        part, score = ck.louvain_once(g, WEIGHTED, ck.LouvainParams(seed=trial))
        state = LocalMoveState(g, WEIGHTED, assignment=part.assignment.copy())
        k = part.k
        for node in range(g.n):
            for to in range(k + 1):  # including a fresh singleton community
                assert state.delta(node, to) <= 1e-9


def test_louvain_score_matches_full_evaluation(rng):
    g = random_graph(rng, 50, density=0.2, directed=True)
    part, score = ck.louvain_once(g, WEIGHTED, ck.LouvainParams(seed=5))
    assert score.q == pytest.approx(modularity_value(g, part.assignment, WEIGHTED), abs=1e-12)


def test_louvain_signed_and_precomputed(rng):
    gs = random_graph(rng, 30, weights="signed", directed=False)
    for model in (ck.NullModel.SIGNED_CONFIGURATION, ck.NullModel.PRECOMPUTED):
        part, score = ck.louvain_once(gs, model, ck.LouvainParams(seed=1))
        assert score.q == pytest.approx(modularity_value(gs, part.assignment, model), abs=1e-12)
        # still locally optimal
        state = LocalMoveState(gs, model, assignment=part.assignment.copy())
        for node in range(gs.n):
            for to in range(part.k + 1):
                assert state.delta(node, to) <= 1e-9


def test_aggregation_preserves_q(rng):
    # Q of a coarse partition equals Q of the matching partition of the supergraph
    g = random_graph(rng, 40, density=0.2, directed=False)
    a = rng.integers(0, 6, size=40).astype(np.int64)
    agg = ck.aggregate_by_partition(g, a)
    q_fine = modularity_value(g, a, WEIGHTED)
    q_coarse = modularity_value(agg, np.arange(agg.n), WEIGHTED)
    assert q_coarse == pytest.approx(q_fine, abs=1e-12)


def test_run_ensemble_order_and_parallel_invariance(two_triangle, rng):
    g = random_graph(rng, 50, density=0.15, directed=False)
    e1 = ck.run_ensemble(g, WEIGHTED, 8, 42, jobs=1)
    e2 = ck.run_ensemble(g, WEIGHTED, 8, 42, jobs=3)
    assert [p.key() for p in e1.partitions()] == [p.key() for p in e2.partitions()]
    assert np.array_equal(e1.q_values(), e2.q_values())
    # member i depends only on (base_seed, i): a longer ensemble extends a shorter one
    e3 = ck.run_ensemble(g, WEIGHTED, 12, 42)
    assert [p.key() for p in e3.partitions()][:8] == [p.key() for p in e1.partitions()]


def test_ensemble_save_load_round_trip(tmp_path, rng):
    g = random_graph(rng, 30, density=0.2, directed=False)
    ens = ck.run_ensemble(g, WEIGHTED, 6, 7)
    d = str(tmp_path / "ens")
    ck.save_ensemble(ens, d)
    back = ck.load_ensemble(d, g)
    assert back.t == 6
    assert [p.key() for p in back.partitions()] == [p.key() for p in ens.partitions()]
    assert np.allclose(back.q_values(), ens.q_values(), atol=1e-12)
    # wrong graph is rejected
    other = random_graph(rng, 30, density=0.2, directed=False)
    with pytest.raises(DataError):
        ck.load_ensemble(d, other)


def test_ensemble_trivial_inputs(rng):
    g = random_graph(rng, 10)
    with pytest.raises(DataError):
        ck.run_ensemble(g, WEIGHTED, 0, 1)


def test_louvain_params_validation():
    with pytest.raises(DataError):
        ck.LouvainParams(seed=0, min_gain=-1.0)
    with pytest.raises(DataError):
        ck.LouvainParams(seed=0, node_order="sorted")
