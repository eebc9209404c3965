import numpy as np
import pytest

import commkit as ck
from commkit.errors import DataError, SignedInputError
from commkit.louvain import Ensemble
from commkit.modularity import ModularityScore

from conftest import random_graph

WEIGHTED = ck.NullModel.CONFIGURATION_WEIGHTED


def fake_ensemble(g, assignments, model=WEIGHTED):
    """Hand-built ensemble so tie-breaking can be probed exactly."""
    members = tuple(
        (ck.canonicalize(a), ck.modularity(g, ck.canonicalize(a).assignment, model))
        for a in assignments
    )
    return Ensemble(
        graph_fingerprint=g.fingerprint(),
        model=model,
        members=members,
        seeds=tuple(range(len(assignments))),
        base_seed=0,
    )


def test_star_picks_highest_strength(two_triangle):
    g, truth = two_triangle
    # three copies of the planted split and one outlier: copies win on strength
    outlier = [0, 0, 1, 1, 2, 2]
    ens = fake_ensemble(g, [outlier, truth.assignment, truth.assignment, truth.assignment])
    sel = ck.star_select(ens, ck.ari_matrix(ens.partitions()))
    assert sel.partition == truth
    assert sel.source_index == 1  # lowest index among the tied copies
    assert sel.method == "star"


def test_star_strength_tie_broken_by_q(two_triangle):
    g, truth = two_triangle
    a = [0, 0, 0, 1, 1, 1]   # Q = 5/14
    b = [0, 0, 1, 1, 1, 1]   # lower Q
    # two distinct partitions, one copy each: ARI matrix is symmetric 2x2,
    # strengths tie exactly, so Q decides
    ens = fake_ensemble(g, [b, a])
    sel = ck.star_select(ens, ck.ari_matrix(ens.partitions()))
    assert sel.source_index == 1
    assert sel.q.q == pytest.approx(5 / 14)


def test_star_invariances(rng):
    """Permutation of members, relabeling, and positive rescale of the matrix."""
    g = random_graph(rng, 24, density=0.3, directed=False)
    base = [rng.integers(0, 4, size=24) for _ in range(9)]
    ens = fake_ensemble(g, base)
    m = ck.ari_matrix(ens.partitions())
    winner_part = ck.star_select(ens, m).partition

    for trial in range(50):
        perm = rng.permutation(9)
        permuted = fake_ensemble(g, [base[i] for i in perm])
        mp = ck.ari_matrix(permuted.partitions())
        assert ck.star_select(permuted, mp).partition == winner_part
        # positive rescaling of the similarity matrix (e.g. 1/(T-1) normalization)
        scaled = ck.AriMatrix(values=m.values * rng.uniform(0.1, 10.0))
        assert ck.star_select(ens, scaled).partition == winner_part
        # relabeling communities of every member
        relabeled = fake_ensemble(
            g, [rng.permutation(int(a.max()) + 1)[a] for a in base]
        )
        mr = ck.ari_matrix(relabeled.partitions())
        assert ck.star_select(relabeled, mr).partition == winner_part


def test_selectors_agree_without_degeneracy(two_triangle):
    g, truth = two_triangle
    ens = ck.run_ensemble(g, WEIGHTED, 12, 3)
    am = ck.ari_matrix(ens.partitions())
    star = ck.star_select(ens, am)
    mm = ck.max_modularity_select(ens)
    mf = ck.most_frequent_select(ens)
    cc = ck.consensus_cluster(g, WEIGHTED, ck.ConsensusParams(runs_per_iter=12, seed=4))
    assert star.partition == mm.partition == mf.partition == cc.partition == truth


def test_max_modularity_tie_lowest_index(two_triangle):
    g, truth = two_triangle
    ens = fake_ensemble(g, [truth.assignment, truth.assignment])
    assert ck.max_modularity_select(ens).source_index == 0


def test_most_frequent_counts_canonical_copies(two_triangle):
    g, truth = two_triangle
    a = [0, 0, 0, 1, 1, 1]
    a_relabel = [5, 5, 5, 2, 2, 2]  # same canonical partition
    b = [0, 0, 1, 1, 2, 2]
    ens = fake_ensemble(g, [b, a, a_relabel])
    sel = ck.most_frequent_select(ens)
    assert sel.partition == truth
    assert sel.diagnostics["multiplicity"] == 2


def test_consensus_matrix_entries(two_triangle):
    g, truth = two_triangle
    split = [0, 0, 0, 1, 1, 1]
    other = [0, 0, 1, 1, 1, 1]
    ens = fake_ensemble(g, [split, other])
    d = ck.consensus_matrix(ens)
    assert d[0, 1] == pytest.approx(1.0)   # together in both
    assert d[0, 5] == pytest.approx(0.0)   # together in neither
    assert d[2, 0] == pytest.approx(0.5)   # together in one of two
    assert np.allclose(d, d.T)
    assert np.all(np.diag(d) == 1.0)


def test_consensus_converges_on_planted():
    inst = ck.generate_planted(4, 20, 0.5, 0.02, seed=9)
    sel = ck.consensus_cluster(
        inst.graph, WEIGHTED, ck.ConsensusParams(runs_per_iter=20, seed=2)
    )
    assert sel.diagnostics["converged"]
    assert ck.ari(sel.partition, inst.truth) == 1.0
    # Q is evaluated on the original graph
    assert sel.q.graph_fingerprint == inst.graph.fingerprint()


def test_consensus_rejects_signed(rng):
    g = random_graph(rng, 15, weights="signed")
    with pytest.raises(SignedInputError):
        ck.consensus_cluster(g, ck.NullModel.SIGNED_CONFIGURATION, ck.ConsensusParams(seed=0))


def test_consensus_reuses_initial_ensemble(two_triangle):
    g, truth = two_triangle
    ens = ck.run_ensemble(g, WEIGHTED, 10, 5)
    sel = ck.consensus_cluster(
        g, WEIGHTED, ck.ConsensusParams(runs_per_iter=10, seed=5), initial_ensemble=ens
    )
    assert sel.partition == truth
    assert sel.diagnostics["iterations"] == 1
    other = ck.generate_planted(3, 5, 0.9, 0.05, seed=1).graph
    with pytest.raises(DataError):
        ck.consensus_cluster(
            other, WEIGHTED, ck.ConsensusParams(seed=0), initial_ensemble=ens
        )


def test_consensus_params_validation():
    with pytest.raises(DataError):
        ck.ConsensusParams(tau=1.5)
    with pytest.raises(DataError):
        ck.ConsensusParams(max_iters=0)
    with pytest.raises(DataError):
        ck.ConsensusParams(runs_per_iter=0)


def test_star_requires_matching_sizes(two_triangle, rng):
    g, truth = two_triangle
    ens = fake_ensemble(g, [truth.assignment, truth.assignment, truth.assignment])
    small = ck.ari_matrix(ens.partitions()[:2])
    with pytest.raises(DataError):
        ck.star_select(ens, small)
