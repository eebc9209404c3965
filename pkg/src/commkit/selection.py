"""Representative-partition selectors over a Louvain ensemble.

Four methods: similarity-strength selection (`star`), iterative consensus
clustering (`consensus`), plain maximum modularity (`max_mod`), and the most
frequent canonical partition (`most_frequent`).  Tie chains are fully
deterministic; see each selector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, SignedInputError
from .graph import Graph, from_dense_matrix
from .louvain import Ensemble, LouvainParams, run_ensemble
from .modularity import ModularityScore, NullModel, modularity
from .partition import AriMatrix, Partition
from .seeds import split64

__all__ = [
    "SelectionResult",
    "ConsensusParams",
    "star_select",
    "max_modularity_select",
    "most_frequent_select",
    "consensus_matrix",
    "consensus_cluster",
]


@dataclass(frozen=True)
class SelectionResult:
    method: str
    partition: Partition
    q: ModularityScore
    source_index: int | None = None
    diagnostics: dict = field(default_factory=dict)


def star_select(ens: Ensemble, m: AriMatrix) -> SelectionResult:
    """Pick the ensemble member with maximal summed pairwise similarity.

    Strength s_i is the i-th row sum of the ARI matrix (zero diagonal, so a
    member never counts its self-similarity).  Ties on strength are broken
    by the higher modularity, remaining ties by the lowest member index.
    """
    if ens.t < 2:
        raise DataError("strength-based selection needs an ensemble of size >= 2")
    if m.t != ens.t:
        raise DataError(f"ARI matrix size {m.t} does not match ensemble size {ens.t}")
    strengths = m.strengths()
    qs = ens.q_values()
    cand = np.flatnonzero(strengths == strengths.max())
    winner = int(cand[np.argmax(qs[cand])])  # argmax returns first index on ties
    part, score = ens.members[winner]
    return SelectionResult(
        method="star",
        partition=part,
        q=score,
        source_index=winner,
        diagnostics={"strengths": strengths},
    )


def max_modularity_select(ens: Ensemble) -> SelectionResult:
    """Highest-Q member; ties by lowest index."""
    if ens.t < 1:
        raise DataError("empty ensemble")
    qs = ens.q_values()
    winner = int(np.argmax(qs))
    part, score = ens.members[winner]
    return SelectionResult(method="max_mod", partition=part, q=score, source_index=winner)


def most_frequent_select(ens: Ensemble) -> SelectionResult:
    """Most frequent canonical partition; ties by higher Q, then lowest index."""
    if ens.t < 1:
        raise DataError("empty ensemble")
    counts: dict[bytes, int] = {}
    for p, _ in ens.members:
        counts[p.key()] = counts.get(p.key(), 0) + 1
    best = None  # (multiplicity, q, -index) lexicographic max
    for i, (p, s) in enumerate(ens.members):
        cand = (counts[p.key()], s.q, -i)
        if best is None or cand > best:
            best = cand
            winner = i
    part, score = ens.members[winner]
    return SelectionResult(
        method="most_frequent",
        partition=part,
        q=score,
        source_index=winner,
        diagnostics={"multiplicity": counts[part.key()]},
    )


def consensus_matrix(ens: Ensemble) -> np.ndarray:
    """Co-assignment frequency matrix D: D_ij = fraction of members with c_i = c_j."""
    if ens.t < 1:
        raise DataError("empty ensemble")
    n = ens.members[0][0].n
    d = np.zeros((n, n))
    for p, _ in ens.members:
        onehot = np.zeros((n, p.k))
        onehot[np.arange(n), p.assignment] = 1.0
        d += onehot @ onehot.T
    d /= ens.t
    return d


@dataclass(frozen=True)
class ConsensusParams:
    tau: float = 0.5
    runs_per_iter: int = 150
    max_iters: int = 20
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise DataError("tau must lie in [0, 1]")
        if self.max_iters < 1:
            raise DataError("max_iters must be at least 1")
        if self.runs_per_iter < 1:
            raise DataError("runs_per_iter must be at least 1")


def consensus_cluster(
    g: Graph,
    model: NullModel,
    params: ConsensusParams,
    louvain_params: LouvainParams | None = None,
    initial_ensemble: Ensemble | None = None,
    jobs: int = 1,
) -> SelectionResult:
    """Iterative consensus clustering; requires nonnegative weights.

    Each iteration runs `runs_per_iter` Louvain runs on the current graph,
    builds the co-assignment matrix, zeroes entries below tau, and treats the
    result as the next weighted graph.  Convergence = all runs of an
    iteration return the same canonical partition.  The final Q is evaluated
    on the original graph under `model`.  With `initial_ensemble`, iteration
    0 reuses those runs instead of generating fresh ones.
    """
    if g.sign_profile == "signed":
        raise SignedInputError("consensus clustering requires nonnegative weights")
    current = g
    current_model = model
    last_ens: Ensemble | None = None
    converged = False
    iters_used = 0
    for it in range(params.max_iters):
        iters_used = it + 1
        if it == 0 and initial_ensemble is not None:
            if initial_ensemble.graph_fingerprint != g.fingerprint():
                raise DataError("initial ensemble was built on a different graph")
            ens = initial_ensemble
        else:
            ens = run_ensemble(current, current_model, params.runs_per_iter,
                               split64(params.seed, it), params=louvain_params, jobs=jobs)
        last_ens = ens
        first_key = ens.members[0][0].key()
        if all(p.key() == first_key for p, _ in ens.members):
            converged = True
            break
        d = consensus_matrix(ens)
        d[d < params.tau] = 0.0
        np.fill_diagonal(d, 0.0)  # self-agreement carries no grouping signal
        if not np.any(d):
            break  # thresholding removed everything; no further iteration possible
        current = from_dense_matrix(d, directed=False)
        current_model = NullModel.CONFIGURATION_WEIGHTED
    if converged:
        part = last_ens.members[0][0]
    else:
        # best-Q partition of the final iteration, re-scored on the original graph
        rescored = [modularity(g, p.assignment, model).q for p, _ in last_ens.members]
        part = last_ens.members[int(np.argmax(rescored))][0]
    score = modularity(g, part.assignment, model)
    return SelectionResult(
        method="consensus",
        partition=part,
        q=score,
        source_index=None,
        diagnostics={"iterations": iters_used, "converged": converged},
    )
