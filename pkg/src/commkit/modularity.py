"""Modularity under selectable null models, incremental move gains, ε-optimal sets.

All models reduce to one generalized form

    Q = (1/norm) * sum_intra w_ij
        - alpha_p * sum_intra pin_i * pout_j
        + alpha_m * sum_intra nin_i * nout_j

with model-specific coefficient vectors:

    binary:      norm = L,      alpha_p = 1/L^2,        pin/pout = in/out degree
    weighted:    norm = w_tot,  alpha_p = 1/w_tot^2,    pin/pout = in/out strength
    signed:      norm = w+ + w-, two channels with alpha_p = 1/(w+ * norm),
                 alpha_m = 1/(w- * norm), pin/pout = positive strengths,
                 nin/nout = negative-strength magnitudes
    precomputed: norm = sum|w|,  alpha_p = alpha_m = 0 (null term already
                 subtracted from the input matrix)

The signed form is the two-channel decomposition
Q = (w+/(w+ + w-)) Q+ - (w-/(w+ + w-)) Q-, which reduces exactly to the
weighted configuration model when w- = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DataError, ModelError, StaleStateError
from .graph import Graph, NodeMarginals

__all__ = [
    "NullModel",
    "ModularityScore",
    "check_compatible",
    "expected_weight",
    "modularity",
    "LocalMoveState",
    "delta_modularity_move",
    "epsilon_optimal_set",
]


class NullModel(Enum):
    CONFIGURATION_BINARY = "binary"
    CONFIGURATION_WEIGHTED = "weighted"
    SIGNED_CONFIGURATION = "signed"
    PRECOMPUTED = "precomputed"

    @classmethod
    def parse(cls, name: str) -> "NullModel":
        for m in cls:
            if m.value == name:
                return m
        raise DataError(f"unknown null model {name!r}")


@dataclass(frozen=True)
class ModularityScore:
    """A Q value tagged with the model and graph it was computed on.

    Scores under different models are never comparable; `same_footing`
    guards against accidental cross-model comparison.
    """

    q: float
    model: NullModel
    graph_fingerprint: str

    def same_footing(self, other: "ModularityScore") -> None:
        if self.model is not other.model or self.graph_fingerprint != other.graph_fingerprint:
            raise ModelError("modularity scores from different models/graphs are not comparable")


def check_compatible(g: Graph, model: NullModel) -> None:
    if model is NullModel.CONFIGURATION_BINARY:
        if g.weight.size and not np.all(g.weight == 1.0):
            raise ModelError("binary configuration model requires all edge weights equal to 1")
    elif model is NullModel.CONFIGURATION_WEIGHTED:
        if g.sign_profile == "signed":
            raise ModelError(
                "weighted configuration model requires nonnegative weights; "
                "use the signed model for signed graphs"
            )
    # signed and precomputed accept any weights


@dataclass(frozen=True)
class GainCoefficients:
    """Generalized-modularity coefficients for one (graph, model) pair."""

    norm: float
    alpha_p: float
    alpha_m: float
    pin: np.ndarray
    pout: np.ndarray
    nin: np.ndarray
    nout: np.ndarray


def gain_coefficients(g: Graph, model: NullModel) -> GainCoefficients:
    check_compatible(g, model)
    m = g.marginals()
    zeros = np.zeros(g.n)
    if m.L == 0:
        raise DataError("empty graph: modularity is undefined")
    if model is NullModel.CONFIGURATION_BINARY:
        return GainCoefficients(
            norm=float(m.L),
            alpha_p=1.0 / (m.L * m.L),
            alpha_m=0.0,
            pin=m.k_in.astype(np.float64),
            pout=m.k_out.astype(np.float64),
            nin=zeros,
            nout=zeros,
        )
    if model is NullModel.CONFIGURATION_WEIGHTED:
        if m.w_tot == 0.0:
            raise DataError("w_tot = 0: weighted configuration model is undefined")
        return GainCoefficients(
            norm=m.w_tot,
            alpha_p=1.0 / (m.w_tot * m.w_tot),
            alpha_m=0.0,
            pin=m.s_in,
            pout=m.s_out,
            nin=zeros,
            nout=zeros,
        )
    if model is NullModel.SIGNED_CONFIGURATION:
        norm = m.w_plus + m.w_minus
        if norm == 0.0:
            raise DataError("all-zero weights: signed model is undefined")
        return GainCoefficients(
            norm=norm,
            alpha_p=1.0 / (m.w_plus * norm) if m.w_plus > 0 else 0.0,
            alpha_m=1.0 / (m.w_minus * norm) if m.w_minus > 0 else 0.0,
            pin=m.s_in_plus,
            pout=m.s_out_plus,
            nin=m.s_in_minus,
            nout=m.s_out_minus,
        )
    # precomputed: matrix already encodes observed-minus-expected
    norm = m.w_plus + m.w_minus
    if norm == 0.0:
        raise DataError("all-zero weights: precomputed modularity is undefined")
    return GainCoefficients(
        norm=norm, alpha_p=0.0, alpha_m=0.0, pin=zeros, pout=zeros, nin=zeros, nout=zeros
    )


def expected_weight(marginals: NodeMarginals, model: NullModel, i: int, j: int):
    """Null-model expectation for the (i, j) entry.

    Signed model returns the pair (p_plus, p_minus); a sign channel with zero
    total weight contributes expectation 0.
    """
    if model is NullModel.PRECOMPUTED:
        raise ModelError("precomputed model has no null term")
    if model is NullModel.CONFIGURATION_BINARY:
        if marginals.L == 0:
            raise DataError("L = 0: binary null model undefined")
        return float(marginals.k_in[i] * marginals.k_out[j] / marginals.L)
    if model is NullModel.CONFIGURATION_WEIGHTED:
        if marginals.w_tot == 0.0:
            raise DataError("w_tot = 0: weighted null model undefined")
        return float(marginals.s_in[i] * marginals.s_out[j] / marginals.w_tot)
    p_plus = (
        float(marginals.s_in_plus[i] * marginals.s_out_plus[j] / marginals.w_plus)
        if marginals.w_plus > 0
        else 0.0
    )
    p_minus = (
        float(marginals.s_in_minus[i] * marginals.s_out_minus[j] / marginals.w_minus)
        if marginals.w_minus > 0
        else 0.0
    )
    return p_plus, p_minus


def _community_totals(coeffs: GainCoefficients, assignment: np.ndarray, k: int):
    return (
        np.bincount(assignment, weights=coeffs.pin, minlength=k),
        np.bincount(assignment, weights=coeffs.pout, minlength=k),
        np.bincount(assignment, weights=coeffs.nin, minlength=k),
        np.bincount(assignment, weights=coeffs.nout, minlength=k),
    )


def modularity_value(g: Graph, assignment: np.ndarray, model: NullModel) -> float:
    """Q as a plain float (vectorized full evaluation)."""
    a = np.asarray(assignment, dtype=np.int64)
    if a.shape != (g.n,):
        raise DataError(f"partition length {a.size} != node count {g.n}")
    coeffs = gain_coefficients(g, model)
    intra = float(g.weight[a[g.src] == a[g.dst]].sum())
    k = int(a.max()) + 1
    pin_c, pout_c, nin_c, nout_c = _community_totals(coeffs, a, k)
    null = coeffs.alpha_p * float(pin_c @ pout_c) - coeffs.alpha_m * float(nin_c @ nout_c)
    return intra / coeffs.norm - null


def modularity(g: Graph, assignment, model: NullModel) -> ModularityScore:
    return ModularityScore(
        q=modularity_value(g, np.asarray(assignment, dtype=np.int64), model),
        model=model,
        graph_fingerprint=g.fingerprint(),
    )


class LocalMoveState:
    """Working state for O(degree) move gains on one graph under one model.

    Owned by a single optimizer run; not safe for sharing.  Maintains the
    community assignment and per-community coefficient totals, plus a
    combined in+out adjacency (w_ij + w_ji per neighbor, self-loops excluded,
    which cancel in any move gain).
    """

    def __init__(self, g: Graph, model: NullModel, assignment=None):
        self.graph = g
        self.model = model
        self.fingerprint = g.fingerprint()
        self.coeffs = gain_coefficients(g, model)
        if assignment is None:
            assignment = np.arange(g.n, dtype=np.int64)
        self.comm = np.array(assignment, dtype=np.int64)
        if self.comm.shape != (g.n,):
            raise DataError("assignment length mismatch")
        k = int(self.comm.max()) + 1
        self.pin_c, self.pout_c, self.nin_c, self.nout_c = _community_totals(
            self.coeffs, self.comm, k
        )
        self.indptr, self.nbr, self.nbr_w = combined_adjacency(g)

    def _grow(self, k: int) -> None:
        for name in ("pin_c", "pout_c", "nin_c", "nout_c"):
            arr = getattr(self, name)
            if arr.size < k:
                setattr(self, name, np.concatenate([arr, np.zeros(k - arr.size)]))

    def _links_to(self, node: int) -> dict[int, float]:
        w_to = {}
        for idx in range(self.indptr[node], self.indptr[node + 1]):
            c = int(self.comm[self.nbr[idx]])
            w_to[c] = w_to.get(c, 0.0) + self.nbr_w[idx]
        return w_to

    def delta(self, node: int, to: int) -> float:
        """Q(after moving `node` to community `to`) - Q(before)."""
        frm = int(self.comm[node])
        if to == frm:
            return 0.0
        self._grow(to + 1)
        c = self.coeffs
        w_to = self._links_to(node)
        pin, pout = c.pin[node], c.pout[node]
        nin, nout = c.nin[node], c.nout[node]
        # community totals with `node` removed from its own community
        pout_f = self.pout_c[frm] - pout
        pin_f = self.pin_c[frm] - pin
        nout_f = self.nout_c[frm] - nout
        nin_f = self.nin_c[frm] - nin
        gain_links = (w_to.get(to, 0.0) - w_to.get(frm, 0.0)) / c.norm
        gain_null = -c.alpha_p * (pin * (self.pout_c[to] - pout_f) + pout * (self.pin_c[to] - pin_f))
        gain_null += c.alpha_m * (nin * (self.nout_c[to] - nout_f) + nout * (self.nin_c[to] - nin_f))
        return gain_links + gain_null

    def apply(self, node: int, to: int) -> None:
        frm = int(self.comm[node])
        if to == frm:
            return
        self._grow(to + 1)
        c = self.coeffs
        for totals_arr, vec in (
            (self.pin_c, c.pin),
            (self.pout_c, c.pout),
            (self.nin_c, c.nin),
            (self.nout_c, c.nout),
        ):
            totals_arr[frm] -= vec[node]
            totals_arr[to] += vec[node]
        self.comm[node] = to


def combined_adjacency(g: Graph):
    """CSR arrays of combined weights w_ij + w_ji per neighbor, no self-loops."""
    off = g.src != g.dst
    cs = np.concatenate([g.src[off], g.dst[off]])
    cd = np.concatenate([g.dst[off], g.src[off]])
    cw = np.concatenate([g.weight[off], g.weight[off]])
    keys = cs * np.int64(g.n) + cd
    order = np.argsort(keys, kind="stable")
    keys, cw = keys[order], cw[order]
    uniq, inverse = np.unique(keys, return_inverse=True)
    summed = np.zeros(uniq.size)
    np.add.at(summed, inverse, cw)
    us = (uniq // g.n).astype(np.int64)
    ud = (uniq % g.n).astype(np.int64)
    indptr = np.zeros(g.n + 1, dtype=np.int64)
    np.add.at(indptr, us + 1, 1)
    indptr = np.cumsum(indptr)
    return indptr, ud, summed


def delta_modularity_move(state: LocalMoveState, node: int, frm: int, to: int) -> float:
    """Incremental move gain; validates ownership before computing."""
    if state.fingerprint != state.graph.fingerprint():
        raise StaleStateError("optimizer state does not match its graph")
    if int(state.comm[node]) != frm:
        raise StaleStateError(f"node {node} is in community {int(state.comm[node])}, not {frm}")
    return state.delta(node, to)


def epsilon_optimal_set(q_values, epsilon: float) -> list[int]:
    """Indices i with max_j Q_j - Q_i <= epsilon, ascending.

    epsilon = 0 returns all maximizers; epsilon = inf returns every index.
    """
    if epsilon < 0:
        raise DataError("epsilon must be nonnegative")
    if hasattr(q_values, "q_values"):  # accept an Ensemble directly
        q_values = q_values.q_values()
    qs = [s.q if isinstance(s, ModularityScore) else float(s) for s in q_values]
    if not qs:
        raise DataError("empty ensemble")
    if math.isinf(epsilon):
        return list(range(len(qs)))
    q_max = max(qs)
    return [i for i, q in enumerate(qs) if q_max - q <= epsilon]
