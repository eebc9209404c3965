"""Seeded Louvain optimizer (local moving + aggregation) and ensemble generation.

One run is a deterministic function of (graph, model, params): the only
randomness is the per-sweep seeded shuffle of the node visit order.  After
the aggregation hierarchy stabilizes, a refinement stage re-runs local
moving on the original graph until no single-node move has positive gain,
so the returned flat partition is single-node-move stable.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._kernel import build_csr, sweep_once
from .errors import DataError, ModelError
from .graph import Graph
from .modularity import ModularityScore, NullModel, gain_coefficients, modularity
from .partition import Partition, canonicalize
from .seeds import split64

__all__ = ["LouvainParams", "Ensemble", "louvain_once", "run_ensemble", "save_ensemble", "load_ensemble"]

_REFINE_SWEEP_CAP = 1000


@dataclass(frozen=True)
class LouvainParams:
    seed: int
    min_gain: float = 1e-7
    max_levels: int = 64
    node_order: str = "shuffled"  # or "fixed"

    def __post_init__(self):
        if self.min_gain < 0:
            raise DataError("min_gain must be nonnegative")
        if self.max_levels < 1:
            raise DataError("max_levels must be at least 1")
        if self.node_order not in ("shuffled", "fixed"):
            raise DataError(f"unknown node_order {self.node_order!r}")


class _Level:
    """Mutable per-level working set: edges, coefficient vectors, CSR."""

    def __init__(self, n, src, dst, weight, pin, pout, nin, nout):
        self.n = n
        self.src, self.dst, self.weight = src, dst, weight
        self.pin, self.pout, self.nin, self.nout = pin, pout, nin, nout
        self.indptr, self.nbr, self.nbr_w = build_csr(n, src, dst, weight)

    def sweep_to_stability(self, comm, rng, min_gain, shuffled, require_no_moves=False):
        """Run sweeps until the per-sweep gain drops below min_gain (or, for
        the refinement stage, until a sweep makes no move).  Returns total gain."""
        k_cap = self.n if comm is None else max(self.n, int(comm.max()) + 1)
        if comm is None:
            comm = np.arange(self.n, dtype=np.int64)
        pin_c = np.bincount(comm, weights=self.pin, minlength=k_cap)
        pout_c = np.bincount(comm, weights=self.pout, minlength=k_cap)
        nin_c = np.bincount(comm, weights=self.nin, minlength=k_cap)
        nout_c = np.bincount(comm, weights=self.nout, minlength=k_cap)
        wlink = np.zeros(k_cap)
        intouch = np.zeros(k_cap, dtype=np.bool_)
        touched = np.zeros(k_cap, dtype=np.int64)
        total = 0.0
        sweeps = 0
        while True:
            order = rng.permutation(self.n) if shuffled else np.arange(self.n, dtype=np.int64)
            gain, moves = sweep_once(
                self.indptr, self.nbr, self.nbr_w,
                self.pin, self.pout, self.nin, self.nout,
                self._alpha_p, self._alpha_m, self._inv_norm,
                comm, pin_c, pout_c, nin_c, nout_c,
                np.asarray(order, dtype=np.int64), wlink, intouch, touched,
            )
            total += gain
            sweeps += 1
            if require_no_moves:
                if moves == 0 or sweeps >= _REFINE_SWEEP_CAP:
                    break
            elif moves == 0 or gain < self._min_gain:
                break
        return comm, total

    def aggregate(self, comm, k):
        asrc = comm[self.src]
        adst = comm[self.dst]
        keep = asrc != adst  # intra weights become self-loops; they never change a move gain
        keys = asrc[keep] * np.int64(k) + adst[keep]
        uniq, inverse = np.unique(keys, return_inverse=True)
        w = np.zeros(uniq.size)
        np.add.at(w, inverse, self.weight[keep])
        lv = _Level.__new__(_Level)
        lv.n = k
        lv.src = (uniq // k).astype(np.int64)
        lv.dst = (uniq % k).astype(np.int64)
        lv.weight = w
        lv.pin = np.bincount(comm, weights=self.pin, minlength=k)
        lv.pout = np.bincount(comm, weights=self.pout, minlength=k)
        lv.nin = np.bincount(comm, weights=self.nin, minlength=k)
        lv.nout = np.bincount(comm, weights=self.nout, minlength=k)
        lv.indptr, lv.nbr, lv.nbr_w = build_csr(k, lv.src, lv.dst, lv.weight)
        for attr in ("_alpha_p", "_alpha_m", "_inv_norm", "_min_gain"):
            setattr(lv, attr, getattr(self, attr))
        return lv


def louvain_once(
    g: Graph,
    model: NullModel,
    params: LouvainParams,
    trace: list | None = None,
) -> tuple[Partition, ModularityScore]:
    """One full Louvain run; returns the flat partition of original nodes.

    `trace`, when given, collects the modularity value after each level and
    after refinement (non-decreasing sequence).
    """
    coeffs = gain_coefficients(g, model)  # also checks model compatibility and emptiness
    rng = np.random.default_rng(np.uint64(split64(params.seed, 0)))
    shuffled = params.node_order == "shuffled"

    level = _Level(g.n, g.src, g.dst, g.weight, coeffs.pin.copy(), coeffs.pout.copy(),
                   coeffs.nin.copy(), coeffs.nout.copy())
    level._alpha_p = coeffs.alpha_p
    level._alpha_m = coeffs.alpha_m
    level._inv_norm = 1.0 / coeffs.norm
    level._min_gain = params.min_gain

    mapping = np.arange(g.n, dtype=np.int64)
    base_level = level
    for _ in range(params.max_levels):
        comm, _gain = level.sweep_to_stability(None, rng, params.min_gain, shuffled)
        comm = canonicalize(comm).assignment
        k = int(comm.max()) + 1
        if k == level.n:
            break
        mapping = comm[mapping]
        if trace is not None:
            trace.append(modularity(g, mapping, model).q)
        level = level.aggregate(comm, k)

    # refinement: single-node moves on the original graph from the flat partition
    comm = mapping.copy()
    comm, _ = base_level.sweep_to_stability(comm, rng, params.min_gain, shuffled,
                                            require_no_moves=True)
    part = canonicalize(comm)
    score = modularity(g, part.assignment, model)
    if trace is not None:
        trace.append(score.q)
    return part, score


@dataclass(frozen=True)
class Ensemble:
    """T (partition, score) pairs produced on one graph under one model."""

    graph_fingerprint: str
    model: NullModel
    members: tuple[tuple[Partition, ModularityScore], ...]
    seeds: tuple[int, ...]
    base_seed: int | None = None

    @property
    def t(self) -> int:
        return len(self.members)

    def partitions(self) -> list[Partition]:
        return [p for p, _ in self.members]

    def scores(self) -> list[ModularityScore]:
        return [s for _, s in self.members]

    def q_values(self) -> np.ndarray:
        return np.array([s.q for _, s in self.members])


def _one_member(args):
    g, model, seed, min_gain, max_levels, node_order = args
    return louvain_once(g, model, LouvainParams(seed=seed, min_gain=min_gain,
                                                max_levels=max_levels, node_order=node_order))


def run_ensemble(
    g: Graph,
    model: NullModel,
    t: int,
    base_seed: int,
    params: LouvainParams | None = None,
    jobs: int = 1,
) -> Ensemble:
    """T independent Louvain runs with seeds split64(base_seed, i).

    Member i is a pure function of its own seed, so the result is identical
    whether members run sequentially or in a process pool.
    """
    if t < 1:
        raise DataError("ensemble size must be at least 1")
    tmpl = params or LouvainParams(seed=0)
    seeds = tuple(split64(base_seed, i) for i in range(t))
    argv = [(g, model, s, tmpl.min_gain, tmpl.max_levels, tmpl.node_order) for s in seeds]
    if jobs > 1 and t > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            members = tuple(pool.map(_one_member, argv, chunksize=max(1, t // (4 * jobs))))
    else:
        members = tuple(_one_member(a) for a in argv)
    return Ensemble(
        graph_fingerprint=g.fingerprint(),
        model=model,
        members=members,
        seeds=seeds,
        base_seed=base_seed,
    )


def save_ensemble(ens: Ensemble, directory: str, labels: tuple[str, ...] | None = None) -> None:
    """One partition file per member plus a JSON manifest."""
    os.makedirs(directory, exist_ok=True)
    width = max(3, len(str(ens.t - 1)))
    for i, (p, _) in enumerate(ens.members):
        p.save(os.path.join(directory, f"partition_{i:0{width}d}.txt"), labels=labels)
    manifest = {
        "format": "commkit-ensemble-v1",
        "model": ens.model.value,
        "graph_fingerprint": ens.graph_fingerprint,
        "t": ens.t,
        "base_seed": ens.base_seed,
        "seeds": list(ens.seeds),
        "q_values": [s.q for s in ens.scores()],
    }
    with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)


def load_ensemble(directory: str, g: Graph, tol: float = 1e-9) -> Ensemble:
    """Load an ensemble directory; every stored Q is revalidated against `g`."""
    with open(os.path.join(directory, "manifest.json"), encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("format") != "commkit-ensemble-v1":
        raise DataError("unrecognized ensemble manifest format")
    if manifest["graph_fingerprint"] != g.fingerprint():
        raise DataError("ensemble was built on a different graph (fingerprint mismatch)")
    model = NullModel.parse(manifest["model"])
    t = int(manifest["t"])
    width = max(3, len(str(t - 1)))
    members = []
    for i in range(t):
        p = Partition.load(os.path.join(directory, f"partition_{i:0{width}d}.txt"),
                           labels=g.node_labels)
        score = modularity(g, p.assignment, model)
        if abs(score.q - manifest["q_values"][i]) > tol:
            raise DataError(
                f"member {i}: stored Q {manifest['q_values'][i]!r} does not match "
                f"recomputed Q {score.q!r}"
            )
        members.append((p, score))
    return Ensemble(
        graph_fingerprint=g.fingerprint(),
        model=model,
        members=tuple(members),
        seeds=tuple(manifest["seeds"]),
        base_seed=manifest.get("base_seed"),
    )
