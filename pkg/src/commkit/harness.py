"""Sweep orchestration and the end-to-end selection pipeline.

A sweep cell is one (mu, instance) pair: generate an LFR graph, run the
Louvain ensemble, apply every requested selector, and score each pick
against the planted truth.  Cells are independent, persisted as JSON under
`output_dir/cells/` (write-temp-then-rename), and skipped when already
present, so interrupted sweeps resume.  Cell seeds derive only from
(base_seed, mu, instance), never from execution order, so results are
identical at any parallelism level.
"""

from __future__ import annotations

import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .benchgen import LfrParams, generate_lfr
from .errors import DataError, SignedInputError
from .graph import Graph
from .louvain import Ensemble, run_ensemble, save_ensemble
from .modularity import NullModel
from .partition import ari, ari_matrix
from .seeds import split64
from .selection import (
    ConsensusParams,
    consensus_cluster,
    max_modularity_select,
    most_frequent_select,
    star_select,
)

__all__ = ["SweepConfig", "SweepRow", "run_sweep", "run_select_pipeline"]

ALL_METHODS = ("star", "consensus", "max_mod", "most_frequent")
_CSV_HEADER = "# commkit-sweep-v1"


@dataclass(frozen=True)
class SweepConfig:
    mu_grid: tuple = tuple(round(0.1 * i, 1) for i in range(1, 10))
    instances_per_mu: int = 10
    t_runs: int = 50
    methods: tuple = ALL_METHODS
    base_seed: int = 0
    output_dir: str = "sweep_out"
    lfr: dict = field(default_factory=dict)  # LfrParams overrides (no mu/seed)
    consensus_tau: float = 0.5
    consensus_max_iters: int = 20
    consensus_reuse_ensemble: bool = False
    jobs: int = 1

    def __post_init__(self):
        if any(not (0.0 <= m <= 1.0) for m in self.mu_grid):
            raise DataError("mu values must lie in [0, 1]")
        if self.instances_per_mu < 1:
            raise DataError("instances_per_mu must be at least 1")
        if self.t_runs < 2:
            raise DataError("t_runs must be at least 2")
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown:
            raise DataError(f"unknown methods: {sorted(unknown)}")


@dataclass(frozen=True)
class SweepRow:
    mu: float
    method: str
    t_runs: int
    mean_ari_truth: float
    std_ari_truth: float
    mean_q: float
    std_q: float
    instances: int


def _cell_seed(base_seed: int, mu: float, instance: int) -> int:
    return split64(split64(base_seed, int(round(mu * 10000))), instance)


def _run_cell(args) -> list[dict]:
    (mu, instance, lfr_overrides, t_runs, methods, base_seed,
     tau, max_iters, reuse) = args
    seed = _cell_seed(base_seed, mu, instance)
    params = LfrParams(mu=mu, seed=seed, **lfr_overrides)
    inst = generate_lfr(params)
    model = NullModel.CONFIGURATION_WEIGHTED
    ens = run_ensemble(inst.graph, model, t_runs, split64(seed, 101))
    picks = {}
    if "star" in methods:
        picks["star"] = star_select(ens, ari_matrix(ens.partitions()))
    if "max_mod" in methods:
        picks["max_mod"] = max_modularity_select(ens)
    if "most_frequent" in methods:
        picks["most_frequent"] = most_frequent_select(ens)
    if "consensus" in methods:
        cp = ConsensusParams(tau=tau, runs_per_iter=t_runs, max_iters=max_iters,
                             seed=split64(seed, 202))
        picks["consensus"] = consensus_cluster(
            inst.graph, model, cp, initial_ensemble=ens if reuse else None
        )
    rows = []
    for method in methods:
        sel = picks[method]
        rows.append({
            "mu": mu,
            "instance": instance,
            "method": method,
            "t_runs": t_runs,
            "ari_truth": ari(sel.partition, inst.truth),
            "q": sel.q.q,
            "communities": sel.partition.k,
            "cell_seed": seed,
        })
    return rows


def _cell_path(output_dir: str, mu: float, instance: int, t_runs: int) -> str:
    return os.path.join(output_dir, "cells", f"mu{mu:.4f}_t{t_runs}_i{instance:04d}.json")


def _write_atomic(path: str, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def run_sweep(cfg: SweepConfig) -> list[SweepRow]:
    """Run (or resume) the full sweep; writes per-instance and summary CSVs."""
    os.makedirs(os.path.join(cfg.output_dir, "cells"), exist_ok=True)
    todo = []
    for mu in cfg.mu_grid:
        for instance in range(cfg.instances_per_mu):
            if not os.path.exists(_cell_path(cfg.output_dir, mu, instance, cfg.t_runs)):
                todo.append((mu, instance))
    argv = [
        (mu, instance, dict(cfg.lfr), cfg.t_runs, tuple(cfg.methods), cfg.base_seed,
         cfg.consensus_tau, cfg.consensus_max_iters, cfg.consensus_reuse_ensemble)
        for mu, instance in todo
    ]
    if cfg.jobs > 1 and len(argv) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            produced = list(pool.map(_run_cell, argv))
    else:
        produced = [_run_cell(a) for a in argv]
    for (mu, instance), rows in zip(todo, produced):
        _write_atomic(_cell_path(cfg.output_dir, mu, instance, cfg.t_runs),
                      json.dumps(rows, indent=1))

    all_rows: list[dict] = []
    for mu in cfg.mu_grid:
        for instance in range(cfg.instances_per_mu):
            with open(_cell_path(cfg.output_dir, mu, instance, cfg.t_runs), encoding="utf-8") as fh:
                all_rows.extend(json.load(fh))
    all_rows.sort(key=lambda r: (r["mu"], r["instance"], ALL_METHODS.index(r["method"])))

    with open(os.path.join(cfg.output_dir, "sweep_instances.csv"), "w", encoding="utf-8") as fh:
        fh.write(_CSV_HEADER + "\n")
        fh.write("mu,instance,method,t_runs,ari_truth,q,communities,cell_seed\n")
        for r in all_rows:
            fh.write(
                f"{r['mu']:.4f},{r['instance']},{r['method']},{r['t_runs']},"
                f"{r['ari_truth']:.12g},{r['q']:.12g},{r['communities']},{r['cell_seed']}\n"
            )

    summary: list[SweepRow] = []
    for mu in cfg.mu_grid:
        for method in cfg.methods:
            sel = [r for r in all_rows if r["mu"] == mu and r["method"] == method]
            aris = np.array([r["ari_truth"] for r in sel])
            qs = np.array([r["q"] for r in sel])
            summary.append(SweepRow(
                mu=mu, method=method, t_runs=cfg.t_runs,
                mean_ari_truth=float(aris.mean()), std_ari_truth=float(aris.std()),
                mean_q=float(qs.mean()), std_q=float(qs.std()),
                instances=len(sel),
            ))
    with open(os.path.join(cfg.output_dir, "sweep_summary.csv"), "w", encoding="utf-8") as fh:
        fh.write(_CSV_HEADER + "\n")
        fh.write("mu,method,t_runs,instances,mean_ari_truth,std_ari_truth,mean_q,std_q\n")
        for row in summary:
            fh.write(
                f"{row.mu:.4f},{row.method},{row.t_runs},{row.instances},"
                f"{row.mean_ari_truth:.6f},{row.std_ari_truth:.6f},"
                f"{row.mean_q:.6f},{row.std_q:.6f}\n"
            )
    return summary


def run_select_pipeline(
    g: Graph,
    model: NullModel,
    t_runs: int,
    methods,
    seed: int,
    output_dir: str,
    consensus_params: ConsensusParams | None = None,
    jobs: int = 1,
    ensemble: Ensemble | None = None,
):
    """Ensemble + selection on one graph; writes all artifacts to output_dir.

    Consensus is skipped (with a recorded reason) on signed inputs; the
    remaining methods still run.  Returns (selections, skipped, ensemble).
    """
    os.makedirs(output_dir, exist_ok=True)
    methods = tuple(methods)
    unknown = set(methods) - set(ALL_METHODS)
    if unknown:
        raise DataError(f"unknown methods: {sorted(unknown)}")
    if ensemble is None:
        ensemble = run_ensemble(g, model, t_runs, seed, jobs=jobs)
    save_ensemble(ensemble, os.path.join(output_dir, "ensemble"), labels=g.node_labels)

    selections = {}
    skipped = {}
    am = None
    if "star" in methods:
        am = ari_matrix(ensemble.partitions())
        selections["star"] = star_select(ensemble, am)
    if "max_mod" in methods:
        selections["max_mod"] = max_modularity_select(ensemble)
    if "most_frequent" in methods:
        selections["most_frequent"] = most_frequent_select(ensemble)
    if "consensus" in methods:
        cp = consensus_params or ConsensusParams(runs_per_iter=t_runs, seed=split64(seed, 1))
        try:
            selections["consensus"] = consensus_cluster(
                g, model, cp, initial_ensemble=None, jobs=jobs
            )
        except SignedInputError as exc:
            skipped["consensus"] = str(exc)

    for method, sel in selections.items():
        sel.partition.save(os.path.join(output_dir, f"partition_{method}.txt"),
                           labels=g.node_labels)

    qs = ensemble.q_values()
    hist, edges = np.histogram(qs, bins=min(30, max(5, t_runs // 5)))
    with open(os.path.join(output_dir, "modularity_histogram.csv"), "w", encoding="utf-8") as fh:
        fh.write("bin_left,bin_right,count\n")
        for left, right, count in zip(edges[:-1], edges[1:], hist):
            fh.write(f"{left:.6f},{right:.6f},{count}\n")

    names = sorted(selections)
    report = {
        "model": model.value,
        "t_runs": t_runs,
        "seed": seed,
        "graph_fingerprint": g.fingerprint(),
        "q": {m: selections[m].q.q for m in names},
        "communities": {m: selections[m].partition.k for m in names},
        "delta_q": {
            f"{a}-{b}": selections[a].q.q - selections[b].q.q
            for i, a in enumerate(names) for b in names[i + 1:]
        },
        "pairwise_ari": {
            f"{a}-{b}": ari(selections[a].partition, selections[b].partition)
            for i, a in enumerate(names) for b in names[i + 1:]
        },
        "skipped": skipped,
        "ensemble_q": {"min": float(qs.min()), "max": float(qs.max()),
                       "mean": float(qs.mean()), "std": float(qs.std())},
    }
    _write_atomic(os.path.join(output_dir, "diagnostics.json"),
                  json.dumps(report, indent=1, sort_keys=True))
    return selections, skipped, ensemble
