"""Command-line interface.

Subcommands: generate, detect, ensemble, select, consensus, sweep,
filter-corr, ari.  A flat INI config file (sections [sweep], [lfr],
[louvain], [consensus]) supplies defaults; every value is overridable by a
flag.  COMMKIT_OUTPUT_DIR sets the default output directory.

Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence
under --strict.
"""

from __future__ import annotations

import configparser
import json
import os
import sys

import click
import numpy as np

from . import corrfilter
from .benchgen import LfrParams, generate_lfr, generate_planted
from .errors import CommkitError, ConvergenceError, DataError
from .graph import (
    Graph,
    from_dense_matrix,
    load_edge_list,
    read_dense_csv,
    write_dense_csv,
    write_edge_list,
)
from .harness import ALL_METHODS, SweepConfig, run_select_pipeline, run_sweep
from .louvain import LouvainParams, load_ensemble, louvain_once, run_ensemble, save_ensemble
from .modularity import NullModel, modularity
from .partition import Partition, ari
from .selection import ConsensusParams, consensus_cluster


def _default_output_dir() -> str:
    return os.environ.get("COMMKIT_OUTPUT_DIR", ".")


def _load_config(path: str | None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    if path:
        if not os.path.exists(path):
            raise DataError(f"config file not found: {path}")
        cp.read(path)
    return cp


def _cfg(cp: configparser.ConfigParser, section: str, key: str, flag, parse=str):
    """Flag value wins; then config; then None."""
    if flag is not None:
        return flag
    if cp.has_option(section, key):
        return parse(cp.get(section, key))
    return None


def _load_graph(path: str, fmt: str, directed: bool, weighted: bool) -> Graph:
    if fmt == "matrix":
        mat, labels = read_dense_csv(path)
        return from_dense_matrix(mat, directed=directed, node_labels=labels)
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh, directed=directed, weighted=weighted)


def _louvain_params(cp, seed: int) -> LouvainParams:
    return LouvainParams(
        seed=seed,
        min_gain=float(cp.get("louvain", "min_gain", fallback=1e-7)),
        max_levels=int(cp.get("louvain", "max_levels", fallback=64)),
        node_order=cp.get("louvain", "node_order", fallback="shuffled"),
    )


@click.group()
@click.option("--strict", is_flag=True, help="Treat non-convergence warnings as errors (exit 3).")
@click.pass_context
def cli(ctx, strict):
    ctx.obj = {"strict": strict}


@cli.command()
@click.option("--kind", type=click.Choice(["lfr", "planted"]), default="lfr")
@click.option("--n", type=int, default=1000, show_default=True)
@click.option("--avg-deg", type=float, default=20.0, show_default=True)
@click.option("--max-deg", type=int, default=50, show_default=True)
@click.option("--gamma", type=float, default=2.0, show_default=True)
@click.option("--beta", type=float, default=3.0, show_default=True)
@click.option("--cmin", type=int, default=10, show_default=True)
@click.option("--cmax", type=int, default=50, show_default=True)
@click.option("--mu", type=float, default=0.1, show_default=True)
@click.option("--weight-mode", type=click.Choice(["unit", "noisy_unit"]), default="noisy_unit")
@click.option("--k", type=int, default=4, help="Planted: number of communities.")
@click.option("--size", type=int, default=25, help="Planted: nodes per community.")
@click.option("--p-in", type=float, default=0.5, help="Planted: intra-community edge probability.")
@click.option("--p-out", type=float, default=0.02, help="Planted: inter-community edge probability.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", default=None, help="Output directory.")
def generate(kind, n, avg_deg, max_deg, gamma, beta, cmin, cmax, mu, weight_mode,
             k, size, p_in, p_out, seed, out_dir):
    """Generate a benchmark graph with planted ground truth."""
    out_dir = out_dir or _default_output_dir()
    if kind == "lfr":
        inst = generate_lfr(LfrParams(n=n, avg_deg=avg_deg, max_deg=max_deg, gamma=gamma,
                                      beta=beta, cmin=cmin, cmax=cmax, mu=mu,
                                      weight_mode=weight_mode, seed=seed))
        stem = f"lfr_mu{mu:g}_seed{seed}"
    else:
        inst = generate_planted(k, size, p_in, p_out, seed)
        stem = f"planted_k{k}_s{size}_seed{seed}"
    os.makedirs(out_dir, exist_ok=True)
    write_edge_list(inst.graph, os.path.join(out_dir, f"{stem}.edges"))
    inst.truth.save(os.path.join(out_dir, f"{stem}.truth"), labels=inst.graph.node_labels)
    with open(os.path.join(out_dir, f"{stem}.json"), "w", encoding="utf-8") as fh:
        json.dump({"params": inst.params_echo, "seed": inst.instance_seed,
                   "fingerprint": inst.graph.fingerprint()}, fh, indent=1)
    click.echo(f"wrote {stem}.edges / .truth / .json in {out_dir}")


_graph_opts = [
    click.option("--graph", "graph_path", required=True, help="Edge list or matrix CSV."),
    click.option("--format", "fmt", type=click.Choice(["edgelist", "matrix"]), default="edgelist"),
    click.option("--directed/--undirected", default=False),
    click.option("--weighted/--unweighted", default=True),
    click.option("--model", "model_name",
                 type=click.Choice([m.value for m in NullModel]), default="weighted"),
]


def _with_graph_opts(fn):
    for opt in reversed(_graph_opts):
        fn = opt(fn)
    return fn


@cli.command()
@_with_graph_opts
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", default=None)
@click.option("--out", "out_path", default=None, help="Partition file to write.")
def detect(graph_path, fmt, directed, weighted, model_name, seed, config_path, out_path):
    """Single Louvain run; writes one partition file."""
    cp = _load_config(config_path)
    g = _load_graph(graph_path, fmt, directed, weighted)
    model = NullModel.parse(model_name)
    part, score = louvain_once(g, model, _louvain_params(cp, seed))
    out_path = out_path or os.path.join(_default_output_dir(), "partition.txt")
    part.save(out_path, labels=g.node_labels)
    click.echo(f"Q={score.q:.6f} communities={part.k} -> {out_path}")


@cli.command()
@_with_graph_opts
@click.option("--t", "t_runs", type=int, default=150, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--config", "config_path", default=None)
@click.option("--out", "out_dir", default=None, help="Ensemble directory to write.")
def ensemble(graph_path, fmt, directed, weighted, model_name, t_runs, seed, jobs,
             config_path, out_dir):
    """Run a Louvain ensemble and store it on disk."""
    cp = _load_config(config_path)
    g = _load_graph(graph_path, fmt, directed, weighted)
    model = NullModel.parse(model_name)
    ens = run_ensemble(g, model, t_runs, seed, params=_louvain_params(cp, 0), jobs=jobs)
    out_dir = out_dir or os.path.join(_default_output_dir(), "ensemble")
    save_ensemble(ens, out_dir, labels=g.node_labels)
    qs = ens.q_values()
    click.echo(f"t={t_runs} Q in [{qs.min():.6f}, {qs.max():.6f}] -> {out_dir}")


@cli.command()
@_with_graph_opts
@click.option("--ensemble", "ens_dir", default=None,
              help="Stored ensemble directory (default: generate a fresh one).")
@click.option("--t", "t_runs", type=int, default=150, show_default=True)
@click.option("--methods", default="star,max_mod,most_frequent",
              help=f"Comma-separated subset of {{{','.join(ALL_METHODS)}}}.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--config", "config_path", default=None)
@click.option("--out", "out_dir", default=None)
@click.pass_context
def select(ctx, graph_path, fmt, directed, weighted, model_name, ens_dir, t_runs,
           methods, seed, jobs, config_path, out_dir):
    """Apply representative-partition selectors over an ensemble."""
    cp = _load_config(config_path)
    g = _load_graph(graph_path, fmt, directed, weighted)
    model = NullModel.parse(model_name)
    out_dir = out_dir or os.path.join(_default_output_dir(), "selection")
    method_list = tuple(m.strip() for m in methods.split(",") if m.strip())
    ens = load_ensemble(ens_dir, g) if ens_dir else None
    if ens is not None and ens.model is not model:
        raise DataError("stored ensemble was built under a different null model")
    consensus_params = ConsensusParams(
        tau=float(cp.get("consensus", "tau", fallback=0.5)),
        runs_per_iter=int(cp.get("consensus", "runs_per_iter", fallback=t_runs)),
        max_iters=int(cp.get("consensus", "max_iters", fallback=20)),
        seed=seed + 1,
    )
    selections, skipped, _ = run_select_pipeline(
        g, model, t_runs, method_list, seed, out_dir,
        consensus_params=consensus_params, jobs=jobs, ensemble=ens,
    )
    for method in method_list:
        if method in selections:
            sel = selections[method]
            click.echo(f"{method}: Q={sel.q.q:.6f} communities={sel.partition.k}")
        else:
            click.echo(f"{method}: skipped ({skipped[method]})")
    _check_strict_convergence(ctx, selections)


@cli.command()
@_with_graph_opts
@click.option("--t", "runs_per_iter", type=int, default=150, show_default=True)
@click.option("--tau", type=float, default=None, help="Co-assignment threshold (default 0.5).")
@click.option("--max-iters", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--config", "config_path", default=None)
@click.option("--out", "out_path", default=None, help="Partition file to write.")
@click.pass_context
def consensus(ctx, graph_path, fmt, directed, weighted, model_name, runs_per_iter,
              tau, max_iters, seed, jobs, config_path, out_path):
    """Iterative consensus clustering (nonnegative weights only)."""
    cp = _load_config(config_path)
    g = _load_graph(graph_path, fmt, directed, weighted)
    model = NullModel.parse(model_name)
    params = ConsensusParams(
        tau=tau if tau is not None else float(cp.get("consensus", "tau", fallback=0.5)),
        runs_per_iter=runs_per_iter,
        max_iters=max_iters if max_iters is not None
        else int(cp.get("consensus", "max_iters", fallback=20)),
        seed=seed,
    )
    sel = consensus_cluster(g, model, params, jobs=jobs)
    out_path = out_path or os.path.join(_default_output_dir(), "partition_consensus.txt")
    sel.partition.save(out_path, labels=g.node_labels)
    click.echo(
        f"consensus: Q={sel.q.q:.6f} communities={sel.partition.k} "
        f"iterations={sel.diagnostics['iterations']} converged={sel.diagnostics['converged']}"
    )
    _check_strict_convergence(ctx, {"consensus": sel})


@cli.command()
@click.option("--config", "config_path", default=None)
@click.option("--mu-grid", default=None, help="Comma-separated mu values.")
@click.option("--instances", "instances_per_mu", type=int, default=None)
@click.option("--t-runs", type=int, default=None)
@click.option("--methods", default=None)
@click.option("--base-seed", type=int, default=None)
@click.option("--jobs", type=int, default=None)
@click.option("--paper-scale", is_flag=True,
              help="100 instances per mu and 150 runs (long).")
@click.option("--out", "out_dir", default=None)
def sweep(config_path, mu_grid, instances_per_mu, t_runs, methods, base_seed, jobs,
          paper_scale, out_dir):
    """Benchmark sweep over the mixing parameter; emits CSV tables."""
    cp = _load_config(config_path)
    grid_raw = _cfg(cp, "sweep", "mu_grid", mu_grid)
    grid = (tuple(float(x) for x in grid_raw.split(",")) if grid_raw
            else SweepConfig().mu_grid)
    methods_raw = _cfg(cp, "sweep", "methods", methods)
    lfr = {}
    if cp.has_section("lfr"):
        for key in cp.options("lfr"):
            value = cp.get("lfr", key)
            lfr[key] = value if key == "weight_mode" else (
                int(value) if key in ("n", "max_deg", "cmin", "cmax") else float(value))
    cfg = SweepConfig(
        mu_grid=grid,
        instances_per_mu=(100 if paper_scale else
                          _cfg(cp, "sweep", "instances_per_mu", instances_per_mu, int) or 10),
        t_runs=(150 if paper_scale else _cfg(cp, "sweep", "t_runs", t_runs, int) or 50),
        methods=(tuple(m.strip() for m in methods_raw.split(",")) if methods_raw
                 else ALL_METHODS),
        base_seed=_cfg(cp, "sweep", "base_seed", base_seed, int) or 0,
        output_dir=out_dir or _cfg(cp, "sweep", "output_dir", None)
        or os.path.join(_default_output_dir(), "sweep_out"),
        lfr=lfr,
        consensus_tau=float(cp.get("consensus", "tau", fallback=0.5)),
        consensus_max_iters=int(cp.get("consensus", "max_iters", fallback=20)),
        consensus_reuse_ensemble=cp.getboolean("consensus", "reuse_ensemble", fallback=False),
        jobs=_cfg(cp, "sweep", "jobs", jobs, int) or 1,
    )
    rows = run_sweep(cfg)
    for row in rows:
        click.echo(
            f"mu={row.mu:.2f} {row.method:>13s} t={row.t_runs} "
            f"ARI={row.mean_ari_truth:.4f}±{row.std_ari_truth:.4f} "
            f"Q={row.mean_q:.4f}±{row.std_q:.4f}"
        )
    click.echo(f"CSV tables in {cfg.output_dir}")


@cli.command("filter-corr")
@click.option("--prices", "prices_path", required=True, help="Prices CSV (header of tickers).")
@click.option("--mode", type=click.Choice(["bulk_only", "bulk_and_market"]),
              default="bulk_and_market", show_default=True)
@click.option("--max-missing-frac", type=float, default=0.1, show_default=True)
@click.option("--out", "out_path", default=None, help="Filtered matrix CSV.")
def filter_corr(prices_path, mode, max_missing_frac, out_path):
    """Prices -> log-returns -> correlation -> spectral filter -> matrix CSV."""
    prices, tickers = corrfilter.read_prices_csv(prices_path)
    returns = corrfilter.clean_and_log_returns(prices, tickers, max_missing_frac)
    variances = returns.values.var(axis=1)
    live = variances > 0
    if not live.all():
        dropped = [returns.asset_labels[i] for i in np.flatnonzero(~live)]
        click.echo(f"dropping zero-variance series: {', '.join(dropped)}", err=True)
        returns = corrfilter.ReturnsMatrix(
            values=returns.values[live],
            asset_labels=tuple(np.array(returns.asset_labels)[live]),
        )
    corr = corrfilter.pearson_correlation(returns)
    filtered = corrfilter.rmt_filter(corr, returns.t_obs, mode)
    out_path = out_path or os.path.join(_default_output_dir(), "filtered_correlation.csv")
    write_dense_csv(filtered.matrix, out_path, labels=returns.asset_labels)
    lo, hi = filtered.mp_bounds
    click.echo(
        f"{returns.n_assets} assets, {returns.t_obs} observations; "
        f"bulk bounds [{lo:.4f}, {hi:.4f}]; removed {filtered.removed['bulk_count']} bulk modes"
        + (" + market mode" if filtered.removed["market_removed"] else "")
        + f" -> {out_path}"
    )


@cli.command("ari")
@click.argument("partition_a")
@click.argument("partition_b")
def ari_cmd(partition_a, partition_b):
    """Adjusted Rand Index between two partition files (matched by label)."""
    pa, la = _load_partition_with_labels(partition_a)
    pb, _ = _load_partition_with_labels(partition_b, expect_labels=la)
    click.echo(f"{ari(pa, pb):.6f}")


def _load_partition_with_labels(path, expect_labels=None):
    labels = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                labels.append(line.split()[0])
    labels = tuple(labels)
    if expect_labels is not None and set(labels) != set(expect_labels):
        raise DataError("partition files cover different node sets")
    order = expect_labels if expect_labels is not None else labels
    return Partition.load(path, labels=order), order


def _check_strict_convergence(ctx, selections):
    if not ctx.obj.get("strict"):
        return
    for sel in selections.values():
        if sel.diagnostics.get("converged") is False:
            raise ConvergenceError("consensus did not converge within max_iters")


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except ConvergenceError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    except CommkitError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    sys.exit(0)


if __name__ == "__main__":
    main()
