"""Ground-truth benchmark generators.

Three generators, all deterministic functions of their seed:

* planted-partition graphs (oracle-grade, used heavily in tests),
* LFR-style graphs with power-law degrees and community sizes and a tunable
  mixing fraction, realized by separate intra-/inter-community stub matching
  with swap-based repair,
* synthetic factor-model return series feeding the correlation pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np
from scipy import optimize

from .errors import DataError, GenerationError
from .graph import Graph
from .partition import Partition, canonicalize
from .seeds import split64

__all__ = [
    "LfrParams",
    "BenchmarkInstance",
    "generate_planted",
    "generate_lfr",
    "generate_factor_returns",
]


@dataclass(frozen=True)
class LfrParams:
    n: int = 1000
    avg_deg: float = 20.0
    max_deg: int = 50
    gamma: float = 2.0
    beta: float = 3.0
    cmin: int = 10
    cmax: int = 50
    mu: float = 0.1
    weight_mode: str = "noisy_unit"  # or "unit"
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.mu <= 1.0):
            raise DataError("mu must lie in [0, 1]")
        if not (self.cmin <= self.cmax <= self.n):
            raise DataError("need cmin <= cmax <= n")
        if self.avg_deg > self.max_deg:
            raise DataError("avg_deg must not exceed max_deg")
        if self.weight_mode not in ("unit", "noisy_unit"):
            raise DataError(f"unknown weight_mode {self.weight_mode!r}")
        # a node with internal degree d needs d other members in its community
        if round((1.0 - self.mu) * self.max_deg) > self.cmax - 1:
            raise DataError(
                "infeasible: largest internal degree round((1-mu)*max_deg) "
                "exceeds cmax - 1"
            )


@dataclass(frozen=True)
class BenchmarkInstance:
    graph: Graph
    truth: Partition
    params_echo: dict
    instance_seed: int


# -- planted partition -----------------------------------------------------


def generate_planted(k: int, size: int, p_in: float, p_out: float, seed: int) -> BenchmarkInstance:
    """k blocks of `size` nodes; intra pairs wired with p_in, inter with p_out."""
    if not (0.0 <= p_out < p_in <= 1.0):
        raise DataError("need 0 <= p_out < p_in <= 1")
    if k < 1 or size < 1:
        raise DataError("k and size must be positive")
    n = k * size
    truth = np.repeat(np.arange(k), size)
    rng = np.random.default_rng(np.uint64(split64(seed, 0)))
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(truth[iu] == truth[ju], p_in, p_out)
    keep = rng.random(iu.size) < prob
    g = Graph.build(n, iu[keep], ju[keep], np.ones(int(keep.sum())), directed=False)
    return BenchmarkInstance(
        graph=g,
        truth=canonicalize(truth),
        params_echo={"kind": "planted", "k": k, "size": size, "p_in": p_in, "p_out": p_out},
        instance_seed=seed,
    )


# -- LFR-style generator ---------------------------------------------------


def _truncated_power_law(rng, exponent, lo, hi, size):
    """Continuous inverse-CDF samples of pdf ∝ x^-exponent on [lo, hi]."""
    u = rng.random(size)
    if abs(exponent - 1.0) < 1e-12:
        return lo * (hi / lo) ** u
    a = 1.0 - exponent
    return (lo**a + u * (hi**a - lo**a)) ** (1.0 / a)


def _power_law_mean(exponent, lo, hi):
    if abs(exponent - 1.0) < 1e-12:
        return (hi - lo) / np.log(hi / lo)
    if abs(exponent - 2.0) < 1e-12:
        return np.log(hi / lo) / (1.0 / lo - 1.0 / hi)
    a1, a2 = 1.0 - exponent, 2.0 - exponent
    return (a1 / a2) * (hi**a2 - lo**a2) / (hi**a1 - lo**a1)


def _sample_degrees(rng, p: LfrParams):
    """Power-law degrees with realized mean within 2% of avg_deg."""
    lo0 = optimize.brentq(
        lambda lo: _power_law_mean(p.gamma, lo, p.max_deg) - p.avg_deg, 1e-3, p.max_deg - 1e-6
    )
    lo = lo0
    for _ in range(200):
        deg = np.clip(np.rint(_truncated_power_law(rng, p.gamma, lo, p.max_deg, p.n)), 1, p.max_deg)
        deg = deg.astype(np.int64)
        mean = deg.mean()
        if abs(mean - p.avg_deg) <= 0.015 * p.avg_deg:
            return deg
        lo = float(np.clip(lo * (p.avg_deg / mean) ** 1.3, 1e-3, p.max_deg - 1e-6))
    raise GenerationError("could not hit the target mean degree within tolerance")


def _sample_community_sizes(rng, p: LfrParams):
    """Power-law sizes in [cmin, cmax], resampled until they sum exactly to n."""
    for _ in range(2000):
        sizes: list[int] = []
        total = 0
        while total < p.n:
            s = int(np.clip(np.rint(_truncated_power_law(rng, p.beta, p.cmin, p.cmax, 1)[0]),
                            p.cmin, p.cmax))
            # the final draw may be swapped for whatever closes the gap exactly
            if total + s > p.n and p.cmin <= p.n - total <= p.cmax:
                s = p.n - total
            sizes.append(s)
            total += s
        if total == p.n:
            return np.array(sizes, dtype=np.int64)
    raise GenerationError("could not realize community sizes summing to n")


def _assignment_feasible(int_deg_sorted, sizes):
    """Greedy Hall check: nodes sorted by descending internal degree must fit
    into communities sorted by descending size."""
    order = np.argsort(sizes)[::-1]
    free = [int(sizes[i]) for i in order]
    cap = [int(sizes[i]) - 1 for i in order]
    ci = 0
    for d in int_deg_sorted:
        while ci < len(free) and (free[ci] == 0):
            ci += 1
        if ci >= len(free) or cap[ci] < d:
            return False
        free[ci] -= 1
    return True


def _assign_communities(rng, int_deg, sizes):
    """Random feasible placement: process nodes by descending internal degree,
    choose uniformly among communities with a free slot and size-1 >= d."""
    k = sizes.size
    free = sizes.copy()
    comm = np.full(int_deg.size, -1, dtype=np.int64)
    order = np.argsort(-int_deg, kind="stable")
    for v in order:
        feas = np.flatnonzero((free > 0) & (sizes - 1 >= int_deg[v]))
        if feas.size == 0:
            return None
        comm[v] = feas[rng.integers(feas.size)]
        free[comm[v]] -= 1
    return comm


def _match_stubs(rng, stubs, forbidden_pair, max_passes=200):
    """Pair up stubs avoiding self-loops, duplicate pairs, and `forbidden_pair`.

    Swap-based repair: an offending pair i trades second endpoints with a
    random partner pair j, accepted only when both resulting pairs are valid.
    Returns the (2, m) pair array or None when repair stalls.
    """
    stubs = np.array(stubs, dtype=np.int64)
    if stubs.size == 0:
        return np.empty((2, 0), dtype=np.int64)
    rng.shuffle(stubs)
    a = stubs[0::2].copy()
    b = stubs[1::2].copy()
    m = a.size

    def key(u, v):
        return (u, v) if u < v else (v, u)

    count: dict[tuple[int, int], int] = {}
    for i in range(m):
        k = key(int(a[i]), int(b[i]))
        count[k] = count.get(k, 0) + 1

    def is_bad(u, v):
        return u == v or forbidden_pair(u, v) or count[key(u, v)] > 1

    for _ in range(max_passes):
        bad = [i for i in range(m) if is_bad(int(a[i]), int(b[i]))]
        if not bad:
            return np.vstack([a, b])
        progress = False
        for i in bad:
            u1, v1 = int(a[i]), int(b[i])
            if not is_bad(u1, v1):
                continue  # an earlier swap already fixed this pair
            for _try in range(40):
                j = int(rng.integers(m))
                if j == i:
                    continue
                u2, v2 = int(a[j]), int(b[j])
                # proposed: (u1, v2) and (u2, v1)
                if u1 == v2 or u2 == v1:
                    continue
                if forbidden_pair(u1, v2) or forbidden_pair(u2, v1):
                    continue
                k_old1, k_old2 = key(u1, v1), key(u2, v2)
                k_new1, k_new2 = key(u1, v2), key(u2, v1)
                if k_new1 == k_old1 or k_new1 == k_new2:
                    continue
                count[k_old1] -= 1
                count[k_old2] -= 1
                if count.get(k_new1, 0) > 0 or count.get(k_new2, 0) > 0:
                    count[k_old1] += 1
                    count[k_old2] += 1
                    continue
                count[k_new1] = count.get(k_new1, 0) + 1
                count[k_new2] = count.get(k_new2, 0) + 1
                b[i], b[j] = v2, v1
                progress = True
                break
        if not progress:
            return None
    return None


def _realize_simple_graph(rng, members, degrees):
    """Simple graph on `members` with the given degree sequence, or None.

    Random stub matching stalls on the dense, skewed sequences intra-community
    realization produces (nodes with degree close to size-1), so this builds a
    valid graph greedily (highest remaining degree connects to the next-highest
    ones) and then randomizes it with double-edge swaps.  Returns None only
    when the sequence is not graphical.
    """
    size = members.size
    if size < 2 or degrees.sum() == 0:
        return np.empty((2, 0), dtype=np.int64)
    if degrees.max() >= size:
        return None
    rem = degrees.astype(np.int64).copy()
    edges: list[tuple[int, int]] = []
    present: set[tuple[int, int]] = set()
    while True:
        v = int(np.argmax(rem))
        d = int(rem[v])
        if d == 0:
            break
        rem[v] = 0
        targets = np.argsort(-rem, kind="stable")[:d]
        if rem[targets[-1]] == 0:
            return None  # not graphical
        for u in targets:
            u = int(u)
            key = (v, u) if v < u else (u, v)
            edges.append(key)
            present.add(key)
            rem[u] -= 1
    # randomize while preserving degrees
    m = len(edges)
    for _ in range(10 * m):
        i, j = int(rng.integers(m)), int(rng.integers(m))
        if i == j:
            continue
        a, b = edges[i]
        c, d = edges[j]
        if rng.integers(2):
            c, d = d, c
        if a == d or c == b:
            continue
        k1 = (a, d) if a < d else (d, a)
        k2 = (c, b) if c < b else (b, c)
        if k1 in present or k2 in present:
            continue
        present.discard(edges[i])
        present.discard(edges[j])
        present.add(k1)
        present.add(k2)
        edges[i], edges[j] = k1, k2
    out = np.array(edges, dtype=np.int64).T
    return members[out]


def generate_lfr(p: LfrParams) -> BenchmarkInstance:
    """LFR-style benchmark graph with planted communities.

    Degrees and community sizes follow truncated power laws; each node keeps
    round((1-mu)*k) stubs inside its community and the rest outside, matched
    separately with swap repair.  Realized per-node mixing is within one stub
    of the target.  Bounded resampling with derived sub-seeds on failure.
    """
    last_err = "unknown"
    for attempt in range(8):
        rng = np.random.default_rng(np.uint64(split64(p.seed, attempt)))
        try:
            inst = _generate_lfr_once(rng, p)
        except GenerationError as exc:
            last_err = str(exc)
            continue
        if inst is not None:
            return inst
        last_err = "stub matching failed"
    raise GenerationError(f"LFR generation failed after bounded retries: {last_err}")


def _generate_lfr_once(rng, p: LfrParams):
    deg = _sample_degrees(rng, p)
    int_deg = np.rint((1.0 - p.mu) * deg).astype(np.int64)
    int_deg = np.minimum(int_deg, deg)

    sizes = None
    for _ in range(80):
        cand = _sample_community_sizes(rng, p)
        if _assignment_feasible(np.sort(int_deg)[::-1], cand):
            sizes = cand
            break
    if sizes is None:
        raise GenerationError("no feasible community-size sequence after 80 draws")

    comm = _assign_communities(rng, int_deg, sizes)
    if comm is None:
        return None
    k = sizes.size

    # parity fix-ups: odd intra-stub totals move one stub to the external side
    # (dropped entirely at mu = 0 so every edge stays intra-community)
    for c in range(k):
        members = np.flatnonzero(comm == c)
        if int_deg[members].sum() % 2 == 1:
            v = members[np.argmax(int_deg[members])]
            int_deg[v] -= 1
            if p.mu == 0.0:
                deg[v] -= 1
    ext_deg = deg - int_deg
    if ext_deg.sum() % 2 == 1:
        v = int(np.argmax(ext_deg))
        ext_deg[v] -= 1
        deg[v] -= 1

    edges = []
    for c in range(k):
        members = np.flatnonzero(comm == c)
        pairs = _realize_simple_graph(rng, members, int_deg[members])
        if pairs is None:
            return None
        edges.append(pairs)
    ext_stubs = np.repeat(np.arange(p.n), ext_deg)
    pairs = _match_stubs(rng, ext_stubs, lambda u, v: comm[u] == comm[v])
    if pairs is None:
        return None
    edges.append(pairs)

    src = np.concatenate([e[0] for e in edges])
    dst = np.concatenate([e[1] for e in edges])
    if p.weight_mode == "noisy_unit":
        w = rng.uniform(0.8, 1.2, size=src.size)
    else:
        w = np.ones(src.size)
    g = Graph.build(p.n, src, dst, w, directed=False)
    echo = asdict(p)
    echo["kind"] = "lfr"
    return BenchmarkInstance(
        graph=g, truth=canonicalize(comm), params_echo=echo, instance_seed=p.seed
    )


# -- factor-model returns --------------------------------------------------


def generate_factor_returns(
    block_sizes, intra_loading: float, market_loading: float, t_obs: int, seed: int
) -> np.ndarray:
    """Synthetic return series r_it = market·m_t + intra·f_{b(i),t} + noise.

    Returns an (assets x observations) array.  Factors and noise are
    independent unit-variance Gaussians, so the expected within-block
    correlation exceeds the cross-block (market-induced) one.
    """
    block_sizes = [int(s) for s in block_sizes]
    if any(s < 1 for s in block_sizes):
        raise DataError("block sizes must be positive")
    if not (0.0 <= intra_loading < 1.0 and 0.0 <= market_loading < 1.0):
        raise DataError("loadings must lie in [0, 1)")
    n_assets = sum(block_sizes)
    if t_obs <= n_assets:
        raise DataError("t_obs must exceed the number of assets (needed for spectral bounds)")
    rng = np.random.default_rng(np.uint64(split64(seed, 0)))
    market = rng.standard_normal(t_obs)
    factors = rng.standard_normal((len(block_sizes), t_obs))
    noise = rng.standard_normal((n_assets, t_obs))
    block_of = np.repeat(np.arange(len(block_sizes)), block_sizes)
    return market_loading * market + intra_loading * factors[block_of] + noise
