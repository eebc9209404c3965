"""Immutable weighted graph with edge-list / dense-matrix ingestion.

Undirected graphs are stored symmetrically: every off-diagonal edge (i, j, w)
is stored together with (j, i, w), and self-loops are stored once with their
full weight.  All totals therefore run over ordered pairs, so for an
undirected simple graph with m edges the stored entry count L equals 2m.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

__all__ = [
    "Graph",
    "NodeMarginals",
    "load_edge_list",
    "write_edge_list",
    "from_dense_matrix",
    "read_dense_csv",
    "write_dense_csv",
    "node_marginals",
    "totals",
    "aggregate_by_partition",
]

_SYM_TOL = 1e-9


@dataclass(frozen=True)
class NodeMarginals:
    """Per-node degrees and strengths plus graph totals.

    Minus components are stored as magnitudes, so s_out = s_out_plus - s_out_minus.
    """

    k_out: np.ndarray
    k_in: np.ndarray
    s_out: np.ndarray
    s_in: np.ndarray
    s_out_plus: np.ndarray
    s_out_minus: np.ndarray
    s_in_plus: np.ndarray
    s_in_minus: np.ndarray
    L: int
    w_tot: float
    w_plus: float
    w_minus: float


@dataclass(frozen=True)
class Graph:
    """Weighted, possibly directed, possibly signed graph.

    Edges are kept as parallel arrays (src, dst, weight), deduplicated
    (duplicates summed), zero-weight entries dropped, sorted by (src, dst).
    Instances are immutable; construction goes through :meth:`build` or one
    of the ingestion helpers.
    """

    n: int
    directed: bool
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    node_labels: tuple[str, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- construction ------------------------------------------------------

    @classmethod
    def build(
        cls,
        n: int,
        src,
        dst,
        weight,
        directed: bool,
        node_labels: tuple[str, ...] | None = None,
    ) -> "Graph":
        """Build a graph from raw edge arrays.

        For undirected graphs each off-diagonal edge should appear once (in
        either orientation); the mirror entry is added automatically.
        Duplicate (src, dst) pairs are summed; entries summing to zero are
        dropped.
        """
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        weight = np.asarray(weight, dtype=np.float64)
        if not (src.shape == dst.shape == weight.shape):
            raise DataError("edge arrays must have equal length")
        if src.size:
            if src.min(initial=0) < 0 or dst.min(initial=0) < 0:
                raise DataError("negative node index in edge list")
            if src.max(initial=-1) >= n or dst.max(initial=-1) >= n:
                raise DataError("node index out of range")
        if not np.all(np.isfinite(weight)):
            raise DataError("non-finite edge weight")
        if node_labels is not None and len(node_labels) != n:
            raise DataError("node_labels length must equal n")

        if not directed and src.size:
            off = src != dst
            src, dst, weight = (
                np.concatenate([src, dst[off]]),
                np.concatenate([dst, src[off]]),
                np.concatenate([weight, weight[off]]),
            )
        return cls._finish(n, directed, src, dst, weight, node_labels)

    @classmethod
    def _finish(cls, n, directed, src, dst, weight, node_labels):
        if weight.size:
            keys = src * np.int64(n) + dst
            order = np.argsort(keys, kind="stable")
            keys = keys[order]
            weight = weight[order]
            uniq, inverse = np.unique(keys, return_inverse=True)
            summed = np.zeros(uniq.size, dtype=np.float64)
            np.add.at(summed, inverse, weight)
            keep = summed != 0.0
            uniq, summed = uniq[keep], summed[keep]
            src = (uniq // n).astype(np.int64)
            dst = (uniq % n).astype(np.int64)
            weight = summed
        else:
            src = np.empty(0, dtype=np.int64)
            dst = np.empty(0, dtype=np.int64)
            weight = np.empty(0, dtype=np.float64)
        for a in (src, dst, weight):
            a.setflags(write=False)
        return cls(n=n, directed=directed, src=src, dst=dst, weight=weight, node_labels=node_labels)

    @classmethod
    def _from_stored(cls, n, directed, src, dst, weight, node_labels=None) -> "Graph":
        """Build from arrays that are already in stored form (symmetric for
        undirected graphs); entries are deduplicated but never mirrored."""
        return cls._finish(
            n,
            directed,
            np.asarray(src, dtype=np.int64),
            np.asarray(dst, dtype=np.int64),
            np.asarray(weight, dtype=np.float64),
            node_labels,
        )

    # -- derived properties ------------------------------------------------

    @property
    def sign_profile(self) -> str:
        return "signed" if self.weight.size and self.weight.min() < 0 else "nonnegative"

    @property
    def num_stored_edges(self) -> int:
        return int(self.weight.size)

    def fingerprint(self) -> str:
        """Stable content hash of (n, directedness, edge arrays)."""
        if "fingerprint" not in self._cache:
            h = hashlib.blake2b(digest_size=16)
            h.update(f"{self.n}|{int(self.directed)}|".encode())
            h.update(self.src.tobytes())
            h.update(self.dst.tobytes())
            h.update(self.weight.tobytes())
            self._cache["fingerprint"] = h.hexdigest()
        return self._cache["fingerprint"]

    def marginals(self) -> NodeMarginals:
        if "marginals" not in self._cache:
            self._cache["marginals"] = node_marginals(self)
        return self._cache["marginals"]

    def label_of(self, i: int) -> str:
        return self.node_labels[i] if self.node_labels is not None else str(i)


# -- marginals and totals --------------------------------------------------


def node_marginals(g: Graph) -> NodeMarginals:
    """Degrees, strengths, and signed strength components for every node."""
    n = g.n
    w = g.weight
    pos = np.clip(w, 0.0, None)
    neg = np.clip(-w, 0.0, None)
    k_out = np.bincount(g.src, minlength=n).astype(np.int64)
    k_in = np.bincount(g.dst, minlength=n).astype(np.int64)
    s_out = np.bincount(g.src, weights=w, minlength=n)
    s_in = np.bincount(g.dst, weights=w, minlength=n)
    s_out_plus = np.bincount(g.src, weights=pos, minlength=n)
    s_out_minus = np.bincount(g.src, weights=neg, minlength=n)
    s_in_plus = np.bincount(g.dst, weights=pos, minlength=n)
    s_in_minus = np.bincount(g.dst, weights=neg, minlength=n)
    return NodeMarginals(
        k_out=k_out,
        k_in=k_in,
        s_out=s_out,
        s_in=s_in,
        s_out_plus=s_out_plus,
        s_out_minus=s_out_minus,
        s_in_plus=s_in_plus,
        s_in_minus=s_in_minus,
        L=int(w.size),
        w_tot=float(w.sum()),
        w_plus=float(pos.sum()),
        w_minus=float(neg.sum()),
    )


def totals(g: Graph) -> tuple[int, float, float, float]:
    """(L, w_tot, w_plus, w_minus) over stored (ordered) entries."""
    m = g.marginals()
    return m.L, m.w_tot, m.w_plus, m.w_minus


def aggregate_by_partition(g: Graph, assignment) -> Graph:
    """Supergraph with one node per community; intra weights become self-loops."""
    a = np.asarray(assignment, dtype=np.int64)
    if a.shape != (g.n,):
        raise DataError(f"partition length {a.size} != node count {g.n}")
    if a.size and (a.min() < 0):
        raise DataError("negative community id")
    k = int(a.max()) + 1 if a.size else 0
    return Graph._from_stored(k, g.directed, a[g.src], a[g.dst], g.weight)


# -- edge-list I/O ---------------------------------------------------------


def _split_line(line: str) -> list[str]:
    if "\t" in line:
        return [f for f in line.split("\t") if f.strip() != ""]
    if "," in line:
        return [f.strip() for f in line.split(",") if f.strip() != ""]
    return line.split()


def load_edge_list(stream, directed: bool, weighted: bool = True) -> Graph:
    """Parse an edge list: one `<src> <dst> [<weight>]` per line.

    Delimiter is auto-detected per line among tab, comma, and whitespace.
    `#`-prefixed lines and blank lines are skipped.  Node identifiers are
    arbitrary strings mapped to dense indices in first-appearance order.
    Duplicate (src, dst) pairs are summed; unweighted lines get weight 1.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    index: dict[str, int] = {}
    src, dst, wts = [], [], []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = _split_line(line)
        want = 3 if weighted else 2
        if len(fields) != want:
            raise DataError(f"line {lineno}: expected {want} fields, got {len(fields)}")
        a, b = fields[0], fields[1]
        if weighted:
            try:
                w = float(fields[2])
            except ValueError:
                raise DataError(f"line {lineno}: unparseable weight {fields[2]!r}") from None
            if not np.isfinite(w):
                raise DataError(f"line {lineno}: non-finite weight")
            if w == 0.0:
                raise DataError(f"line {lineno}: zero-weight edge (zero means absence)")
        else:
            w = 1.0
        for name in (a, b):
            if name not in index:
                index[name] = len(index)
        src.append(index[a])
        dst.append(index[b])
        wts.append(w)
    labels = tuple(index)
    return Graph.build(len(index), src, dst, wts, directed=directed, node_labels=labels or None)


def write_edge_list(g: Graph, stream) -> None:
    """Write the graph in the edge-list format read by :func:`load_edge_list`.

    Undirected graphs emit each unordered pair once (src <= dst).  Weights
    use up to 12 significant digits, which round-trips the duplicate-summed
    edge multiset bit-exactly for such inputs.
    """
    close = False
    if isinstance(stream, (str,)):
        stream = open(stream, "w", encoding="utf-8")
        close = True
    try:
        for i, j, w in zip(g.src, g.dst, g.weight):
            if not g.directed and i > j:
                continue
            stream.write(f"{g.label_of(i)}\t{g.label_of(j)}\t{w:.12g}\n")
    finally:
        if close:
            stream.close()


# -- dense-matrix I/O ------------------------------------------------------


def from_dense_matrix(m, directed: bool, node_labels: tuple[str, ...] | None = None) -> Graph:
    """Graph from a square real matrix: one edge per nonzero entry.

    Undirected inputs must be symmetric within 1e-9 and are symmetrized by
    averaging.  Negative entries are allowed (the result is a signed graph).
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DataError(f"matrix must be square, got shape {m.shape}")
    if np.isnan(m).any():
        raise DataError("matrix contains NaN entries")
    n = m.shape[0]
    if directed:
        src, dst = np.nonzero(m)
        return Graph.build(n, src, dst, m[src, dst], directed=True, node_labels=node_labels)
    asym = np.abs(m - m.T).max(initial=0.0)
    if asym > _SYM_TOL:
        raise DataError(f"matrix asymmetric beyond tolerance ({asym:.3g} > {_SYM_TOL})")
    sym = 0.5 * (m + m.T)
    iu, ju = np.triu_indices(n)
    keep = sym[iu, ju] != 0.0
    return Graph.build(n, iu[keep], ju[keep], sym[iu, ju][keep], directed=False, node_labels=node_labels)


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def read_dense_csv(stream) -> tuple[np.ndarray, tuple[str, ...] | None]:
    """Read a dense matrix CSV with optional header row/column of labels."""
    if isinstance(stream, str):
        with open(stream, encoding="utf-8") as fh:
            return read_dense_csv(fh)
    rows = [line.rstrip("\n").split(",") for line in stream if line.strip()]
    if not rows:
        raise DataError("empty matrix file")
    labels: tuple[str, ...] | None = None
    has_header = not _is_number(rows[0][-1])
    if has_header:
        head = rows[0]
        body = rows[1:]
        has_label_col = bool(body) and not _is_number(body[0][0])
        labels = tuple(h.strip() for h in (head[1:] if has_label_col else head))
        data = [r[1:] if has_label_col else r for r in body]
    else:
        has_label_col = not _is_number(rows[0][0])
        labels = tuple(r[0].strip() for r in rows) if has_label_col else None
        data = [r[1:] if has_label_col else r for r in rows]
    try:
        mat = np.array([[float(x) for x in r] for r in data], dtype=np.float64)
    except ValueError as exc:
        raise DataError(f"unparseable matrix entry: {exc}") from None
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DataError(f"matrix must be square, got shape {mat.shape}")
    return mat, labels


def write_dense_csv(m: np.ndarray, stream, labels: tuple[str, ...] | None = None) -> None:
    close = False
    if isinstance(stream, str):
        stream = open(stream, "w", encoding="utf-8")
        close = True
    try:
        if labels is not None:
            stream.write(",".join(labels) + "\n")
        for row in np.asarray(m, dtype=np.float64):
            stream.write(",".join(f"{x:.12g}" for x in row) + "\n")
    finally:
        if close:
            stream.close()
