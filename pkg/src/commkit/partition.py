"""Partitions, canonicalization, contingency tables, ARI, and pairwise-ARI matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

__all__ = [
    "Partition",
    "AriMatrix",
    "canonicalize",
    "contingency",
    "ari",
    "ari_matrix",
]


@dataclass(frozen=True)
class Partition:
    """Canonical community assignment: ids 0..k-1 numbered by first appearance."""

    assignment: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return int(self.assignment.size)

    @property
    def k(self) -> int:
        return int(self.assignment.max()) + 1 if self.assignment.size else 0

    def key(self) -> bytes:
        """Hashable identity of the canonical form (for frequency counting)."""
        if "key" not in self._cache:
            self._cache["key"] = self.assignment.tobytes()
        return self._cache["key"]

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self.assignment, other.assignment)

    def __hash__(self):
        return hash(self.key())

    def community_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)

    def save(self, stream, labels: tuple[str, ...] | None = None) -> None:
        close = isinstance(stream, str)
        fh = open(stream, "w", encoding="utf-8") if close else stream
        try:
            for i, c in enumerate(self.assignment):
                name = labels[i] if labels is not None else str(i)
                fh.write(f"{name}\t{c}\n")
        finally:
            if close:
                fh.close()

    @staticmethod
    def load(stream, labels: tuple[str, ...] | None = None) -> "Partition":
        """Read `<node_label> <community_id>` lines.

        With `labels` given, lines may appear in any order and are matched by
        label; otherwise file order defines node order.
        """
        close = isinstance(stream, str)
        fh = open(stream, encoding="utf-8") if close else stream
        try:
            pairs = []
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                fields = line.split()
                if len(fields) != 2:
                    raise DataError(f"line {lineno}: expected `<label> <community>`")
                try:
                    pairs.append((fields[0], int(fields[1])))
                except ValueError:
                    raise DataError(f"line {lineno}: non-integer community id") from None
        finally:
            if close:
                fh.close()
        if not pairs:
            raise DataError("empty partition file")
        if labels is None:
            raw_ids = [c for _, c in pairs]
        else:
            pos = {name: i for i, name in enumerate(labels)}
            raw_ids = [0] * len(labels)
            seen = set()
            for name, c in pairs:
                if name not in pos:
                    raise DataError(f"unknown node label {name!r} in partition file")
                raw_ids[pos[name]] = c
                seen.add(name)
            if len(seen) != len(labels):
                raise DataError("partition file does not cover all nodes")
        return canonicalize(raw_ids)


def canonicalize(raw) -> Partition:
    """Relabel community ids to 0..k-1 by first appearance in node order."""
    a = np.asarray(raw, dtype=np.int64)
    if a.ndim != 1 or a.size == 0:
        raise DataError("assignment must be a nonempty 1-d array")
    uniq, first, inverse = np.unique(a, return_index=True, return_inverse=True)
    rank = np.empty(uniq.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(uniq.size)
    out = rank[inverse]
    out.setflags(write=False)
    return Partition(assignment=out)


def contingency(p1: Partition, p2: Partition) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cross-tabulation n_uv = |cluster u of p1  ∩  cluster v of p2| plus marginals."""
    if p1.n != p2.n:
        raise DataError(f"partition lengths differ: {p1.n} != {p2.n}")
    k1, k2 = p1.k, p2.k
    table = np.bincount(p1.assignment * k2 + p2.assignment, minlength=k1 * k2).reshape(k1, k2)
    return table, table.sum(axis=1), table.sum(axis=0)


def _pairs(x: np.ndarray) -> int:
    # exact sum of C(x, 2) over entries; int64 is safe, final value is a Python int
    x = x.astype(np.int64, copy=False)
    return int((x * (x - 1) // 2).sum())


def ari(p1: Partition, p2: Partition) -> float:
    """Adjusted Rand Index between two partitions of the same node set.

    Pair counts are accumulated in exact integer arithmetic; a single float
    division happens at the end.  The degenerate denominator (both partitions
    all-singletons or both all-in-one) returns 1.0, consistent with the
    identity case.
    """
    if p1.n != p2.n:
        raise DataError(f"partition lengths differ: {p1.n} != {p2.n}")
    if p1.n < 2:
        raise DataError("ARI requires at least 2 nodes")
    table, rows, cols = contingency(p1, p2)
    z = _pairs(table.ravel())
    b = _pairs(rows)
    c = _pairs(cols)
    n = p1.n
    m = n * (n - 1) // 2
    # ARI = (z - bc/M) / ((b+c)/2 - bc/M), cleared of denominators:
    num = 2 * (z * m - b * c)
    den = m * (b + c) - 2 * b * c
    if den == 0:
        return 1.0
    return num / den


@dataclass(frozen=True)
class AriMatrix:
    """T x T pairwise-ARI matrix over an ensemble, diagonal fixed at zero."""

    values: np.ndarray

    @property
    def t(self) -> int:
        return int(self.values.shape[0])

    def strengths(self) -> np.ndarray:
        """Row sums.  math.fsum keeps exact ties exact across permuted rows."""
        import math

        return np.array([math.fsum(row) for row in self.values])

    def to_csv(self, stream) -> None:
        close = isinstance(stream, str)
        fh = open(stream, "w", encoding="utf-8") if close else stream
        try:
            for row in self.values:
                fh.write(",".join(f"{x:.6f}" for x in row) + "\n")
        finally:
            if close:
                fh.close()


def ari_matrix(partitions: list[Partition]) -> AriMatrix:
    """Pairwise ARI over a list of partitions; upper triangle computed, mirrored."""
    t = len(partitions)
    if t < 2:
        raise DataError("ARI matrix requires at least 2 partitions")
    vals = np.zeros((t, t), dtype=np.float64)
    for i in range(t):
        for j in range(i + 1, t):
            vals[i, j] = vals[j, i] = ari(partitions[i], partitions[j])
    vals.setflags(write=False)
    return AriMatrix(values=vals)
