"""Prices -> log-returns -> correlation -> spectral filtering.

The filter eigendecomposes the correlation matrix, discards every eigenvalue
inside the random-bulk upper bound (1 + sqrt(N/T))^2, optionally removes the
single market mode (the largest eigenvalue, when it sits above the bulk),
and zeroes the diagonal of what remains.  The result is a signed matrix
meant for precomputed-mode modularity.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError

__all__ = [
    "ReturnsMatrix",
    "FilteredCorrelation",
    "clean_and_log_returns",
    "pearson_correlation",
    "rmt_filter",
    "read_prices_csv",
]

_SYM_TOL = 1e-10


@dataclass(frozen=True)
class ReturnsMatrix:
    values: np.ndarray  # assets x observations
    asset_labels: tuple[str, ...] | None = None

    @property
    def n_assets(self) -> int:
        return int(self.values.shape[0])

    @property
    def t_obs(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True)
class FilteredCorrelation:
    matrix: np.ndarray  # symmetric, zero diagonal
    removed: dict  # {"bulk_count": int, "market_removed": bool}
    mp_bounds: tuple[float, float]  # (lambda_minus, lambda_plus)
    complement: np.ndarray  # the removed spectral components; matrix-with-diagonal + complement == input


def clean_and_log_returns(
    prices, asset_labels: tuple[str, ...] | None = None, max_missing_frac: float = 0.1
) -> ReturnsMatrix:
    """Forward-fill gaps and take log-returns, assets x (T_obs + 1) in.

    Series missing more than `max_missing_frac` of their observations are
    dropped.  Remaining series must start with a present value.  Gaps encode
    as NaN.
    """
    prices = np.array(prices, dtype=np.float64)
    if prices.ndim != 2 or prices.shape[1] < 2:
        raise DataError("prices must be a 2-d array with at least 2 observations per series")
    miss_frac = np.isnan(prices).mean(axis=1)
    keep = miss_frac <= max_missing_frac
    if not keep.any():
        raise DataError("all series exceed the missing-observation threshold")
    prices = prices[keep]
    labels = tuple(np.array(asset_labels)[keep]) if asset_labels is not None else None
    if np.isnan(prices[:, 0]).any():
        bad = int(np.flatnonzero(np.isnan(prices[:, 0]))[0])
        raise DataError(f"series {bad} has no initial observation (cannot forward-fill)")
    # forward-fill along time
    idx = np.arange(prices.shape[1])
    filled = prices.copy()
    for row in filled:
        mask = np.isnan(row)
        if mask.any():
            last = np.maximum.accumulate(np.where(mask, -1, idx))
            row[:] = row[last]
    if (filled <= 0).any():
        raise DataError("non-positive price encountered; log-returns undefined")
    returns = np.diff(np.log(filled), axis=1)
    return ReturnsMatrix(values=returns, asset_labels=labels)


def pearson_correlation(r: ReturnsMatrix) -> np.ndarray:
    """Pairwise Pearson correlation of the return series (unit diagonal)."""
    var = r.values.var(axis=1)
    if (var == 0).any():
        bad = int(np.flatnonzero(var == 0)[0])
        name = r.asset_labels[bad] if r.asset_labels else str(bad)
        raise DataError(f"zero-variance series {name!r}; exclude it before correlating")
    c = np.corrcoef(r.values)
    c = np.clip(0.5 * (c + c.T), -1.0, 1.0)
    np.fill_diagonal(c, 1.0)
    return c


def rmt_filter(c, t_obs: int, mode: str = "bulk_and_market") -> FilteredCorrelation:
    """Remove random-bulk (and optionally market-mode) spectral components.

    mode is "bulk_only" or "bulk_and_market".  Requires t_obs > N so the
    random-bulk upper bound is meaningful.
    """
    if mode not in ("bulk_only", "bulk_and_market"):
        raise DataError(f"unknown filter mode {mode!r}")
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise DataError("correlation matrix must be square")
    if np.abs(c - c.T).max(initial=0.0) > _SYM_TOL:
        raise DataError("correlation matrix must be symmetric")
    n = c.shape[0]
    if t_obs <= n:
        raise DataError("t_obs must exceed the matrix dimension")
    q = n / t_obs
    lam_minus = (1.0 - np.sqrt(q)) ** 2
    lam_plus = (1.0 + np.sqrt(q)) ** 2
    evals, evecs = np.linalg.eigh(c)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    retained = evals > lam_plus
    market_removed = False
    if mode == "bulk_and_market" and retained.size and retained[0]:
        retained = retained.copy()
        retained[0] = False
        market_removed = True
    kept = evecs[:, retained] * evals[retained]
    filtered = kept @ evecs[:, retained].T
    complement = c - filtered
    out = filtered.copy()
    np.fill_diagonal(out, 0.0)
    return FilteredCorrelation(
        matrix=out,
        removed={"bulk_count": int((~retained).sum() - int(market_removed)),
                 "market_removed": market_removed},
        mp_bounds=(float(lam_minus), float(lam_plus)),
        complement=complement,
    )


def read_prices_csv(stream) -> tuple[np.ndarray, tuple[str, ...]]:
    """Prices CSV: header row of tickers, one row per day, empty cell = gap.

    Returns (prices as assets x days, tickers).
    """
    close = isinstance(stream, str)
    fh = open(stream, newline="", encoding="utf-8") if close else stream
    try:
        reader = csv.reader(fh)
        rows = [r for r in reader if any(x.strip() for x in r)]
    finally:
        if close:
            fh.close()
    if len(rows) < 3:
        raise DataError("prices file needs a header row and at least 2 data rows")
    tickers = tuple(t.strip() for t in rows[0])
    days = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(tickers):
            raise DataError(f"line {lineno}: expected {len(tickers)} cells, got {len(row)}")
        vals = []
        for cell in row:
            cell = cell.strip()
            if cell == "":
                vals.append(np.nan)
            else:
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataError(f"line {lineno}: unparseable price {cell!r}") from None
        days.append(vals)
    return np.array(days, dtype=np.float64).T, tickers
