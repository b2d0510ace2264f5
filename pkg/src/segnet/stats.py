"""Two-sample tests, size-controlled z-scores, binning and density estimates."""

from __future__ import annotations

import logging
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np
from scipy import special
from scipy.stats import norm, rankdata

log = logging.getLogger(__name__)

EXACT_CAP = 14
MODES = ("auto", "exact", "asymptotic")
ALTERNATIVES = ("two_sided", "a_less", "a_greater")


class ModeError(ValueError):
    pass


def significance_code(p: float) -> str:
    if p is None or math.isnan(p):
        return ""
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: str
    mode: str
    alternative: str = "two_sided"
    p_exact: Fraction | None = None
    fallback: bool = False

    @property
    def significance_code(self) -> str:
        return significance_code(self.p_value)


def _samples(a, b):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size < 1 or b.size < 1:
        raise ValueError("both samples need at least one value")
    if np.isnan(a).any() or np.isnan(b).any():
        raise ValueError("samples contain NaN")
    return a, b


def _resolve_mode(mode: str, total: int) -> str:
    if mode not in MODES:
        raise ModeError(f"unknown mode {mode!r}")
    if mode == "auto":
        return "exact" if total <= EXACT_CAP else "asymptotic"
    if mode == "exact" and total > EXACT_CAP:
        raise ModeError(f"exact mode allows at most {EXACT_CAP} observations, got {total}")
    return mode


def _ks_gap(values: np.ndarray, in_a: np.ndarray, n: int, m: int) -> int:
    """``n*m*D`` for a labelling of the sorted pooled sample (integer, exact)."""
    ca = np.cumsum(in_a)
    cb = np.arange(1, len(values) + 1) - ca
    last_of_run = np.append(values[1:] != values[:-1], True)
    return int(np.max(np.abs(ca[last_of_run] * m - cb[last_of_run] * n)))


@lru_cache(maxsize=256)
def _ks_null(n: int, m: int, run_ends: tuple[bool, ...]) -> np.ndarray:
    """Sorted ``n*m*D`` over every split of a pooled sample with the given tie runs."""
    ends = np.array(run_ends)
    gaps = []
    for chosen in combinations(range(n + m), n):
        lab = np.zeros(n + m, dtype=np.int64)
        lab[list(chosen)] = 1
        ca = np.cumsum(lab)[ends]
        cb = np.flatnonzero(ends) + 1 - ca
        gaps.append(int(np.max(np.abs(ca * m - cb * n))))
    return np.sort(np.array(gaps))


def ks_two_sample(a, b, mode: str = "auto") -> TestResult:
    """Two-sided two-sample Kolmogorov-Smirnov test.

    ``D = sup |F_a - F_b|``. The exact p-value counts, over all
    ``C(n+m, n)`` ways to split the pooled sample, the splits with a gap at
    least as large as observed. The asymptotic p-value is the Kolmogorov
    survival function at ``sqrt(nm/(n+m)) * D``.
    """
    a, b = _samples(a, b)
    n, m = a.size, b.size
    mode = _resolve_mode(mode, n + m)
    pooled = np.concatenate([a, b])
    order = np.argsort(pooled, kind="stable")
    values = pooled[order]
    labels = (order < n).astype(np.int64)
    gap = _ks_gap(values, labels, n, m)
    d = gap / (n * m)
    if mode == "exact":
        # the null depends only on the sizes and where ties sit in the pooled order
        null = _ks_null(n, m, tuple(np.append(values[1:] != values[:-1], True).tolist()))
        hits = null.size - int(np.searchsorted(null, gap, side="left"))
        pe = Fraction(hits, null.size)
        return TestResult(d, float(pe), "KS", "exact", p_exact=pe)
    en = math.sqrt(n * m / (n + m))
    p = float(min(1.0, max(0.0, special.kolmogorov(en * d))))
    return TestResult(d, p, "KS", "asymptotic")


@lru_cache(maxsize=256)
def _mw_null(n: int, m: int) -> dict[int, int]:
    """Frequency of each ``U`` over all rank splits without ties."""
    dist: dict[int, int] = {}
    for chosen in combinations(range(1, n + m + 1), n):
        k = sum(chosen) - n * (n + 1) // 2
        dist[k] = dist.get(k, 0) + 1
    return dist


def mann_whitney_u(a, b, mode: str = "auto", alternative: str = "two_sided") -> TestResult:
    """Mann-Whitney U test; the statistic is ``U_a``, the number of pairs with
    ``a > b`` plus half the ties.

    Exact p-values enumerate all rank splits and are only used without ties;
    with ties an exact request falls back to the normal approximation (tie
    and continuity corrected) and sets ``fallback``.
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(f"unknown alternative {alternative!r}")
    a, b = _samples(a, b)
    n, m = a.size, b.size
    total_n = n + m
    mode = _resolve_mode(mode, total_n)
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    u = float(ranks[:n].sum() - n * (n + 1) / 2)
    has_ties = np.unique(pooled).size < total_n
    fallback = False
    if mode == "exact" and has_ties:
        log.info("ties present; exact Mann-Whitney falls back to the normal approximation")
        mode, fallback = "asymptotic", True

    if mode == "exact":
        u_obs = int(round(u))
        dist = _mw_null(n, m)
        total = math.comb(total_n, n)
        le = Fraction(sum(c for k, c in dist.items() if k <= u_obs), total)
        ge = Fraction(sum(c for k, c in dist.items() if k >= u_obs), total)
        if alternative == "a_less":
            pe = le
        elif alternative == "a_greater":
            pe = ge
        else:
            pe = min(Fraction(1), 2 * min(le, ge))
        return TestResult(u, float(pe), "MW", "exact", alternative, p_exact=pe)

    mu = n * m / 2
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(tie_counts ** 3 - tie_counts)) / (total_n * (total_n - 1)) if total_n > 1 else 0.0
    var = n * m / 12 * ((total_n + 1) - tie_term)
    if var <= 0:
        return TestResult(u, 1.0, "MW", "asymptotic", alternative, fallback=fallback)
    sd = math.sqrt(var)
    if alternative == "two_sided":
        z = (abs(u - mu) - 0.5) / sd
        p = min(1.0, 2 * norm.sf(z))
    elif alternative == "a_less":
        p = norm.cdf((u - mu + 0.5) / sd)
    else:
        p = norm.sf((u - mu - 0.5) / sd)
    return TestResult(u, float(p), "MW", "asymptotic", alternative, fallback=fallback)


@dataclass(frozen=True)
class ZScore:
    value: float
    status: str  # "ok", "insufficient" or "degenerate"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def zscore_vs_opposite(value: float, reference: Sequence[float], min_n: int = 30) -> ZScore:
    """Standardise ``value`` against a reference sample of the opposite category.

    Uses the sample standard deviation. References smaller than ``min_n``
    are flagged ``insufficient``; a zero spread is flagged ``degenerate``.
    """
    ref = np.asarray(reference, dtype=float)
    ref = ref[~np.isnan(ref)]
    if ref.size < max(min_n, 2):
        return ZScore(math.nan, "insufficient")
    sd = float(ref.std(ddof=1))
    if sd == 0:
        return ZScore(math.nan, "degenerate")
    return ZScore((value - float(ref.mean())) / sd, "ok")


@dataclass
class SizeBins:
    """Integer size ranges. Bin ``i`` holds sizes in ``[edges[i], edges[i+1])``;
    the last bin is open-ended and labelled up to the largest observed size."""

    edges: list[int]
    assignment: object  # list or dict matching the input
    max_size: int

    def bin_of(self, size: int) -> int:
        i = bisect_right(self.edges, size) - 1
        if i < 0:
            raise ValueError(f"size {size} lies below the first edge {self.edges[0]}")
        return i

    @property
    def labels(self) -> list[str]:
        out = []
        for i, lo in enumerate(self.edges):
            hi = self.edges[i + 1] - 1 if i + 1 < len(self.edges) else self.max_size
            out.append(f"{lo}-{hi}")
        return out

    def __len__(self):
        return len(self.edges)


def size_bins(sizes, k: int = 10, edges_override: Sequence[int] | None = None) -> SizeBins:
    """Bin community sizes into ``k`` roughly equal-count integer ranges.

    ``sizes`` is a sequence or a mapping of community id to size; the
    assignment mirrors that shape. Repeated sizes never straddle a boundary,
    so heavy ties can yield fewer than ``k`` bins.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    keys = list(sizes) if isinstance(sizes, Mapping) else None
    vals = [int(sizes[c]) for c in keys] if keys is not None else [int(s) for s in sizes]
    if not vals:
        raise ValueError("no sizes to bin")
    s = sorted(vals)
    if edges_override is not None:
        edges = sorted(int(e) for e in edges_override)
        if len(set(edges)) != len(edges):
            raise ValueError("override edges must be distinct")
        if s[0] < edges[0]:
            raise ValueError(f"size {s[0]} lies below the first edge {edges[0]}")
    else:
        n = len(s)
        uppers = sorted({s[math.ceil(i * n / k) - 1] for i in range(1, k)} | {s[-1]})
        edges = [s[0]] + [u + 1 for u in uppers[:-1]]
        if len(edges) < k:
            log.warning("only %d distinct size ranges available for %d bins", len(edges), k)
    bins = SizeBins(edges, None, max(s[-1], edges[-1]))
    if keys is not None:
        bins.assignment = {c: bins.bin_of(v) for c, v in zip(keys, vals)}
    else:
        bins.assignment = [bins.bin_of(v) for v in vals]
    return bins


def histogram_pdf(values, n_bins: int = 20):
    """Bin centres and densities integrating to 1 over the binned support."""
    v = np.asarray(values, dtype=float)
    if v.size < 1:
        raise ValueError("need at least one value")
    if v.min() == v.max():
        return np.array([v[0]]), np.array([1.0])
    dens, edges = np.histogram(v, bins=n_bins, density=True)
    return (edges[:-1] + edges[1:]) / 2, dens


def ecdf(values):
    """Distinct sorted values and the empirical CDF at each."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return v, v
    x, counts = np.unique(v, return_counts=True)
    return x, np.cumsum(counts) / v.size


class DegenerateAxisError(ValueError):
    pass


@dataclass
class KDEGrid:
    x: np.ndarray
    y: np.ndarray
    density: np.ndarray  # shape (len(y), len(x))
    bandwidth: tuple[float, float]

    def cell_area(self) -> float:
        return float((self.x[1] - self.x[0]) * (self.y[1] - self.y[0]))

    def long_rows(self):
        for iy, yv in enumerate(self.y):
            for ix, xv in enumerate(self.x):
                yield xv, yv, self.density[iy, ix]


def gaussian_kde_2d(points, bandwidth=None, grid: int = 100, pad: float = 3.0) -> KDEGrid:
    """Product-Gaussian kernel density on a regular grid.

    Default bandwidth per axis is Scott's rule ``n**(-1/6) * std``. The grid
    spans the data range padded by ``pad`` bandwidths on every side.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (x, y) points")
    n = pts.shape[0]
    if bandwidth is None:
        sd = pts.std(axis=0, ddof=1)
        if np.any(sd == 0):
            raise DegenerateAxisError("zero variance along an axis")
        h = sd * n ** (-1 / 6)
    else:
        h = np.broadcast_to(np.asarray(bandwidth, dtype=float), (2,)).copy()
        if np.any(h <= 0):
            raise ValueError("bandwidth must be positive")
    lo = pts.min(axis=0) - pad * h
    hi = pts.max(axis=0) + pad * h
    gx = np.linspace(lo[0], hi[0], grid)
    gy = np.linspace(lo[1], hi[1], grid)
    kx = norm.pdf((gx[None, :] - pts[:, 0:1]) / h[0]) / h[0]  # (n, grid)
    ky = norm.pdf((gy[None, :] - pts[:, 1:2]) / h[1]) / h[1]
    dens = ky.T @ kx / n
    return KDEGrid(gx, gy, dens, (float(h[0]), float(h[1])))
