"""Spectral segregation index of communities and segregation categories.

For a community with members ``M`` the index is computed on the block ``B``
of the row-normalised adjacency (rows divided by the full-graph strength)
restricted to ``M``. With ``(lam, v)`` the Perron eigenpair of ``B`` the
index is ``lam * sum(v) / ||v||``; under the L1 norm this is ``lam``.
A community that is a whole connected component has a stochastic block and
scores exactly 1.
"""

from __future__ import annotations

import enum
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .community import CommunityPartition, whole_component_flags
from .csvio import read_csv, write_csv
from .graph import CoauthorGraph

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000


class Category(str, enum.Enum):
    NON = "NonSegregated"
    MODERATE = "ModeratelySegregated"
    HIGH = "HighlySegregated"
    COMPLETE = "CompletelySegregated"

    def __str__(self):
        return self.value


class IsolatedMemberError(ValueError):
    pass


class NonConvergenceError(RuntimeError):
    def __init__(self, message, estimate=None, vector=None):
        super().__init__(message)
        self.estimate = estimate
        self.vector = vector


class InsufficientDataError(ValueError):
    pass


def thread_count() -> int:
    """Worker cap from ``SEGNET_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("SEGNET_THREADS", "1")))
    except ValueError:
        return 1


class TransitionView:
    """Row-normalised view of a graph without materialising the full matrix."""

    def __init__(self, g: CoauthorGraph):
        self.graph = g
        self.row_sum = g.strengths

    def submatrix(self, members: Sequence[str]) -> "CommunitySubmatrix":
        return community_submatrix(self, members)


@dataclass
class CommunitySubmatrix:
    members: list[str]
    entries: np.ndarray

    @property
    def row_sums(self) -> np.ndarray:
        return self.entries.sum(axis=1)


def community_submatrix(t: TransitionView, members: Sequence[str]) -> CommunitySubmatrix:
    """Block of the transition matrix on ``members`` (rows keep full-graph sums)."""
    g = t.graph
    members = list(dict.fromkeys(members))
    idx = g.indices(members)
    pos = {i: k for k, i in enumerate(idx)}
    B = np.zeros((len(idx), len(idx)))
    for k, i in enumerate(idx):
        s = t.row_sum[i]
        if s == 0:
            raise IsolatedMemberError(f"member {members[k]!r} has no edges")
        for j, w in g.adj[i].items():
            c = pos.get(j)
            if c is not None:
                B[k, c] = w / s
    return CommunitySubmatrix(members, B)


def dominant_eigenpair(B, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
    """Perron eigenpair of a non-negative square matrix by power iteration.

    Iterates ``x <- (B + I) x / ||(B + I) x||_1`` from the uniform vector.
    The unit shift leaves the Perron vector unchanged but makes its
    eigenvalue strictly dominant in modulus, so bipartite (periodic) blocks
    still converge. The eigenvalue estimate is ``sum(B x) / sum(x)``;
    iteration stops when two successive estimates differ by less than
    ``tol``.

    Returns
    -------
    lam : float
    v : ndarray
        Non-negative, unit L1 norm.

    Raises
    ------
    NonConvergenceError
        After ``max_iter`` iterations; carries the last estimate.
    """
    B = np.asarray(B.entries if isinstance(B, CommunitySubmatrix) else B, dtype=float)
    n = B.shape[0]
    if B.ndim != 2 or B.shape[1] != n:
        raise ValueError("matrix must be square")
    if n == 0:
        raise ValueError("empty matrix")
    if np.any(B < 0):
        raise ValueError("matrix must be non-negative")
    x = np.full(n, 1.0 / n)
    y = B @ x
    lam = y.sum()
    for _ in range(max_iter):
        z = y + x
        norm = z.sum()
        if norm == 0:
            return 0.0, x
        x = z / norm
        y = B @ x
        new = y.sum()
        if abs(new - lam) < tol:
            return float(max(new, 0.0)), x
        lam = new
    raise NonConvergenceError(f"power iteration did not converge in {max_iter} steps", lam, x)


def ssi(B, norm: str = "l1", tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> float:
    """Spectral segregation index of one community block.

    ``norm`` picks the vector norm in the denominator: ``"l1"`` (default,
    equal to the Perron root) or ``"l2"``.
    """
    lam, v = dominant_eigenpair(B, tol, max_iter)
    norm = norm.lower()
    if norm == "l1":
        denom = np.abs(v).sum()
    elif norm == "l2":
        denom = np.linalg.norm(v)
    else:
        raise ValueError(f"unknown norm {norm!r}")
    return float(np.sum(lam * v) / denom)


@dataclass
class CommunitySegregation:
    community_id: int
    size: int
    raw_ssi: float
    normalized_ssi: float = math.nan
    category: Category | None = None
    is_disconnected: bool = False
    converged: bool = True


@dataclass
class SegregationReport:
    """Per-community indices plus the distribution summary used to categorise."""

    rows: dict[int, CommunitySegregation]
    exceptions: dict[int, str] = field(default_factory=dict)
    mean: float = math.nan
    std: float = math.nan
    boundary_k: float | None = None
    norm: str = "l1"

    def studied(self) -> list[CommunitySegregation]:
        """Communities entering the distribution (converged, not whole components)."""
        return [r for r in self.rows.values() if not r.is_disconnected and r.converged]

    def category_of(self, cid: int) -> Category | None:
        r = self.rows.get(cid)
        return None if r is None else r.category

    def counts(self) -> dict[Category, int]:
        out = {c: 0 for c in Category}
        for r in self.rows.values():
            if r.category is not None:
                out[r.category] += 1
        return out


def ssi_all(g: CoauthorGraph, p: CommunityPartition, norm: str = "l1",
            tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
            threads: int | None = None) -> SegregationReport:
    """Raw index for every community of a partition.

    Communities that are whole connected components get 1 without an eigen
    solve. Communities with isolated members or a non-convergent iteration
    are listed in ``exceptions`` and marked ``converged=False``.
    """
    p.check_total(g)
    t = TransitionView(g)
    flags = whole_component_flags(g, p)
    rows: dict[int, CommunitySegregation] = {}
    exceptions: dict[int, str] = {}

    todo = []
    for cid in sorted(p.communities):
        members = p.communities[cid]
        if flags[cid]:
            rows[cid] = CommunitySegregation(cid, len(members), 1.0, is_disconnected=True)
        else:
            todo.append(cid)

    def work(cid):
        members = p.communities[cid]
        try:
            return cid, ssi(community_submatrix(t, members), norm, tol, max_iter), None
        except (IsolatedMemberError, NonConvergenceError) as exc:
            return cid, getattr(exc, "estimate", None), str(exc)

    n_threads = threads if threads is not None else thread_count()
    if n_threads > 1 and len(todo) > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            results = list(pool.map(work, todo))
    else:
        results = [work(cid) for cid in todo]

    for cid, value, err in results:
        size = len(p.communities[cid])
        if err is None:
            rows[cid] = CommunitySegregation(cid, size, value)
        else:
            exceptions[cid] = err
            log.warning("community %d excluded: %s", cid, err)
            raw = math.nan if value is None else float(value)
            rows[cid] = CommunitySegregation(cid, size, raw, converged=False)
    rows = dict(sorted(rows.items()))
    return SegregationReport(rows, exceptions, norm=norm)


def categorize(value: float, mean: float, std: float, boundary_k: float = 1.0) -> Category:
    """High if ``value >= mean + k*std``, non if ``value <= mean - k*std``.

    A zero spread means no value clears either boundary.
    """
    if std == 0:
        return Category.MODERATE
    if value >= mean + boundary_k * std:
        return Category.HIGH
    if value <= mean - boundary_k * std:
        return Category.NON
    return Category.MODERATE


def normalize_and_categorize(report: SegregationReport, boundary_k: float = 1.0) -> SegregationReport:
    """Min-max normalise studied communities and assign categories.

    Whole-component communities are pinned at normalised 1 and labelled
    completely segregated; excluded (non-converged) ones get no category.
    Mean and population standard deviation are taken over the normalised
    values of studied communities.
    """
    studied = report.studied()
    if len(studied) < 2:
        raise InsufficientDataError(
            f"need at least 2 studied communities to categorise, got {len(studied)}"
        )
    raw = np.array([r.raw_ssi for r in studied])
    lo, hi = raw.min(), raw.max()
    if hi > lo:
        norm = (raw - lo) / (hi - lo)
    else:
        log.warning("all studied communities share SSI %.12g; normalised values set to 0", lo)
        norm = np.zeros_like(raw)
    mu = float(norm.mean())
    sigma = float(norm.std())

    rows = {cid: replace(r) for cid, r in report.rows.items()}
    for r, v in zip(studied, norm):
        rows[r.community_id].normalized_ssi = float(v)
        rows[r.community_id].category = categorize(float(v), mu, sigma, boundary_k)
    for r in rows.values():
        if r.is_disconnected:
            r.normalized_ssi = 1.0
            r.category = Category.COMPLETE
    return replace(report, rows=rows, mean=mu, std=sigma, boundary_k=boundary_k)


REPORT_HEADER = ["community_id", "size", "raw_ssi", "normalized_ssi", "category",
                 "is_disconnected", "converged"]


def write_report(report: SegregationReport, path) -> None:
    write_csv(path, REPORT_HEADER, (
        (r.community_id, r.size, r.raw_ssi, r.normalized_ssi,
         "" if r.category is None else r.category.value, r.is_disconnected, r.converged)
        for r in report.rows.values()
    ))


def write_report_stats(report: SegregationReport, path) -> None:
    counts = report.counts()
    rows = [("mean", report.mean), ("std", report.std), ("boundary_k", report.boundary_k),
            ("n_exceptions", len(report.exceptions))]
    rows += [(f"n_{c.value}", n) for c, n in counts.items()]
    write_csv(path, ["statistic", "value"], rows)


def read_report(path) -> SegregationReport:
    rows = {}
    for r in read_csv(path):
        cid = int(r["community_id"])
        rows[cid] = CommunitySegregation(
            community_id=cid,
            size=int(r["size"]),
            raw_ssi=float(r["raw_ssi"]) if r["raw_ssi"] else math.nan,
            normalized_ssi=float(r["normalized_ssi"]) if r["normalized_ssi"] else math.nan,
            category=Category(r["category"]) if r["category"] else None,
            is_disconnected=r["is_disconnected"] == "true",
            converged=r["converged"] == "true",
        )
    report = SegregationReport(dict(sorted(rows.items())))
    norm = [r.normalized_ssi for r in report.studied() if not math.isnan(r.normalized_ssi)]
    if norm:
        report.mean = float(np.mean(norm))
        report.std = float(np.std(norm))
    return report
