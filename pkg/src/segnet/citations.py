"""Per-researcher citation variables and their group comparisons."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import rankdata, t as student_t

from .community import CommunityPartition
from .corpus import CitationIndex, PublicationSet
from .cores import CoreAssignment
from .csvio import read_csv, write_csv
from .segregation import Category, SegregationReport
from .stats import ecdf, ks_two_sample, mann_whitney_u, significance_code

log = logging.getLogger(__name__)

DEFAULT_BUCKETS = ((1, 5), (6, 10), (11, None))
BUCKET_LABELS = {(1, 5): "P1_5", (6, 10): "P6_10", (11, None): "P10plus"}

# variable name -> CitationProfile attribute
VARIABLES = {
    "TC": "total_citations",
    "CP": "citations_per_paper",
    "CC": "prop_same_community",
    "CN": "prop_coauthors",
}


class UndefinedBucketError(ValueError):
    pass


class UndefinedCorrelationError(ValueError):
    pass


def productivity_bucket(n_pubs: int, buckets=DEFAULT_BUCKETS) -> str:
    """Label of the productivity range containing ``n_pubs``.

    ``buckets`` holds inclusive ``(lo, hi)`` ranges, ``hi=None`` meaning
    unbounded; custom ranges are labelled ``"lo-hi"``.
    """
    if n_pubs < 1:
        raise UndefinedBucketError("productivity bucket needs at least one publication")
    for lo, hi in buckets:
        if n_pubs >= lo and (hi is None or n_pubs <= hi):
            return BUCKET_LABELS.get((lo, hi), f"{lo}-{'' if hi is None else hi}")
    raise UndefinedBucketError(f"{n_pubs} publications fall outside every bucket")


def parse_buckets(text: str):
    """Parse ``"1-5,6-10,11-"`` into bucket tuples."""
    out = []
    for part in text.split(","):
        lo, _, hi = part.strip().partition("-")
        out.append((int(lo), int(hi) if hi else None))
    return tuple(out)


@dataclass
class CitationProfile:
    researcher_id: str
    community_id: int
    n_pubs_focal_year: int
    total_citations: int
    citations_per_paper: float
    prop_same_community: float
    prop_coauthors: float
    prop_coauthors_excl_self: float
    category: str
    coreness: int | None
    productivity_bucket: str

    @property
    def proportions_defined(self) -> bool:
        return self.total_citations > 0


PROFILE_FIELDS = [f.name for f in fields(CitationProfile)]


def citation_profiles(pubs: PublicationSet, idx: CitationIndex, p: CommunityPartition,
                      sr: SegregationReport | None, ca: CoreAssignment | None,
                      focal_year: int, window_end: int, field: str | None = None,
                      per_paper: bool = False, buckets=DEFAULT_BUCKETS) -> list[CitationProfile]:
    """Citation variables for every researcher with focal-year papers.

    A citation event is a citing publication dated within
    ``[focal_year, window_end]``, counted once per cited researcher however
    many of their focal papers it cites (``per_paper=True`` counts each
    cited paper separately). An event is *same community* if some citing
    author is in the researcher's community, and *coauthor* if some citing
    author wrote a focal-year paper with the researcher; the researcher is
    their own coauthor here, and ``prop_coauthors_excl_self`` drops that
    match. Proportions are NaN without citations.
    """
    if focal_year > window_end:
        raise ValueError("focal_year must not exceed window_end")
    focal = [r for r in pubs if r.year == focal_year and (field is None or r.field == field)]
    papers_of: dict[str, list[str]] = defaultdict(list)
    coauthors: dict[str, set[str]] = defaultdict(set)
    for rec in focal:
        for a in rec.authors:
            papers_of[a].append(rec.paper_id)
            coauthors[a].update(rec.authors)

    out = []
    skipped = 0
    for researcher in sorted(papers_of):
        cid = p.assignment.get(researcher)
        if cid is None:
            skipped += 1
            continue
        community = p.communities[cid]
        comm_set = set(community)
        co = coauthors[researcher]
        co_other = co - {researcher}

        events: dict = {}
        for pid in papers_of[researcher]:
            for e in idx[pid]:
                if focal_year <= e.year <= window_end:
                    key = (e.paper_id, pid) if per_paper else e.paper_id
                    events[key] = e.authors
        total = len(events)
        same = sum(1 for authors in events.values() if comm_set.intersection(authors))
        coa = sum(1 for authors in events.values() if co.intersection(authors))
        coa_other = sum(1 for authors in events.values() if co_other.intersection(authors))
        n_pubs = len(papers_of[researcher])
        cat = sr.category_of(cid) if sr is not None else None
        out.append(CitationProfile(
            researcher_id=researcher,
            community_id=cid,
            n_pubs_focal_year=n_pubs,
            total_citations=total,
            citations_per_paper=total / n_pubs,
            prop_same_community=same / total if total else math.nan,
            prop_coauthors=coa / total if total else math.nan,
            prop_coauthors_excl_self=coa_other / total if total else math.nan,
            category="" if cat is None else cat.value,
            coreness=ca.get(cid) if ca is not None else None,
            productivity_bucket=productivity_bucket(n_pubs, buckets),
        ))
    if skipped:
        log.warning("%d researchers absent from the partition were skipped", skipped)
    return out


def write_profiles(profiles: Sequence[CitationProfile], path) -> None:
    write_csv(path, PROFILE_FIELDS, ([getattr(pr, f) for f in PROFILE_FIELDS] for pr in profiles))


def read_profiles(path) -> list[CitationProfile]:
    out = []
    for r in read_csv(path):
        out.append(CitationProfile(
            researcher_id=r["researcher_id"],
            community_id=int(r["community_id"]),
            n_pubs_focal_year=int(r["n_pubs_focal_year"]),
            total_citations=int(r["total_citations"]),
            citations_per_paper=float(r["citations_per_paper"]),
            prop_same_community=float(r["prop_same_community"] or "nan"),
            prop_coauthors=float(r["prop_coauthors"] or "nan"),
            prop_coauthors_excl_self=float(r["prop_coauthors_excl_self"] or "nan"),
            category=r["category"],
            coreness=int(r["coreness"]) if r["coreness"] else None,
            productivity_bucket=r["productivity_bucket"],
        ))
    return out


def variable_values(profiles: Iterable[CitationProfile], variable: str) -> np.ndarray:
    """Values of one variable; undefined proportions are dropped."""
    attr = VARIABLES.get(variable, variable)
    vals = np.array([float(getattr(pr, attr)) for pr in profiles], dtype=float)
    return vals[~np.isnan(vals)]


@dataclass
class CDFSeries:
    group: tuple
    values: np.ndarray
    cdf: np.ndarray
    n: int
    low_n: bool


def cohort_cdf(profiles: Sequence[CitationProfile], variable: str,
               group_by: Sequence[str] = ("category",), min_size: int = 10,
               groups: Iterable[tuple] | None = None) -> list[CDFSeries]:
    """Empirical CDF of a variable per group of profiles.

    ``group_by`` names profile attributes (``category``, ``coreness``,
    ``productivity_bucket``). Explicitly requested ``groups`` are emitted
    even when empty; groups with fewer than ``min_size`` values are flagged.
    """
    buckets: dict[tuple, list[CitationProfile]] = defaultdict(list)
    for pr in profiles:
        buckets[tuple(getattr(pr, k) for k in group_by)].append(pr)
    keys = list(groups) if groups is not None else sorted(buckets, key=lambda k: tuple(map(str, k)))
    out = []
    for key in keys:
        vals = variable_values(buckets.get(tuple(key), []), variable)
        x, y = ecdf(vals)
        out.append(CDFSeries(tuple(key), x, y, int(vals.size), vals.size < min_size))
    return out


def write_cdf(series_by_var: dict[str, list[CDFSeries]], group_by: Sequence[str], path) -> None:
    rows = []
    for var, series in series_by_var.items():
        for s in series:
            for x, y in zip(s.values, s.cdf):
                rows.append((var, *s.group, s.n, s.low_n, x, y))
    write_csv(path, ["variable", *group_by, "n", "low_n", "value", "cdf"], rows)


def spearman(x, y):
    """Spearman rank correlation (average ranks for ties) with the usual
    t-distribution p-value on ``n - 2`` degrees of freedom."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size:
        raise ValueError("x and y differ in length")
    if x.size < 3:
        raise UndefinedCorrelationError("need at least 3 observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedCorrelationError("a variable is constant")
    rx = rankdata(x) - (x.size + 1) / 2
    ry = rankdata(y) - (y.size + 1) / 2
    rho = float(np.dot(rx, ry) / math.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))
    rho = max(-1.0, min(1.0, rho))
    df = x.size - 2
    if abs(rho) == 1.0:
        return rho, 0.0
    tstat = rho * math.sqrt(df / (1 - rho * rho))
    return rho, float(2 * student_t.sf(abs(tstat), df))


def citation_productivity_correlation(profiles: Sequence[CitationProfile]):
    return spearman([pr.n_pubs_focal_year for pr in profiles],
                    [pr.total_citations for pr in profiles])


@dataclass
class ComparisonRow:
    core: int
    productivity_range: str
    variable: str
    n_high: int
    n_non: int
    ks_p: float
    mw_p: float
    ks_code: str
    mw_code: str


def compare_categories(profiles: Sequence[CitationProfile], cores: Sequence[int] | None = None,
                       buckets=DEFAULT_BUCKETS, mode: str = "auto",
                       alternative: str = "two_sided") -> list[ComparisonRow]:
    """KS and MW tests of highly against non-segregated researchers for every
    (core, productivity range, variable) cell. Cells where either group is
    empty get NaN p-values."""
    labels = [productivity_bucket(lo, buckets) for lo, _ in buckets]
    if cores is None:
        cores = sorted({pr.coreness for pr in profiles if pr.coreness is not None
                        and pr.category in (Category.HIGH.value, Category.NON.value)})
    cell: dict[tuple, dict[str, list]] = defaultdict(lambda: {"high": [], "non": []})
    for pr in profiles:
        if pr.category == Category.HIGH.value:
            cell[(pr.coreness, pr.productivity_bucket)]["high"].append(pr)
        elif pr.category == Category.NON.value:
            cell[(pr.coreness, pr.productivity_bucket)]["non"].append(pr)
    rows = []
    for core in cores:
        for label in labels:
            groups = cell.get((core, label), {"high": [], "non": []})
            for var in VARIABLES:
                hi = variable_values(groups["high"], var)
                lo = variable_values(groups["non"], var)
                if hi.size and lo.size:
                    ks = ks_two_sample(hi, lo, mode).p_value
                    mw = mann_whitney_u(hi, lo, mode, alternative).p_value
                else:
                    ks = mw = math.nan
                rows.append(ComparisonRow(core, label, var, int(hi.size), int(lo.size),
                                          ks, mw, significance_code(ks), significance_code(mw)))
    return rows


def write_comparison(rows: Sequence[ComparisonRow], path) -> None:
    write_csv(path, ["core", "productivity_range", "variable", "n_high", "n_non",
                     "KS_p", "MW_p", "KS_code", "MW_code"],
              ((r.core, r.productivity_range, r.variable, r.n_high, r.n_non,
                r.ks_p, r.mw_p, r.ks_code, r.mw_code) for r in rows))
