"""Planted-team publication corpora with labelled citation sources.

Each team is made connected by a chain of covering papers, so with
``mixing=0`` every team is exactly one connected component. Every other
paper becomes a cross-team paper with probability ``mixing``, taking half its
authors from a second, uniformly chosen team.

Citations to focal papers are synthesized as later-year records, one cited
paper each, with a source label relative to the planted teams:

``coauthor``
    written by all authors of the cited paper;
``same_team``
    one author per team of the cited paper, none of whom coauthored a
    focal-year paper with any author of the cited paper;
``external``
    fresh authors outside every team.

Against the planted partition a researcher's same-community share is thus
the share of ``same_team`` and ``coauthor`` events, and their coauthor
share that of ``coauthor`` events.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .community import CommunityPartition
from .corpus import PublicationRecord, PublicationSet, write_corpus
from .csvio import write_csv

LABELS = ("same_team", "coauthor", "external")


class SynthConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    n_teams: int = 40
    team_size_range: tuple[int, int] = (4, 10)
    papers_per_team_range: tuple[int, int] = (4, 10)
    authors_per_paper_range: tuple[int, int] = (2, 4)
    mixing: float = 0.1
    citation_rate: float = 2.0
    internal_citation_bias: float = 0.3
    coauthor_citation_share: float = 0.5
    seed: int = 0
    focal_year: int = 2011
    window_end: int = 2020
    field: str = "CS"

    def validate(self) -> None:
        for name in ("team_size_range", "papers_per_team_range", "authors_per_paper_range"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 1:
                raise SynthConfigError(f"{name} must be a non-empty positive range, got {(lo, hi)}")
        if self.n_teams < 1:
            raise SynthConfigError("n_teams must be positive")
        if self.team_size_range[0] < 2:
            raise SynthConfigError("teams need at least 2 members")
        if self.authors_per_paper_range[1] > self.team_size_range[0]:
            raise SynthConfigError(
                "authors_per_paper_range exceeds the smallest team size; papers cannot be staffed"
            )
        for name in ("mixing", "internal_citation_bias", "coauthor_citation_share"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise SynthConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.citation_rate < 0:
            raise SynthConfigError("citation_rate must be non-negative")
        if self.window_end <= self.focal_year:
            raise SynthConfigError("window_end must be after focal_year")


@dataclass
class SynthCorpus:
    config: SynthConfig
    pubs: PublicationSet
    team_of: dict[str, int]
    citation_label: dict[str, str]
    cited_by: dict[str, str] = field(default_factory=dict)  # citing id -> cited id
    cross_team_papers: set[str] = field(default_factory=set)
    skipped_citations: int = 0

    def planted_partition(self, nodes=None) -> CommunityPartition:
        order = list(nodes) if nodes is not None else list(self.team_of)
        return CommunityPartition.from_labels(order, (self.team_of[v] for v in order),
                                              algorithm="planted")

    def focal(self) -> PublicationSet:
        return PublicationSet(r for r in self.pubs if r.year == self.config.focal_year)

    def expected_proportions(self, window_end: int | None = None) -> dict[str, tuple[int, int, int]]:
        """Per researcher ``(events, same_community, coauthor)`` from labels alone."""
        end = self.config.window_end if window_end is None else window_end
        out: dict[str, list[int]] = {}
        focal = self.focal()
        for rec in focal:
            for a in rec.authors:
                out.setdefault(a, [0, 0, 0])
        for citing, cited in self.cited_by.items():
            if self.pubs[citing].year > end:
                continue
            label = self.citation_label[citing]
            for a in focal[cited].authors:
                row = out[a]
                row[0] += 1
                row[1] += label in ("same_team", "coauthor")
                row[2] += label == "coauthor"
        return {a: tuple(v) for a, v in out.items()}

    def write(self, corpus_path, teams_path=None, labels_path=None) -> None:
        write_corpus(self.pubs, corpus_path)
        if teams_path is not None:
            write_csv(teams_path, ["researcher_id", "team_id"], sorted(self.team_of.items()))
        if labels_path is not None:
            write_csv(labels_path, ["paper_id", "source_label", "cited_paper_id"],
                      ((c, self.citation_label[c], self.cited_by[c]) for c in sorted(self.cited_by)))


def generate(config: SynthConfig) -> SynthCorpus:
    """Build a planted corpus; identical configs give identical corpora."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    year, fld = config.focal_year, config.field
    amin, amax = config.authors_per_paper_range

    teams: list[list[str]] = []
    team_of: dict[str, int] = {}
    for t in range(config.n_teams):
        size = int(rng.integers(config.team_size_range[0], config.team_size_range[1] + 1))
        members = [f"r{t:03d}_{k:02d}" for k in range(size)]
        teams.append(members)
        for m in members:
            team_of[m] = t

    def pick(pool, k):
        return [pool[i] for i in rng.choice(len(pool), size=k, replace=False)]

    author_lists: list[list[str]] = []
    cross: list[bool] = []
    for t, members in enumerate(teams):
        n_papers = int(rng.integers(config.papers_per_team_range[0], config.papers_per_team_range[1] + 1))
        order = [members[i] for i in rng.permutation(len(members))]
        covered = [order[0]]
        rest = order[1:]
        made = 0
        while rest:
            n = int(rng.integers(max(2, amin), amax + 1))
            anchor = covered[int(rng.integers(len(covered)))]
            new, rest = rest[: n - 1], rest[n - 1:]
            fill = [m for m in covered if m != anchor]
            extra = pick(fill, min(len(fill), n - 1 - len(new))) if len(new) < n - 1 else []
            author_lists.append([anchor] + new + extra)
            cross.append(False)
            covered.extend(new)
            made += 1
        for _ in range(max(0, n_papers - made)):
            if config.n_teams > 1 and rng.random() < config.mixing:
                n = int(rng.integers(max(2, amin), amax + 1))
                other = int(rng.integers(config.n_teams - 1))
                other += other >= t
                authors = pick(members, n - n // 2) + pick(teams[other], n // 2)
                cross.append(True)
            else:
                n = int(rng.integers(amin, amax + 1))
                authors = pick(members, n)
                cross.append(False)
            author_lists.append(authors)

    records = []
    cross_ids = set()
    for k, (authors, is_cross) in enumerate(zip(author_lists, cross)):
        pid = f"p{k:05d}"
        records.append(PublicationRecord(pid, year, fld, tuple(authors)))
        if is_cross:
            cross_ids.add(pid)

    coauthors: dict[str, set[str]] = {}
    for rec in records:
        for a in rec.authors:
            coauthors.setdefault(a, set()).update(rec.authors)

    labels: dict[str, str] = {}
    cited_by: dict[str, str] = {}
    citing = []
    skipped = 0
    n_ext = 0
    for rec in records:
        for _ in range(int(rng.poisson(config.citation_rate))):
            if rng.random() < config.internal_citation_bias:
                label = "same_team"
            elif rng.random() < config.coauthor_citation_share:
                label = "coauthor"
            else:
                label = "external"
            cyear = int(rng.integers(config.focal_year + 1, config.window_end + 1))
            if label == "coauthor":
                authors = list(rec.authors)
            elif label == "same_team":
                excluded = set().union(*(coauthors[a] for a in rec.authors))
                involved = list(dict.fromkeys(team_of[a] for a in rec.authors))
                authors = []
                for t in involved:
                    eligible = [m for m in teams[t] if m not in excluded]
                    if not eligible:
                        authors = None
                        break
                    authors.append(eligible[int(rng.integers(len(eligible)))])
                if authors is None:
                    skipped += 1
                    continue
            else:
                k = int(rng.integers(1, 3))
                authors = [f"x{n_ext + i:05d}" for i in range(k)]
                n_ext += k
            cid = f"c{len(citing):05d}"
            citing.append(PublicationRecord(cid, cyear, fld, tuple(authors), (rec.paper_id,)))
            labels[cid] = label
            cited_by[cid] = rec.paper_id

    return SynthCorpus(config, PublicationSet(records + citing), team_of, labels, cited_by,
                       cross_ids, skipped)


# 500 focal-year papers plus 400 citing records
BUNDLED_CONFIG = SynthConfig(
    n_teams=72,
    team_size_range=(3, 9),
    papers_per_team_range=(4, 10),
    authors_per_paper_range=(2, 3),
    mixing=0.25,
    citation_rate=1.0,
    internal_citation_bias=0.3,
    seed=2045,
)


def bundled_corpus_path() -> Path:
    return Path(__file__).with_name("data") / "synth_corpus.jsonl"


def config_dict(config: SynthConfig) -> dict:
    return asdict(config)
