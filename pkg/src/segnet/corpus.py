"""Publication records, corpus parsing and citation indexing.

Corpora are UTF-8 JSON lines, one publication per line::

    {"paper_id": "p1", "year": 2011, "field": "CS",
     "authors": ["a", "b"], "cited_paper_ids": ["p0"]}
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping


class CorpusError(ValueError):
    """Raised for malformed corpus input."""


class DuplicatePaperError(CorpusError):
    pass


@dataclass(frozen=True)
class PublicationRecord:
    paper_id: str
    year: int
    field: str
    authors: tuple[str, ...]
    cited_paper_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.authors:
            raise CorpusError(f"paper {self.paper_id!r} has no authors")
        if len(set(self.authors)) != len(self.authors):
            raise CorpusError(f"paper {self.paper_id!r} has duplicate authors")
        if not isinstance(self.year, int) or isinstance(self.year, bool) or self.year <= 0:
            raise CorpusError(f"paper {self.paper_id!r} has invalid year {self.year!r}")

    @classmethod
    def from_dict(cls, data: Mapping) -> "PublicationRecord":
        """Build a record, collapsing repeated authors (first occurrence wins)."""
        authors = tuple(dict.fromkeys(str(a) for a in data["authors"]))
        cited = tuple(str(c) for c in (data.get("cited_paper_ids") or ()))
        year = data["year"]
        if isinstance(year, float) and year.is_integer():
            year = int(year)
        return cls(str(data["paper_id"]), year, str(data["field"]), authors, cited)

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "year": self.year,
            "field": self.field,
            "authors": list(self.authors),
            "cited_paper_ids": list(self.cited_paper_ids),
        }


class PublicationSet:
    """Immutable collection of publication records keyed by ``paper_id``."""

    def __init__(self, records: Iterable[PublicationRecord] = ()):
        index: dict[str, PublicationRecord] = {}
        for rec in records:
            if rec.paper_id in index:
                raise DuplicatePaperError(f"duplicate paper_id {rec.paper_id!r}")
            index[rec.paper_id] = rec
        self._index = index
        self._records = tuple(index.values())

    @property
    def records(self) -> tuple[PublicationRecord, ...]:
        return self._records

    @property
    def id_index(self) -> Mapping[str, PublicationRecord]:
        return self._index

    def __len__(self):
        return len(self._records)

    def __iter__(self) -> Iterator[PublicationRecord]:
        return iter(self._records)

    def __contains__(self, paper_id):
        return paper_id in self._index

    def __getitem__(self, paper_id: str) -> PublicationRecord:
        return self._index[paper_id]

    def __eq__(self, other):
        if not isinstance(other, PublicationSet):
            return NotImplemented
        return self._records == other._records

    def __repr__(self):
        return f"PublicationSet(n_records={len(self)})"

    def authors(self) -> list[str]:
        """All distinct author ids in first-seen order."""
        seen = dict()
        for rec in self._records:
            for a in rec.authors:
                seen.setdefault(a, None)
        return list(seen)


def parse_corpus(lines: Iterable[str]) -> PublicationSet:
    """Parse a line-delimited JSON record stream.

    Blank lines are skipped. Any malformed line raises :class:`CorpusError`
    naming its 1-based line number.
    """
    records = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            if not isinstance(data, dict):
                raise TypeError("record is not an object")
            rec = PublicationRecord.from_dict(data)
        except (ValueError, KeyError, TypeError) as exc:
            raise CorpusError(f"line {lineno}: {exc}") from exc
        if rec.paper_id in seen:
            raise DuplicatePaperError(
                f"line {lineno}: duplicate paper_id {rec.paper_id!r} "
                f"(first seen on line {seen[rec.paper_id]})"
            )
        seen[rec.paper_id] = lineno
        records.append(rec)
    return PublicationSet(records)


def read_corpus(path) -> PublicationSet:
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh)


def dump_corpus(pubs: Iterable[PublicationRecord]) -> str:
    return "".join(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n" for rec in pubs)


def write_corpus(pubs: Iterable[PublicationRecord], path) -> None:
    Path(path).write_text(dump_corpus(pubs), encoding="utf-8")


def filter_field_year(pubs: PublicationSet, field: str | None, year: int | None) -> PublicationSet:
    """Records matching ``field`` and ``year``; ``None`` disables that filter."""
    return PublicationSet(
        rec for rec in pubs
        if (field is None or rec.field == field) and (year is None or rec.year == year)
    )


@dataclass(frozen=True)
class CitingEntry:
    paper_id: str
    year: int
    authors: tuple[str, ...]


@dataclass
class CitationIndex:
    """Map from a cited paper id to the records in the corpus citing it."""

    cited_to_citing: dict[str, list[CitingEntry]] = field(default_factory=dict)

    def __getitem__(self, paper_id: str) -> list[CitingEntry]:
        return self.cited_to_citing.get(paper_id, [])

    def __contains__(self, paper_id):
        return paper_id in self.cited_to_citing

    def __len__(self):
        return len(self.cited_to_citing)

    def pairs(self) -> Iterator[tuple[str, str]]:
        for cited, entries in self.cited_to_citing.items():
            for e in entries:
                yield cited, e.paper_id


def build_citation_index(pubs: PublicationSet) -> CitationIndex:
    """Invert outgoing references. Self-citations by id and repeated references
    within one record are dropped."""
    index: dict[str, list[CitingEntry]] = defaultdict(list)
    for rec in pubs:
        entry = CitingEntry(rec.paper_id, rec.year, rec.authors)
        for cited in dict.fromkeys(rec.cited_paper_ids):
            if cited == rec.paper_id:
                continue
            index[cited].append(entry)
    return CitationIndex(dict(index))
