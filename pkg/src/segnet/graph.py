"""Weighted undirected coauthorship graphs and their summary metrics."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy import sparse

from .corpus import PublicationSet

SCHEMES = ("binary", "count", "strength")
DIVISORS = ("n-1", "n")


class GraphConfigError(ValueError):
    pass


class MissingNodeError(KeyError):
    pass


class UndefinedMetricError(ValueError):
    pass


class CoauthorGraph:
    """Undirected weighted graph over researcher ids.

    Nodes are interned to dense integer indices; ``adj[i]`` maps neighbour
    index to edge weight. Instances are treated as immutable once built.

    Parameters
    ----------
    nodes : sequence of str
        Researcher ids, in index order.
    adj : list of dict
        Symmetric adjacency; ``adj[i][j] == adj[j][i] > 0`` and no self loops.
    scheme : str
        Weighting scheme the weights were built with.
    strengths : array, optional
        Precomputed node strengths. Defaults to a compensated sum of weights.
    """

    def __init__(self, nodes: Sequence[str], adj: list[dict[int, float]],
                 scheme: str = "strength", strengths=None):
        if len(nodes) != len(adj):
            raise ValueError("nodes and adjacency differ in length")
        self.nodes = list(nodes)
        self.index = {v: i for i, v in enumerate(self.nodes)}
        if len(self.index) != len(self.nodes):
            raise ValueError("duplicate node ids")
        self.adj = adj
        self.scheme = scheme
        if strengths is None:
            strengths = [math.fsum(nb.values()) for nb in adj]
        self._strength = np.asarray(strengths, dtype=float)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str, float]], nodes: Iterable[str] = (),
                   scheme: str = "strength") -> "CoauthorGraph":
        """Build from ``(u, v, w)`` triples; repeated pairs accumulate."""
        order: dict[str, int] = {}
        for v in nodes:
            order.setdefault(v, len(order))
        pending = []
        for u, v, w in edges:
            if u == v:
                raise ValueError(f"self loop on {u!r}")
            if not w > 0:
                raise ValueError(f"non-positive weight on ({u!r}, {v!r})")
            order.setdefault(u, len(order))
            order.setdefault(v, len(order))
            pending.append((order[u], order[v], float(w)))
        adj: list[dict[int, float]] = [dict() for _ in order]
        for i, j, w in pending:
            adj[i][j] = adj[i].get(j, 0.0) + w
            adj[j][i] = adj[j].get(i, 0.0) + w
        return cls(list(order), adj, scheme)

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return f"CoauthorGraph(n_nodes={len(self)}, n_edges={self.n_edges}, scheme={self.scheme!r})"

    @property
    def n_edges(self) -> int:
        return sum(len(nb) for nb in self.adj) // 2

    def has_node(self, v) -> bool:
        return v in self.index

    def _idx(self, v) -> int:
        try:
            return self.index[v]
        except KeyError:
            raise MissingNodeError(v) from None

    def weight(self, u: str, v: str) -> float:
        """Edge weight between two ids, 0.0 when not adjacent."""
        return self.adj[self._idx(u)].get(self._idx(v), 0.0)

    def neighbors(self, v: str) -> list[str]:
        return [self.nodes[j] for j in self.adj[self._idx(v)]]

    def degree(self, v: str) -> int:
        return len(self.adj[self._idx(v)])

    def strength(self, v: str) -> float:
        return float(self._strength[self._idx(v)])

    @property
    def strengths(self) -> np.ndarray:
        return self._strength

    def degrees(self) -> np.ndarray:
        return np.fromiter((len(nb) for nb in self.adj), dtype=np.int64, count=len(self.adj))

    def edges(self) -> Iterator[tuple[str, str, float]]:
        """Each undirected edge once, lexicographically smaller id first, sorted."""
        out = []
        for i, nb in enumerate(self.adj):
            for j, w in nb.items():
                u, v = self.nodes[i], self.nodes[j]
                if u < v:
                    out.append((u, v, w))
        out.sort()
        return iter(out)

    def to_csr(self) -> sparse.csr_matrix:
        n = len(self.nodes)
        rows, cols, vals = [], [], []
        for i, nb in enumerate(self.adj):
            for j, w in nb.items():
                rows.append(i)
                cols.append(j)
                vals.append(w)
        return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))

    def indices(self, members: Iterable[str]) -> list[int]:
        return [self._idx(m) for m in members]


def build_graph(pubs: PublicationSet, scheme: str = "strength", divisor: str = "n-1",
                include_solo: bool = True) -> CoauthorGraph:
    """Coauthorship graph of a publication set.

    Every pair of coauthors on a paper with ``n`` authors gets credit 1
    (binary, capped at 1), 1 per paper (count), or ``1/(n-1)`` per paper
    (strength; ``divisor="n"`` uses ``1/n``). Weights are accumulated as exact
    rationals so strength degrees are exact sums of per-paper credits.

    Authors who only appear on single-author papers become isolated nodes
    unless ``include_solo`` is false.
    """
    if scheme not in SCHEMES:
        raise GraphConfigError(f"unknown weighting scheme {scheme!r}; expected one of {SCHEMES}")
    if divisor not in DIVISORS:
        raise GraphConfigError(f"unknown strength divisor {divisor!r}; expected one of {DIVISORS}")

    order: dict[str, int] = {}
    pair_w: dict[tuple[int, int], Fraction | int] = defaultdict(int)
    for rec in pubs:
        n = len(rec.authors)
        if n < 2 and not include_solo:
            continue
        ids = []
        for a in rec.authors:
            ids.append(order.setdefault(a, len(order)))
        if n < 2:
            continue
        if scheme == "strength":
            credit = Fraction(1, n - 1 if divisor == "n-1" else n)
        else:
            credit = 1
        for i, j in combinations(ids, 2):
            key = (i, j) if i < j else (j, i)
            if scheme == "binary":
                pair_w[key] = 1
            else:
                pair_w[key] += credit

    adj: list[dict[int, float]] = [dict() for _ in order]
    exact_strength: list[Fraction | int] = [0] * len(order)
    for (i, j), w in pair_w.items():
        fw = float(w)
        adj[i][j] = fw
        adj[j][i] = fw
        exact_strength[i] += w
        exact_strength[j] += w
    strengths = [float(s) for s in exact_strength]
    return CoauthorGraph(list(order), adj, scheme, strengths)


def connected_components(g: CoauthorGraph) -> list[list[str]]:
    """Connected components as lists of ids, largest first (ties by first id)."""
    seen = np.zeros(len(g), dtype=bool)
    comps = []
    for start in range(len(g)):
        if seen[start]:
            continue
        seen[start] = True
        stack = [start]
        comp = []
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in g.adj[i]:
                if not seen[j]:
                    seen[j] = True
                    stack.append(j)
        comps.append(sorted(g.nodes[i] for i in comp))
    comps.sort(key=lambda c: (-len(c), c[0]))
    return comps


def component_labels(g: CoauthorGraph) -> np.ndarray:
    """Component label per node index."""
    labels = np.full(len(g), -1, dtype=np.int64)
    for k, comp in enumerate(connected_components(g)):
        labels[g.indices(comp)] = k
    return labels


def local_clustering(g: CoauthorGraph) -> np.ndarray:
    """Unweighted local clustering per node; nodes with degree < 2 get 0."""
    nbsets = [set(nb) for nb in g.adj]
    out = np.zeros(len(g))
    for i, nb in enumerate(nbsets):
        d = len(nb)
        if d < 2:
            continue
        links = sum(len(nbsets[j] & nb) for j in nb) // 2
        out[i] = links / (d * (d - 1) / 2)
    return out


@dataclass(frozen=True)
class NetworkSummary:
    n_nodes: int
    n_edges: int
    density: float
    avg_clustering: float
    avg_binary_degree: float
    avg_weighted_degree: float
    avg_strength_degree: float
    n_components: int
    lcc_size: int

    def rows(self) -> list[tuple[str, float]]:
        return list(self.__dict__.items())


def network_summary(g: CoauthorGraph, pubs: PublicationSet | None = None,
                    divisor: str = "n-1") -> NetworkSummary:
    """Whole-network metrics in the layout of a descriptive network table.

    Weighted and strength degree averages are taken from count- and
    strength-weighted graphs rebuilt from ``pubs`` (or from ``g`` itself when
    ``pubs`` is omitted and ``g`` already carries that scheme).
    """
    n = len(g)
    m = g.n_edges
    comps = connected_components(g)
    include_solo = True

    def avg_strength(scheme):
        if pubs is not None:
            h = build_graph(pubs, scheme, divisor, include_solo=include_solo)
            return float(h.strengths.sum() / len(h)) if len(h) else 0.0
        if g.scheme == scheme:
            return float(g.strengths.sum() / n) if n else 0.0
        return math.nan

    return NetworkSummary(
        n_nodes=n,
        n_edges=m,
        density=2 * m / (n * (n - 1)) if n >= 2 else 0.0,
        avg_clustering=float(local_clustering(g).mean()) if n else 0.0,
        avg_binary_degree=2 * m / n if n else 0.0,
        avg_weighted_degree=avg_strength("count"),
        avg_strength_degree=avg_strength("strength"),
        n_components=len(comps),
        lcc_size=len(comps[0]) if comps else 0,
    )


def subgraph(g: CoauthorGraph, members: Iterable[str]) -> CoauthorGraph:
    """Induced subgraph on ``members``, weights preserved."""
    idx = list(dict.fromkeys(g.indices(members)))
    local = {i: k for k, i in enumerate(idx)}
    adj = [{local[j]: w for j, w in g.adj[i].items() if j in local} for i in idx]
    return CoauthorGraph([g.nodes[i] for i in idx], adj, g.scheme)


def _internal_edges(g: CoauthorGraph, idx: list[int]) -> tuple[set[int], list[set[int]]]:
    inside = set(idx)
    return inside, [set(g.adj[i]) & inside for i in idx]


def community_density(g: CoauthorGraph, members: Iterable[str]) -> float:
    """Internal edge count over the number of member pairs (binarized)."""
    idx = list(dict.fromkeys(g.indices(members)))
    k = len(idx)
    if k < 2:
        raise UndefinedMetricError("density needs at least 2 members")
    _, nbs = _internal_edges(g, idx)
    links = sum(len(nb) for nb in nbs) // 2
    return links / (k * (k - 1) // 2)


def community_transitivity(g: CoauthorGraph, members: Iterable[str]) -> float:
    """Global transitivity ``3 * triangles / connected triplets`` of the
    induced binarized subgraph; 0 when it has no triplets."""
    idx = list(dict.fromkeys(g.indices(members)))
    if len(idx) < 3:
        raise UndefinedMetricError("transitivity needs at least 3 members")
    _, nbs = _internal_edges(g, idx)
    pos = {i: k for k, i in enumerate(idx)}
    # each triangle is seen 6 times: once per ordered pair of neighbours at each corner
    closed = 0
    triplets = 0
    for k, nb in enumerate(nbs):
        d = len(nb)
        triplets += d * (d - 1) // 2
        for j in nb:
            closed += len(nb & nbs[pos[j]])
    triangles = closed // 6
    if triplets == 0:
        return 0.0
    return 3 * triangles / triplets


def write_edge_list(g: CoauthorGraph, path) -> None:
    from .csvio import fmt

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source_id", "target_id", "weight"])
        for u, v, wt in g.edges():
            w.writerow([u, v, fmt(wt)])


def read_edge_list(path, scheme: str = "strength", nodes: Iterable[str] = ()) -> CoauthorGraph:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return CoauthorGraph.from_edges(
        ((r["source_id"], r["target_id"], float(r["weight"])) for r in rows), nodes, scheme
    )
