"""Community-level network and k-core position of communities."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from .community import CommunityPartition
from .csvio import write_csv
from .graph import CoauthorGraph
from .segregation import Category, SegregationReport


@dataclass
class CommunityGraph:
    nodes: list[int]
    adj: dict[int, set[int]]

    @classmethod
    def from_edges(cls, nodes, edges) -> "CommunityGraph":
        adj = {v: set() for v in nodes}
        for u, v in edges:
            if u == v:
                continue
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        return cls(list(adj), adj)

    @property
    def n_edges(self) -> int:
        return sum(len(nb) for nb in self.adj.values()) // 2

    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u, nb in self.adj.items() for v in nb if u < v)

    def degree(self, v) -> int:
        return len(self.adj[v])


def build_community_graph(g: CoauthorGraph, p: CommunityPartition) -> CommunityGraph:
    """Quotient graph: one node per community, an edge wherever members of two
    communities coauthored."""
    labels = p.labels_for(g)
    adj: dict[int, set[int]] = {c: set() for c in sorted(p.communities)}
    for i, nb in enumerate(g.adj):
        ci = int(labels[i])
        for j in nb:
            cj = int(labels[j])
            if ci != cj:
                adj[ci].add(cj)
    return CommunityGraph(list(adj), adj)


def k_core_decomposition(cg: CommunityGraph) -> dict[int, int]:
    """Coreness of every node by bucket peeling (Batagelj and Zaversnik).

    Nodes are kept in degree-sorted order with bucket start offsets; popping
    the lowest-degree node fixes its coreness and moves each higher-degree
    neighbour one bucket down in O(1).
    """
    nodes = list(cg.adj)
    n = len(nodes)
    if n == 0:
        return {}
    pos_of = {v: i for i, v in enumerate(nodes)}
    deg = [len(cg.adj[v]) for v in nodes]
    md = max(deg)
    bin_start = [0] * (md + 1)
    for d in deg:
        bin_start[d] += 1
    start = 0
    for d in range(md + 1):
        count = bin_start[d]
        bin_start[d] = start
        start += count
    pos = [0] * n
    vert = [0] * n
    for v in range(n):
        pos[v] = bin_start[deg[v]]
        vert[pos[v]] = v
        bin_start[deg[v]] += 1
    for d in range(md, 0, -1):
        bin_start[d] = bin_start[d - 1]
    bin_start[0] = 0

    nbrs = [[pos_of[u] for u in cg.adj[v]] for v in nodes]
    for i in range(n):
        v = vert[i]
        for u in nbrs[v]:
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bin_start[du]
                w = vert[pw]
                if u != w:
                    pos[u], pos[w] = pw, pu
                    vert[pu], vert[pw] = w, u
                bin_start[du] += 1
                deg[u] -= 1
    return {nodes[v]: deg[v] for v in range(n)}


@dataclass
class CoreAssignment:
    coreness: dict[int, int]

    @property
    def max_core(self) -> int:
        return max(self.coreness.values(), default=0)

    def __getitem__(self, cid) -> int:
        return self.coreness[cid]

    def get(self, cid, default=None):
        return self.coreness.get(cid, default)


def core_assignment(cg: CommunityGraph) -> CoreAssignment:
    return CoreAssignment(k_core_decomposition(cg))


@dataclass
class CoreRow:
    core: int
    n_researchers: int
    n_researchers_high: int
    n_researchers_non: int
    n_communities: int
    avg_size: float


def core_category_table(ca: CoreAssignment, p: CommunityPartition,
                        sr: SegregationReport | None = None,
                        include: set[Category] | None = None) -> list[CoreRow]:
    """Per-core researcher and community counts.

    ``include`` restricts which categories enter the table (all communities by
    default); high/non researcher columns need ``sr``.
    """
    acc = defaultdict(lambda: [0, 0, 0, 0])
    for cid, members in p.communities.items():
        cat = sr.category_of(cid) if sr is not None else None
        if include is not None and cat not in include:
            continue
        row = acc[ca[cid]]
        size = len(members)
        row[0] += size
        row[1] += size if cat is Category.HIGH else 0
        row[2] += size if cat is Category.NON else 0
        row[3] += 1
    return [CoreRow(k, nr, hi, lo, nc, nr / nc) for k, (nr, hi, lo, nc) in sorted(acc.items())]


def write_coreness(ca: CoreAssignment, path) -> None:
    write_csv(path, ["community_id", "coreness"], sorted(ca.coreness.items()))


def write_core_table(rows: list[CoreRow], path) -> None:
    write_csv(path, ["core", "NR", "NR_HighSeg", "NR_NonSeg", "NC", "avg_NRC"],
              ((r.core, r.n_researchers, r.n_researchers_high, r.n_researchers_non,
                r.n_communities, r.avg_size) for r in rows))
