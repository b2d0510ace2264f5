"""Community detection and partition quality.

Two detectors are provided: asynchronous weighted label propagation (the
default used downstream) and Clauset-Newman-Moore agglomerative modularity
maximisation as a baseline. Third-party partitions enter through
:func:`read_partition`.
"""

from __future__ import annotations

import heapq
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .corpus import PublicationSet
from .csvio import read_csv, write_csv
from .graph import CoauthorGraph, UndefinedMetricError, component_labels

log = logging.getLogger(__name__)


class PartitionError(ValueError):
    pass


@dataclass
class CommunityPartition:
    """Node to community assignment with its inverse.

    Community ids are contiguous integers starting at 0, numbered in order of
    first appearance along the node order they were built from.
    """

    assignment: dict[str, int]
    communities: dict[int, list[str]]
    algorithm: str = "external"
    seed: int | None = None
    converged: bool = True
    sweeps: int = 0

    @classmethod
    def from_labels(cls, nodes: Iterable[str], labels: Iterable, **kw) -> "CommunityPartition":
        """Compact arbitrary hashable labels into contiguous community ids."""
        remap: dict = {}
        assignment: dict[str, int] = {}
        communities: dict[int, list[str]] = {}
        for node, lab in zip(nodes, labels):
            cid = remap.setdefault(lab, len(remap))
            assignment[node] = cid
            communities.setdefault(cid, []).append(node)
        return cls(assignment, communities, **kw)

    def __len__(self):
        return len(self.communities)

    def members(self, cid: int) -> list[str]:
        return self.communities[cid]

    def sizes(self) -> dict[int, int]:
        return {c: len(m) for c, m in self.communities.items()}

    def labels_for(self, g: CoauthorGraph) -> np.ndarray:
        """Community id per node index of ``g``."""
        try:
            return np.array([self.assignment[v] for v in g.nodes], dtype=np.int64)
        except KeyError as exc:
            raise PartitionError(f"node {exc.args[0]!r} missing from partition") from None

    def check_total(self, g: CoauthorGraph) -> None:
        missing = [v for v in g.nodes if v not in self.assignment]
        if missing:
            raise PartitionError(f"{len(missing)} graph nodes missing from partition, e.g. {missing[0]!r}")
        extra = [v for v in self.assignment if not g.has_node(v)]
        if extra:
            raise PartitionError(f"partition names unknown node {extra[0]!r}")


def _label_scores(g: CoauthorGraph, labels, i: int, weighted: bool) -> dict[int, float]:
    scores: dict[int, float] = defaultdict(float)
    for j, w in g.adj[i].items():
        scores[labels[j]] += w if weighted else 1.0
    return scores


def plurality_labels(g: CoauthorGraph, labels, i: int, weighted: bool = True) -> list[int]:
    """Labels attaining the maximum neighbour weight around node index ``i``."""
    scores = _label_scores(g, labels, i, weighted)
    if not scores:
        return [labels[i]]
    best = max(scores.values())
    return [lab for lab, s in scores.items() if s == best]


def is_plurality_stable(g: CoauthorGraph, labels, weighted: bool = True) -> bool:
    return all(labels[i] in plurality_labels(g, labels, i, weighted) for i in range(len(g)))


def label_propagation(g: CoauthorGraph, seed: int = 0, max_sweeps: int = 1000,
                      weighted: bool = True) -> CommunityPartition:
    """Asynchronous label propagation.

    Every node starts with its own label. Each sweep visits nodes in a fresh
    random order; a node whose current label is not among the labels with
    the largest total incident weight adopts one of those uniformly at
    random. The run stops once a full sweep changes nothing, which is exactly
    the state where every node holds a plurality label.

    Parameters
    ----------
    g : CoauthorGraph
    seed : int
        Seeds both the visiting order and tie breaks.
    max_sweeps : int
        Upper bound on sweeps; hitting it returns ``converged=False``.
    weighted : bool
        Use summed edge weights (default) or plain neighbour counts.
    """
    rng = np.random.default_rng(seed)
    n = len(g)
    labels = list(range(n))
    converged = False
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        changed = False
        for i in rng.permutation(n):
            best = plurality_labels(g, labels, i, weighted)
            if labels[i] in best:
                continue
            best.sort()
            labels[i] = best[rng.integers(len(best))] if len(best) > 1 else best[0]
            changed = True
        if not changed:
            converged = True
            break
    if not converged:
        log.warning("label propagation did not converge in %d sweeps (seed %d)", max_sweeps, seed)
    return CommunityPartition.from_labels(
        g.nodes, labels, algorithm="labelprop", seed=seed, converged=converged, sweeps=sweeps
    )


def fast_greedy_modularity(g: CoauthorGraph) -> CommunityPartition:
    """Greedy agglomerative modularity maximisation (Clauset, Newman, Moore).

    Starting from singletons, repeatedly merges the pair of adjacent
    communities with the largest modularity gain, ties going to the
    lexicographically smallest pair of community ids, until no adjacent pair
    remains. Returns the partition at the modularity peak (the latest one
    when the peak value repeats).
    """
    n = len(g)
    total = sum(g.strengths)  # 2W
    if n == 0 or total == 0:
        return CommunityPartition.from_labels(g.nodes, range(n), algorithm="fastgreedy")

    a = [s / total for s in g.strengths]
    e: list[dict[int, float]] = [{j: w / total for j, w in nb.items()} for nb in g.adj]
    heap = []
    for i in range(n):
        for j, eij in e[i].items():
            if i < j:
                heap.append((-2.0 * (eij - a[i] * a[j]), i, j))
    heapq.heapify(heap)
    alive = [True] * n
    q = -sum(x * x for x in a)
    best_q, best_step = q, 0
    merges: list[tuple[int, int]] = []

    while heap:
        neg_dq, i, j = heapq.heappop(heap)
        if not (alive[i] and alive[j]) or j not in e[i]:
            continue
        dq = 2.0 * (e[i][j] - a[i] * a[j])
        if -neg_dq != dq:
            continue  # stale entry; a fresh one was pushed when the pair changed
        # merge j into i
        q += dq
        merges.append((i, j))
        alive[j] = False
        for k, ejk in e[j].items():
            if k == i:
                continue
            e[i][k] = e[i].get(k, 0.0) + ejk
            e[k][i] = e[i][k]
            del e[k][j]
        del e[i][j]
        e[j] = {}
        a[i] += a[j]
        a[j] = 0.0
        for k, eik in e[i].items():
            lo, hi = (i, k) if i < k else (k, i)
            heapq.heappush(heap, (-2.0 * (eik - a[i] * a[k]), lo, hi))
        if q >= best_q:
            best_q, best_step = q, len(merges)

    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in merges[:best_step]:
        parent[find(j)] = find(i)
    return CommunityPartition.from_labels(g.nodes, [find(i) for i in range(n)], algorithm="fastgreedy")


def modularity(g: CoauthorGraph, p: CommunityPartition) -> float:
    """Weighted Newman-Girvan modularity ``sum_c w_in/W - (s_c / 2W)**2``."""
    two_w = float(np.sum(g.strengths))
    if two_w == 0:
        raise UndefinedMetricError("modularity is undefined on a graph without edges")
    labels = p.labels_for(g)
    k = int(labels.max()) + 1 if len(labels) else 0
    internal = np.zeros(k)
    strength = np.zeros(k)
    np.add.at(strength, labels, g.strengths)
    for i, nb in enumerate(g.adj):
        ci = labels[i]
        for j, w in nb.items():
            if labels[j] == ci:
                internal[ci] += w
    # internal counts each edge twice
    return float(np.sum(internal / two_w - (strength / two_w) ** 2))


def embeddedness(g: CoauthorGraph, p: CommunityPartition, node: str) -> float:
    """Share of a node's strength that stays inside its community."""
    i = g.indices([node])[0]
    total = g.strengths[i]
    if total == 0:
        raise UndefinedMetricError(f"node {node!r} is isolated")
    c = p.assignment[node]
    inside = sum(w for j, w in g.adj[i].items() if p.assignment[g.nodes[j]] == c)
    return float(inside / total)


@dataclass(frozen=True)
class PartitionQuality:
    n_communities: int
    n_connected_communities: int
    n_strong_communities: int
    mean_embeddedness: float
    modularity: float


def whole_component_flags(g: CoauthorGraph, p: CommunityPartition) -> dict[int, bool]:
    """For each community, whether its members form an entire connected component."""
    comp = component_labels(g)
    comp_size = np.bincount(comp) if len(comp) else np.array([], dtype=int)
    flags = {}
    for cid, members in p.communities.items():
        cs = {int(comp[g.index[m]]) for m in members}
        flags[cid] = len(cs) == 1 and comp_size[next(iter(cs))] == len(members)
    return flags


def partition_quality(g: CoauthorGraph, p: CommunityPartition) -> PartitionQuality:
    """Community counts, strong communities and mean node embeddedness.

    A community is strong when every member with at least one edge has
    embeddedness strictly above 0.5. Isolated nodes are excluded from the
    embeddedness mean.
    """
    p.check_total(g)
    labels = p.labels_for(g)
    emb = np.full(len(g), np.nan)
    for i, nb in enumerate(g.adj):
        if g.strengths[i] > 0:
            inside = sum(w for j, w in nb.items() if labels[j] == labels[i])
            emb[i] = inside / g.strengths[i]
    strong = 0
    for cid, members in p.communities.items():
        vals = emb[g.indices(members)]
        vals = vals[~np.isnan(vals)]
        if np.all(vals > 0.5):
            strong += 1
    flags = whole_component_flags(g, p)
    try:
        q = modularity(g, p)
    except UndefinedMetricError:
        q = float("nan")
    finite = emb[~np.isnan(emb)]
    return PartitionQuality(
        n_communities=len(p),
        n_connected_communities=sum(1 for f in flags.values() if not f),
        n_strong_communities=strong,
        mean_embeddedness=float(finite.mean()) if len(finite) else float("nan"),
        modularity=q,
    )


@dataclass
class PaperCounts:
    per_community: dict[int, int] = field(default_factory=dict)
    boundary: int = 0
    unassigned: int = 0


def papers_per_community(pubs: PublicationSet, p: CommunityPartition) -> PaperCounts:
    """Internal publications per community.

    A paper is credited to community ``c`` only if all of its authors belong
    to ``c``; papers spanning several communities are tallied as boundary
    papers, and papers with an author outside the partition as unassigned.
    """
    counts = PaperCounts(per_community={c: 0 for c in p.communities})
    for rec in pubs:
        cids = {p.assignment.get(a) for a in rec.authors}
        if None in cids:
            counts.unassigned += 1
        elif len(cids) == 1:
            counts.per_community[cids.pop()] += 1
        else:
            counts.boundary += 1
    return counts


def write_partition(p: CommunityPartition, path) -> None:
    rows = sorted(p.assignment.items(), key=lambda kv: (kv[1], kv[0]))
    write_csv(path, ["node_id", "community_id"], rows)


def read_partition(path, algorithm: str = "external") -> CommunityPartition:
    """Load a ``node_id,community_id`` CSV; ids are re-compacted on load."""
    rows = read_csv(path)
    if rows and not {"node_id", "community_id"} <= set(rows[0]):
        raise PartitionError(f"{path}: expected columns node_id, community_id")
    seen = set()
    for r in rows:
        if r["node_id"] in seen:
            raise PartitionError(f"{path}: node {r['node_id']!r} listed twice")
        seen.add(r["node_id"])
    return CommunityPartition.from_labels(
        (r["node_id"] for r in rows), (r["community_id"] for r in rows), algorithm=algorithm
    )


def partition_from_mapping(mapping: Mapping[str, object], nodes: Iterable[str] | None = None,
                           algorithm: str = "external") -> CommunityPartition:
    order = list(nodes) if nodes is not None else list(mapping)
    return CommunityPartition.from_labels(order, (mapping[v] for v in order), algorithm=algorithm)
