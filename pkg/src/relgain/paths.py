"""Most-reliable paths and top-l simple path enumeration.

Arc weights are -log(p): minimum-weight paths are maximum-probability paths,
and weights add while probabilities multiply, so long paths cannot underflow.
The top-l search is a deviation scheme over accepted paths: each prefix of
the newest accepted path is frozen as a root, the continuation arcs used by
earlier equal-prefix paths are banned, and a shortest spur is grown from the
deviation node.  Returned lists are ordered by descending probability with
ties broken by fewer hops, then lexicographic node sequence.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .graph import UncertainGraph

__all__ = ["ReliablePath", "augment", "most_reliable_path", "top_l_paths"]

TOP_L_CAP = 1000


@dataclass(frozen=True)
class ReliablePath:
    """A simple path with its existence probability.

    candidate_edges holds the hypothetical (candidate) edges the path uses,
    in their canonical stored orientation; it is empty for paths that exist
    in the base graph.
    """

    nodes: tuple[int, ...]
    prob: float
    candidate_edges: frozenset

    @property
    def hops(self) -> int:
        return len(self.nodes) - 1


def augment(g: UncertainGraph, candidates) -> UncertainGraph:
    """Base graph plus candidate edges, marked so paths can report their use.

    `candidates` is a CandidateSet or any iterable of (u, v, prob) triples.
    """
    edges = getattr(candidates, "edges", candidates)
    return g.with_edges([(e[0], e[1], e[2]) for e in edges], mark_candidates=True)


class _ArcIndex:
    """CSR view of a graph with -log(p) weights and arc banning support."""

    def __init__(self, g: UncertainGraph):
        self.g = g
        self.n = g.n
        asrc, adst, aeid = g.arc_arrays()
        with np.errstate(divide="ignore"):
            w = -np.log(g.prob[aeid])
        order = np.lexsort((adst, asrc))
        asrc, adst, aeid, w = asrc[order], adst[order], aeid[order], w[order]
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(self.indptr, asrc + 1, 1)
        np.cumsum(self.indptr, out=self.indptr)
        self.indices = adst.astype(np.int32)
        self.weights = w
        self.arc_eid = aeid
        self.pos_of = {}
        for pos, (u, v) in enumerate(zip(asrc.tolist(), adst.tolist())):
            self.pos_of[(u, v)] = pos
        by_dst = np.argsort(adst, kind="stable")
        self.in_pos = np.split(by_dst, np.searchsorted(adst[by_dst], np.arange(1, self.n)))

    def shortest(self, start: int, target: int, banned_nodes=(), banned_arcs=()):
        """(weight, node tuple) of a shortest start->target path, or None."""
        data = self.weights
        if banned_nodes or banned_arcs:
            data = data.copy()
            for u in banned_nodes:
                data[self.indptr[u]:self.indptr[u + 1]] = np.inf
                data[self.in_pos[u]] = np.inf
            for (u, v) in banned_arcs:
                pos = self.pos_of.get((u, v))
                if pos is not None:
                    data[pos] = np.inf
        mat = sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))
        dist, pred = dijkstra(mat, directed=True, indices=start, return_predecessors=True)
        if not np.isfinite(dist[target]):
            return None
        nodes = [target]
        while nodes[-1] != start:
            nodes.append(int(pred[nodes[-1]]))
        nodes.reverse()
        return float(dist[target]), tuple(nodes)

    def arc_weight(self, u: int, v: int) -> float:
        return float(self.weights[self.pos_of[(u, v)]])

    def path_edges(self, nodes) -> list[int]:
        return [int(self.arc_eid[self.pos_of[(u, v)]]) for u, v in zip(nodes, nodes[1:])]

    def to_reliable(self, nodes) -> ReliablePath:
        eids = self.path_edges(nodes)
        prob = 1.0
        cand = []
        for eid in eids:
            prob *= float(self.g.prob[eid])
            if self.g.candidate_mark[eid]:
                cand.append((int(self.g.src[eid]), int(self.g.dst[eid])))
        return ReliablePath(tuple(nodes), prob, frozenset(cand))


def most_reliable_path(g: UncertainGraph, s: int, t: int) -> ReliablePath | None:
    """Single maximum-probability simple path, or None when t is unreachable."""
    if s == t:
        return ReliablePath((s,), 1.0, frozenset())
    idx = _ArcIndex(g)
    hit = idx.shortest(s, t)
    if hit is None:
        return None
    return idx.to_reliable(hit[1])


def top_l_paths(g: UncertainGraph, s: int, t: int, l: int, cap: int = TOP_L_CAP) -> list[ReliablePath]:
    """Up to l most reliable simple s-t paths (fewer when fewer exist)."""
    if l < 1:
        raise ValueError("l must be at least 1")
    if l > cap:
        raise ValueError(f"l={l} exceeds the cap of {cap} paths")
    if s == t:
        return [ReliablePath((s,), 1.0, frozenset())]
    idx = _ArcIndex(g)
    first = idx.shortest(s, t)
    if first is None:
        return []
    accepted: list[tuple[float, tuple[int, ...]]] = [first]
    frontier: list[tuple[float, int, tuple[int, ...]]] = []  # (weight, hops, nodes)
    seen = {first[1]}
    while len(accepted) < l:
        prev_w, prev_nodes = accepted[-1]
        prefix_w = 0.0
        for i in range(len(prev_nodes) - 1):
            root = prev_nodes[: i + 1]
            spur = root[-1]
            banned_arcs = {
                (p[i], p[i + 1])
                for _, p in accepted
                if len(p) > i + 1 and p[: i + 1] == root
            }
            spur_hit = idx.shortest(spur, t, banned_nodes=root[:-1], banned_arcs=banned_arcs)
            if spur_hit is not None:
                w, nodes = spur_hit
                full = root[:-1] + nodes
                if full not in seen:
                    seen.add(full)
                    heapq.heappush(frontier, (prefix_w + w, len(full) - 1, full))
            prefix_w += idx.arc_weight(prev_nodes[i], prev_nodes[i + 1])
        if not frontier:
            break
        w, _, nodes = heapq.heappop(frontier)
        accepted.append((w, nodes))
    paths = [idx.to_reliable(nodes) for _, nodes in accepted]
    paths.sort(key=lambda p: (-p.prob, p.hops, p.nodes))
    return paths
