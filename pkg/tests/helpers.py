"""Shared test utilities: brute-force oracles and hand-built fixture graphs.

The oracles re-implement the quantities under test from first principles
(full possible-world enumeration, exhaustive path enumeration) so that
library implementations are checked against an independent code path.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from relgain.graph import UncertainGraph


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


def _adj_from_arrays(n, src, dst, directed):
    adj = [[] for _ in range(n)]
    for eid, (u, v) in enumerate(zip(src, dst)):
        adj[u].append((v, eid))
        if not directed:
            adj[v].append((u, eid))
    return adj


def _bfs_hits(adj, mask, s, t):
    if s == t:
        return True
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for v, eid in adj[u]:
            if mask[eid] and v not in seen:
                if v == t:
                    return True
                seen.add(v)
                stack.append(v)
    return False


def _bfs_set(adj, mask, sources):
    seen = set(sources)
    stack = list(sources)
    while stack:
        u = stack.pop()
        for v, eid in adj[u]:
            if mask[eid] and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def enum_reliability(g: UncertainGraph, s: int, t: int) -> float:
    """R(s, t) by full 2^m possible-world enumeration (oracle)."""
    src, dst, prob = g.src.tolist(), g.dst.tolist(), g.prob.tolist()
    adj = _adj_from_arrays(g.n, src, dst, g.directed)
    m = g.m
    total = 0.0
    for bits in range(1 << m):
        mask = [(bits >> i) & 1 for i in range(m)]
        w = 1.0
        for i in range(m):
            w *= prob[i] if mask[i] else 1.0 - prob[i]
        if w and _bfs_hits(adj, mask, s, t):
            total += w
    return total


def enum_influence(g: UncertainGraph, sources, targets) -> float:
    """Expected number of targets reached from any source (oracle)."""
    src, dst, prob = g.src.tolist(), g.dst.tolist(), g.prob.tolist()
    adj = _adj_from_arrays(g.n, src, dst, g.directed)
    m = g.m
    total = 0.0
    for bits in range(1 << m):
        mask = [(bits >> i) & 1 for i in range(m)]
        w = 1.0
        for i in range(m):
            w *= prob[i] if mask[i] else 1.0 - prob[i]
        if w:
            reached = _bfs_set(adj, mask, sources)
            total += w * sum(1 for t in targets if t in reached)
    return total


def enum_simple_paths(g: UncertainGraph, s: int, t: int):
    """All simple s-t paths as (prob, node tuple), exhaustive DFS (oracle)."""
    adj = _adj_from_arrays(g.n, g.src.tolist(), g.dst.tolist(), g.directed)
    prob = g.prob.tolist()
    out = []

    def walk(u, nodes, p):
        if u == t:
            out.append((p, tuple(nodes)))
            return
        for v, eid in adj[u]:
            if v not in nodes:
                nodes.append(v)
                walk(v, nodes, p * prob[eid])
                nodes.pop()

    if s == t:
        return [(1.0, (s,))]
    walk(s, [s], 1.0)
    return out


def best_subset_exact(g: UncertainGraph, cand_edges, k: int, s: int, t: int):
    """Brute-force best k-subset of candidate edges by enumeration reliability."""
    best_val, best_set = -1.0, ()
    k = min(k, len(cand_edges))
    for combo in itertools.combinations(range(len(cand_edges)), k):
        extra = [cand_edges[i] for i in combo]
        val = enum_reliability(g.with_edges(extra), s, t)
        if val > best_val:
            best_val, best_set = val, combo
    return best_val, best_set


def binom_3sigma(p: float, z: int) -> float:
    """3-sigma half-width for a frequency estimate of a Bernoulli(p) mean."""
    return 3.0 * math.sqrt(max(p * (1.0 - p), 1e-12) / z)


# ---------------------------------------------------------------------------
# fixture graphs
# ---------------------------------------------------------------------------


def triangle_graph() -> UncertainGraph:
    """Directed 3-node chain-with-shortcut; all probabilities one half."""
    labels = ["s", "t", "A"]
    #        s->t      s->A      A->t
    return UncertainGraph(3, [0, 0, 2], [1, 2, 1], [0.5, 0.5, 0.5], directed=True, labels=labels)


def triangle_subsets():
    """The five edge subsets of the 3-node example and their exact values."""
    st, sA, At = (0, 1, 0.5), (0, 2, 0.5), (2, 1, 0.5)
    return [
        ((st,), 0.5),
        ((st, sA), 0.5),
        ((st, sA, At), 0.625),
        ((sA,), 0.0),
        ((sA, At), 0.25),
    ]


def empty_triangle_graph() -> UncertainGraph:
    return UncertainGraph(3, [], [], [], directed=True, labels=["s", "t", "A"])


def closed_form_graph(alpha: float) -> UncertainGraph:
    """Undirected 4-node instance: edges A-B and A-t, both with prob alpha.

    s starts isolated; the interesting structure comes from the candidate
    edges s-A, s-B and B-t.
    """
    labels = ["s", "A", "B", "t"]
    return UncertainGraph(4, [1, 1], [2, 3], [alpha, alpha], directed=False, labels=labels)


def closed_form_candidates(zeta: float):
    """Candidate edges (s,A), (s,B), (B,t) at probability zeta."""
    return [(0, 1, zeta), (0, 2, zeta), (2, 3, zeta)]


def closed_form_solutions(alpha: float, zeta: float) -> dict:
    """Exact reliabilities of the three 2-edge solutions (independent algebra)."""
    return {
        ("sA", "sB"): (1 - (1 - zeta) * (1 - alpha * zeta)) * alpha,
        ("sA", "Bt"): zeta * (1 - (1 - alpha) * (1 - alpha * zeta)),
        ("sB", "Bt"): zeta * (1 - (1 - zeta) * (1 - alpha * alpha)),
    }


def walkthrough_graph() -> UncertainGraph:
    """Undirected 9-node instance used for the elimination/selection walkthrough.

    Designed so that with r=3, h=3, zeta=0.5:
      C(s) = {s, A, B}, C(t) = {B, C, t};
      candidates before path pruning: sC, sB, At, AC, Bt;
      top-3 paths on the augmented graph: s-B-t (0.25), s-C-B-t (0.225),
      s-C-t (0.15), so pruning drops every candidate touching A.
    """
    labels = ["s", "A", "B", "C", "D", "E", "F", "G", "t"]
    edges = [
        ("s", "A", 0.28),
        ("A", "B", 0.5),
        ("B", "C", 0.9),
        ("C", "t", 0.3),
        ("C", "D", 0.1),
        ("D", "E", 0.2),
        ("A", "F", 0.1),
        ("F", "G", 0.2),
    ]
    idx = {lab: i for i, lab in enumerate(labels)}
    src = [idx[a] for a, _, _ in edges]
    dst = [idx[b] for _, b, _ in edges]
    prob = [p for _, _, p in edges]
    return UncertainGraph(9, src, dst, prob, directed=False, labels=labels)


def random_graph(rng: np.random.Generator, n: int, m: int, directed: bool = True,
                 lo: float = 0.1, hi: float = 0.9) -> UncertainGraph:
    """Random simple graph with m distinct edges and uniform probabilities."""
    pairs = set()
    src, dst = [], []
    limit = n * (n - 1) if directed else n * (n - 1) // 2
    m = min(m, limit)
    while len(src) < m:
        u = int(rng.integers(n))
        v = int(rng.integers(n))
        if u == v:
            continue
        key = (u, v) if directed else (min(u, v), max(u, v))
        if key in pairs:
            continue
        pairs.add(key)
        src.append(u)
        dst.append(v)
    prob = lo + (hi - lo) * rng.random(m)
    return UncertainGraph(n, src, dst, prob, directed=directed)


def connected_st_graph(rng: np.random.Generator, n: int, m: int, directed: bool = True,
                       lo: float = 0.1, hi: float = 0.9):
    """Random graph plus a guaranteed (possibly weak) s-t backbone path."""
    g = random_graph(rng, n, m, directed=directed, lo=lo, hi=hi)
    s, t = 0, n - 1
    hops = [s] + ([int(rng.integers(1, n - 1))] if n > 2 else []) + [t]
    extra = []
    for u, v in zip(hops, hops[1:]):
        if u != v and not g.has_edge(u, v):
            extra.append((u, v, lo + (hi - lo) * float(rng.random())))
    if extra:
        g = g.with_edges(extra)
    return g, s, t
