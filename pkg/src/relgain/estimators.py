"""Two-terminal reliability estimators for uncertain graphs.

Three interchangeable engines:

* exact        - possible-world conditioning on frontier edges, feasible for
                 small edge counts (default cap 25 edges);
* mc           - plain Monte Carlo over sampled worlds;
* rss          - recursive stratified sampling: condition on a handful of
                 source-side edges, recurse into each stratum on a simplified
                 graph (certain edges contracted, absent edges removed), and
                 fall back to Monte Carlo once a stratum's sample budget is
                 small.

All sampling estimators draw world i from a counter-based stream keyed by
(seed, i), so results are bit-identical for a fixed seed regardless of how
the work is partitioned.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order

from .errors import CapExceededError, RelgainError
from .graph import UncertainGraph
from .rng import derive_seed, uniform_batch, world_stream

__all__ = [
    "EstimatorConfig",
    "ReliabilityEstimate",
    "DispersionStats",
    "Stratum",
    "reliability_exact",
    "reliability_mc",
    "reliability_rss",
    "estimate",
    "reliability_all_from",
    "reliability_all_to",
    "stratify",
    "dispersion",
    "converged_sample_size",
]

# Edge count above which per-world sparse BFS replaces the vectorized sweep.
_SWEEP_EDGE_LIMIT = 2048


@dataclass(frozen=True)
class EstimatorConfig:
    """How reliability queries should be answered.

    method 'auto' uses exact conditioning when the graph fits under
    `exact_cap` edges and recursive stratified sampling otherwise.
    """

    method: str = "auto"  # auto | exact | mc | rss
    samples: int = 10_000
    seed: int = 0
    exact_cap: int = 25
    branch_r: int = 5
    mc_threshold: int = 8

    def with_seed(self, seed: int) -> "EstimatorConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class ReliabilityEstimate:
    value: float
    variance: float
    samples_used: int
    method: str


@dataclass(frozen=True)
class DispersionStats:
    """Index of dispersion for a sample size: rho = V_Z / R_Z."""

    rho: float
    repeats: int
    v_z: float
    r_z: float


@dataclass(frozen=True)
class Stratum:
    """One cell of a stratified partition of the world space.

    `present` is the edge id fixed present (None for the all-absent cell) and
    `absent` the edge ids fixed absent; `pi` is the cell probability and `z`
    its sample allotment.
    """

    present: int | None
    absent: tuple[int, ...]
    pi: float
    z: int


# ---------------------------------------------------------------------------
# internal edge system: a mutable view used by the stratified recursion
# ---------------------------------------------------------------------------


class _State:
    __slots__ = ("n", "src", "dst", "prob", "directed", "merged", "s")

    def __init__(self, n, src, dst, prob, directed, merged, s):
        self.n = n
        self.src = src
        self.dst = dst
        self.prob = prob
        self.directed = directed
        self.merged = merged  # bool vector: nodes contracted into the source
        self.s = s

    @classmethod
    def from_graph(cls, g: UncertainGraph, s: int) -> "_State":
        merged = np.zeros(g.n, dtype=bool)
        merged[s] = True
        return cls(g.n, g.src.copy(), g.dst.copy(), g.prob.copy(), g.directed, merged, s)

    def frontier(self) -> np.ndarray:
        """Edge positions leaving the contracted source component."""
        at_src = self.src == self.s
        at_dst = self.dst == self.s
        if self.directed:
            return np.flatnonzero(at_src & ~at_dst)
        return np.flatnonzero(at_src ^ at_dst)

    def apply(self, stratum: Stratum) -> "_State":
        """Child state with the stratum's edge statuses baked in."""
        keep = np.ones(len(self.src), dtype=bool)
        for eid in stratum.absent:
            keep[eid] = False
        merged = self.merged
        src, dst = self.src, self.dst
        if stratum.present is not None:
            eid = stratum.present
            v = int(self.dst[eid]) if int(self.src[eid]) == self.s else int(self.src[eid])
            merged = merged.copy()
            merged[v] = True
            src = np.where(src == v, self.s, src)
            dst = np.where(dst == v, self.s, dst)
            keep[eid] = False  # contracted away
            keep &= src != dst  # drop edges internal to the source component
        return _State(self.n, src[keep], dst[keep], self.prob[keep], self.directed, merged, self.s)


def _sweep_counts(n, src, dst, directed, masks, start_vec) -> np.ndarray:
    """Per-node counts of worlds that reach the node (modest edge counts).

    masks is (Z, m); start_vec a boolean node vector.  The Z worlds are
    packed into big integers so relaxing an edge across every world at once
    is a single bitwise op; edges are swept in breadth-first distance order
    until a fixpoint.  Returns an (n,) int64 vector of world counts.
    """
    Z, m = masks.shape
    counts = np.zeros(n, dtype=np.int64)
    if m == 0:
        counts[start_vec] = Z
        return counts
    # order edges by skeleton BFS level so most worlds settle in one pass
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in zip(src.tolist(), dst.tolist()):
        adj[u].append(v)
        adj[v].append(u)
    level = np.full(n, n, dtype=np.int64)
    queue = list(np.flatnonzero(start_vec))
    for u in queue:
        level[u] = 0
    for u in queue:
        for v in adj[u]:
            if level[v] == n:
                level[v] = level[u] + 1
                queue.append(v)
    if directed:
        order = np.argsort(level[src], kind="stable")
    else:
        order = np.argsort(np.minimum(level[src], level[dst]), kind="stable")
    order = order.tolist()
    srcl, dstl = src.tolist(), dst.tolist()
    # one arbitrary-precision integer per edge, bit i = edge present in world i
    packed = np.packbits(masks, axis=0)
    width = packed.shape[0]
    flat = packed.T.tobytes()
    edge_bits = [int.from_bytes(flat[e * width:(e + 1) * width], "big")
                 for e in range(m)]
    full = int.from_bytes(np.packbits(np.ones(Z, dtype=bool)).tobytes(), "big")
    reach = [full if start_vec[v] else 0 for v in range(n)]
    while True:
        changed = False
        for eid in order:
            u, v = srcl[eid], dstl[eid]
            upd = edge_bits[eid] & reach[u] & ~reach[v]
            if upd:
                reach[v] |= upd
                changed = True
            if not directed:
                upd = edge_bits[eid] & reach[v] & ~reach[u]
                if upd:
                    reach[u] |= upd
                    changed = True
        if not changed:
            break
    for v in range(n):
        counts[v] = reach[v].bit_count()
    return counts


def _mc_counts(state: _State, samples: int, seed: int, vector: bool, t: int | None):
    """Monte Carlo success counters on a (possibly simplified) edge system.

    Returns (counts, samples): counts is an int (target hits) when
    vector=False, else an int64 vector of per-node hits. Contracted nodes are
    painted in by the caller.
    """
    n, src, dst, prob = state.n, state.src, state.dst, state.prob
    m = len(src)
    start_vec = state.merged
    if m == 0:
        if vector:
            counts = np.zeros(n, dtype=np.int64)
            counts[start_vec] = samples
            return counts, samples
        return (samples if (t is not None and start_vec[t]) else 0), samples
    if m <= _SWEEP_EDGE_LIMIT:
        masks = uniform_batch(seed, samples, m) < prob
        counts = _sweep_counts(n, src, dst, state.directed, masks, start_vec)
        if vector:
            return counts, samples
        return int(counts[t]), samples
    # large graphs: stream one world at a time through sparse BFS
    counts = np.zeros(n, dtype=np.int64) if vector else 0
    for i in range(samples):
        mask = world_stream(seed, i, m).random(m) < prob
        a = src[mask]
        b = dst[mask]
        if not state.directed:
            a, b = np.concatenate([a, b]), np.concatenate([b, a])
        if len(a) == 0:
            order = np.array([state.s], dtype=np.int64)
        else:
            adjm = sp.csr_matrix(
                (np.ones(len(a), dtype=np.int8), (a, b)), shape=(n, n)
            )
            order = breadth_first_order(adjm, state.s, directed=True, return_predecessors=False)
        if vector:
            counts[order] += 1
        elif t is not None and (order == t).any():
            counts += 1
    return counts, samples


# ---------------------------------------------------------------------------
# exact enumeration by frontier conditioning
# ---------------------------------------------------------------------------


def reliability_exact(g: UncertainGraph, s: int, t: int, cap: int = 25) -> ReliabilityEstimate:
    """Exact two-terminal reliability; feasible for small edge counts.

    Conditions recursively on edges leaving the set already reached from s;
    each branch fixes one edge present (endpoint contracted) or absent. Every
    possible world falls in exactly one leaf, so the weighted sum over leaves
    equals the full 2^m enumeration without visiting irrelevant edges.
    """
    if g.m > cap:
        raise CapExceededError(f"exact enumeration capped at {cap} edges, graph has {g.m}")
    if s == t:
        return ReliabilityEstimate(1.0, 0.0, 0, "exact")
    edges = list(zip(g.src.tolist(), g.dst.tolist(), g.prob.tolist()))
    directed = g.directed
    tbit = 1 << t

    def solve(merged: int, alive: tuple[int, ...]) -> float:
        if merged & tbit:
            return 1.0
        best = -1
        best_p = -1.0
        for eid in alive:
            u, v, p = edges[eid]
            ub, vb = (merged >> u) & 1, (merged >> v) & 1
            if directed:
                on_frontier = ub and not vb
            else:
                on_frontier = ub != vb
            if on_frontier and p > best_p:
                best, best_p = eid, p
        if best < 0:
            return 0.0
        u, v, p = edges[best]
        rest = tuple(e for e in alive if e != best)
        out = 0.0
        if p > 0.0:
            join = v if (merged >> u) & 1 else u
            out += p * solve(merged | (1 << join), rest)
        if p < 1.0:
            out += (1.0 - p) * solve(merged, rest)
        return out

    value = solve(1 << s, tuple(range(g.m)))
    return ReliabilityEstimate(value, 0.0, 0, "exact")


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def reliability_mc(g: UncertainGraph, s: int, t: int, samples: int, seed: int = 0) -> ReliabilityEstimate:
    """Plain Monte Carlo: fraction of sampled worlds in which t is reachable."""
    if samples <= 0:
        raise ValueError("samples must be positive")
    if s == t:
        return ReliabilityEstimate(1.0, 0.0, 0, "mc")
    state = _State.from_graph(g, s)
    hits, used = _mc_counts(state, samples, seed, vector=False, t=t)
    value = hits / used
    return ReliabilityEstimate(value, value * (1.0 - value) / used, used, "mc")


# ---------------------------------------------------------------------------
# recursive stratified sampling
# ---------------------------------------------------------------------------


def _stratify_state(state: _State, samples: int, branch_r: int) -> list[Stratum]:
    frontier = state.frontier()
    if len(frontier) == 0:
        return []
    probs = state.prob[frontier]
    order = np.lexsort((frontier, -probs))[: max(1, branch_r)]
    pivots = [int(frontier[i]) for i in order]
    strata: list[Stratum] = []
    prefix = 1.0
    for i, eid in enumerate(pivots):
        p = float(state.prob[eid])
        strata.append(Stratum(eid, tuple(pivots[:i]), prefix * p, 0))
        prefix *= 1.0 - p
    strata.append(Stratum(None, tuple(pivots), prefix, 0))
    # allot samples proportionally; the rounding remainder goes to the
    # largest stratum
    z = [int(round(st.pi * samples)) for st in strata]
    z[max(range(len(strata)), key=lambda i: strata[i].pi)] += samples - sum(z)
    return [replace(st, z=zi) for st, zi in zip(strata, z)]


def stratify(g: UncertainGraph, s: int, samples: int, branch_r: int = 5) -> list[Stratum]:
    """Top-level stratification of the world space around s's frontier edges."""
    return _stratify_state(_State.from_graph(g, s), samples, branch_r)


def _rss_scalar(state: _State, t: int, Z: int, seed: int, path: tuple[int, ...],
                branch_r: int, mc_threshold: int):
    """Returns (value, variance, samples_used) for the current subproblem."""
    if state.merged[t]:
        return 1.0, 0.0, 0
    if len(state.frontier()) == 0:
        return 0.0, 0.0, 0
    if Z < mc_threshold:
        z = max(1, Z)
        hits, used = _mc_counts(state, z, derive_seed(seed, *path), vector=False, t=t)
        value = hits / used
        return value, value * (1.0 - value) / used, used
    value = var = 0.0
    samples = 0
    for idx, st in enumerate(_stratify_state(state, Z, branch_r)):
        if st.pi == 0.0:
            continue
        child = state.apply(st)
        v, s2, z = _rss_scalar(child, t, max(1, st.z), seed, path + (idx,), branch_r, mc_threshold)
        value += st.pi * v
        var += st.pi * st.pi * s2
        samples += z
    return value, var, samples


def _rss_vector(state: _State, Z: int, seed: int, path: tuple[int, ...],
                branch_r: int, mc_threshold: int):
    """Per-node reach probability vector for the current subproblem."""
    def terminal_vec() -> np.ndarray:
        return state.merged.astype(np.float64)

    if len(state.frontier()) == 0:
        return terminal_vec(), 0
    if Z < mc_threshold:
        z = max(1, Z)
        counts, used = _mc_counts(state, z, derive_seed(seed, *path), vector=True, t=None)
        vec = counts / used
        vec[state.merged] = 1.0
        return vec, used
    vec = np.zeros(state.n, dtype=np.float64)
    samples = 0
    for idx, st in enumerate(_stratify_state(state, Z, branch_r)):
        if st.pi == 0.0:
            continue
        child = state.apply(st)
        v, z = _rss_vector(child, Z=max(1, st.z), seed=seed, path=path + (idx,),
                           branch_r=branch_r, mc_threshold=mc_threshold)
        vec += st.pi * v
        samples += z
    return vec, samples


def reliability_rss(g: UncertainGraph, s: int, t: int, samples: int, seed: int = 0,
                    branch_r: int = 5, mc_threshold: int = 8) -> ReliabilityEstimate:
    """Recursive stratified sampling estimate of R(s, t).

    Unbiased: every stratum is estimated without bias and weighted by its
    exact probability; strata whose nominal allotment rounds to zero still
    receive one sample, so reported samples_used can slightly exceed the
    request.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    if branch_r < 1 or mc_threshold < 1:
        raise ValueError("branch_r and mc_threshold must be at least 1")
    if s == t:
        return ReliabilityEstimate(1.0, 0.0, 0, "rss")
    value, var, used = _rss_scalar(
        _State.from_graph(g, s), t, samples, seed, (), branch_r, mc_threshold
    )
    return ReliabilityEstimate(value, var, used, "rss")


# ---------------------------------------------------------------------------
# dispatch and whole-graph vectors
# ---------------------------------------------------------------------------


def estimate(g: UncertainGraph, s: int, t: int, config: EstimatorConfig = EstimatorConfig()) -> ReliabilityEstimate:
    """Answer one reliability query according to the configured method."""
    method = config.method
    if method == "auto":
        method = "exact" if g.m <= config.exact_cap else "rss"
    if method == "exact":
        return reliability_exact(g, s, t, cap=config.exact_cap)
    if method == "mc":
        return reliability_mc(g, s, t, config.samples, config.seed)
    if method == "rss":
        return reliability_rss(g, s, t, config.samples, config.seed,
                               config.branch_r, config.mc_threshold)
    raise ValueError(f"unknown estimator method {config.method!r}")


def reliability_all_from(g: UncertainGraph, s: int, samples: int, seed: int = 0,
                         method: str = "mc", branch_r: int = 5,
                         mc_threshold: int = 8) -> np.ndarray:
    """Vector of estimated reliabilities from s to every node (entry s is 1)."""
    if samples <= 0:
        raise ValueError("samples must be positive")
    state = _State.from_graph(g, s)
    if method == "mc":
        counts, used = _mc_counts(state, samples, seed, vector=True, t=None)
        vec = counts / used
        vec[s] = 1.0
        return vec
    if method == "rss":
        vec, _ = _rss_vector(state, samples, seed, (), branch_r, mc_threshold)
        return vec
    raise ValueError(f"unknown method {method!r} (expected 'mc' or 'rss')")


def reliability_all_to(g: UncertainGraph, t: int, samples: int, seed: int = 0,
                       method: str = "mc", branch_r: int = 5,
                       mc_threshold: int = 8) -> np.ndarray:
    """Vector of estimated reliabilities from every node to t (entry t is 1)."""
    return reliability_all_from(g.reversed(), t, samples, seed, method, branch_r, mc_threshold)


def reach_counts(g: UncertainGraph, sources, samples: int, seed: int = 0) -> np.ndarray:
    """Per-node counts of sampled worlds reachable from any of the sources."""
    if samples <= 0:
        raise ValueError("samples must be positive")
    sources = sorted(set(int(x) for x in sources))
    if not sources:
        raise ValueError("sources must be non-empty")
    start_vec = np.zeros(g.n, dtype=bool)
    start_vec[sources] = True
    m = g.m
    if m == 0:
        counts = np.zeros(g.n, dtype=np.int64)
        counts[start_vec] = samples
        return counts
    if m <= _SWEEP_EDGE_LIMIT:
        masks = uniform_batch(seed, samples, m) < g.prob
        return _sweep_counts(g.n, g.src, g.dst, g.directed, masks, start_vec)
    counts = np.zeros(g.n, dtype=np.int64)
    for i in range(samples):
        mask = world_stream(seed, i, m).random(m) < g.prob
        a, b = g.src[mask], g.dst[mask]
        if not g.directed:
            a, b = np.concatenate([a, b]), np.concatenate([b, a])
        visited = start_vec.copy()
        if len(a):
            adjm = sp.csr_matrix((np.ones(len(a), dtype=np.int8), (a, b)), shape=(g.n, g.n))
            for s0 in sources:
                order = breadth_first_order(adjm, s0, directed=True, return_predecessors=False)
                visited[order] = True
        counts[visited] += 1
    return counts


# ---------------------------------------------------------------------------
# sample-size calibration via the index of dispersion
# ---------------------------------------------------------------------------


def _run_method(g, s, t, method, samples, seed):
    if method == "mc":
        return reliability_mc(g, s, t, samples, seed)
    if method == "rss":
        return reliability_rss(g, s, t, samples, seed)
    raise ValueError(f"unknown method {method!r} (expected 'mc' or 'rss')")


def dispersion(g: UncertainGraph, queries, samples: int, repeats: int,
               seed: int = 0, method: str = "mc") -> DispersionStats:
    """Index of dispersion rho = V_Z / R_Z across repeated estimates.

    V_Z is the mean across queries of the across-repeat sample variance and
    R_Z the mean estimated reliability. Raises when every query estimates to
    zero (rho undefined).
    """
    queries = list(queries)
    if not queries or repeats < 2:
        raise ValueError("need at least one query and two repeats")
    variances = []
    means = []
    for qi, (s, t) in enumerate(queries):
        vals = np.array([
            _run_method(g, s, t, method, samples, derive_seed(seed, qi, rep)).value
            for rep in range(repeats)
        ])
        variances.append(vals.var(ddof=1))
        means.append(vals.mean())
    v_z = float(np.mean(variances))
    r_z = float(np.mean(means))
    if r_z == 0.0:
        raise RelgainError("all queries estimate zero reliability; dispersion undefined")
    return DispersionStats(v_z / r_z, repeats, v_z, r_z)


def converged_sample_size(g: UncertainGraph, queries, grid, repeats: int = 10,
                          threshold: float = 1e-3, seed: int = 0,
                          method: str = "mc") -> int:
    """Smallest sample size in `grid` whose index of dispersion is below threshold.

    Falls back to the largest grid entry (with a warning) when none converge.
    """
    grid = sorted(set(int(z) for z in grid))
    if not grid:
        raise ValueError("sample size grid is empty")
    for Z in grid:
        stats = dispersion(g, queries, Z, repeats, derive_seed(seed, Z), method)
        if stats.rho < threshold:
            return Z
    warnings.warn(
        f"no sample size in {grid} reached dispersion < {threshold}; using {grid[-1]}",
        stacklevel=2,
    )
    return grid[-1]
