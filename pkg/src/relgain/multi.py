"""Reliability improvement for source and target sets.

Three aggregates over the |S| x |T| pair reliabilities are supported:

  avg  batch greedy over one pooled candidate set; rounds are scored by the
       summed subgraph reliability across pairs, and the reported aggregate
       is the mean pair reliability on the full graph.
  min  repeatedly strengthens whichever pair is currently weakest, spending
       the budget in installments of k1 edges.
  max  the same installment loop focused on the currently strongest pair;
       sources and targets must be disjoint.

A query with one source and one target short-circuits every aggregate to the
plain single-pair batch-greedy pipeline.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .candidates import CandidateEdge, CandidateSet, eliminate_multi, prune_by_paths
from .estimators import EstimatorConfig, estimate, reach_counts
from .graph import UncertainGraph
from .paths import augment, top_l_paths
from .rng import derive_seed
from .selection import RoundRecord, SelectionResult, build_batches, improve_single_pair

__all__ = [
    "AGGREGATES",
    "MultiQuery",
    "select_multi",
    "select_multi_avg",
    "select_multi_min",
    "select_multi_max",
    "influence_spread",
]

AGGREGATES = ("avg", "min", "max")


@dataclass(frozen=True)
class MultiQuery:
    """Source set, target set, aggregate, and edge budget for one request."""

    sources: tuple
    targets: tuple
    aggregate: str = "avg"
    k: int = 10
    k1_ratio: float = 0.10

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(int(x) for x in self.sources))
        object.__setattr__(self, "targets", tuple(int(x) for x in self.targets))
        if not self.sources or not self.targets:
            raise ValueError("sources and targets must be non-empty")
        if self.aggregate not in AGGREGATES:
            raise ValueError(
                f"unknown aggregate {self.aggregate!r} (expected one of {AGGREGATES})")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not 0.0 < self.k1_ratio <= 1.0:
            raise ValueError(f"k1_ratio must be in (0, 1], got {self.k1_ratio}")
        if self.aggregate == "max" and set(self.sources) & set(self.targets):
            raise ValueError(
                "the max aggregate needs disjoint source and target sets")

    @property
    def pairs(self) -> tuple:
        return tuple((s, t) for s in self.sources for t in self.targets)

    @property
    def k1(self) -> int:
        return max(1, round(self.k1_ratio * self.k))


def _pair_reliabilities(g: UncertainGraph, pairs, config: EstimatorConfig) -> list[float]:
    return [1.0 if s == t else estimate(g, s, t, config).value for s, t in pairs]


def _is_single(query: MultiQuery) -> bool:
    return len(query.sources) == 1 and len(query.targets) == 1


def _single_pair(g, query, r, l, h, zeta, prob_overrides, config):
    return improve_single_pair(g, query.sources[0], query.targets[0], query.k,
                               method="be", r=r, l=l, h=h, zeta=zeta,
                               prob_overrides=prob_overrides, config=config)


# ---------------------------------------------------------------------------
# avg: pooled batch greedy on the summed pair objective
# ---------------------------------------------------------------------------


class _PooledBench:
    """Pooled top paths for every pair plus a cached per-pair subgraph estimator."""

    def __init__(self, g: UncertainGraph, cands: CandidateSet, pairs,
                 config: EstimatorConfig, l: int):
        self.g, self.cands, self.config = g, cands, config
        self.pairs = tuple(pairs)
        self.real = [(s, t) for s, t in self.pairs if s != t]
        self.const = len(self.pairs) - len(self.real)
        self.by_pair = {(e.u, e.v): e for e in cands.edges}
        self.aug = augment(g, cands)
        pair_eid = {}
        for i in range(self.aug.m):
            u, v = int(self.aug.src[i]), int(self.aug.dst[i])
            pair_eid[(u, v)] = i
            if not self.aug.directed:
                pair_eid[(v, u)] = i
        self.cand_eid = {(e.u, e.v): pair_eid[(e.u, e.v)] for e in cands.edges}
        # one entry per distinct node sequence; owners records which pairs use it
        self.paths = []
        self.path_eids = []
        self.path_owners = []
        seen: dict[tuple, int] = {}
        for j, (s, t) in enumerate(self.real):
            for p in top_l_paths(self.aug, s, t, l):
                idx = seen.get(p.nodes)
                if idx is None:
                    seen[p.nodes] = len(self.paths)
                    self.paths.append(p)
                    self.path_eids.append(frozenset(
                        pair_eid[(a, b)] for a, b in zip(p.nodes, p.nodes[1:])))
                    self.path_owners.append({j})
                else:
                    self.path_owners[idx].add(j)
        self._cache: dict[tuple, float] = {}

    def objective(self, selected: frozenset, extra_eid: int | None = None) -> float:
        """Sum over pairs of the reliability on that pair's active-path subgraph."""
        total = float(self.const)
        for j, (s, t) in enumerate(self.real):
            eids = set() if extra_eid is None else {extra_eid}
            for path, peids, owners in zip(self.paths, self.path_eids, self.path_owners):
                if j in owners and path.candidate_edges <= selected:
                    eids.update(peids)
            total += self._sub(j, s, t, frozenset(eids))
        return total

    def _sub(self, j: int, s: int, t: int, eids: frozenset) -> float:
        key = (j, eids)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        eid_list = sorted(eids)
        nodes = {s, t}
        for eid in eid_list:
            nodes.add(int(self.aug.src[eid]))
            nodes.add(int(self.aug.dst[eid]))
        order = sorted(nodes)
        remap = {u: i for i, u in enumerate(order)}
        sub = UncertainGraph(
            len(order),
            [remap[int(self.aug.src[e])] for e in eid_list],
            [remap[int(self.aug.dst[e])] for e in eid_list],
            [float(self.aug.prob[e]) for e in eid_list],
            directed=self.aug.directed,
        )
        cfg = self.config.with_seed(derive_seed(self.config.seed, "subgraph", j, *eid_list))
        val = estimate(sub, remap[s], remap[t], cfg).value
        self._cache[key] = val
        return val

    def finalize(self, chosen, trace, flags) -> SelectionResult:
        base_vals = _pair_reliabilities(self.g, self.pairs, self.config)
        if chosen:
            improved = self.g.with_edges([(e.u, e.v, e.prob) for e in chosen])
            new_vals = _pair_reliabilities(improved, self.pairs, self.config)
        else:
            new_vals = base_vals
        base = float(np.mean(base_vals))
        new = float(np.mean(new_vals))
        return SelectionResult("avg", tuple(chosen), base, new, new - base,
                               tuple(trace), tuple(flags))


def select_multi_avg(g: UncertainGraph, query: MultiQuery, r: int = 100,
                     l: int = 30, h: int | None = 3, zeta: float = 0.5,
                     prob_overrides: dict | None = None,
                     config: EstimatorConfig = EstimatorConfig()) -> SelectionResult:
    """Batch greedy on pooled paths, scored by the summed pair objective."""
    if _is_single(query):
        return _single_pair(g, query, r, l, h, zeta, prob_overrides, config)
    cands = eliminate_multi(g, query.sources, query.targets, r=r, h=h,
                            zeta=zeta, prob_overrides=prob_overrides, config=config)
    if cands.edges:
        aug = augment(g, cands)
        pooled = []
        for s, t in query.pairs:
            if s != t:
                pooled.extend(top_l_paths(aug, s, t, l))
        pruned = prune_by_paths(cands, pooled)
        if pruned.edges:
            cands = pruned
    bench = _PooledBench(g, cands, query.pairs, config, l)
    k = query.k
    if k >= len(cands.edges) and cands.edges:
        return bench.finalize(list(cands.edges), [], ["k-covers-all"])
    if not cands.edges:
        return bench.finalize([], [], ["no-candidates"])

    batches = [b for b in build_batches(bench.paths) if b.label]
    selected: set = set()
    chosen: list[CandidateEdge] = []
    trace: list[RoundRecord] = []
    flags: list[str] = []
    while len(chosen) < k:
        remaining = k - len(chosen)
        cur = bench.objective(frozenset(selected))
        fitting = []
        for b in batches:
            need = b.label - selected
            if 0 < len(need) <= remaining:
                fitting.append((b, need))
        if not fitting:
            break
        evals = []
        for b, need in fitting:
            gain = bench.objective(frozenset(selected | b.label)) - cur
            evals.append((gain / len(need), gain, len(need), b, need))
        evals.sort(key=lambda e: (-e[0], -e[1], e[2], e[3].sort_key()))
        score, gain, _, best, need = evals[0]
        note = "batch"
        if gain <= 0.0:
            best, need = min(fitting, key=lambda bn: (-bn[0].best_prob, bn[0].sort_key()))
            gain, score, note = 0.0, 0.0, "stall"
        picked = tuple(sorted(need))
        for pair in picked:
            chosen.append(bench.by_pair[pair])
        selected |= best.label
        batches = [b for b in batches if not b.label <= selected]
        trace.append(RoundRecord(len(trace) + 1, note, picked, gain, score,
                                 tuple((b.sort_key(), gv, sv) for sv, gv, _, b, _ in evals)))
    if len(chosen) < k:
        if "fill" not in flags:
            flags.append("fill")
        while len(chosen) < k:
            cur = bench.objective(frozenset(selected))
            scored = []
            for e in cands.edges:
                pair = (e.u, e.v)
                if pair in selected:
                    continue
                gain = bench.objective(frozenset(selected), bench.cand_eid[pair]) - cur
                scored.append((-gain, -e.prob, pair))
            if not scored:
                break
            scored.sort()
            neg_gain, _, pair = scored[0]
            selected.add(pair)
            chosen.append(bench.by_pair[pair])
            trace.append(RoundRecord(len(trace) + 1, "fill", (pair,), -neg_gain,
                                     -neg_gain, tuple((p, -gv) for gv, _, p in scored)))
    return bench.finalize(chosen, trace, flags)


# ---------------------------------------------------------------------------
# min / max: installment loop on the extreme pair
# ---------------------------------------------------------------------------


def _select_installments(g: UncertainGraph, query: MultiQuery, aggregate: str,
                         r: int, l: int, h: int | None, zeta: float,
                         prob_overrides: dict | None,
                         config: EstimatorConfig) -> SelectionResult:
    """Spend the budget k1 edges at a time on the extreme pair.

    Each installment re-estimates every pair on the current graph, picks the
    weakest (min) or strongest (max) live pair, and runs the single-pair
    batch greedy with the installment budget.  A pair that yields nothing is
    demoted until some other pair makes progress; the loop stops when all
    pairs are demoted or the budget is spent.
    """
    pairs = query.pairs
    k1 = query.k1
    cur_graph = g
    chosen: list[CandidateEdge] = []
    trace: list[RoundRecord] = []
    flags: list[str] = []
    demoted: set = set()
    while len(chosen) < query.k:
        rels = _pair_reliabilities(cur_graph, pairs, config)
        live = [i for i in range(len(pairs)) if i not in demoted]
        if not live:
            flags.append("saturated")
            break
        if aggregate == "min":
            focus = min(live, key=lambda i: (rels[i], i))
        else:
            focus = max(live, key=lambda i: (rels[i], -i))
        s, t = pairs[focus]
        evals = tuple((pairs[i], rels[i]) for i in range(len(pairs)))
        if s == t:
            # already certain, nothing to buy for this pair
            demoted.add(focus)
            trace.append(RoundRecord(len(trace) + 1, "demote", (), 0.0,
                                     rels[focus], evals))
            continue
        budget = min(k1, query.k - len(chosen))
        res = improve_single_pair(cur_graph, s, t, budget, method="be", r=r,
                                  l=l, h=h, zeta=zeta,
                                  prob_overrides=prob_overrides, config=config)
        if not res.chosen or res.gain <= 0.0:
            demoted.add(focus)
            trace.append(RoundRecord(len(trace) + 1, "demote", (), 0.0,
                                     rels[focus], evals))
            continue
        demoted.clear()
        cur_graph = cur_graph.with_edges([(e.u, e.v, e.prob) for e in res.chosen])
        chosen.extend(res.chosen)
        trace.append(RoundRecord(len(trace) + 1, "installment",
                                 tuple((e.u, e.v) for e in res.chosen),
                                 res.gain, rels[focus], evals))
    agg = min if aggregate == "min" else max
    base = float(agg(_pair_reliabilities(g, pairs, config)))
    new = float(agg(_pair_reliabilities(cur_graph, pairs, config)))
    return SelectionResult(aggregate, tuple(chosen), base, new, new - base,
                           tuple(trace), tuple(flags))


def select_multi_min(g: UncertainGraph, query: MultiQuery, r: int = 100,
                     l: int = 30, h: int | None = 3, zeta: float = 0.5,
                     prob_overrides: dict | None = None,
                     config: EstimatorConfig = EstimatorConfig()) -> SelectionResult:
    """Raise the floor: installments always target the weakest pair."""
    if _is_single(query):
        return _single_pair(g, query, r, l, h, zeta, prob_overrides, config)
    return _select_installments(g, query, "min", r, l, h, zeta, prob_overrides, config)


def select_multi_max(g: UncertainGraph, query: MultiQuery, r: int = 100,
                     l: int = 30, h: int | None = 3, zeta: float = 0.5,
                     prob_overrides: dict | None = None,
                     config: EstimatorConfig = EstimatorConfig()) -> SelectionResult:
    """Push the ceiling: installments always target the strongest pair."""
    if _is_single(query):
        return _single_pair(g, query, r, l, h, zeta, prob_overrides, config)
    if set(query.sources) & set(query.targets):
        raise ValueError("the max aggregate needs disjoint source and target sets")
    return _select_installments(g, query, "max", r, l, h, zeta, prob_overrides, config)


_AGG_FNS = {"avg": select_multi_avg, "min": select_multi_min, "max": select_multi_max}


def select_multi(g: UncertainGraph, query: MultiQuery, r: int = 100, l: int = 30,
                 h: int | None = 3, zeta: float = 0.5,
                 prob_overrides: dict | None = None,
                 config: EstimatorConfig = EstimatorConfig()) -> SelectionResult:
    """Dispatch on the query's aggregate."""
    return _AGG_FNS[query.aggregate](g, query, r=r, l=l, h=h, zeta=zeta,
                                     prob_overrides=prob_overrides, config=config)


# ---------------------------------------------------------------------------
# spread metric
# ---------------------------------------------------------------------------


def influence_spread(g: UncertainGraph, sources, targets, samples: int,
                     seed: int = 0) -> float:
    """Expected number of targets reachable from at least one source."""
    src = sorted(set(int(x) for x in sources))
    tgt = sorted(set(int(x) for x in targets))
    if not src or not tgt:
        raise ValueError("sources and targets must be non-empty")
    counts = reach_counts(g, src, samples, seed)
    return float(counts[tgt].sum() / samples)
