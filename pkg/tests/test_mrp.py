"""Layered-graph path improvement tests with a brute-force path oracle."""
import numpy as np
import pytest

from relgain.graph import UncertainGraph
from relgain.mrp import build_layered, improve_mrp
from relgain.paths import augment

from helpers import enum_simple_paths, closed_form_candidates, closed_form_graph, random_graph


def best_path_with_budget(g, cand_triples, s, t, k):
    """Max probability over simple paths using at most k candidate edges (oracle)."""
    aug = augment(g, cand_triples)
    best = 0.0
    for prob, nodes in enum_simple_paths(aug, s, t):
        used = 0
        for a, b in zip(nodes, nodes[1:]):
            for eid in range(aug.m):
                u, v = int(aug.src[eid]), int(aug.dst[eid])
                if (u, v) == (a, b) or (not aug.directed and (v, u) == (a, b)):
                    used += int(aug.candidate_mark[eid])
                    break
        if used <= k:
            best = max(best, prob)
    return best


class TestBuildLayered:
    def test_arc_counts(self):
        g = UncertainGraph(3, [0, 1], [1, 2], [0.5, 0.5], directed=True)
        mat, n = build_layered(g, [(0, 2, 0.5)], k=2)
        assert n == 3
        assert mat.shape == (9, 9)
        # 2 base arcs in each of 3 layers + 1 candidate arc in 2 transitions
        assert mat.nnz == 2 * 3 + 1 * 2

    def test_undirected_candidates_jump_both_ways(self):
        g = UncertainGraph(2, [], [], [], directed=False)
        mat, n = build_layered(g, [(0, 1, 0.5)], k=1)
        assert mat.nnz == 2  # 0@0 -> 1@1 and 1@0 -> 0@1


class TestImproveMrp:
    def test_isolated_source_instance(self):
        # base best path does not exist; one candidate at zeta bridges s-A
        # and the best single new edge gives probability zeta * alpha
        alpha, zeta = 0.5, 0.7
        g = closed_form_graph(alpha)
        res = improve_mrp(g, 0, 3, k=1, candidates=closed_form_candidates(zeta))
        assert [(e.u, e.v) for e in res.chosen] == [(0, 1)]
        assert res.base_reliability == 0.0
        assert res.new_reliability == pytest.approx(zeta * alpha, abs=1e-12)

    def test_budget_two_takes_detour_when_better(self):
        alpha, zeta = 0.5, 0.9
        g = closed_form_graph(alpha)
        res = improve_mrp(g, 0, 3, k=2, candidates=closed_form_candidates(zeta))
        # best two-candidate path s-B-t at zeta^2 = 0.81 beats s-A-t at 0.45
        assert res.new_reliability == pytest.approx(zeta * zeta, abs=1e-12)
        assert {(e.u, e.v) for e in res.chosen} == {(0, 2), (2, 3)}

    def test_no_improvement_when_base_path_is_best(self):
        g = UncertainGraph(3, [0, 1], [1, 2], [0.9, 0.9], directed=True)
        res = improve_mrp(g, 0, 2, k=1, candidates=[(0, 2, 0.1)])
        assert res.chosen == ()
        assert res.new_reliability == pytest.approx(0.81)
        assert res.gain == 0.0

    def test_matches_brute_force_on_random_graphs(self):
        rng = np.random.default_rng(51)
        for trial in range(40):
            directed = bool(trial % 2)
            g = random_graph(rng, 6, 6, directed=directed)
            triples = []
            while len(triples) < 3:
                u, v = int(rng.integers(6)), int(rng.integers(6))
                if u == v or g.has_edge(u, v):
                    continue
                if any((a, b) == (u, v) or (not directed and (b, a) == (u, v))
                       for a, b, _ in triples):
                    continue
                triples.append((u, v, round(float(rng.uniform(0.2, 0.9)), 3)))
            for k in (0, 1, 2, 3):
                oracle = best_path_with_budget(g, triples, 0, 5, k)
                res = improve_mrp(g, 0, 5, k=k, candidates=triples)
                assert res.new_reliability == pytest.approx(oracle, abs=1e-9), (
                    f"trial={trial} k={k}")

    def test_chosen_size_respects_budget(self):
        rng = np.random.default_rng(52)
        g = random_graph(rng, 8, 10, directed=False)
        triples = [(0, 4, 0.9), (4, 7, 0.9), (0, 5, 0.8), (5, 7, 0.8)]
        triples = [(u, v, p) for u, v, p in triples if not g.has_edge(u, v)]
        for k in (1, 2):
            res = improve_mrp(g, 0, 7, k=k, candidates=triples)
            assert len(res.chosen) <= k

    def test_implicit_candidates_cover_all_missing_pairs(self):
        g = UncertainGraph(3, [0], [1], [0.9], directed=True)
        res = improve_mrp(g, 0, 2, k=1, zeta=0.5)
        # direct s-t candidate at 0.5 beats 0.9 * 0.5 via node 1
        assert [(e.u, e.v) for e in res.chosen] == [(0, 2)]
        assert res.new_reliability == pytest.approx(0.5)

    def test_implicit_candidates_need_small_graph(self):
        g = UncertainGraph(2001, [0], [1], [0.5], directed=True)
        with pytest.raises(ValueError):
            improve_mrp(g, 0, 2000, k=1)

    def test_unreachable_flag(self):
        g = UncertainGraph(4, [0], [1], [0.5], directed=True)
        res = improve_mrp(g, 0, 3, k=1, candidates=[(1, 2, 0.5)])
        assert res.chosen == ()
        assert "unreachable" in res.flags

    def test_zero_probability_candidate_is_useless(self):
        g = UncertainGraph(3, [0], [1], [0.9], directed=True)
        res = improve_mrp(g, 0, 2, k=2, candidates=[(1, 2, 0.0)])
        assert res.chosen == ()
        assert "unreachable" in res.flags

    def test_source_equals_target(self):
        g = UncertainGraph(2, [0], [1], [0.5])
        res = improve_mrp(g, 0, 0, k=1, candidates=[(0, 1, 0.5)])
        assert res.new_reliability == 1.0 and res.chosen == ()

    def test_trace_reports_every_budget_level(self):
        g = closed_form_graph(0.5)
        res = improve_mrp(g, 0, 3, k=2, candidates=closed_form_candidates(0.7))
        levels = dict(res.trace[0].evaluations)
        assert set(levels) == {0, 1, 2}
        assert levels[0] == 0.0
        assert levels[1] == pytest.approx(0.35)

    def test_deterministic(self):
        g = closed_form_graph(0.9)
        a = improve_mrp(g, 0, 3, k=2, candidates=closed_form_candidates(0.7))
        b = improve_mrp(g, 0, 3, k=2, candidates=closed_form_candidates(0.7))
        assert a == b
