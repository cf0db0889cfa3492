"""Baseline selector tests: counterexample replays and a spectral oracle."""
import numpy as np
import pytest

from relgain.baselines import (
    EigenScores,
    betweenness_centrality,
    degree_centrality,
    eigen_pair_ranking,
    eigen_scores,
    select_centrality,
    select_eigen,
    select_hill_climbing,
    select_individual_topk,
)
from relgain.candidates import CandidateEdge, CandidateSet
from relgain.estimators import EstimatorConfig
from relgain.graph import UncertainGraph

from helpers import (
    empty_triangle_graph,
    enum_reliability,
    closed_form_candidates,
    closed_form_graph,
    random_graph,
)

CFG = EstimatorConfig(samples=20000, seed=7)


def cand_set(triples):
    return CandidateSet(tuple(CandidateEdge(u, v, p) for u, v, p in triples), (), ())


def random_missing(rng, g, count):
    triples = []
    while len(triples) < count:
        u, v = int(rng.integers(g.n)), int(rng.integers(g.n))
        if u == v or g.has_edge(u, v):
            continue
        if any((a, b) == (u, v) or (not g.directed and (b, a) == (u, v))
               for a, b, _ in triples):
            continue
        triples.append((u, v, 0.5))
    return triples


class TestIndividualTopK:
    def test_single_candidate(self):
        g = closed_form_graph(0.5)
        res = select_individual_topk(g, cand_set([(0, 1, 0.7)]), 0, 3, 1, CFG)
        assert [(e.u, e.v) for e in res.chosen] == [(0, 1)]

    def test_bridge_to_source_always_wins(self):
        # the s-A candidate completes a path alone; s-B needs two hops of
        # alpha, and B-t alone leaves s isolated
        for alpha, zeta in [(0.3, 0.2), (0.5, 0.7), (0.9, 0.9)]:
            g = closed_form_graph(alpha)
            res = select_individual_topk(g, cand_set(closed_form_candidates(zeta)), 0, 3, 1, CFG)
            assert [(e.u, e.v) for e in res.chosen] == [(0, 1)]
            assert res.gain == pytest.approx(alpha * zeta, abs=1e-9)

    def test_ties_break_by_candidate_order(self):
        g = empty_triangle_graph()
        res = select_individual_topk(g, cand_set([(0, 2, 0.5), (2, 1, 0.5)]), 0, 1, 1, CFG)
        # both score zero alone; the earlier candidate wins
        assert [(e.u, e.v) for e in res.chosen] == [(0, 2)]

    def test_evaluations_recorded_per_candidate(self):
        g = closed_form_graph(0.5)
        res = select_individual_topk(g, cand_set(closed_form_candidates(0.7)), 0, 3, 2, CFG)
        assert len(res.trace[0].evaluations) == 3


class TestHillClimbing:
    def test_counterexample_marginals_are_not_submodular(self):
        # empty 3-node graph, candidates st, sA, At at one half each
        g = empty_triangle_graph()
        cands = cand_set([(0, 1, 0.5), (0, 2, 0.5), (2, 1, 0.5)])
        res = select_hill_climbing(g, cands, 0, 1, 3, CFG)
        picks = [r.picked[0] for r in res.trace]
        gains = [r.gain for r in res.trace]
        assert picks == [(0, 1), (0, 2), (2, 1)]
        assert gains == pytest.approx([0.5, 0.0, 0.125], abs=1e-12)
        # marginal of At grew from 0 (given {st}) to 0.125 (given {st, sA})
        round2 = dict(res.trace[1].evaluations)
        round3 = dict(res.trace[2].evaluations)
        assert round2[(2, 1)] == pytest.approx(0.0, abs=1e-12)
        assert round3[(2, 1)] == pytest.approx(0.125, abs=1e-12)
        assert res.new_reliability == pytest.approx(0.625, abs=1e-12)

    def test_counterexample_marginals_are_not_supermodular(self):
        # same graph with s-A pre-wired: At's marginal shrinks from 0.25 to 0.125
        g = empty_triangle_graph().with_edges([(0, 2, 0.5)])
        cands = cand_set([(0, 1, 0.5), (2, 1, 0.5)])
        res = select_hill_climbing(g, cands, 0, 1, 2, CFG)
        round1 = dict(res.trace[0].evaluations)
        round2 = dict(res.trace[1].evaluations)
        assert round1[(2, 1)] == pytest.approx(0.25, abs=1e-12)
        assert round1[(0, 1)] == pytest.approx(0.5, abs=1e-12)
        assert round2[(2, 1)] == pytest.approx(0.125, abs=1e-12)

    def test_k1_matches_topk_first_pick(self):
        rng = np.random.default_rng(81)
        for _ in range(5):
            g = random_graph(rng, 6, 7, directed=False)
            triples = random_missing(rng, g, 4)
            hc = select_hill_climbing(g, cand_set(triples), 0, 5, 1, CFG)
            tk = select_individual_topk(g, cand_set(triples), 0, 5, 1, CFG)
            assert hc.chosen == tk.chosen

    def test_weakly_dominates_topk(self):
        rng = np.random.default_rng(82)
        for _ in range(8):
            g = random_graph(rng, 6, 7, directed=False)
            triples = random_missing(rng, g, 4)
            hc = select_hill_climbing(g, cand_set(triples), 0, 5, 2, CFG)
            tk = select_individual_topk(g, cand_set(triples), 0, 5, 2, CFG)
            assert hc.gain >= tk.gain - 1e-12

    def test_per_round_reliability_non_decreasing(self):
        rng = np.random.default_rng(83)
        g = random_graph(rng, 7, 9, directed=False)
        triples = random_missing(rng, g, 5)
        res = select_hill_climbing(g, cand_set(triples), 0, 6, 4, CFG)
        assert all(r.gain >= -1e-12 for r in res.trace)
        replay = enum_reliability(
            g.with_edges([(e.u, e.v, e.prob) for e in res.chosen]), 0, 6)
        assert res.new_reliability == pytest.approx(replay, abs=1e-9)


class TestCentrality:
    def test_star_hub_ranks_first_by_degree(self):
        g = UncertainGraph(5, [0, 0, 0, 0], [1, 2, 3, 4], [0.9, 0.8, 0.7, 0.6],
                           directed=False)
        c = degree_centrality(g)
        assert int(np.argmax(c)) == 0
        assert c[0] == pytest.approx(3.0)

    def test_degree_hand_sum(self):
        g = UncertainGraph(4, [0, 1, 2], [1, 2, 3], [0.5, 0.4, 0.3], directed=True)
        c = degree_centrality(g)
        assert c.tolist() == pytest.approx([0.5, 0.9, 0.7, 0.3])

    def test_betweenness_on_path_graph(self):
        g = UncertainGraph(3, [0, 1], [1, 2], [0.5, 0.5], directed=False)
        c = betweenness_centrality(g)
        assert c[1] > 0
        assert c[0] == 0 and c[2] == 0

    def test_selection_prefers_central_pairs(self):
        g = UncertainGraph(5, [0, 0, 0, 0], [1, 2, 3, 4], [0.9, 0.9, 0.9, 0.9],
                           directed=False)
        cands = cand_set([(1, 2, 0.5), (3, 4, 0.5), (0, 1, 0.5)])
        res = select_centrality(g, cand_set([(1, 2, 0.5), (3, 4, 0.5)]), 1, 2, 1,
                                mode="degree", config=CFG)
        assert len(res.chosen) == 1

    def test_tie_pairs_resolve_ascending(self):
        g = UncertainGraph(4, [0, 1, 2, 3], [1, 2, 3, 0], [0.5] * 4, directed=False)
        res = select_centrality(g, cand_set([(1, 3, 0.5), (0, 2, 0.5)]), 0, 2, 1,
                                mode="degree", config=CFG)
        assert [(e.u, e.v) for e in res.chosen] == [(0, 2)]

    def test_unknown_mode(self):
        g = closed_form_graph(0.5)
        with pytest.raises(ValueError):
            select_centrality(g, cand_set(closed_form_candidates(0.5)), 0, 3, 1, mode="pagerank")


def dense_oracle(g):
    """Leading eigenpair by dense decomposition (independent of power iteration)."""
    A = np.zeros((g.n, g.n))
    asrc, adst, aeid = g.arc_arrays()
    A[asrc, adst] = g.prob[aeid]
    w, vecs = np.linalg.eig(A)
    i = int(np.argmax(w.real))
    lam = float(w[i].real)
    v = np.abs(vecs[:, i].real)
    v /= np.linalg.norm(v)
    wl, lvecs = np.linalg.eig(A.T)
    j = int(np.argmax(wl.real))
    u = np.abs(lvecs[:, j].real)
    u /= np.linalg.norm(u)
    return lam, u, v


class TestEigen:
    def test_lambda_matches_dense_oracle(self):
        rng = np.random.default_rng(84)
        done = 0
        while done < 20:
            g = random_graph(rng, 8, 16, directed=bool(done % 2))
            lam, _, _ = dense_oracle(g)
            A_mag = sorted(abs(x) for x in np.linalg.eigvals(
                _dense_matrix(g)))
            if len(A_mag) >= 2 and A_mag[-1] - A_mag[-2] < 1e-3:
                continue  # no spectral gap: power iteration legitimately slow
            scores = eigen_scores(g)
            assert scores.lam == pytest.approx(lam, abs=1e-6)
            done += 1

    def test_eigenpair_invariant(self):
        rng = np.random.default_rng(85)
        g = random_graph(rng, 8, 18, directed=True)
        scores = eigen_scores(g)
        A = _dense_matrix(g)
        assert np.allclose(A @ scores.v, scores.lam * scores.v, atol=1e-6)
        assert np.allclose(scores.u @ A, scores.lam * scores.u, atol=1e-6)
        assert np.linalg.norm(scores.v) == pytest.approx(1.0)
        assert (scores.v >= -1e-12).all() and (scores.u >= -1e-12).all()

    def test_symmetric_graph_has_equal_left_right(self):
        rng = np.random.default_rng(86)
        g = random_graph(rng, 7, 12, directed=False)
        scores = eigen_scores(g)
        assert np.allclose(scores.u, scores.v)

    def test_degree_fields(self):
        g = UncertainGraph(4, [0, 0, 1], [1, 2, 2], [0.5, 0.5, 0.5], directed=True)
        scores = eigen_scores(g)
        assert scores.d_out == 2 and scores.d_in == 2

    def test_acyclic_graph_yields_zero_eigenvalue(self):
        g = UncertainGraph(4, [0, 0, 1], [1, 2, 2], [0.5, 0.5, 0.5], directed=True)
        scores = eigen_scores(g)
        assert scores.lam == 0.0
        assert np.linalg.norm(scores.v) == pytest.approx(1.0)

    def test_two_cycle_converges_despite_sign_flip_pair(self):
        # eigenvalues are +/-sqrt(0.27); the shifted iteration still settles
        g = UncertainGraph(2, [0, 1], [1, 0], [0.9, 0.3], directed=True)
        scores = eigen_scores(g)
        assert scores.lam == pytest.approx(np.sqrt(0.27), abs=1e-8)

    def test_selection_matches_dense_oracle_ranking(self):
        rng = np.random.default_rng(87)
        for _ in range(10):
            g = random_graph(rng, 8, 16, directed=False)
            triples = random_missing(rng, g, 5)
            cands = cand_set(triples)
            scores = eigen_scores(g)
            lam, u, v = dense_oracle(g)
            oracle = eigen_pair_ranking(
                EigenScores(lam, u, v, scores.d_in, scores.d_out), g, cands, 2)
            res = select_eigen(g, cands, 0, 7, 2, CFG)
            assert [(e.u, e.v) for e in res.chosen] == [(e.u, e.v) for e in oracle]

    def test_scale_invariance(self):
        rng = np.random.default_rng(88)
        g = random_graph(rng, 8, 16, directed=False, lo=0.2, hi=0.9)
        scaled = UncertainGraph(8, g.src, g.dst, g.prob * 0.5, directed=False)
        triples = random_missing(rng, g, 5)
        a = select_eigen(g, cand_set(triples), 0, 7, 2, CFG)
        b = select_eigen(scaled, cand_set(triples), 0, 7, 2, CFG)
        assert [(e.u, e.v) for e in a.chosen] == [(e.u, e.v) for e in b.chosen]


def _dense_matrix(g):
    A = np.zeros((g.n, g.n))
    asrc, adst, aeid = g.arc_arrays()
    A[asrc, adst] = g.prob[aeid]
    return A
