import itertools
from fractions import Fraction

import numpy as np

from edcsmatch.comm import (
    Message,
    build_fractional_x,
    comm_config,
    fractional_pipeline,
    partition_edges,
    run_k_party,
    run_two_party,
    verify_xval,
)
from edcsmatch.graph import FractionalMatching, WeightedGraph, is_valid_matching, max_weight_matching_on
from oracles import brute_mu_w, random_general, theory_beta_mp

TRIANGLE = WeightedGraph.from_edges(3, [(0, 1, 2), (1, 2, 2), (0, 2, 2)])


def random_weighted(seed, n=10, p=0.5, W=4):
    rng = np.random.default_rng(seed)
    return WeightedGraph.from_edges(n, random_general(rng, n, p, W))


class TestConfig:
    def test_theory_values(self):
        cfg = comm_config("0.1", 3)
        assert cfg.lam == Fraction(1, 20480)
        assert cfg.beta == theory_beta_mp(Fraction(1, 20480), 3, power=4)
        assert cfg.p == Fraction(1, 2) and cfg.mode == "theory"

    def test_p_follows_k(self):
        assert comm_config("0.1", 1, 5).p == Fraction(1, 5)


class TestPartition:
    def test_deterministic(self):
        g = random_weighted(0)
        assert partition_edges(g, 2, 9).assignment.tolist() == partition_edges(g, 2, 9).assignment.tolist()

    def test_single_edge(self):
        g = WeightedGraph.from_edges(2, [(0, 1)])
        p = partition_edges(g, 3, 0)
        assert sum(p.party(i).size for i in range(3)) == 1

    def test_uniform_fractions(self):
        m = 10**4
        g = WeightedGraph(m + 1, tuple((0, v, 1) for v in range(1, m + 1)))
        for k in (2, 3, 5):
            p = partition_edges(g, k, 1)
            sigma = (m * (1 / k) * (1 - 1 / k)) ** 0.5
            for i in range(k):
                assert abs(p.party(i).size - m / k) <= 5 * sigma


class TestTwoParty:
    def test_everything_with_bob(self):
        g = random_weighted(1)
        cfg = comm_config("0.1", 4, beta=8, lam="0.1")
        out, msg, _ = run_two_party(g, cfg, 0, assignment=[1] * g.m)
        assert len(msg.payload) == 0 and msg.words == 2
        assert out.weight == max_weight_matching_on(g, range(g.m)).weight
        if g.m <= 16:
            assert out.weight == brute_mu_w(g.edges)

    def test_everything_with_alice(self):
        g = random_weighted(2)
        cfg = comm_config("0.1", 4, beta=8, lam="0.1")
        out, msg, tr = run_two_party(g, cfg, 0, assignment=[0] * g.m)
        assert out.weight == max_weight_matching_on(g, tr.candidate_ids).weight

    def test_triangle_every_partition(self):
        for cfg in (comm_config("0.1", 2), comm_config("0.1", 2, beta=4, lam="0.1")):
            for a in itertools.product((0, 1), repeat=3):
                out, msg, _ = run_two_party(TRIANGLE, cfg, 0, assignment=a)
                assert out.weight == 2
                assert msg.words == 3 * len(msg.payload) + 2

    def test_output_dominates_each_side(self):
        for seed in range(10):
            g = random_weighted(seed, 12, 0.4)
            cfg = comm_config("0.1", 4, beta=6, lam="0.1")
            out, msg, tr = run_two_party(g, cfg, seed)
            assert is_valid_matching(g, out.edges)
            bob = partition_edges(g, 2, seed).party(1)
            assert out.weight >= max_weight_matching_on(g, bob).weight
            assert out.weight >= max_weight_matching_on(g, tr.candidate_ids).weight
            assert len(msg.payload) <= tr.h_edges + tr.u_edges

    def test_message_words(self):
        assert Message(((0, 1, Fraction(2)),)).words == 5


class TestKParty:
    def test_two_parties_coincide(self):
        g = random_weighted(3, 12, 0.5)
        cfg = comm_config("0.1", 4, beta=6, lam="0.1")
        for seed in range(5):
            a, _, _ = run_two_party(g, cfg, seed)
            b, _, _ = run_k_party(g, 2, cfg, seed)
            assert a.edges == b.edges

    def test_many_parties_still_valid(self):
        g = random_weighted(4, 8, 0.6)
        k = g.m + 1
        cfg = comm_config("0.1", 4, k, beta=6, lam="0.1")
        assignment = list(range(g.m))
        out, words, tr = run_k_party(g, k, cfg, 0, assignment=assignment)
        assert is_valid_matching(g, out.edges)
        assert tr.p == Fraction(1, k)
        assert max(tr.state_words, default=0) <= tr.state_budget


class TestFractional:
    def test_single_edge_in_star(self):
        g = WeightedGraph.from_edges(2, [(0, 1, 3)])
        fx = build_fractional_x(g, [0], [0], 7)
        assert fx.x[0] == 1

    def test_single_edge_outside_star(self):
        g = WeightedGraph.from_edges(2, [(0, 1, 3)])
        fx = build_fractional_x(g, [0], [], 7)
        assert fx.x[0] == Fraction(1, 7)

    def test_empty(self):
        g = WeightedGraph.from_edges(2, [(0, 1, 3)])
        assert build_fractional_x(g, [], [], 5).x.values == {}

    def test_peeling_matches_naive_loop(self):
        for seed in range(15):
            g = random_weighted(seed, 8, 0.6)
            rng = np.random.default_rng(seed)
            cand = [e for e in range(g.m) if rng.random() < 0.8]
            star = max_weight_matching_on(g, [e for e in range(g.m) if rng.random() < 0.7]).edges
            T = int(rng.integers(1, 12))
            fast = build_fractional_x(g, cand, star, T)
            alive, counts = set(cand), {}
            for _ in range(T):
                mi = max_weight_matching_on(g, alive).edges
                for e in mi:
                    counts[e] = counts.get(e, 0) + 1
                alive -= {e for e in mi if e not in star}
            assert fast.counts == counts
            for e, v in fast.x.values.items():
                if e not in star:
                    assert v <= Fraction(1, T)

    def test_verify_examples(self):
        g = WeightedGraph.from_edges(2, [(0, 1, 3)])
        x = build_fractional_x(g, [0], [0], 4).x
        rep = verify_xval(g, x, [0], "0.1", [0], 4)
        assert rep.ok and rep.total == 3 == rep.mu_late
        zero = verify_xval(g, FractionalMatching(g, {}), [0], "0.1", [0], 4)
        assert not zero.ok

    def test_theory_pipeline_small(self):
        for seed in range(5):
            g = random_weighted(seed, 7, 0.6, 2)
            fx, rep, _ = fractional_pipeline(g, comm_config(Fraction(1, 5), 2), seed, blossom=True)
            assert rep.ok and rep.blossom_ok
