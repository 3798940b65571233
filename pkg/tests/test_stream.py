import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edcsmatch.errors import InvariantViolation, NonIntegralWeight
from edcsmatch.graph import SimpleGraph, WeightedGraph, max_weight_matching_exact
from edcsmatch.stream import (
    BatchStream,
    check_run_invariants,
    edcs_regime,
    finalize_weighted,
    late_concentration_report,
    make_config,
    parameters_from_epsilon,
    run_batch_bernstein,
    small_graph_fallback,
    structural_check,
    weighted_config,
    weighted_stream_adapter,
)
from edcsmatch.unfolding import unfold
from oracles import random_general, simulate_algorithm1, theory_beta_mp


def simple(n, pairs):
    us = np.array([p[0] for p in pairs], dtype=np.int64)
    vs = np.array([p[1] for p in pairs], dtype=np.int64)
    return SimpleGraph(n, us, vs)


class TestParameters:
    def test_lambda(self):
        assert parameters_from_epsilon(Fraction("0.256"), 1, 10, 10).lam == Fraction(1, 2000)

    def test_beta_matches_high_precision_oracle(self):
        cfg = parameters_from_epsilon("0.256", 1, 10, 10)
        assert cfg.beta == theory_beta_mp(Fraction(1, 2000), 1)
        for eps, b in (("0.1", 3), ("0.01", 1), ("0.3", 17)):
            lam = Fraction(eps) / 512
            assert parameters_from_epsilon(eps, b, 5, 5).beta == theory_beta_mp(lam, b)

    def test_edcs_regime(self):
        import mpmath
        lam, beta = edcs_regime("0.1")
        assert lam == Fraction(1, 1280)
        with mpmath.workdps(80):
            assert beta == int(mpmath.ceil(16 * mpmath.mpf(1280) ** 2 * mpmath.log(1280)))
        cfg = make_config("0.1", 1, 4, 4, beta=beta, lam=lam)
        assert cfg.beta == beta and cfg.overrides == ("beta", "lam")

    def test_alpha_clamps_to_one(self):
        cfg = parameters_from_epsilon("0.1", 1, 50, 1000)
        assert cfg.alpha_raw < 1 and cfg.alpha == 1

    def test_alpha_floor_when_large(self):
        cfg = make_config("0.25", 1, 2, 10**6, beta=2, lam="0.1")
        # eps q / (b (n beta^2 + 1)) = 250000 / 9
        assert cfg.alpha == 27777 and cfg.mode == "practical"

    def test_gamma(self):
        cfg = parameters_from_epsilon("0.1", 1, 100, 1000)
        assert cfg.gamma == math.ceil(7 * math.log(100) * 1000 / cfg.alpha)

    def test_rejects_bad_eps(self):
        with pytest.raises(ValueError):
            parameters_from_epsilon("0.5", 1, 1, 1)


class TestAlgorithm1:
    def test_empty_stream(self):
        g = simple(3, [])
        H, U, tr = run_batch_bernstein(BatchStream(g, [], 1), make_config("0.1", 1, 3, 1, beta=4, lam="0.1"))
        assert H.size == 0 and U.size == 0

    def test_single_edge(self):
        g = simple(2, [(0, 1)])
        H, U, _ = run_batch_bernstein(BatchStream.singletons(g), make_config("0.1", 1, 2, 1, beta=2, lam="0.4"))
        assert H.tolist() == [0]

    def test_star(self):
        g = simple(6, [(0, v) for v in range(1, 6)])
        cfg = make_config("0.1", 1, 6, 5, beta=4, lam="0.5", alpha=1)
        H, U, tr = run_batch_bernstein(BatchStream.singletons(g), cfg)
        assert H.tolist() == [0, 1]
        assert tr.phase1_batches == 3
        assert U.size == 0 and not tr.exhausted

    def test_batches_validated(self):
        g = simple(4, [(0, 1), (2, 3)])
        with pytest.raises(ValueError):
            BatchStream(g, [[0, 1]], 1)
        with pytest.raises(ValueError):
            BatchStream(g, [[0], [0]], 1)
        with pytest.raises(ValueError):
            BatchStream(g, [[]], 1)

    def test_random_order_is_seeded(self):
        g = simple(6, [(i, i + 1) for i in range(5)])
        batches = [[i] for i in range(5)]
        a = BatchStream.random_order(g, batches, 7)
        b = BatchStream.random_order(g, batches, 7)
        assert [x.tolist() for x in a.batches] == [x.tolist() for x in b.batches]

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 14), st.floats(0.1, 0.9), st.integers(2, 10), st.sampled_from(["0.1", "0.3", "0.5"]),
           st.integers(1, 3), st.integers(1, 3), st.integers(0, 10**6))
    def test_kernel_matches_reference_simulation(self, n, p, beta, lam, alpha, b, seed):
        rng = np.random.default_rng(seed)
        pairs = [(u, v) for u, v, _ in random_general(rng, n, p)]
        g = simple(n, pairs)
        ids = rng.permutation(len(pairs))
        batches = [ids[i:i + b] for i in range(0, len(ids), b)]
        stream = BatchStream(g, batches, b)
        cfg = make_config("0.1", b, n, max(stream.q, 1), beta=beta, lam=lam, alpha=alpha)
        H, U, tr = run_batch_bernstein(stream, cfg)
        rH, rU, rp1, rmods = simulate_algorithm1(n, g.us.tolist(), g.vs.tolist(),
                                                 [x.tolist() for x in batches], beta, lam, alpha)
        assert H.tolist() == rH and U.tolist() == rU
        assert tr.phase1_batches == rp1 and tr.modifications == rmods

    def test_invariant_checker_catches_tampering(self):
        g = simple(6, [(0, v) for v in range(1, 6)])
        st_ = BatchStream.singletons(g)
        cfg = make_config("0.1", 1, 6, 5, beta=4, lam="0.5", alpha=1)
        H, U, tr = run_batch_bernstein(st_, cfg)
        with pytest.raises(InvariantViolation):
            check_run_invariants(st_, cfg, H, np.array([4]), tr)
        with pytest.raises(InvariantViolation):
            check_run_invariants(st_, cfg, np.arange(5), U, tr)

    def test_exhaustion_flags_trace(self):
        g = simple(8, [(2 * i, 2 * i + 1) for i in range(4)])
        cfg = make_config("0.1", 1, 8, 4, beta=4, lam="0.1")
        H, U, tr = run_batch_bernstein(BatchStream.singletons(g), cfg)
        assert tr.exhausted and U.size == 0 and H.size == 4
        assert tr.late_start == tr.last_epoch_end


class TestWeightedAdapter:
    def test_one_batch_per_weighted_edge(self):
        g = WeightedGraph.from_edges(2, [(0, 1, 3)])
        r = weighted_stream_adapter(g, None, weighted_config(g, "0.1", beta=8, lam="0.1"))
        assert [x.size for x in r.stream.batches] == [3]

    def test_unit_weights_match_plain_run(self):
        rng = np.random.default_rng(1)
        pairs = [(u, v) for u, v, _ in random_general(rng, 12, 0.5)]
        g = WeightedGraph.from_edges(12, pairs)
        order = rng.permutation(g.m)
        cfg = weighted_config(g, "0.1", beta=6, lam="0.2")
        r = weighted_stream_adapter(g, order, cfg)
        H, U, _ = run_batch_bernstein(BatchStream.singletons(g.unweighted(), order), cfg)
        assert r.H.tolist() == H.tolist() and r.U.tolist() == U.tolist()

    def test_rejects_fractional(self):
        g = WeightedGraph.from_edges(2, [(0, 1, "1.5")])
        with pytest.raises(NonIntegralWeight):
            weighted_stream_adapter(g, None, make_config("0.1", 2, 4, 1, beta=4, lam="0.1"))

    def test_triangle_all_orders(self):
        g = WeightedGraph.from_edges(3, [(0, 1, 2), (1, 2, 2), (0, 2, 2)])
        eps = Fraction(1, 20)
        for order in itertools.permutations(range(3)):
            r = weighted_stream_adapter(g, order, weighted_config(g, eps, beta=32, lam="0.1"))
            assert finalize_weighted(r.phi, r.H, r.U).weight >= 2 * (Fraction(2, 3) - eps)

    def test_finalize_examples(self):
        g = WeightedGraph.from_edges(3, [(0, 1, 2), (1, 2, 2), (0, 2, 2)])
        phi = unfold(g)
        assert finalize_weighted(phi, np.arange(phi.m), []).weight == 2
        assert finalize_weighted(phi, [], []).size == 0

    def test_finalize_on_superset_of_optimum(self):
        from edcsmatch.graph import max_cardinality_matching_exact
        from oracles import random_bipartite
        rng = np.random.default_rng(2)
        for _ in range(20):
            n, edges, sides = random_bipartite(rng, 10, 4)
            g = WeightedGraph.from_edges(n, edges, sides)
            phi = unfold(g)
            m = np.array(max_cardinality_matching_exact(phi.whole()).edges, dtype=np.int64)
            extra = np.nonzero(rng.random(phi.m) < 0.3)[0]
            assert finalize_weighted(phi, m, extra).weight == max_weight_matching_exact(g).weight


class TestFallback:
    edges = [(0, 1, 3), (1, 2, 5), (2, 3, 3)]

    def test_below_threshold(self):
        assert small_graph_fallback(self.edges, 4, 10).weight == 6

    def test_zero_threshold_defers(self):
        assert small_graph_fallback(self.edges, 4, 0) is None
        called = []
        small_graph_fallback(self.edges, 4, 0, main=lambda g: called.append(g.m))
        assert called == [3]

    def test_boundary_is_inclusive(self):
        assert small_graph_fallback(self.edges, 4, 3).weight == 6
        assert small_graph_fallback(self.edges, 4, 2) is None


def test_structural_check_small():
    rng = np.random.default_rng(4)
    pairs = [(u, v) for u, v, _ in random_general(rng, 16, 0.6)]
    g = simple(16, pairs)
    stream = BatchStream.random_order(g, [[i] for i in range(len(pairs))], 3)
    cfg = make_config("0.05", 1, 16, stream.q, beta=6, lam="0.1")
    H, U, tr = run_batch_bernstein(stream, cfg)
    sc = structural_check(stream, H, U, tr)
    assert sc.mu_h_late >= sc.mu_late


def test_concentration_report_counts():
    g = simple(4, [(0, 1), (2, 3)])
    rep = late_concentration_report(g, [[0], [1]], 1, "0.4", range(10))
    assert rep.trials == 10 and rep.mu_g == 2
