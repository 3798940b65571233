"""Random-order b-batch streams and the two-phase EDCS streaming algorithm.

Phase 1 runs in epochs of ``alpha`` batches, inserting underfull edges into H
and sweeping out overfull ones; the first epoch in which no underfull edge
arrives ends it. Phase 2 freezes H and collects every later underfull edge
into U. The weighted adapter feeds phi(e) as one batch per weighted edge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .edcs import check_beta, degrees, underfull_threshold
from .errors import InvariantViolation
from .graph import (
    DEFAULT_LIMITS,
    ExactLimits,
    Matching,
    SimpleGraph,
    WeightedGraph,
    max_cardinality_matching_exact,
    max_weight_matching_exact,
    to_fraction,
)
from .unfolding import UnfoldedGraph, refolded_max_weight_matching, unfold


def _ln(x: Fraction) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = 60
        return (Decimal(x.numerator) / Decimal(x.denominator)).ln()


def _ceil_decimal(x: Decimal) -> int:
    i = int(x)
    return i if Decimal(i) >= x else i + 1


def _to_decimal(x: Fraction) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = 60
        return Decimal(x.numerator) / Decimal(x.denominator)


def theory_beta(lam: Fraction, b: int, lam_power: int = 2) -> int:
    """ceil(144 * lam^-p * ln(2b/lam)), natural log, evaluated to 60 digits."""
    lam = to_fraction(lam)
    with localcontext() as ctx:
        ctx.prec = 60
        val = Decimal(144) / _to_decimal(lam) ** lam_power * _ln(Fraction(2 * b) / lam)
        return _ceil_decimal(val)


def edcs_regime(eps) -> tuple[Fraction, int]:
    """The looser (lam, beta) pair under which an EDCS alone is (2/3 - eps)-approximate:
    lam = eps/128 and beta = ceil(16 lam^-2 ln(1/lam)).

    Feed it to ``make_config(..., beta=, lam=)`` to run in this regime.
    """
    lam = to_fraction(eps) / 128
    with localcontext() as ctx:
        ctx.prec = 60
        return lam, _ceil_decimal(Decimal(16) / _to_decimal(lam) ** 2 * _ln(1 / lam))


@dataclass(frozen=True)
class AlgorithmConfig:
    """Parameters of one streaming run.

    ``mode`` is ``"theory"`` when every field comes from the formulas and
    ``"practical"`` when any field was overridden; ``alpha_raw`` keeps the
    unclamped epsilon*q / (b(n beta^2 + 1)).
    """

    eps: Fraction
    lam: Fraction
    beta: int
    alpha: int
    gamma: int
    b: int
    n: int
    q: int
    mode: str = "theory"
    alpha_raw: Fraction = Fraction(0)
    overrides: tuple[str, ...] = ()
    log_base: str = "e"

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam}")
        check_beta(self.beta)
        if not isinstance(self.alpha, int) or self.alpha < 1:
            raise ValueError(f"alpha must be an integer >= 1, got {self.alpha!r}")

    @property
    def threshold(self) -> int:
        return underfull_threshold(self.beta, self.lam)

    def to_json(self) -> dict:
        return {
            "eps": str(self.eps), "lam": str(self.lam), "beta": self.beta, "alpha": self.alpha,
            "alpha_raw": str(self.alpha_raw), "gamma": self.gamma, "b": self.b, "n": self.n,
            "q": self.q, "mode": self.mode, "overrides": list(self.overrides), "log_base": self.log_base,
        }


def _alpha_gamma(eps: Fraction, b: int, n: int, q: int, beta: int) -> tuple[Fraction, int, int]:
    alpha_raw = eps * q / (b * (n * beta * beta + 1))
    alpha = max(1, math.floor(alpha_raw))
    with localcontext() as ctx:
        ctx.prec = 60
        gamma = _ceil_decimal(7 * _ln(Fraction(max(n, 1))) * q / alpha)
    return alpha_raw, alpha, gamma


def parameters_from_epsilon(eps, b: int, n: int, q: int) -> AlgorithmConfig:
    """Theory parameters: lam = eps/512, beta = ceil(144 lam^-2 ln(2b/lam)),
    alpha = max(1, floor(eps q / (b(n beta^2 + 1)))), gamma = ceil(7 ln(n) q / alpha)."""
    eps = to_fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    if min(b, n, q) < 1:
        raise ValueError("b, n and q must be >= 1")
    lam = eps / 512
    beta = theory_beta(lam, b)
    alpha_raw, alpha, gamma = _alpha_gamma(eps, b, n, q, beta)
    return AlgorithmConfig(eps, lam, beta, alpha, gamma, b, n, q, "theory", alpha_raw)


def make_config(eps, b: int, n: int, q: int, beta=None, lam=None, alpha=None) -> AlgorithmConfig:
    """Theory parameters with optional manual overrides ("practical mode").

    When only beta/lam are overridden, alpha and gamma are recomputed from
    the same formulas with the overridden values.
    """
    eps = to_fraction(eps)
    b, n, q = max(int(b), 1), max(int(n), 1), max(int(q), 1)
    overrides = tuple(k for k, v in (("beta", beta), ("lam", lam), ("alpha", alpha)) if v is not None)
    if not overrides:
        return parameters_from_epsilon(eps, b, n, q)
    lam = to_fraction(lam) if lam is not None else eps / 512
    beta = check_beta(beta) if beta is not None else theory_beta(lam, b)
    alpha_raw, alpha_f, gamma = _alpha_gamma(eps, b, n, q, beta)
    if alpha is not None:
        alpha_f = int(alpha)
        with localcontext() as ctx:
            ctx.prec = 60
            gamma = _ceil_decimal(7 * _ln(Fraction(n)) * q / alpha_f)
    return AlgorithmConfig(eps, lam, beta, alpha_f, gamma, b, n, q, "practical", alpha_raw, overrides)


def practical_config(eps, b: int, n: int, q: int, beta: int = 32, lam="0.1", alpha=None) -> AlgorithmConfig:
    return make_config(eps, b, n, q, beta=beta, lam=lam, alpha=alpha)


@dataclass
class BatchStream:
    """Batches of edge ids over ``graph``, in arrival order."""

    graph: SimpleGraph
    batches: list[np.ndarray]
    b: int
    seed: int | None = None

    def __post_init__(self):
        self.batches = [np.asarray(x, dtype=np.int64) for x in self.batches]
        seen = np.zeros(self.graph.m, dtype=bool)
        for i, x in enumerate(self.batches):
            if x.size == 0:
                raise ValueError(f"batch {i} is empty")
            if x.size > self.b:
                raise ValueError(f"batch {i} has {x.size} edges > b = {self.b}")
            if seen[x].any() or np.unique(x).size != x.size:
                raise ValueError(f"batch {i} repeats an edge")
            seen[x] = True

    @property
    def q(self) -> int:
        return len(self.batches)

    @classmethod
    def random_order(cls, graph: SimpleGraph, batches: Sequence, seed: int, b: int | None = None) -> "BatchStream":
        """Uniformly random permutation of the adversary's batches under ``seed``."""
        batches = [np.asarray(x, dtype=np.int64) for x in batches]
        rng = np.random.default_rng(seed)
        perm = rng.permutation(len(batches))
        b = b if b is not None else max((x.size for x in batches), default=1)
        return cls(graph, [batches[i] for i in perm], b, seed)

    @classmethod
    def singletons(cls, graph: SimpleGraph, order: Sequence[int] | None = None) -> "BatchStream":
        order = range(graph.m) if order is None else order
        return cls(graph, [np.array([e], dtype=np.int64) for e in order], 1)

    def flat(self) -> tuple[np.ndarray, np.ndarray]:
        ptr = np.zeros(self.q + 1, dtype=np.int64)
        ptr[1:] = np.cumsum([x.size for x in self.batches])
        order = np.concatenate(self.batches) if self.batches else np.empty(0, dtype=np.int64)
        return order, ptr

    def edges_from(self, start: int) -> np.ndarray:
        """Edge ids arriving in batches ``start, start+1, ...`` (E_{>start})."""
        if start >= self.q:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(self.batches[start:])


@dataclass
class RunTrace:
    phase1_batches: int
    epochs: int
    modifications: int
    insertions: int
    removals: int
    exhausted: bool
    last_epoch_end: int
    peak_stored: int
    h_size: int
    u_size: int
    batch_phase: np.ndarray
    batch_insertions: np.ndarray
    batch_removals: np.ndarray
    batch_underfull: np.ndarray
    config: AlgorithmConfig
    n_vertices: int
    e_late: np.ndarray = field(repr=False, default=None)

    @property
    def late_start(self) -> int:
        """First batch of E_late: right after Phase 1, or after the last
        completed epoch when the stream ran out during Phase 1."""
        return self.last_epoch_end if self.exhausted else self.phase1_batches

    def summary(self) -> dict:
        return {
            "phase1_batches": self.phase1_batches, "epochs": self.epochs,
            "modifications": self.modifications, "insertions": self.insertions,
            "removals": self.removals, "exhausted": self.exhausted,
            "late_start": self.late_start, "peak_stored": self.peak_stored,
            "h_edges": self.h_size, "u_edges": self.u_size, "n_vertices": self.n_vertices,
        }


def _kernel_params(cfg: AlgorithmConfig, m: int) -> tuple[int, int]:
    # no degree sum exceeds 2m, so clamping keeps both comparisons exact in int64
    cap = 2 * m + 1
    return min(cfg.beta, cap), min(cfg.threshold, cap)


def run_batch_bernstein(stream: BatchStream, cfg: AlgorithmConfig, check: bool = True):
    """Run the two-phase algorithm on ``stream``; returns ``(H, U, trace)``.

    H and U are sorted edge-id arrays of ``stream.graph``. Hard invariants
    are replayed on every run unless ``check`` is False.
    """
    g = stream.graph
    order, ptr = stream.flat()
    beta_k, thresh_k = _kernel_params(cfg, g.m)
    in_h, in_u, phase, ins, rem, under, c = kernels.bernstein_stream(
        g.n, g.us, g.vs, order, ptr, np.int64(beta_k), np.int64(thresh_k), np.int64(cfg.alpha)
    )
    H = np.nonzero(in_h)[0]
    U = np.nonzero(in_u)[0]
    trace = RunTrace(
        phase1_batches=int(c[kernels.C_PHASE1_BATCHES]), epochs=int(c[kernels.C_EPOCHS]),
        modifications=int(c[kernels.C_MODS]), insertions=int(c[kernels.C_INSERTIONS]),
        removals=int(c[kernels.C_REMOVALS]), exhausted=bool(c[kernels.C_EXHAUSTED]),
        last_epoch_end=int(c[kernels.C_LAST_EPOCH_END]), peak_stored=int(c[kernels.C_PEAK_STORED]),
        h_size=int(H.size), u_size=int(U.size), batch_phase=phase, batch_insertions=ins,
        batch_removals=rem, batch_underfull=under, config=cfg, n_vertices=int(g.n),
    )
    trace.e_late = stream.edges_from(trace.late_start)
    if check:
        check_run_invariants(stream, cfg, H, U, trace)
    return H, U, trace


def check_run_invariants(stream: BatchStream, cfg: AlgorithmConfig, H, U, trace: RunTrace,
                         n_bound: int | None = None) -> dict:
    """Replay the hard invariants of a run; raises InvariantViolation on any failure.

    ``n_bound`` is the vertex count used in the n*beta^2 style bounds; it
    defaults to the number of non-isolated vertices of the stream graph.
    """
    g = stream.graph
    if n_bound is None:
        n_bound = int(np.unique(np.concatenate([g.us, g.vs])).size) if g.m else 0
    beta = cfg.beta
    problems = {}
    if trace.phase1_batches > (n_bound * beta * beta + 1) * cfg.alpha:
        problems["phase1_length"] = (trace.phase1_batches, (n_bound * beta * beta + 1) * cfg.alpha)
    deg = degrees(g.n, g.us, g.vs, H)
    if H.size and int((deg[g.us[H]] + deg[g.vs[H]]).max()) > beta:
        problems["edge_degree"] = int((deg[g.us[H]] + deg[g.vs[H]]).max())
    if H.size > n_bound * beta:
        problems["h_size"] = (int(H.size), n_bound * beta)
    if trace.modifications > n_bound * beta * beta:
        problems["modifications"] = (trace.modifications, n_bound * beta * beta)
    if trace.modifications != int(trace.batch_insertions.sum() + trace.batch_removals.sum()):
        problems["trace_counters"] = trace.modifications
    if trace.exhausted:
        expected_u = np.empty(0, dtype=np.int64)
    else:
        late = stream.edges_from(trace.phase1_batches)
        sums = deg[g.us[late]] + deg[g.vs[late]]
        expected_u = np.sort(late[sums < cfg.threshold])
    if not np.array_equal(np.sort(U), expected_u):
        problems["u_replay"] = (int(U.size), int(expected_u.size))
    if int(trace.batch_underfull.sum()) != U.size:
        problems["u_counter"] = int(trace.batch_underfull.sum())
    if problems:
        raise InvariantViolation(f"run invariants failed: {sorted(problems)}", problems)
    return {"n_bound": n_bound, "phase1_bound": (n_bound * beta * beta + 1) * cfg.alpha,
            "mods_bound": n_bound * beta * beta, "h_bound": n_bound * beta}


@dataclass
class StructuralCheck:
    mu_hu: int
    mu_late: int
    mu_h_late: int
    eps: Fraction

    @property
    def target(self) -> Fraction:
        return (Fraction(2, 3) - self.eps) * self.mu_late

    @property
    def ok(self) -> bool:
        return self.mu_hu >= self.target


def structural_check(stream: BatchStream, H, U, trace: RunTrace, eps=None) -> StructuralCheck:
    """Exact mu(H u U) against (2/3 - eps) mu(E_late), E_late read from the trace.

    Also records mu(H u E_late), the graph the relaxed-EDCS bound is really
    about (mu(H u E_late) >= mu(E_late)).
    """
    g = stream.graph
    eps = to_fraction(eps if eps is not None else trace.config.eps)
    hu = np.union1d(H, U)
    late = trace.e_late
    sub = lambda ids: SimpleGraph(g.n, g.us[ids], g.vs[ids], g.sides)
    return StructuralCheck(
        mu_hu=max_cardinality_matching_exact(sub(hu)).size,
        mu_late=max_cardinality_matching_exact(sub(late)).size,
        mu_h_late=max_cardinality_matching_exact(sub(np.union1d(H, late))).size,
        eps=eps,
    )


@dataclass
class AdapterResult:
    phi: UnfoldedGraph
    stream: BatchStream
    H: np.ndarray
    U: np.ndarray
    trace: RunTrace
    order: np.ndarray

    @property
    def stored(self) -> np.ndarray:
        return np.union1d(self.H, self.U)


def weighted_order(g: WeightedGraph, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).permutation(g.m).astype(np.int64)


def weighted_config(g: WeightedGraph, eps, beta=None, lam=None, alpha=None, m: int | None = None) -> AlgorithmConfig:
    """Config for streaming phi(g): b = W, n = n*W (vertex universe), q = m."""
    W = max(int(g.max_weight), 1)
    return make_config(eps, W, g.n * W, m if m is not None else g.m, beta=beta, lam=lam, alpha=alpha)


def weighted_stream_adapter(g: WeightedGraph, order: Sequence[int] | None, cfg: AlgorithmConfig,
                            phi: UnfoldedGraph | None = None, check: bool = True) -> AdapterResult:
    """Stream ``g``'s weighted edges in ``order``, one batch phi(e) per edge.

    Raises NonIntegralWeight for non-integral weights. H and U are unfolded
    edge ids of phi(g), so they refold through the back-pointers.
    """
    phi = phi if phi is not None else unfold(g)
    order = np.arange(g.m, dtype=np.int64) if order is None else np.asarray(order, dtype=np.int64)
    W = int(g.max_weight) if g.m else 1
    if cfg.b < W:
        raise ValueError(f"batch bound b = {cfg.b} is below the maximum weight {W}")
    stream = BatchStream(phi.whole(), [phi.batch(int(e)) for e in order], max(cfg.b, 1))
    H, U, trace = run_batch_bernstein(stream, cfg, check=False)
    if check:
        check_run_invariants(stream, cfg, H, U, trace, n_bound=phi.n)
    return AdapterResult(phi, stream, H, U, trace, order)


def finalize_weighted(phi: UnfoldedGraph, H, U, solver: str = "auto", limits: ExactLimits = DEFAULT_LIMITS) -> Matching:
    """Exact maximum-weight matching of R(H u U), in origin edge ids."""
    return refolded_max_weight_matching(phi, np.union1d(np.asarray(H, dtype=np.int64), np.asarray(U, dtype=np.int64)),
                                        solver=solver, limits=limits)


def fallback_threshold(n: int, b: int, eps) -> int:
    """Edge count below which storing everything is within the space budget:
    every graph has m <= 2 n mu(G), and mu(G) < 20 b^2 ln(n) / eps^2 is the small case."""
    eps = to_fraction(eps)
    return math.floor(2 * n * 20 * b * b * math.log(max(n, 2)) / float(eps * eps))


def small_graph_fallback(edges: Sequence[tuple[int, int, object]], n: int, threshold: int,
                         main: Callable[[WeightedGraph], Matching] | None = None) -> Matching | None:
    """Store arriving edges while at most ``threshold`` have been seen.

    If the stream ends with the count still ``<= threshold`` the exact
    optimum of everything stored is returned. Otherwise the decision is
    deferred to ``main`` (called on the full graph), or None without one.
    """
    stored = []
    overflow = False
    for e in edges:
        if len(stored) >= threshold:
            overflow = True
            break
        stored.append(e)
    if not overflow:
        return max_weight_matching_exact(WeightedGraph.from_edges(n, stored))
    if main is None:
        return None
    return main(WeightedGraph.from_edges(n, list(edges)))


@dataclass
class ConcentrationReport:
    eps: Fraction
    trials: int
    failures: int
    mu_g: int
    min_mu_late: int

    @property
    def failure_rate(self) -> float:
        return self.failures / self.trials if self.trials else 0.0


def late_concentration_report(graph: SimpleGraph, batches: Sequence, b: int, eps, seeds: Sequence[int]) -> ConcentrationReport:
    """Empirical frequency of mu(E_late) < (1 - 2 eps) mu(G) over seeded orders,
    E_late being the batches after the first floor(eps q / b)."""
    eps = to_fraction(eps)
    mu_g = max_cardinality_matching_exact(graph).size
    q = len(batches)
    early = math.floor(eps * q / b)
    failures = 0
    lowest = mu_g
    for s in seeds:
        st = BatchStream.random_order(graph, batches, s, b)
        late = st.edges_from(early)
        k = max_cardinality_matching_exact(SimpleGraph(graph.n, graph.us[late], graph.vs[late], graph.sides)).size
        lowest = min(lowest, k)
        if k < (1 - 2 * eps) * mu_g:
            failures += 1
    return ConcentrationReport(eps, len(seeds), failures, mu_g, lowest)
