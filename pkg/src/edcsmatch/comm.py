"""One-way robust communication protocols for weighted matching.

Edges are dealt i.i.d. uniformly to k parties. Parties 0..k-2 jointly run
the streaming algorithm on the unfolded graph, each contributing its own
edges in a private random order and forwarding the algorithm's memory; the
second-to-last party sends the refolded candidate set R(H u U) to the last
party, who returns an exact maximum-weight matching of it together with its
own edges. k = 2 is the two-party protocol.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .edcs import degrees, underfull_threshold
from .graph import (
    DEFAULT_LIMITS,
    ExactLimits,
    FractionalMatching,
    Matching,
    WeightedGraph,
    check_blossom_inequalities,
    is_valid_matching,
    max_weight_matching_on,
    to_fraction,
)
from .stream import AlgorithmConfig, BatchStream, _alpha_gamma, check_run_invariants, run_batch_bernstein, theory_beta
from .unfolding import refold, unfold

HEADER_WORDS = 2
WORDS_PER_EDGE = 3
STATE_COUNTER_WORDS = 4


@dataclass(frozen=True)
class CommConfig:
    """lam = eps/2048 and beta = ceil(144 lam^-4 ln(2W/lam)) unless overridden."""

    eps: Fraction
    lam: Fraction
    beta: int
    W: int
    p: Fraction
    k: int = 2
    alpha: int | None = None
    overrides: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0 < self.lam < 1 or self.beta < 2:
            raise ValueError("need 0 < lam < 1 and beta >= 2")
        if self.p > Fraction(1, 2):
            raise ValueError(f"Bob probability p = {self.p} exceeds 1/2")

    @property
    def mode(self) -> str:
        return "practical" if self.overrides else "theory"

    def to_json(self) -> dict:
        return {"eps": str(self.eps), "lam": str(self.lam), "beta": self.beta, "W": self.W,
                "p": str(self.p), "k": self.k, "alpha": self.alpha, "mode": self.mode,
                "overrides": list(self.overrides)}


def comm_config(eps, W: int, k: int = 2, beta=None, lam=None, alpha=None) -> CommConfig:
    eps = to_fraction(eps)
    if k < 2:
        raise ValueError("need at least two parties")
    overrides = tuple(n for n, v in (("beta", beta), ("lam", lam), ("alpha", alpha)) if v is not None)
    lam = to_fraction(lam) if lam is not None else eps / 2048
    beta = int(beta) if beta is not None else theory_beta(lam, max(int(W), 1), lam_power=4)
    return CommConfig(eps, lam, beta, max(int(W), 1), Fraction(1, k), k,
                      None if alpha is None else int(alpha), overrides)


@dataclass(frozen=True)
class PartitionedInput:
    k: int
    assignment: np.ndarray
    seed: int | None = None

    def party(self, i: int) -> np.ndarray:
        return np.nonzero(self.assignment == i)[0]


def _seeds(seed: int, k: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(k + 1)


def partition_edges(g: WeightedGraph, k: int, seed: int) -> PartitionedInput:
    if k < 2:
        raise ValueError("need at least two parties")
    rng = np.random.default_rng(_seeds(seed, k)[0])
    return PartitionedInput(k, rng.integers(0, k, size=g.m), seed)


@dataclass(frozen=True)
class Message:
    payload: tuple[tuple[int, int, Fraction], ...]

    @property
    def words(self) -> int:
        return WORDS_PER_EDGE * len(self.payload) + HEADER_WORDS


@dataclass
class ProtocolTrace:
    k: int
    p: Fraction
    config: dict
    party_edges: list[int]
    early_edges: int
    early_edges_global: int
    h_edges: int
    u_stream: int
    u_edges: int
    phase1_batches: int
    exhausted: bool
    message_words: int
    state_words: list[int]
    state_budget: int
    candidate_ids: np.ndarray = field(repr=False)
    late_ids: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)
    phi: object = field(repr=False, default=None)
    sim_ids: np.ndarray = field(repr=False, default=None)

    def summary(self) -> dict:
        return {
            "k": self.k, "p": str(self.p), "config": self.config, "party_edges": self.party_edges,
            "early_edges": self.early_edges, "early_edges_global": self.early_edges_global,
            "h_edges": self.h_edges, "u_stream": self.u_stream, "u_edges": self.u_edges,
            "phase1_batches": self.phase1_batches, "exhausted": self.exhausted,
            "message_words": self.message_words, "max_state_words": max(self.state_words, default=0),
            "state_budget": self.state_budget,
        }


def _simulation_config(cfg: CommConfig, n_phi: int, q: int) -> AlgorithmConfig:
    q = max(q, 1)
    alpha_raw, alpha, gamma = _alpha_gamma(cfg.eps, cfg.W, n_phi, q, cfg.beta)
    if cfg.alpha is not None:
        alpha = cfg.alpha
    return AlgorithmConfig(cfg.eps, cfg.lam, cfg.beta, alpha, gamma, cfg.W, n_phi, q,
                           cfg.mode, alpha_raw, cfg.overrides)


def run_k_party(g: WeightedGraph, k: int, cfg: CommConfig, seed: int,
                assignment: Sequence[int] | None = None, solver: str = "auto",
                limits: ExactLimits = DEFAULT_LIMITS) -> tuple[Matching, int, ProtocolTrace]:
    """Returns ``(matching, max message/state words, trace)``."""
    if k < 2:
        raise ValueError("need at least two parties")
    if g.m and g.max_weight > cfg.W:
        raise ValueError(f"max weight {g.max_weight} exceeds W = {cfg.W}")
    part = (partition_edges(g, k, seed) if assignment is None
            else PartitionedInput(k, np.asarray(assignment, dtype=np.int64), seed))
    seqs = _seeds(seed, k)
    # each simulating party streams its own edges in a private random order
    pieces = []
    for i in range(k - 1):
        own = part.party(i)
        pieces.append(own[np.random.default_rng(seqs[i + 1]).permutation(own.size)])
    sim = np.concatenate(pieces) if pieces else np.empty(0, dtype=np.int64)
    last = part.party(k - 1)

    sub = g.subgraph(np.sort(sim)) if sim.size else WeightedGraph(g.n, (), g.bipartition)
    # the subgraph renumbers edges by sorted id; map the arrival order onto it
    sorted_sim = np.sort(sim)
    local_order = np.searchsorted(sorted_sim, sim)
    phi = unfold(sub)
    acfg = _simulation_config(cfg, phi.n, sub.m)
    stream = BatchStream(phi.whole(), [phi.batch(int(e)) for e in local_order], cfg.W)
    H, U_stream, trace = run_batch_bernstein(stream, acfg, check=False)
    check_run_invariants(stream, acfg, H, U_stream, trace, n_bound=phi.n)

    # E_early: the first floor(eps |E_sim| / W) weighted arrivals
    n_early = math.floor(cfg.eps * sub.m / cfg.W)
    n_early_global = math.floor(cfg.eps * g.m / cfg.W)
    # the last simulating party still holds its own edges and rescans its
    # late ones against the final H
    own_last = set(part.party(k - 2).tolist())
    deg = degrees(phi.n, phi.us, phi.vs, H)
    t = underfull_threshold(acfg.beta, acfg.lam)
    in_h = np.zeros(phi.m, dtype=bool)
    in_h[H] = True
    rescan = []
    for pos in range(n_early, sub.m):
        e_local = int(local_order[pos])
        if int(sorted_sim[e_local]) not in own_last:
            continue
        for x in phi.batch(e_local):
            if not in_h[x] and deg[phi.us[x]] + deg[phi.vs[x]] < t:
                rescan.append(int(x))
    U = np.union1d(U_stream, np.asarray(rescan, dtype=np.int64))

    cand_local = np.asarray(refold(phi, np.union1d(H, U)).edges, dtype=np.int64)
    cand = sorted_sim[cand_local] if cand_local.size else np.empty(0, dtype=np.int64)
    msg = Message(tuple(g.edges[int(e)] for e in cand))
    if len(msg.payload) > H.size + U.size:
        raise AssertionError("refolding produced more edges than it was given")

    # forwarded state between simulating parties: H, U and the epoch counters
    state_words = []
    for i in range(k - 2):
        upto = sum(p.size for p in pieces[: i + 1])
        stored = _stored_after(trace, stream, upto, H, U_stream)
        state_words.append(2 * stored + STATE_COUNTER_WORDS)
    budget = 2 * (min(phi.n * acfg.beta, phi.m) + phi.m) + STATE_COUNTER_WORDS

    out = max_weight_matching_on(g, np.union1d(cand, last), solver=solver, limits=limits)
    if not is_valid_matching(g, out.edges):
        raise AssertionError("receiver output is not a matching")
    late = np.union1d(sorted_sim[local_order[n_early:]], last)
    ptrace = ProtocolTrace(
        k=k, p=cfg.p, config=cfg.to_json(), party_edges=[int(part.party(i).size) for i in range(k)],
        early_edges=n_early, early_edges_global=n_early_global, h_edges=int(H.size),
        u_stream=int(U_stream.size), u_edges=int(U.size), phase1_batches=trace.phase1_batches,
        exhausted=trace.exhausted, message_words=msg.words, state_words=state_words,
        state_budget=budget, candidate_ids=np.asarray(cand, dtype=np.int64), late_ids=late,
        H=H, U=U, phi=phi, sim_ids=sorted_sim,
    )
    if any(w > budget for w in state_words):
        raise AssertionError(f"forwarded state {max(state_words)} words exceeds budget {budget}")
    return out, max([msg.words] + state_words), ptrace


def _stored_after(trace, stream: BatchStream, upto: int, H, U) -> int:
    # |H| + |U| after the first ``upto`` batches, replayed from per-batch counters
    ins = int(trace.batch_insertions[:upto].sum())
    rem = int(trace.batch_removals[:upto].sum())
    return ins - rem + int(trace.batch_underfull[:upto].sum())


def run_two_party(g: WeightedGraph, cfg: CommConfig, seed: int, assignment: Sequence[int] | None = None,
                  solver: str = "auto", limits: ExactLimits = DEFAULT_LIMITS) -> tuple[Matching, Message, ProtocolTrace]:
    """Alice = party 0, Bob = party 1."""
    out, _, trace = run_k_party(g, 2, cfg, seed, assignment, solver, limits)
    return out, Message(tuple(g.edges[int(e)] for e in trace.candidate_ids)), trace


def all_underfull(trace: ProtocolTrace, g: WeightedGraph, cfg: CommConfig) -> np.ndarray:
    """Origin ids of every late edge of g with an underfull copy w.r.t. the final H, plus R(H).

    Together with the sender's own U this is R(H u U_A u U_B), U_B being the
    receiver's underfull edges, which the receiver could compute but never needs.
    """
    phi = trace.phi
    deg = degrees(phi.n, phi.us, phi.vs, trace.H)
    t = underfull_threshold(cfg.beta, cfg.lam)
    copies = {}
    origin_ids = np.asarray(refold(phi, trace.H).edges, dtype=np.int64)
    keep = set(trace.sim_ids[origin_ids].tolist()) if origin_ids.size else set()
    # copies of a vertex beyond what the simulation saw have degree 0
    offset = phi.offset
    n_copies = phi.copies
    for e in trace.late_ids:
        u, v, w = g.edges[int(e)]
        w = int(w)
        for i in range(1, w + 1):
            a = int(offset[u]) + i - 1 if i <= n_copies[u] else -1
            b = int(offset[v]) + (w - i + 1) - 1 if w - i + 1 <= n_copies[v] else -1
            s = (deg[a] if a >= 0 else 0) + (deg[b] if b >= 0 else 0)
            if s < t:
                copies[int(e)] = True
                break
    keep |= set(copies)
    u_ids = np.asarray(refold(phi, trace.U).edges, dtype=np.int64)
    keep |= set(trace.sim_ids[u_ids].tolist()) if u_ids.size else set()
    return np.asarray(sorted(keep), dtype=np.int64)


@dataclass
class FractionalResult:
    x: FractionalMatching
    iterations: int
    counts: dict[int, int]
    matchings_computed: int


def build_fractional_x(g: WeightedGraph, candidates: Sequence[int], m_star: Sequence[int], iterations: int,
                       solver: str = "auto", limits: ExactLimits = DEFAULT_LIMITS) -> FractionalResult:
    """x_e = |{i : e in M_i}| / T over T peeling rounds of R(H_i u U_i).

    Removing phi(M_i minus M*) from H u U deletes exactly those origin edges
    from the refolding, so the peel runs on origin ids. Once M_i lies
    inside M* nothing is removed and every later round repeats it.
    """
    T = int(iterations)
    if T < 1:
        raise ValueError("need at least one iteration")
    star = set(int(e) for e in m_star)
    alive = set(int(e) for e in candidates)
    counts: dict[int, int] = {}
    i = 0
    computed = 0
    while i < T:
        mi = max_weight_matching_on(g, alive, solver=solver, limits=limits)
        computed += 1
        drop = [e for e in mi.edges if e not in star]
        rounds = 1 if drop else T - i
        for e in mi.edges:
            counts[e] = counts.get(e, 0) + rounds
        i += rounds
        alive.difference_update(drop)
    x = FractionalMatching(g, {e: Fraction(c, T) for e, c in counts.items()})
    return FractionalResult(x, T, counts, computed)


def iteration_count(cfg: CommConfig) -> int:
    return max(1, math.ceil(cfg.lam * cfg.beta))


@dataclass
class XvalReport:
    total: Fraction
    mu_late: Fraction
    eps: Fraction
    valid: bool
    cap_violations: list[int]
    blossom_ok: bool | None = None
    blossom_violations: list = field(default_factory=list)
    blossom_off_star: list = field(default_factory=list)

    @property
    def target(self) -> Fraction:
        return (Fraction(2, 3) - self.eps) * self.mu_late

    @property
    def ok(self) -> bool:
        return self.valid and self.total >= self.target and not self.cap_violations

    def to_json(self) -> dict:
        return {"sum_wx": str(self.total), "mu_late": str(self.mu_late), "target": str(self.target),
                "pass": self.ok, "valid": self.valid, "cap_violations": self.cap_violations,
                "blossom_ok": self.blossom_ok, "blossom_violations": len(self.blossom_violations)}


def verify_xval(g: WeightedGraph, x: FractionalMatching, late_ids: Sequence[int], eps, m_star: Sequence[int],
                iterations: int, blossom: bool = False, solver: str = "auto",
                limits: ExactLimits = DEFAULT_LIMITS) -> XvalReport:
    """sum w_e x_e against (2/3 - eps) mu_w(E_late), validity and the 1/T cap off M*.

    With ``blossom`` the odd-set inequalities are checked on (1 - 2 eps) x,
    and violating sets are split by whether they contain an M* edge.
    """
    eps = to_fraction(eps)
    mu_late = max_weight_matching_on(g, late_ids, solver=solver, limits=limits).weight
    loads = x.loads()
    valid = all(v <= 1 for v in loads.values()) and all(0 <= v <= 1 for v in x.values.values())
    star = set(int(e) for e in m_star)
    cap = Fraction(1, int(iterations))
    caps = sorted(e for e, v in x.values.items() if e not in star and v > cap)
    rep = XvalReport(x.total_weight(), mu_late, eps, valid, caps)
    if blossom:
        b = check_blossom_inequalities(g, x.scaled(1 - 2 * eps), eps)
        rep.blossom_ok = b.ok
        rep.blossom_violations = b.violations
        star_pairs = {frozenset(g.edges[e][:2]) for e in star}
        rep.blossom_off_star = [v for v in b.violations
                                if not any(p <= set(v[0]) for p in star_pairs)]
    return rep


def fractional_pipeline(g: WeightedGraph, cfg: CommConfig, seed: int, assignment=None, blossom: bool = False,
                        solver: str = "auto", limits: ExactLimits = DEFAULT_LIMITS):
    """Two-party run followed by the x construction and its verifier."""
    out, msg, trace = run_two_party(g, cfg, seed, assignment, solver, limits)
    m_star = max_weight_matching_on(g, trace.late_ids, solver=solver, limits=limits).edges
    cand = all_underfull(trace, g, cfg)
    T = iteration_count(cfg)
    fx = build_fractional_x(g, cand, m_star, T, solver, limits)
    rep = verify_xval(g, fx.x, trace.late_ids, cfg.eps, m_star, T, blossom, solver, limits)
    return fx, rep, trace
