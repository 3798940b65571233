"""Bounded edge-degree subgraphs, underfull edges and EDCS certification.

All threshold tests are exact: ``deg_H(u) + deg_H(v) < beta * (1 - lam)``
is evaluated as an integer comparison against ``ceil(beta * (1 - lam))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import DuplicateEdge, InvariantViolation
from .graph import to_fraction


def check_beta(beta) -> int:
    if isinstance(beta, bool) or not isinstance(beta, (int, np.integer)):
        if isinstance(beta, (float, Fraction)) and beta == int(beta):
            beta = int(beta)
        else:
            raise ValueError(f"beta must be an integer, got {beta!r}")
    beta = int(beta)
    if beta < 2:
        raise ValueError(f"beta must be >= 2, got {beta}")
    return beta


def underfull_threshold(beta: int, lam) -> int:
    """Integer t with ``s < beta*(1-lam)`` iff ``s < t`` for every integer s."""
    return math.ceil(beta * (1 - to_fraction(lam)))


def is_underfull_sum(deg_sum: int, beta: int, lam) -> bool:
    return deg_sum < underfull_threshold(beta, lam)


def is_underfull(u, v, H, beta: int, lam) -> bool:
    """Whether (u, v) is underfull w.r.t. H: deg_H(u) + deg_H(v) < beta(1 - lam).

    ``H`` is anything with a ``degree(vertex)`` method, or a mapping of degrees.
    """
    degree = H.degree if hasattr(H, "degree") else (lambda x: H.get(x, 0))
    return is_underfull_sum(degree(u) + degree(v), beta, lam)


@dataclass
class DegreeBoundedSubgraph:
    """A mutable subgraph H kept at bounded edge-degree beta.

    Edges carry integer ids; overfull removal takes the largest degree sum
    first and breaks ties toward the smaller id.
    """

    beta: int
    lam: Fraction
    edges: dict[int, tuple[int, int]] = field(default_factory=dict)
    deg: dict[int, int] = field(default_factory=dict)
    insertions: int = 0
    removals: int = 0
    _pairs: set = field(default_factory=set, repr=False)
    _next_id: int = field(default=0, repr=False)

    def __post_init__(self):
        self.beta = check_beta(self.beta)
        self.lam = to_fraction(self.lam)
        if not 0 < self.lam < 1:
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam}")
        self.threshold = underfull_threshold(self.beta, self.lam)

    @property
    def modifications(self) -> int:
        return self.insertions + self.removals

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, eid) -> bool:
        return eid in self.edges

    def degree(self, u) -> int:
        return self.deg.get(u, 0)

    def edge_degree(self, eid: int) -> int:
        u, v = self.edges[eid]
        return self.degree(u) + self.degree(v)

    def is_underfull(self, u, v) -> bool:
        return self.degree(u) + self.degree(v) < self.threshold

    def insert_if_underfull(self, u, v, eid: int | None = None) -> bool:
        """Insert (u, v) if underfull, then restore the degree bound.

        Returns whether the edge was inserted (it may be removed again by the
        overfull sweep if inserting it pushed its own degree sum past beta).
        """
        if eid is None:
            eid = self._next_id
        self._next_id = max(self._next_id, eid + 1)
        pair = (min(u, v), max(u, v))
        if eid in self.edges or pair in self._pairs:
            raise DuplicateEdge(f"edge {eid} {pair} is already in H")
        if not self.is_underfull(u, v):
            return False
        self.edges[eid] = (u, v)
        self._pairs.add(pair)
        self.deg[u] = self.degree(u) + 1
        self.deg[v] = self.degree(v) + 1
        self.insertions += 1
        self.remove_overfull_edges()
        return True

    def remove_edge(self, eid: int) -> None:
        u, v = self.edges.pop(eid)
        self._pairs.discard((min(u, v), max(u, v)))
        self.deg[u] -= 1
        self.deg[v] -= 1

    def remove_overfull_edges(self) -> int:
        removed = 0
        while True:
            worst = None
            worst_sum = self.beta
            for eid in sorted(self.edges):
                s = self.edge_degree(eid)
                if s > worst_sum:
                    worst, worst_sum = eid, s
            if worst is None:
                return removed
            self.remove_edge(worst)
            self.removals += 1
            removed += 1

    def check_invariant(self) -> None:
        counted: dict = {}
        for u, v in self.edges.values():
            counted[u] = counted.get(u, 0) + 1
            counted[v] = counted.get(v, 0) + 1
        if any(self.degree(x) != c for x, c in counted.items()) or any(
            d and counted.get(x, 0) != d for x, d in self.deg.items()
        ):
            raise InvariantViolation("degree counters disagree with the edge set")
        bad = [e for e in self.edges if self.edge_degree(e) > self.beta]
        if bad:
            raise InvariantViolation(f"edges {bad[:5]} exceed edge-degree {self.beta}", {"overfull": bad})


def degrees(n: int, us: np.ndarray, vs: np.ndarray, edge_ids) -> np.ndarray:
    ids = np.asarray(edge_ids, dtype=np.int64)
    return np.bincount(us[ids], minlength=n) + np.bincount(vs[ids], minlength=n)


def has_bounded_edge_degree(g, h_ids, beta: int) -> bool:
    ids = np.asarray(h_ids, dtype=np.int64)
    if ids.size == 0:
        return True
    deg = degrees(g.n, g.us, g.vs, ids)
    return bool(np.all(deg[g.us[ids]] + deg[g.vs[ids]] <= beta))


def underfull_edges(g, h_ids, candidate_ids, beta: int, lam) -> np.ndarray:
    """Ids among ``candidate_ids`` (minus H) that are underfull w.r.t. H."""
    h = np.asarray(h_ids, dtype=np.int64)
    cand = np.setdiff1d(np.asarray(candidate_ids, dtype=np.int64), h)
    deg = degrees(g.n, g.us, g.vs, h)
    t = underfull_threshold(beta, lam)
    return cand[deg[g.us[cand]] + deg[g.vs[cand]] < t]


@dataclass
class EdcsCertificate:
    p1_violations: list[int]
    p2_violations: list[int]

    @property
    def ok(self) -> bool:
        return not self.p1_violations and not self.p2_violations


def certify_edcs(g, h_ids: Iterable[int], beta: int, lam) -> EdcsCertificate:
    """List H-edges with degree sum > beta (P1) and G\\H edges with sum < beta(1-lam) (P2)."""
    h = np.unique(np.asarray(list(h_ids), dtype=np.int64))
    deg = degrees(g.n, g.us, g.vs, h)
    sums = deg[g.us] + deg[g.vs]
    in_h = np.zeros(g.m, dtype=bool)
    in_h[h] = True
    lam = to_fraction(lam)
    p1 = np.nonzero(in_h & (sums > beta))[0]
    # P2 is the non-strict ">= beta(1-lam)"; a violation is the strict "<"
    p2 = np.nonzero(~in_h & (sums < underfull_threshold(beta, lam)))[0]
    return EdcsCertificate([int(e) for e in p1], [int(e) for e in p2])
