"""Graph unfolding and refolding.

An integral-weight graph G unfolds into an unweighted graph phi(G): vertex u
becomes copies u^1..u^{W_u} (W_u = heaviest incident weight) and an edge
(u, v) of weight w becomes the w edges (u^i, v^{w-i+1}), i = 1..w. Refolding
maps any subgraph of phi(G) back to the weighted edges with at least one copy
present.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import NonIntegralWeight
from .graph import (
    DEFAULT_LIMITS,
    ExactLimits,
    Matching,
    SimpleGraph,
    WeightedGraph,
    max_weight_matching_on,
)


@dataclass(frozen=True, eq=False)
class UnfoldedGraph:
    """phi(G) with back-pointers.

    Copy u^i has dense id ``offset[u] + i - 1``. The unfolded edges of
    weighted edge e occupy ids ``edge_ptr[e]:edge_ptr[e+1]`` in order
    i = 1..w_e; ``origin`` and ``copy_index`` map each unfolded edge back to
    (e, i).
    """

    origin_graph: WeightedGraph
    copies: np.ndarray
    offset: np.ndarray
    us: np.ndarray
    vs: np.ndarray
    origin: np.ndarray
    copy_index: np.ndarray
    edge_ptr: np.ndarray

    @property
    def n(self) -> int:
        return int(self.copies.sum())

    @property
    def m(self) -> int:
        return int(self.us.shape[0])

    @property
    def sides(self) -> np.ndarray | None:
        g_sides = self.origin_graph.sides
        if g_sides is None:
            return None
        return np.repeat(g_sides, self.copies)

    def vertex(self, x: int) -> tuple[int, int]:
        """Dense id -> (original vertex, 1-based copy index)."""
        u = int(np.searchsorted(self.offset, x, side="right") - 1)
        return u, int(x - self.offset[u] + 1)

    def batch(self, e: int) -> np.ndarray:
        """Unfolded edge ids of phi(e)."""
        return np.arange(self.edge_ptr[e], self.edge_ptr[e + 1], dtype=np.int64)

    def subgraph(self, edge_ids: Iterable[int] | np.ndarray) -> SimpleGraph:
        ids = np.asarray(sorted(set(int(e) for e in edge_ids)) if not isinstance(edge_ids, np.ndarray)
                         else np.unique(edge_ids), dtype=np.int64)
        return SimpleGraph(self.n, self.us[ids], self.vs[ids], self.sides)

    def whole(self) -> SimpleGraph:
        return SimpleGraph(self.n, self.us, self.vs, self.sides)

    def edges_of(self, weighted_ids: Iterable[int]) -> np.ndarray:
        """All unfolded edge ids of the given weighted edges (phi of a weighted edge set)."""
        parts = [self.batch(int(e)) for e in weighted_ids]
        if not parts:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(parts)


def integral_weights(g: WeightedGraph) -> list[int]:
    out = []
    for eid, w in enumerate(g.weights):
        if w.denominator != 1:
            raise NonIntegralWeight(f"edge {eid} has non-integral weight {w}")
        out.append(int(w))
    return out


def unfold(g: WeightedGraph) -> UnfoldedGraph:
    ws = integral_weights(g)
    copies = np.zeros(g.n, dtype=np.int64)
    for (u, v, _), w in zip(g.edges, ws):
        copies[u] = max(copies[u], w)
        copies[v] = max(copies[v], w)
    offset = np.zeros(g.n, dtype=np.int64)
    if g.n:
        offset[1:] = np.cumsum(copies)[:-1]
    edge_ptr = np.zeros(g.m + 1, dtype=np.int64)
    edge_ptr[1:] = np.cumsum(np.asarray(ws, dtype=np.int64))
    total = int(edge_ptr[-1])
    us = np.empty(total, dtype=np.int64)
    vs = np.empty(total, dtype=np.int64)
    origin = np.empty(total, dtype=np.int64)
    copy_index = np.empty(total, dtype=np.int64)
    for e, ((u, v, _), w) in enumerate(zip(g.edges, ws)):
        lo, hi = edge_ptr[e], edge_ptr[e + 1]
        i = np.arange(1, w + 1, dtype=np.int64)
        us[lo:hi] = offset[u] + i - 1
        vs[lo:hi] = offset[v] + (w - i + 1) - 1
        origin[lo:hi] = e
        copy_index[lo:hi] = i
    phi = UnfoldedGraph(g, copies, offset, us, vs, origin, copy_index, edge_ptr)
    assert phi.m == sum(ws) and phi.n == int(copies.sum())
    return phi


@dataclass(frozen=True)
class RefoldedSubgraph:
    graph: WeightedGraph
    edges: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.edges)

    def total_weight(self) -> Fraction:
        return sum((self.graph.weight(e) for e in self.edges), Fraction(0))


def refold(phi: UnfoldedGraph, h_edge_ids: Iterable[int] | np.ndarray) -> RefoldedSubgraph:
    ids = np.asarray(list(h_edge_ids) if not isinstance(h_edge_ids, np.ndarray) else h_edge_ids, dtype=np.int64)
    origins = np.unique(phi.origin[ids]) if ids.size else np.empty(0, dtype=np.int64)
    return RefoldedSubgraph(phi.origin_graph, tuple(int(e) for e in origins))


def refolded_max_weight_matching(phi: UnfoldedGraph, h_edge_ids, solver: str = "auto",
                                 limits: ExactLimits = DEFAULT_LIMITS) -> Matching:
    """Exact maximum-weight matching of R(H), in the origin graph's edge ids."""
    r = refold(phi, h_edge_ids)
    return max_weight_matching_on(phi.origin_graph, r.edges, solver=solver, limits=limits)
