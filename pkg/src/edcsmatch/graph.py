"""Graph types, exact matching oracles and matching validators."""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from . import kernels
from .errors import (
    DuplicateEdge,
    EnumerationLimitExceeded,
    InvalidFractionalMatching,
    InvalidGraph,
    SizeLimitExceeded,
)


def to_fraction(x) -> Fraction:
    """Exact rational for ints, Fractions, decimal strings and floats.

    Floats go through their shortest repr, so ``0.1`` becomes ``1/10``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(str(x).strip())


@dataclass(frozen=True)
class SimpleGraph:
    """Unweighted simple graph on vertices ``0..n-1`` as two endpoint arrays.

    ``sides`` is an optional 0/1 two-coloring that every edge must cross.
    """

    n: int
    us: np.ndarray
    vs: np.ndarray
    sides: np.ndarray | None = None

    @property
    def m(self) -> int:
        return int(self.us.shape[0])


@dataclass(frozen=True)
class WeightedGraph:
    n: int
    edges: tuple[tuple[int, int, Fraction], ...]
    bipartition: tuple[int, ...] | None = None
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise InvalidGraph("negative vertex count")
        index = {}
        norm = []
        for eid, (u, v, w) in enumerate(self.edges):
            u, v, w = int(u), int(v), to_fraction(w)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidGraph(f"edge {eid} has endpoint outside 0..{self.n - 1}")
            if u == v:
                raise InvalidGraph(f"edge {eid} is a self-loop at {u}")
            if w <= 0:
                raise InvalidGraph(f"edge {eid} has non-positive weight {w}")
            key = (min(u, v), max(u, v))
            if key in index:
                raise DuplicateEdge(f"edge {key} appears twice (ids {index[key]} and {eid})")
            index[key] = eid
            norm.append((u, v, w))
        object.__setattr__(self, "edges", tuple(norm))
        object.__setattr__(self, "_index", index)
        if self.bipartition is not None:
            sides = tuple(int(s) for s in self.bipartition)
            if len(sides) != self.n or any(s not in (0, 1) for s in sides):
                raise InvalidGraph("bipartition must give side 0 or 1 for every vertex")
            for eid, (u, v, _) in enumerate(norm):
                if sides[u] == sides[v]:
                    raise InvalidGraph(f"edge {eid} = ({u}, {v}) does not cross the bipartition")
            object.__setattr__(self, "bipartition", sides)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence], bipartition=None) -> "WeightedGraph":
        edges = tuple((e[0], e[1], e[2] if len(e) > 2 else 1) for e in edges)
        return cls(n, edges, None if bipartition is None else tuple(bipartition))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def us(self) -> np.ndarray:
        return np.fromiter((e[0] for e in self.edges), dtype=np.int64, count=self.m)

    @cached_property
    def vs(self) -> np.ndarray:
        return np.fromiter((e[1] for e in self.edges), dtype=np.int64, count=self.m)

    @property
    def sides(self) -> np.ndarray | None:
        if self.bipartition is None:
            return None
        return np.asarray(self.bipartition, dtype=np.int64)

    @property
    def weights(self) -> list[Fraction]:
        return [e[2] for e in self.edges]

    def weight(self, eid: int) -> Fraction:
        return self.edges[eid][2]

    def edge_id(self, u: int, v: int) -> int:
        return self._index[(min(u, v), max(u, v))]

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self._index

    @property
    def is_integral(self) -> bool:
        return all(w.denominator == 1 for _, _, w in self.edges)

    @property
    def max_weight(self) -> Fraction:
        return max((w for _, _, w in self.edges), default=Fraction(0))

    @property
    def min_weight(self) -> Fraction:
        return min((w for _, _, w in self.edges), default=Fraction(0))

    @property
    def weight_ratio(self) -> Fraction:
        """R = heaviest / lightest edge weight (1 for an edgeless graph)."""
        if not self.edges:
            return Fraction(1)
        return self.max_weight / self.min_weight

    def subgraph(self, edge_ids: Iterable[int]) -> "WeightedGraph":
        """Edge-induced subgraph on the same vertex set; edge ids are renumbered."""
        ids = sorted(set(int(e) for e in edge_ids))
        return WeightedGraph(self.n, tuple(self.edges[e] for e in ids), self.bipartition)

    def unweighted(self) -> SimpleGraph:
        return SimpleGraph(self.n, self.us, self.vs, self.sides)


@dataclass(frozen=True)
class Matching:
    """A set of edge ids (sorted) of some host graph, with its total weight."""

    edges: tuple[int, ...]
    weight: Fraction

    @property
    def size(self) -> int:
        return len(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    def pairs(self, g) -> list[tuple[int, int]]:
        return [(int(g.us[e]), int(g.vs[e])) for e in self.edges]


EMPTY_MATCHING = Matching((), Fraction(0))


class FractionalMatching:
    """Edge id -> value in [0, 1] with every vertex load at most 1.

    Construction fails with ``InvalidFractionalMatching`` otherwise. Values
    are exact rationals; zero entries are dropped.
    """

    def __init__(self, g, values: Mapping[int, Fraction]):
        self.graph = g
        vals = {}
        for e, x in values.items():
            x = to_fraction(x)
            if x < 0 or x > 1:
                raise InvalidFractionalMatching(f"x[{e}] = {x} outside [0, 1]")
            if x:
                vals[int(e)] = x
        self.values = vals
        load = self.loads()
        over = {u: l for u, l in load.items() if l > 1}
        if over:
            u = min(over)
            raise InvalidFractionalMatching(f"vertex {u} has load {over[u]} > 1")

    def loads(self) -> dict[int, Fraction]:
        load: dict[int, Fraction] = {}
        for e, x in self.values.items():
            for u in (int(self.graph.us[e]), int(self.graph.vs[e])):
                load[u] = load.get(u, Fraction(0)) + x
        return load

    def __getitem__(self, e: int) -> Fraction:
        return self.values.get(int(e), Fraction(0))

    def total_weight(self) -> Fraction:
        return sum((self.graph.weight(e) * x for e, x in self.values.items()), Fraction(0))

    def scaled(self, factor) -> "FractionalMatching":
        factor = to_fraction(factor)
        return FractionalMatching(self.graph, {e: x * factor for e, x in self.values.items()})


def is_valid_matching(g, edge_ids: Iterable[int]) -> bool:
    seen = set()
    for e in edge_ids:
        e = int(e)
        if not 0 <= e < g.m:
            return False
        u, v = int(g.us[e]), int(g.vs[e])
        if u in seen or v in seen:
            return False
        seen.add(u)
        seen.add(v)
    return True


def two_coloring(n: int, us: np.ndarray, vs: np.ndarray) -> np.ndarray | None:
    """A 0/1 side per vertex if the graph is bipartite, else None."""
    adj = [[] for _ in range(n)]
    for a, b in zip(us.tolist(), vs.tolist()):
        adj[a].append(b)
        adj[b].append(a)
    side = np.full(n, -1, dtype=np.int64)
    for s in range(n):
        if side[s] != -1:
            continue
        side[s] = 0
        dq = deque([s])
        while dq:
            x = dq.popleft()
            for y in adj[x]:
                if side[y] == -1:
                    side[y] = 1 - side[x]
                    dq.append(y)
                elif side[y] == side[x]:
                    return None
    return side


def _mate_to_edges(us, vs, mate) -> tuple[int, ...]:
    if us.shape[0] == 0:
        return ()
    hit = np.nonzero(mate[us] == vs)[0]
    return tuple(int(e) for e in hit)


def max_cardinality_matching_exact(g) -> Matching:
    """Maximum-cardinality matching of a simple graph (weights ignored).

    Bipartite inputs (declared or detected) use Hopcroft-Karp; anything else
    uses Edmonds' blossom search. ``g`` needs ``n``, ``us``, ``vs`` and may
    carry ``sides``.
    """
    n = int(g.n)
    us = np.ascontiguousarray(g.us, dtype=np.int64)
    vs = np.ascontiguousarray(g.vs, dtype=np.int64)
    if us.shape[0] == 0:
        return EMPTY_MATCHING
    sides = getattr(g, "sides", None)
    if sides is None:
        sides = two_coloring(n, us, vs)
    if sides is not None:
        left = sides[us] == 0
        ls = np.where(left, us, vs)
        rs = np.where(left, vs, us)
        lmap = np.full(n, -1, dtype=np.int64)
        rmap = np.full(n, -1, dtype=np.int64)
        lverts = np.unique(ls)
        rverts = np.unique(rs)
        lmap[lverts] = np.arange(lverts.shape[0])
        rmap[rverts] = np.arange(rverts.shape[0])
        mate_l, _ = kernels.hopcroft_karp(lverts.shape[0], rverts.shape[0], lmap[ls], rmap[rs])
        matched = mate_l[lmap[ls]] == rmap[rs]
        ids = tuple(int(e) for e in np.nonzero(matched)[0])
    else:
        mate = kernels.edmonds_matching(n, us, vs)
        ids = _mate_to_edges(us, vs, mate)
    return Matching(ids, Fraction(len(ids)))


def mu(g) -> int:
    """Size of a maximum-cardinality matching."""
    return max_cardinality_matching_exact(g).size


@dataclass(frozen=True)
class ExactLimits:
    """Size limits for the exact weighted solvers.

    The exhaustive search handles general graphs with at most
    ``max_vertices`` non-isolated vertices and ``max_edges`` edges; larger
    instances go to the integer blossom solver up to ``max_blossom_edges``.
    """

    max_vertices: int = 24
    max_edges: int = 64
    max_blossom_edges: int = 200_000


DEFAULT_LIMITS = ExactLimits()


def _tiebreak_keys(g) -> list[int]:
    # weight * 2^m + 2^(m-1-e): a strict order on edge sets that ranks by weight
    # and, among equal weights, prefers the lexicographically smallest id list
    m = g.m
    ws = [to_fraction(w) for w in g.weights]
    scale = math.lcm(*(w.denominator for w in ws)) if ws else 1
    return [(int(w * scale) << m) + (1 << (m - 1 - e)) for e, w in enumerate(ws)]


def _exhaustive(g, keys) -> tuple[int, ...]:
    n = g.n
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for e in range(g.m):
        a, b = int(g.us[e]), int(g.vs[e])
        adj[a].append((b, e))
        adj[b].append((a, e))
    memo: dict[int, tuple[int, tuple[int, ...]]] = {}

    def best(mask: int) -> tuple[int, tuple[int, ...]]:
        if mask == 0:
            return 0, ()
        hit = memo.get(mask)
        if hit is not None:
            return hit
        v = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << v)
        top = best(rest)
        for u, e in adj[v]:
            if rest >> u & 1:
                val, chosen = best(rest & ~(1 << u))
                val += keys[e]
                if val > top[0]:
                    top = (val, chosen + (e,))
        memo[mask] = top
        return top

    # components are independent; search each on its own
    seen = [False] * n
    chosen: list[int] = []
    for s in range(n):
        if seen[s] or not adj[s]:
            continue
        comp = 0
        stack = [s]
        seen[s] = True
        while stack:
            x = stack.pop()
            comp |= 1 << x
            for y, _ in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    stack.append(y)
        chosen.extend(best(comp)[1])
        memo.clear()
    return tuple(sorted(chosen))


def _blossom(g, keys) -> tuple[int, ...]:
    G = nx.Graph()
    for e in range(g.m):
        G.add_edge(int(g.us[e]), int(g.vs[e]), key=keys[e])
    pairs = nx.max_weight_matching(G, maxcardinality=False, weight="key")
    return tuple(sorted(g.edge_id(a, b) if hasattr(g, "edge_id") else _find_edge(g, a, b) for a, b in pairs))


def _find_edge(g, a, b) -> int:
    hit = np.nonzero(((g.us == a) & (g.vs == b)) | ((g.us == b) & (g.vs == a)))[0]
    return int(hit[0])


def max_weight_matching_exact(g, solver: str = "auto", limits: ExactLimits = DEFAULT_LIMITS) -> Matching:
    """Maximum-weight matching, ties broken toward the lexicographically
    smallest sorted edge-id list.

    ``solver`` is ``"exhaustive"`` (memoized search, size-limited),
    ``"blossom"`` (Edmonds on exact integer keys) or ``"auto"`` (exhaustive
    when within ``limits``, otherwise blossom). Raises ``SizeLimitExceeded``
    when the chosen solver's limit is exceeded.
    """
    if g.m == 0:
        return EMPTY_MATCHING
    active = int(np.unique(np.concatenate([g.us, g.vs])).shape[0])
    small = active <= limits.max_vertices and g.m <= limits.max_edges
    if solver == "auto":
        solver = "exhaustive" if small else "blossom"
    if solver == "exhaustive" and not small:
        raise SizeLimitExceeded(
            f"exhaustive solver limited to {limits.max_vertices} vertices and {limits.max_edges} edges; "
            f"got {active} vertices, {g.m} edges"
        )
    if solver == "blossom" and g.m > limits.max_blossom_edges:
        raise SizeLimitExceeded(f"blossom solver limited to {limits.max_blossom_edges} edges; got {g.m}")
    keys = _tiebreak_keys(g)
    if solver == "exhaustive":
        ids = _exhaustive(g, keys)
    elif solver == "blossom":
        ids = _blossom(g, keys)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    return Matching(ids, sum((g.weight(e) for e in ids), Fraction(0)))


def matching_weight(g, edge_ids: Iterable[int]) -> Fraction:
    return sum((g.weight(int(e)) for e in edge_ids), Fraction(0))


@dataclass
class BlossomReport:
    max_set_size: int
    sets_checked: int
    violations: list[tuple[tuple[int, ...], Fraction, int]]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_blossom_inequalities(g, x: FractionalMatching, eps, max_set_size_limit: int = 15,
                               max_sets: int = 5_000_000) -> BlossomReport:
    """Check sum of x over G[S] <= floor(|S|/2) for every odd S with |S| <= 1/eps.

    Even sets are implied by the vertex constraints and are skipped, as are
    sets of size 1 (no edges). Only vertices carrying positive x can make an
    inequality tight, so S ranges over the support.
    """
    eps = to_fraction(eps)
    if eps <= 0:
        raise EnumerationLimitExceeded("eps must be positive")
    k_max = math.floor(1 / eps)
    if k_max > max_set_size_limit:
        raise EnumerationLimitExceeded(f"1/eps = {k_max} exceeds the set-size limit {max_set_size_limit}")
    support_edges = [(int(g.us[e]), int(g.vs[e]), val) for e, val in sorted(x.values.items())]
    verts = sorted({a for a, _, _ in support_edges} | {b for _, b, _ in support_edges})
    sizes = [k for k in range(3, k_max + 1, 2) if k <= len(verts)]
    total_sets = sum(math.comb(len(verts), k) for k in sizes)
    if total_sets > max_sets:
        raise EnumerationLimitExceeded(f"{total_sets} vertex sets exceed the enumeration limit {max_sets}")
    pos = {v: i for i, v in enumerate(verts)}
    emask = [((1 << pos[a]) | (1 << pos[b]), val) for a, b, val in support_edges]
    violations = []
    checked = 0
    for k in sizes:
        bound = k // 2
        for combo in itertools.combinations(range(len(verts)), k):
            checked += 1
            smask = 0
            for i in combo:
                smask |= 1 << i
            total = sum((val for em, val in emask if em & smask == em), Fraction(0))
            if total > bound:
                violations.append((tuple(verts[i] for i in combo), total, bound))
    return BlossomReport(k_max, checked, violations)


def max_weight_matching_on(g: WeightedGraph, edge_ids: Iterable[int], solver: str = "auto",
                           limits: ExactLimits = DEFAULT_LIMITS) -> Matching:
    """Maximum-weight matching of the edge-induced subgraph, reported in ``g``'s edge ids.

    Subgraph ids preserve the relative order of ``g``'s ids, so the
    lexicographic tie-break is the same one ``g`` would use.
    """
    ids = sorted(set(int(e) for e in edge_ids))
    if not ids:
        return EMPTY_MATCHING
    sub = g.subgraph(ids)
    local = max_weight_matching_exact(sub, solver=solver, limits=limits)
    return Matching(tuple(ids[e] for e in local.edges), local.weight)
