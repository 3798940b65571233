"""Plain-text edge lists.

Header ``n m [bipartite [L]]`` then one ``u v w`` line per edge. With the
``bipartite`` flag, vertices ``0..L-1`` form the left side (``L`` defaults
to ``n // 2``). Weights are integers, decimals or ``p/q``. Blank lines and
``#`` comments are ignored.
"""
from __future__ import annotations

from fractions import Fraction
from pathlib import Path
from typing import TextIO

from .errors import DuplicateEdge, EdcsMatchError, ParseError
from .graph import WeightedGraph


def _weight(tok: str, lineno: int) -> Fraction:
    try:
        w = Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"line {lineno}: bad weight {tok!r}", lineno) from None
    if w <= 0:
        raise ParseError(f"line {lineno}: weight must be positive, got {tok}", lineno)
    return w


def _int(tok: str, what: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"line {lineno}: bad {what} {tok!r}", lineno) from None


def parse_edge_list(text: str) -> WeightedGraph:
    lines = [(i, ln.split("#", 1)[0].split()) for i, ln in enumerate(text.splitlines(), 1)]
    lines = [(i, toks) for i, toks in lines if toks]
    if not lines:
        raise ParseError("empty input: missing header", 1)
    hline, head = lines[0]
    if len(head) < 2 or len(head) > 4 or (len(head) > 2 and head[2] != "bipartite"):
        raise ParseError(f"line {hline}: header must be 'n m [bipartite [L]]'", hline)
    n = _int(head[0], "vertex count", hline)
    m = _int(head[1], "edge count", hline)
    if n < 0 or m < 0:
        raise ParseError(f"line {hline}: negative counts", hline)
    sides = None
    if len(head) > 2:
        left = _int(head[3], "left-side size", hline) if len(head) == 4 else n // 2
        sides = tuple(0 if x < left else 1 for x in range(n))
    edges = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, toks in lines[1:]:
        if len(toks) not in (2, 3):
            raise ParseError(f"line {lineno}: expected 'u v w'", lineno)
        u = _int(toks[0], "vertex", lineno)
        v = _int(toks[1], "vertex", lineno)
        w = _weight(toks[2], lineno) if len(toks) == 3 else Fraction(1)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"line {lineno}: vertex out of range 0..{n - 1}", lineno)
        if u == v:
            raise ParseError(f"line {lineno}: self-loop at {u}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdge(f"line {lineno}: edge {key} already given on line {seen[key]}")
        seen[key] = lineno
        if sides is not None and sides[u] == sides[v]:
            raise ParseError(f"line {lineno}: edge ({u}, {v}) does not cross the bipartition", lineno)
        edges.append((u, v, w))
    if len(edges) != m:
        raise ParseError(f"header declares {m} edges, found {len(edges)}", hline)
    try:
        return WeightedGraph(n, tuple(edges), sides)
    except DuplicateEdge:
        raise
    except EdcsMatchError as exc:
        raise ParseError(str(exc), hline) from exc


def ingest(path: str | Path) -> WeightedGraph:
    return parse_edge_list(Path(path).read_text())


def format_weight(w: Fraction) -> str:
    return str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def write_edge_list(g: WeightedGraph, out: TextIO) -> None:
    head = f"{g.n} {g.m}"
    if g.bipartition is not None:
        left = sum(1 for s in g.bipartition if s == 0)
        if tuple(0 if x < left else 1 for x in range(g.n)) != g.bipartition:
            raise ValueError("bipartition must be a prefix split to be written in this format")
        head += f" bipartite {left}"
    out.write(head + "\n")
    for u, v, w in g.edges:
        out.write(f"{u} {v} {format_weight(w)}\n")


def dump(g: WeightedGraph, path: str | Path) -> None:
    with open(path, "w") as fh:
        write_edge_list(g, fh)


def write_unfolded(phi, out: TextIO) -> None:
    """phi(G) in the same format; vertex ``u^i`` is written as ``u_i``."""
    out.write(f"{phi.n} {phi.m}\n")
    for x, y in zip(phi.us, phi.vs):
        (u, i), (v, j) = phi.vertex(int(x)), phi.vertex(int(y))
        out.write(f"{u}_{i} {v}_{j} 1\n")
