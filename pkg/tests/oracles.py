"""Independent reference implementations used only by the tests.

Nothing here calls into the package's solvers: matchings are enumerated
outright and Algorithm 1 is re-simulated line by line on plain dicts.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def all_matchings(edges):
    """Every matching of an edge list [(u, v, ...)] as a tuple of indices."""
    out = []

    def rec(i, used, chosen):
        if i == len(edges):
            out.append(tuple(chosen))
            return
        rec(i + 1, used, chosen)
        u, v = edges[i][0], edges[i][1]
        if u not in used and v not in used:
            rec(i + 1, used | {u, v}, chosen + [i])

    rec(0, frozenset(), [])
    return out


def brute_mu(edges) -> int:
    return max(len(mt) for mt in all_matchings(edges))


def brute_mu_w(edges) -> Fraction:
    return max(sum((Fraction(edges[i][2]) for i in mt), Fraction(0)) for mt in all_matchings(edges))


def brute_best_lex(edges):
    """Maximum weight, ties to the lexicographically smallest sorted id tuple."""
    best = None
    for mt in all_matchings(edges):
        w = sum((Fraction(edges[i][2]) for i in mt), Fraction(0))
        key = (-w, tuple(sorted(mt)))
        if best is None or key < best:
            best = key
    return -best[0], best[1]


def brute_unfold(edges):
    """phi(G) as a list of ((u, i), (v, j), origin) with 1-based copy indices."""
    out = []
    for e, (u, v, w) in enumerate(edges):
        w = int(w)
        for i in range(1, w + 1):
            out.append(((u, i), (v, w - i + 1), e))
    return out


def simulate_algorithm1(n, us, vs, batches, beta, lam, alpha):
    """Line-by-line Algorithm 1 on dicts; removal takes the largest degree
    sum first, ties to the smaller edge id."""
    lam = Fraction(lam)
    deg = [0] * n
    H = set()
    U = set()
    mods = 0
    phase = 1
    found = False
    in_epoch = 0
    p1 = None
    for i, batch in enumerate(batches):
        if phase == 1:
            for e in batch:
                a, b = us[e], vs[e]
                if deg[a] + deg[b] < beta * (1 - lam):
                    H.add(e)
                    deg[a] += 1
                    deg[b] += 1
                    mods += 1
                    found = True
                    while True:
                        over = [(-(deg[us[f]] + deg[vs[f]]), f) for f in H if deg[us[f]] + deg[vs[f]] > beta]
                        if not over:
                            break
                        _, f = min(over)
                        H.remove(f)
                        deg[us[f]] -= 1
                        deg[vs[f]] -= 1
                        mods += 1
            in_epoch += 1
            if in_epoch == alpha:
                if not found:
                    phase = 2
                    p1 = i + 1
                found = False
                in_epoch = 0
        else:
            for e in batch:
                if deg[us[e]] + deg[vs[e]] < beta * (1 - lam):
                    U.add(e)
    return sorted(H), sorted(U), (len(batches) if p1 is None else p1), mods


def random_bipartite(rng: np.random.Generator, max_n: int = 12, max_w: int = 5, p=None):
    n = int(rng.integers(2, max_n + 1))
    left = n // 2
    p = rng.uniform(0.2, 0.8) if p is None else p
    edges = [(u, v, int(rng.integers(1, max_w + 1)))
             for u in range(left) for v in range(left, n) if rng.random() < p]
    return n, edges, tuple(0 if x < left else 1 for x in range(n))


def random_general(rng: np.random.Generator, n: int, p: float, max_w: int = 1):
    return [(u, v, int(rng.integers(1, max_w + 1)))
            for u, v in itertools.combinations(range(n), 2) if rng.random() < p]


def theory_beta_mp(lam: Fraction, b: int, power: int = 2) -> int:
    import mpmath
    with mpmath.workdps(80):
        lam_mp = mpmath.mpf(lam.numerator) / lam.denominator
        return int(mpmath.ceil(144 * lam_mp ** (-power) * mpmath.log(2 * b / lam_mp)))


def odd_set_sums(edges, x, max_size):
    """{S: sum of x over G[S]} for odd S up to max_size, over all vertices."""
    verts = sorted({u for u, v, *_ in edges} | {v for u, v, *_ in edges})
    out = {}
    for k in range(3, max_size + 1, 2):
        for s in itertools.combinations(verts, k):
            ss = set(s)
            out[s] = sum((x.get(i, Fraction(0)) for i, (u, v, *_) in enumerate(edges) if u in ss and v in ss),
                         Fraction(0))
    return out
