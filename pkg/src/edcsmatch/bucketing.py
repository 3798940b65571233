"""Geometric weight bucketing: real weights to integral weights in [gamma].

Bucket j holds weights in [w_min * gamma^j, w_min * gamma^(j+1)). Each
bucket runs its own streaming instance on rescaled integer weights; the
stored candidates of all buckets are combined with their original weights
and matched exactly at the end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction

import numpy as np

from .errors import WeightBelowMinimum
from .graph import DEFAULT_LIMITS, ExactLimits, Matching, WeightedGraph, max_weight_matching_on, to_fraction
from .stream import weighted_config, weighted_order, weighted_stream_adapter
from .unfolding import refold

GAMMA_CAP = 10**6


def gamma_eps(eps, c=1, cap: int = GAMMA_CAP) -> int:
    """ceil((1/eps)^(c/eps)), capped at ``cap``."""
    eps, c = to_fraction(eps), to_fraction(c)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    with localcontext() as ctx:
        ctx.prec = 60
        inv = Decimal(eps.denominator) / Decimal(eps.numerator)
        exponent = Decimal(c.numerator) / Decimal(c.denominator) * inv
        if exponent * inv.ln() > Decimal(cap).ln() + 1:
            return cap
        val = (exponent * inv.ln()).exp()
        i = int(val)
        g = i if Decimal(i) >= val else i + 1
    return max(2, min(g, cap))


def ceil_log(ratio: Fraction, base: int) -> int:
    """Smallest k >= 0 with base^k >= ratio."""
    k, p = 0, Fraction(1)
    while p < ratio:
        p *= base
        k += 1
    return k


@dataclass
class BucketingScheme:
    eps: Fraction
    gamma: int
    w_min: Fraction
    declared: bool = True
    c: Fraction = Fraction(1)

    @classmethod
    def create(cls, eps, w_min=None, c=1, gamma_cap: int = GAMMA_CAP, first_weight=None) -> "BucketingScheme":
        """``w_min`` declared up front, or else the first arriving weight."""
        eps = to_fraction(eps)
        gamma = gamma_eps(eps, c, gamma_cap)
        if w_min is not None:
            return cls(eps, gamma, to_fraction(w_min), True, to_fraction(c))
        if first_weight is None:
            raise ValueError("need a declared w_min or the first weight")
        return cls(eps, gamma, to_fraction(first_weight), False, to_fraction(c))

    def base(self, j: int) -> Fraction:
        return self.w_min * Fraction(self.gamma) ** j

    def assign_bucket(self, w) -> int:
        w = to_fraction(w)
        if w <= 0:
            raise ValueError(f"weight must be positive, got {w}")
        if w < self.w_min and self.declared:
            raise WeightBelowMinimum(f"weight {w} below declared minimum {self.w_min}")
        j = 0
        while w >= self.base(j + 1):
            j += 1
        while w < self.base(j):
            j -= 1
        return j

    def rescale_round(self, w, j: int | None = None) -> int:
        """ceil(w / bottom_j) clipped to [1, gamma]; rounded * bottom_j is within bottom_j of w."""
        w = to_fraction(w)
        j = self.assign_bucket(w) if j is None else j
        return max(1, min(self.gamma, math.ceil(w / self.base(j))))

    def bucket_bound(self, ratio) -> int:
        return ceil_log(to_fraction(ratio), self.gamma) + 1


def assign_bucket(w, scheme: BucketingScheme) -> int:
    return scheme.assign_bucket(w)


def rescale_round(w, bucket: int, scheme: BucketingScheme) -> int:
    return scheme.rescale_round(w, bucket)


@dataclass
class BucketRun:
    index: int
    edge_ids: np.ndarray
    max_rounded: int
    h_edges: int
    u_edges: int
    peak_stored: int
    unfolded_edges: int
    phase1_batches: int
    candidates: np.ndarray
    best_weight: Fraction

    def to_json(self) -> dict:
        return {
            "bucket": self.index, "edges": int(self.edge_ids.size), "W": self.max_rounded,
            "h_edges": self.h_edges, "u_edges": self.u_edges, "peak_stored": self.peak_stored,
            "unfolded_edges": self.unfolded_edges, "phase1_batches": self.phase1_batches,
            "candidates": int(self.candidates.size), "best_weight": str(self.best_weight),
        }


@dataclass
class BucketedResult:
    matching: Matching | None
    scheme: BucketingScheme
    buckets: list[BucketRun] = field(default_factory=list)
    bucket_span: int = 0

    @property
    def stored_edges(self) -> int:
        return sum(b.peak_stored for b in self.buckets)

    @property
    def candidates(self) -> np.ndarray:
        if not self.buckets:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate([b.candidates for b in self.buckets]))


def run_bucketed(g: WeightedGraph, eps, seed: int, *, beta=None, lam=None, alpha=None, w_min=None,
                 c=1, gamma_cap: int = GAMMA_CAP, finalize: bool = True, check: bool = True,
                 solver: str = "auto", limits: ExactLimits = DEFAULT_LIMITS,
                 order: np.ndarray | None = None) -> BucketedResult:
    """One streaming instance per weight bucket, fed its sub-stream in arrival order.

    Candidates are R(H_j u U_j) of every bucket; with ``finalize`` the exact
    maximum-weight matching of their union (original weights) is returned.
    """
    order = weighted_order(g, seed) if order is None else np.asarray(order, dtype=np.int64)
    if g.m == 0:
        scheme = BucketingScheme.create(eps, w_min=w_min if w_min is not None else 1, c=c, gamma_cap=gamma_cap)
        return BucketedResult(Matching((), Fraction(0)) if finalize else None, scheme)
    scheme = BucketingScheme.create(eps, w_min=w_min, c=c, gamma_cap=gamma_cap,
                                    first_weight=g.weight(int(order[0])))
    by_bucket: dict[int, list[int]] = {}
    rounded: dict[int, int] = {}
    for e in order:
        e = int(e)
        w = g.weight(e)
        j = scheme.assign_bucket(w)
        r = scheme.rescale_round(w, j)
        if check and not (0 <= r * scheme.base(j) - w <= scheme.base(j)):
            raise AssertionError(f"rounding distortion out of range on edge {e}")
        by_bucket.setdefault(j, []).append(e)
        rounded[e] = r

    result = BucketedResult(None, scheme, bucket_span=max(by_bucket) - min(by_bucket) + 1)
    for j in sorted(by_bucket):
        arrival = np.asarray(by_bucket[j], dtype=np.int64)
        # local ids keep the original relative order so tie-breaks agree with
        # an un-bucketed run; the arrival order is passed separately
        ids = np.sort(arrival)
        local = WeightedGraph.from_edges(
            g.n, [(g.edges[e][0], g.edges[e][1], rounded[int(e)]) for e in ids], g.bipartition
        )
        cfg = weighted_config(local, eps, beta=beta, lam=lam, alpha=alpha)
        run = weighted_stream_adapter(local, np.searchsorted(ids, arrival), cfg, check=check)
        cand_local = np.asarray(refold(run.phi, run.stored).edges, dtype=np.int64)
        cand = ids[cand_local] if cand_local.size else np.empty(0, dtype=np.int64)
        best = max_weight_matching_on(g, cand, solver=solver, limits=limits).weight if finalize else Fraction(0)
        result.buckets.append(BucketRun(
            index=j, edge_ids=arrival, max_rounded=int(local.max_weight),
            h_edges=run.trace.h_size, u_edges=run.trace.u_size, peak_stored=run.trace.peak_stored,
            unfolded_edges=run.phi.m, phase1_batches=run.trace.phase1_batches,
            candidates=np.sort(cand), best_weight=best,
        ))
    if check and result.bucket_span > scheme.bucket_bound(g.weight_ratio):
        raise AssertionError(f"{result.bucket_span} buckets exceed the bound {scheme.bucket_bound(g.weight_ratio)}")
    if finalize:
        result.matching = max_weight_matching_on(g, result.candidates, solver=solver, limits=limits)
        if check and result.matching.weight < max(b.best_weight for b in result.buckets):
            raise AssertionError("union matching lighter than a single bucket's")
    return result
