"""Graph generators, seeded experiment runs and report emission."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .bucketing import GAMMA_CAP, run_bucketed
from .comm import comm_config, run_k_party
from .errors import EdcsMatchError, InfeasibleParams, InvariantViolation, SizeLimitExceeded
from .graph import WeightedGraph, is_valid_matching, matching_weight, max_weight_matching_exact, to_fraction
from .graphio import ingest
from .stream import finalize_weighted, weighted_config, weighted_order, weighted_stream_adapter

KINDS = ("uniform", "bipartite", "planted", "star", "path", "cycle")
WEIGHT_DISTS = ("constant", "uniform", "geometric")
CSV_COLUMNS = ("seed", "ratio", "output_weight", "optimum", "h_edges", "u_edges", "phase1_batches", "msg_words", "ms")


def _weights(rng: np.random.Generator, k: int, dist: str, W: int, R, value) -> list[Fraction]:
    if dist == "constant":
        return [to_fraction(value)] * k
    if dist == "uniform":
        if W < 1:
            raise InfeasibleParams("uniform weights need W >= 1")
        return [Fraction(int(x)) for x in rng.integers(1, W + 1, size=k)]
    if dist == "geometric":
        # log-uniform on [1, R], kept to six significant digits
        R = float(R)
        if R < 1:
            raise InfeasibleParams("geometric weights need R >= 1")
        out = []
        for u in rng.random(k):
            w = Fraction(f"{R ** u:.6g}")
            out.append(min(max(w, Fraction(1)), to_fraction(f"{R:.6g}")))
        return out
    raise InfeasibleParams(f"unknown weight distribution {dist!r}")


def _random_pairs(rng: np.random.Generator, pool: list[tuple[int, int]], m: int) -> list[tuple[int, int]]:
    if m > len(pool):
        raise InfeasibleParams(f"m = {m} exceeds the {len(pool)} available pairs")
    idx = rng.choice(len(pool), size=m, replace=False)
    return [pool[i] for i in sorted(idx)]


def generate_graph(kind: str, n: int, m: int | None = None, density: float | None = None,
                   weights: str = "constant", W: int = 1, R=1, value=1, seed: int = 0) -> WeightedGraph:
    """Deterministic under ``seed``.

    ``uniform`` and ``bipartite`` pick m distinct pairs uniformly (or each
    pair with probability ``density``); bipartite sides are the balanced
    prefix split. ``planted`` is a random perfect matching plus m extra
    random pairs, so mu = n/2 for even n. Fixtures ignore m.
    """
    rng = np.random.default_rng(seed)
    if n < 0:
        raise InfeasibleParams("n must be nonnegative")
    sides = None
    if kind in ("uniform", "planted"):
        pool = list(itertools.combinations(range(n), 2))
    elif kind == "bipartite":
        left = n // 2
        sides = tuple(0 if x < left else 1 for x in range(n))
        pool = [(u, v) for u in range(left) for v in range(left, n)]
    elif kind == "star":
        pairs = [(0, v) for v in range(1, n)]
    elif kind == "path":
        pairs = [(u, u + 1) for u in range(n - 1)]
    elif kind == "cycle":
        if n < 3:
            raise InfeasibleParams("a cycle needs n >= 3")
        pairs = [(u, (u + 1) % n) for u in range(n)]
    else:
        raise InfeasibleParams(f"unknown graph kind {kind!r}")

    if kind in ("uniform", "bipartite"):
        if density is not None:
            if not 0 <= density <= 1:
                raise InfeasibleParams("density must lie in [0, 1]")
            pairs = [p for p, r in zip(pool, rng.random(len(pool))) if r < density]
        else:
            pairs = _random_pairs(rng, pool, m if m is not None else 0)
    elif kind == "planted":
        if n % 2:
            raise InfeasibleParams("planted matching needs even n")
        perm = rng.permutation(n)
        planted = {(min(a, b), max(a, b)) for a, b in zip(perm[0::2].tolist(), perm[1::2].tolist())}
        rest = [p for p in pool if p not in planted]
        extra = m - len(planted) if m is not None else 0
        if density is not None:
            extra_pairs = [p for p, r in zip(rest, rng.random(len(rest))) if r < density]
        else:
            extra_pairs = _random_pairs(rng, rest, max(extra, 0))
        pairs = sorted(planted | set(extra_pairs))
    ws = _weights(rng, len(pairs), weights, W, R, value)
    return WeightedGraph(n, tuple((u, v, w) for (u, v), w in zip(pairs, ws)), sides)


@dataclass
class ExperimentSpec:
    scenario: str
    graph: dict | str
    overrides: dict = field(default_factory=dict)
    trials: int = 1
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.scenario not in ("stream", "comm", "verify"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def trial_seeds(self) -> list[int]:
        return [self.seed + t for t in range(self.trials)]

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "ExperimentSpec":
        return cls(**d)

    def load_graph(self) -> WeightedGraph:
        if isinstance(self.graph, str):
            return ingest(self.graph)
        return generate_graph(**self.graph)


@dataclass
class TrialRecord:
    seed: int
    config: dict
    output_weight: Fraction | None
    optimum: Fraction | None
    h_edges: int = 0
    u_edges: int = 0
    phase1_batches: int = 0
    msg_words: int = 0
    ms: float = 0.0
    extra: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def ratio(self) -> Fraction | None:
        if self.optimum is None or self.output_weight is None:
            return None
        return Fraction(1) if self.optimum == 0 else self.output_weight / self.optimum

    def row(self) -> dict:
        r = self.ratio
        return {
            "seed": self.seed, "ratio": "" if r is None else f"{float(r):.6f}",
            "output_weight": "" if self.output_weight is None else str(self.output_weight),
            "optimum": "" if self.optimum is None else str(self.optimum),
            "h_edges": self.h_edges, "u_edges": self.u_edges, "phase1_batches": self.phase1_batches,
            "msg_words": self.msg_words, "ms": f"{self.ms:.3f}",
        }

    def to_json(self) -> dict:
        d = self.row()
        d["ratio"] = None if self.ratio is None else float(self.ratio)
        d["config"] = self.config
        d["extra"] = self.extra
        d["error"] = self.error
        return d


def exact_optimum(g: WeightedGraph):
    """Exact mu_w(g), or None past the oracle limits."""
    try:
        return max_weight_matching_exact(g).weight
    except SizeLimitExceeded:
        return None


def _certify(g: WeightedGraph, edges) -> Fraction:
    if not is_valid_matching(g, edges):
        raise InvariantViolation("output is not a matching of the input graph")
    return matching_weight(g, edges)


def run_trial(g: WeightedGraph, scenario: str, overrides: dict, seed: int, optimum) -> TrialRecord:
    ov = dict(overrides)
    eps = ov.pop("eps", "0.1")
    beta, lam, alpha = ov.pop("beta", None), ov.pop("lam", None), ov.pop("alpha", None)
    t0 = time.perf_counter()
    if scenario == "stream" and ov.get("bucketed"):
        res = run_bucketed(g, eps, seed, beta=beta, lam=lam, alpha=alpha,
                           gamma_cap=int(ov.get("gamma_cap", GAMMA_CAP)))
        out = _certify(g, res.matching.edges)
        rec = TrialRecord(seed, {"eps": str(eps), "beta": beta, "lam": None if lam is None else str(lam),
                                 "alpha": alpha, "gamma": res.scheme.gamma, "bucketed": True},
                          out, optimum, sum(b.h_edges for b in res.buckets), sum(b.u_edges for b in res.buckets),
                          sum(b.phase1_batches for b in res.buckets),
                          extra={"buckets": [b.to_json() for b in res.buckets], "stored_edges": res.stored_edges,
                                 "bucket_span": res.bucket_span})
    elif scenario == "stream":
        cfg = weighted_config(g, eps, beta=beta, lam=lam, alpha=alpha)
        run = weighted_stream_adapter(g, weighted_order(g, seed), cfg)
        mt = finalize_weighted(run.phi, run.H, run.U)
        out = _certify(g, mt.edges)
        rec = TrialRecord(seed, cfg.to_json(), out, optimum, run.trace.h_size, run.trace.u_size,
                          run.trace.phase1_batches, extra=run.trace.summary())
    elif scenario == "comm":
        k = int(ov.get("parties", 2))
        W = int(g.max_weight) if g.m else 1
        cfg = comm_config(eps, W, k, beta=beta, lam=lam, alpha=alpha)
        mt, words, tr = run_k_party(g, k, cfg, seed)
        out = _certify(g, mt.edges)
        rec = TrialRecord(seed, cfg.to_json(), out, optimum, tr.h_edges, tr.u_edges, tr.phase1_batches,
                          tr.message_words, extra=tr.summary() | {"max_words": words})
    else:
        raise ValueError(f"scenario {scenario!r} has no trial runner")
    rec.ms = (time.perf_counter() - t0) * 1e3
    return rec


def summarize(records: list[TrialRecord]) -> dict:
    ratios = [float(r.ratio) for r in records if r.ratio is not None]
    s: dict[str, Any] = {"trials": len(records), "errors": sum(1 for r in records if r.error),
                         "with_ratio": len(ratios)}
    if ratios:
        a = np.asarray(ratios)
        s.update(min=float(a.min()), mean=float(a.mean()), max=float(a.max()),
                 q10=float(np.quantile(a, 0.1)), median=float(np.median(a)), q90=float(np.quantile(a, 0.9)),
                 stderr=float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0)
    return s


def run_experiment(spec: ExperimentSpec) -> tuple[list[TrialRecord], dict]:
    """Run every trial; module errors are recorded per trial, invariant
    violations too (and counted in the summary)."""
    g = spec.load_graph()
    optimum = exact_optimum(g)
    records = []
    for s in spec.trial_seeds():
        try:
            rec = run_trial(g, spec.scenario, spec.overrides, s, optimum)
        except (EdcsMatchError, ValueError, AssertionError) as exc:
            rec = TrialRecord(s, dict(spec.overrides), None, optimum, error=f"{type(exc).__name__}: {exc}")
        records.append(rec)
    summary = summarize(records)
    summary["optimum_computed"] = optimum is not None
    summary["invariant_failures"] = sum(
        1 for r in records if r.error and r.error.split(":")[0] in ("InvariantViolation", "AssertionError"))
    return records, summary


def emit_report(records: list[TrialRecord], fmt: str = "json", path: str | Path | None = None,
                spec: ExperimentSpec | None = None, summary: dict | None = None) -> str:
    """Render records as CSV or JSON; written to ``path`` when given."""
    if not records:
        raise ValueError("refusing to emit an empty report")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r.row())
        text = buf.getvalue()
    elif fmt == "json":
        doc = {"spec": spec.to_json() if spec else None, "summary": summary or summarize(records),
               "records": [r.to_json() for r in records]}
        text = json.dumps(doc, indent=2, default=str) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text
