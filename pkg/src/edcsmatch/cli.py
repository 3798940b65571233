"""Command-line entry point: ``edcsmatch <command> ...``.

Exit status is 0 only when every hard invariant held and every requested
verification passed.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .edcs import certify_edcs
from .errors import EdcsMatchError, InvariantViolation, ParseError
from .graph import FractionalMatching, check_blossom_inequalities, max_cardinality_matching_exact, max_weight_matching_exact
from .graphio import dump, ingest, write_edge_list, write_unfolded
from .harness import KINDS, WEIGHT_DISTS, ExperimentSpec, emit_report, generate_graph, run_experiment
from .unfolding import unfold


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, default=str) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _overrides(args) -> dict:
    ov = {"eps": args.eps}
    for key, attr in (("beta", "beta"), ("lam", "lam"), ("alpha", "alpha")):
        v = getattr(args, attr, None)
        if v is not None:
            ov[key] = v
    return ov


def cmd_gen(args) -> int:
    g = generate_graph(args.kind, args.n, m=args.m, density=args.density, weights=args.weights,
                       W=args.W, R=args.R, value=args.value, seed=args.seed)
    if args.out:
        dump(g, args.out)
    else:
        write_edge_list(g, sys.stdout)
    return 0


def cmd_unfold(args) -> int:
    phi = unfold(ingest(args.inp))
    if args.out:
        with open(args.out, "w") as fh:
            write_unfolded(phi, fh)
    else:
        write_unfolded(phi, sys.stdout)
    return 0


def _run(args, scenario: str) -> int:
    ov = _overrides(args)
    if scenario == "stream" and args.bucketed:
        ov["bucketed"] = True
        ov["gamma_cap"] = args.gamma_cap
    if scenario == "comm":
        ov["parties"] = args.parties
    spec = ExperimentSpec(scenario, args.graph, ov, args.trials, args.seed, args.out)
    records, summary = run_experiment(spec)
    text = emit_report(records, args.format, args.out, spec, summary)
    if not args.out:
        sys.stdout.write(text)
    for r in records:
        if r.error:
            print(f"seed {r.seed}: {r.error}", file=sys.stderr)
    return 1 if any(r.error for r in records) else 0


def cmd_verify(args) -> int:
    g = ingest(args.graph)
    if args.what == "unfold":
        phi = unfold(g)
        doc = {"vertices": phi.n, "edges": phi.m, "sum_w": int(sum(g.weights)),
               "sum_Wu": int(phi.copies.sum())}
        ok = phi.m == doc["sum_w"]
        if g.bipartition is not None:
            doc["mu_w"] = str(max_weight_matching_exact(g).weight)
            doc["mu_phi"] = max_cardinality_matching_exact(phi.whole()).size
            ok = ok and Fraction(doc["mu_w"]) == doc["mu_phi"]
    elif args.what == "edcs":
        h = ingest(args.subgraph)
        ids = []
        for u, v, _ in h.edges:
            if not g.has_edge(u, v):
                raise ParseError(f"subgraph edge ({u}, {v}) is not in the graph")
            ids.append(g.edge_id(u, v))
        cert = certify_edcs(g, ids, args.beta, args.lam)
        doc = {"p1_violations": cert.p1_violations, "p2_violations": cert.p2_violations}
        ok = cert.ok
    elif args.what == "xval":
        from .comm import comm_config, fractional_pipeline
        cfg = comm_config(args.eps, int(g.max_weight) if g.m else 1, 2, beta=args.beta, lam=args.lam)
        fx, rep, trace = fractional_pipeline(g, cfg, args.seed, blossom=args.blossom)
        doc = rep.to_json() | {"iterations": fx.iterations, "trace": trace.summary()}
        ok = rep.ok and rep.blossom_ok is not False
    else:
        values = {}
        for lineno, line in enumerate(Path(args.x).read_text().splitlines(), 1):
            toks = line.split("#", 1)[0].split()
            if not toks:
                continue
            if len(toks) != 3:
                raise ParseError(f"line {lineno}: expected 'u v value'", lineno)
            u, v = int(toks[0]), int(toks[1])
            if not g.has_edge(u, v):
                raise ParseError(f"line {lineno}: ({u}, {v}) is not an edge", lineno)
            values[g.edge_id(u, v)] = Fraction(toks[2])
        rep = check_blossom_inequalities(g, FractionalMatching(g, values), args.eps)
        doc = {"max_set_size": rep.max_set_size, "sets_checked": rep.sets_checked,
               "violations": [{"set": list(s), "sum": str(t), "bound": b} for s, t, b in rep.violations]}
        ok = rep.ok
    doc["ok"] = ok
    _emit(doc, args.out)
    return 0 if ok else 1


def cmd_bench(args) -> int:
    from .bench import compare, format_table
    res = compare(args.n, args.m, args.repeats)
    if args.format == "json":
        _emit(res, args.out)
    else:
        print(format_table(res))
    return 0


def _add_common(p, trials: bool = True) -> None:
    p.add_argument("--graph", required=True)
    p.add_argument("--eps", default="0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta", type=int)
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--alpha", type=int)
    if trials:
        p.add_argument("--trials", type=int, default=1)
        p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="edcsmatch", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a graph")
    p.add_argument("--kind", choices=KINDS, default="uniform")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--density", type=float)
    p.add_argument("--weights", choices=WEIGHT_DISTS, default="constant")
    p.add_argument("--W", type=int, default=1)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--value", default="1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("unfold", help="write phi(G)")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_unfold)

    p = sub.add_parser("stream", help="random-order streaming runs")
    ssub = p.add_subparsers(dest="action", required=True)
    r = ssub.add_parser("run")
    _add_common(r)
    r.add_argument("--bucketed", action="store_true")
    r.add_argument("--gamma-cap", type=int, default=10**6)
    r.set_defaults(func=lambda a: _run(a, "stream"))

    p = sub.add_parser("comm", help="k-party protocol runs")
    csub = p.add_subparsers(dest="action", required=True)
    r = csub.add_parser("run")
    _add_common(r)
    r.add_argument("--parties", type=int, default=2)
    r.set_defaults(func=lambda a: _run(a, "comm"))

    p = sub.add_parser("verify", help="run a verifier on file inputs")
    p.add_argument("what", choices=("unfold", "edcs", "xval", "blossom"))
    _add_common(p, trials=False)
    p.add_argument("--subgraph", help="edge list of H (edcs)")
    p.add_argument("--x", help="'u v value' lines (blossom)")
    p.add_argument("--blossom", action="store_true", help="also check odd sets (xval)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="compiled vs fallback kernel timings")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--m", type=int, default=20000)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        if args.what == "edcs" and (args.subgraph is None or args.beta is None):
            print("verify edcs needs --subgraph and --beta", file=sys.stderr)
            return 2
        if args.what == "edcs" and args.lam is None:
            args.lam = "0"
        if args.what == "blossom" and args.x is None:
            print("verify blossom needs --x", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 1
    except (EdcsMatchError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
