"""Compare the numba kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--n 2000] [--m 20000] [--repeats 3]
"""
import argparse
import json

from edcsmatch.bench import compare, format_table

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--m", type=int, default=20000)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    res = compare(args.n, args.m, args.repeats)
    print(json.dumps(res, indent=2) if args.json else format_table(res))
