"""Timing of the compiled kernels against the interpreted fallback.

The fallback runs in a child interpreter with ``EDCSMATCH_DISABLE_JIT=1`` so
that every kernel, including the helpers they call, is plain Python.
"""
from __future__ import annotations

import json
import os
import subprocess
import sys
import time

import numpy as np

from . import kernels
from ._jit import JIT_ENABLED

CASES = ("bernstein_stream", "edmonds_matching", "hopcroft_karp")


def _instance(n: int, m: int, seed: int):
    rng = np.random.default_rng(seed)
    us = rng.integers(0, n, size=4 * m)
    vs = rng.integers(0, n, size=4 * m)
    keep = us != vs
    pairs = np.unique(np.sort(np.stack([us[keep], vs[keep]], axis=1), axis=1), axis=0)[:m]
    return pairs[:, 0].astype(np.int64), pairs[:, 1].astype(np.int64)


def time_kernels(n: int = 2000, m: int = 20000, repeats: int = 3, seed: int = 0) -> dict:
    us, vs = _instance(n, m, seed)
    m = us.size
    order = np.random.default_rng(seed + 1).permutation(m).astype(np.int64)
    ptr = np.arange(m + 1, dtype=np.int64)
    left = n // 2
    ls, rs = np.minimum(us, vs) % left, np.maximum(us, vs) % (n - left)
    calls = {
        "bernstein_stream": lambda: kernels.bernstein_stream(n, us, vs, order, ptr, np.int64(32), np.int64(29), np.int64(1)),
        "edmonds_matching": lambda: kernels.edmonds_matching(n, us, vs),
        "hopcroft_karp": lambda: kernels.hopcroft_karp(left, n - left, ls, rs),
    }
    out = {}
    for name in CASES:
        calls[name]()  # compile / warm up
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            calls[name]()
            best = min(best, time.perf_counter() - t0)
        out[name] = best
    return {"jit": JIT_ENABLED, "n": n, "m": int(m), "seconds": out}


def compare(n: int = 2000, m: int = 20000, repeats: int = 3, seed: int = 0) -> dict:
    """Run both paths; the fallback in a subprocess."""
    fast = time_kernels(n, m, repeats, seed)
    env = dict(os.environ, EDCSMATCH_DISABLE_JIT="1")
    code = ("import json, sys; from edcsmatch.bench import time_kernels; "
            f"print(json.dumps(time_kernels({n}, {m}, {repeats}, {seed})))")
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    slow = json.loads(proc.stdout.strip().splitlines()[-1])
    speedup = {k: slow["seconds"][k] / fast["seconds"][k] if fast["seconds"][k] > 0 else float("inf")
               for k in CASES}
    return {"n": n, "m": fast["m"], "jit": fast, "fallback": slow, "speedup": speedup}


def format_table(res: dict) -> str:
    rows = [f"kernel                 jit(s)    fallback(s)  speedup   (n={res['n']}, m={res['m']})"]
    for k in CASES:
        rows.append(f"{k:<20} {res['jit']['seconds'][k]:>9.4f} {res['fallback']['seconds'][k]:>12.4f}"
                    f" {res['speedup'][k]:>9.1f}x")
    return "\n".join(rows)
