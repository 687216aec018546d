"""Compare the compiled and pure-Python automata kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Inputs are automata built from glob patterns of the kind found in policies,
plus random DFAs for the minimizer. Results are checked to agree before any
timing is reported.
"""

from __future__ import annotations

import argparse
import json
import random
import statistics
import time

import numpy as np

from policysynth.automata import Alphabet, compile_glob, kernels

PATTERNS = [
    "arn:aws:s3:::public-bucket/*",
    "arn:aws:s3:::*/logs/*.gz",
    "arn:aws:iam::*:user/*",
    "arn:aws:s3:::team-data/shared/*",
    "s3:get*",
    "arn:aws:ec2:*:*:instance/i-??????",
]


def random_dfa(rng: random.Random, n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    table = np.array([[rng.randrange(n) for _ in range(m)] for _ in range(n)], dtype=np.int32)
    acc = np.array([rng.random() < 0.3 for _ in range(n)], dtype=np.uint8)
    return table, acc


def timed(fn, repeat: int) -> float:
    samples = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t)
    return statistics.median(samples)


def cases(alphabet: Alphabet, rng: random.Random):
    dfas = [compile_glob(p, alphabet) for p in PATTERNS]
    a, b = dfas[0], dfas[1]
    c, d = dfas[2], dfas[5]
    yield "product and", lambda k: k.product(a.table, a.accepting, b.table, b.accepting, kernels.OP_AND)
    yield "product diff", lambda k: k.product(c.table, c.accepting, d.table, d.accepting, kernels.OP_DIFF)
    big = random_dfa(rng, 3000, len(alphabet.symbols))
    yield "minimize 3000 states", lambda k: k.minimize(*big)
    yield "count k=200", lambda k: k.count_by_length(a.table, a.accepting, 200)
    texts = [f"arn:aws:s3:::public-bucket/dir{i % 97}/file{i}.txt" for i in range(20000)]
    codes = [alphabet.encode(t) for t in texts]
    offsets = np.zeros(len(codes) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(x) for x in codes])
    flat = np.concatenate(codes).astype(np.int32)
    yield "run 20000 strings", lambda k: k.run_batch(a.table, a.accepting, flat, offsets)


def same(x, y) -> bool:
    if isinstance(x, tuple):
        return all(same(i, j) for i, j in zip(x, y))
    return np.array_equal(np.asarray(x), np.asarray(y))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="also write results to this file")
    args = ap.parse_args()

    if kernels.compiled is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e .` with Cython available")
    alphabet = Alphabet.default()
    rows = []
    print(f"{'case':<22}{'python (ms)':>14}{'compiled (ms)':>16}{'speedup':>10}")
    for name, fn in cases(alphabet, random.Random(args.seed)):
        if not same(fn(kernels.python), fn(kernels.compiled)):
            raise SystemExit(f"{name}: backends disagree")
        tp = timed(lambda: fn(kernels.python), args.repeat)
        tc = timed(lambda: fn(kernels.compiled), args.repeat)
        rows.append({"case": name, "python_s": tp, "compiled_s": tc, "speedup": tp / tc if tc else float("inf")})
        print(f"{name:<22}{tp * 1e3:>14.3f}{tc * 1e3:>16.3f}{tp / tc:>9.1f}x")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
