"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each row times one workload on both backends (best of ``--repeat``) and
checks that the two return identical results.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
import timeit
from array import array

from couniv import _pykernels
from couniv.neighborhoods import symmetric_group_table
from couniv.words import reduced_words

try:
    from couniv import _ckernels
except ImportError:
    _ckernels = None


def workloads(rng: random.Random):
    raw = [[rng.randrange(20) for _ in range(rng.randint(0, 40))] for _ in range(2000)]
    reduced = [_pykernels.reduce_codes(c) for c in raw]
    pairs = list(zip(reduced, reversed(reduced)))
    grid = [w.codes for w in reduced_words(3, 5)]
    long_words = [_pykernels.reduce_codes([rng.randrange(40) for _ in range(60)]) for _ in range(50)]
    table, _ = symmetric_group_table(5)
    flat = array("i", [x for row in table for x in row])
    subsets = [sorted(rng.sample(range(120), 30)) for _ in range(40)]

    return {
        "reduce (2000 raw words)": lambda k: [k.reduce_codes(c) for c in raw],
        "multiply (2000 pairs)": lambda k: [k.mul_codes(a, b) for a, b in pairs],
        "phi grid (len<=3, letters<=5, n<=5)": lambda k: [k.phi_recursive(n, w) for n in range(6) for w in grid],
        "phi long words (len~60)": lambda k: [k.phi_recursive(2, w) for w in long_words],
        "set product (S5, 40x40 pairs)": lambda k: [k.set_product(flat, 120, a, b) for a in subsets for b in subsets],
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--json", dest="json_path")
    args = parser.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation` first", file=sys.stderr)
        return 1

    rows = []
    for name, job in workloads(random.Random(args.seed)).items():
        if job(_ckernels) != job(_pykernels):
            raise SystemExit(f"backends disagree on {name}")
        t_py = min(timeit.repeat(lambda: job(_pykernels), number=1, repeat=args.repeat))
        t_c = min(timeit.repeat(lambda: job(_ckernels), number=1, repeat=args.repeat))
        rows.append({"workload": name, "python_s": t_py, "cython_s": t_c, "speedup": t_py / t_c})

    width = max(len(r["workload"]) for r in rows)
    print(f"{'workload':<{width}}  {'python':>10}  {'cython':>10}  {'speedup':>8}")
    for r in rows:
        print(f"{r['workload']:<{width}}  {r['python_s'] * 1e3:>8.2f}ms  {r['cython_s'] * 1e3:>8.2f}ms  {r['speedup']:>7.1f}x")
    if args.json_path:
        with open(args.json_path, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
