"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each row reports the best wall time of ``--repeat`` runs for both backends
and the speed ratio.  Outputs are compared too, so a mismatch shows up here
as well as in the test suite.
"""

import argparse
import json
import sys
import timeit

import numpy as np

from wdrmin import kernels


def workloads(rng):
    d = 14
    table = rng.standard_normal(1 << d)
    table[0] = 0.0
    mono = kernels.python.popcounts(1 << d) + 0.3 * rng.random(1 << d)
    mono[0] = 0.0
    n = 60
    W = rng.random((n, n)) * (rng.random((n, n)) < 0.2)
    np.fill_diagonal(W, 0.0)
    u = rng.standard_normal(n)
    perm = rng.permutation(n).astype(np.int64)
    X = rng.standard_normal((n + 10, n))
    M = X.T @ X + 0.1 * np.eye(n)
    B = rng.standard_normal((n, 1))
    S = rng.standard_normal((40, 40))
    S = S + S.T
    return [
        ("ratio_scan d=14", "ratio_scan", (mono, d, False, False, 0.0)),
        ("violation_scan d=12", "violation_scan", (table[: 1 << 12].copy(), 12, 0.5, False)),
        ("marginal_extremes d=14", "marginal_extremes", (table, d)),
        ("cut_chain d=60", "cut_chain", (W, u, perm)),
        ("chol_chain_gain n=60", "chol_chain_gain", (M, B, perm, 1e-12, False)),
        ("jacobi n=40", "jacobi_eigenvalues", (S, 1e-12, 100)),
    ]


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.allclose(a, b, rtol=1e-10, atol=1e-12) or np.allclose(np.sort(a), np.sort(b), atol=1e-10)
    return a == b or (isinstance(a, float) and abs(a - b) <= 1e-12 * max(1.0, abs(a)))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)
    if kernels.compiled is None:
        print("compiled backend not built; only the numpy timings are shown", file=sys.stderr)
    rows = []
    print(f"{'kernel':<24}{'numpy [ms]':>12}{'compiled [ms]':>15}{'speedup':>10}  match")
    for label, fn, fargs in workloads(np.random.default_rng(args.seed)):
        py = getattr(kernels.python, fn)
        t_py = min(timeit.repeat(lambda: py(*fargs), number=1, repeat=args.repeat))
        row = {"kernel": label, "python_s": t_py, "compiled_s": None, "speedup": None, "match": None}
        if kernels.compiled is not None:
            cy = getattr(kernels.compiled, fn)
            t_c = min(timeit.repeat(lambda: cy(*fargs), number=1, repeat=args.repeat))
            row.update(compiled_s=t_c, speedup=t_py / t_c, match=bool(same(py(*fargs), cy(*fargs))))
            print(f"{label:<24}{t_py * 1e3:>12.2f}{t_c * 1e3:>15.3f}{t_py / t_c:>9.1f}x  {row['match']}")
        else:
            print(f"{label:<24}{t_py * 1e3:>12.2f}{'-':>15}{'-':>10}")
        rows.append(row)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"backend": kernels.BACKEND, "rows": rows}, fh, indent=2)
    return 0 if all(r["match"] in (True, None) for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
