"""Compare the compiled kernels with the pure-Python fallback.

Times each hot loop under both backends on the same random inputs and
prints one line per kernel: best-of-``--repeat`` seconds per backend and the
speed-up.  Both backends must produce the same numbers; the script checks
this and exits nonzero if they disagree.

Usage::

    python3 benchmarks/bench_kernels.py [--n 8] [--choices 3] [--steps 4000]
"""
import argparse
import sys
import timeit

import numpy as np

from minmaxspec import RowChoiceFamily, generalized_chain_min, iterate, kernels


def random_family(rng, n, choices):
    rows = [rng.integers(0, 4, size=(choices, n)).astype(float) for _ in range(n)]
    for i, r in enumerate(rows):
        r[:, i] = np.maximum(r[:, i], 1.0)  # keep the iteration from collapsing
    return RowChoiceFamily.from_rows(rows)


def cases(args, rng):
    F = random_family(rng, args.n, args.choices)
    rows, offsets = F.stacked
    v = rng.random(args.n) + 0.1
    A = rng.random((args.n, args.n)) + 0.01
    return {
        "apply_rows": lambda: kernels.apply_rows(rows, offsets, v, False),
        "log_apply": lambda: kernels.log_apply(rows, offsets, np.log(v), False),
        f"log_trace[{args.steps}]": lambda: kernels.log_trace(rows, offsets, np.log(v), args.steps),
        "perron_iterate": lambda: kernels.perron_iterate(A, 1e-13, 10**6)[:3],
        "iterate(F, min)": lambda: iterate(F, v, args.steps).log_magnitudes,
        "generalized_chain_min": lambda: np.array(generalized_chain_min(F).vectors),
    }


def _flat(x):
    parts = x if isinstance(x, tuple) else (x,)
    return np.concatenate([np.ravel(np.asarray(p, dtype=float)) for p in parts])


def _same(a, b):
    a, b = _flat(a), _flat(b)
    fin = np.isfinite(a)
    return np.array_equal(fin, np.isfinite(b)) and np.allclose(a[fin], b[fin], rtol=1e-9)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=8, help="states per family (default 8)")
    parser.add_argument("--choices", type=int, default=3, help="choices per row (default 3)")
    parser.add_argument("--steps", type=int, default=4000, help="trace length (default 4000)")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the python backend is available", file=sys.stderr)
    funcs = cases(args, np.random.default_rng(args.seed))
    previous = kernels.backend_name()
    ok = True
    print(f"{'kernel':<24}" + "".join(f"{b:>12}" for b in backends) + f"{'speed-up':>10}")
    try:
        for name, fn in funcs.items():
            times, outputs = {}, {}
            for b in backends:
                kernels.use_backend(b)
                outputs[b] = fn()
                number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
                times[b] = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
            agree = all(_same(outputs[b], outputs["python"]) for b in backends)
            ok &= agree
            speed = times["python"] / times["cython"] if "cython" in times else 1.0
            print(f"{name:<24}" + "".join(f"{times[b]:>12.3e}" for b in backends)
                  + f"{speed:>9.1f}x" + ("" if agree else "  MISMATCH"))
    finally:
        kernels.use_backend(previous)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
