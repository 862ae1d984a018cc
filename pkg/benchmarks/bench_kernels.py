"""Compare the compiled and pure-Python kernels on the two hot loops.

    python benchmarks/bench_kernels.py [--repeat N] [--quick]

Prints one line per (kernel, backend) with the best wall time and the
speedup; exits non-zero if the backends disagree.
"""

from __future__ import annotations

import argparse
import sys
import time

from cmequi import kernels
from cmequi.grosslattice import class_gross_lattices
from cmequi.lattice import lll_gram
from cmequi.quadorders import fundamental_discriminants
from cmequi.quatarith import class_set


def best_of(fn, repeat: int):
    times = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller inputs (for smoke tests)")
    args = ap.parse_args(argv)

    try:
        kernels.backend("cython")
    except ImportError:
        print("compiled kernels not built; nothing to compare", file=sys.stderr)
        return 1

    dmax, bound = (2000, 2000) if args.quick else (20_000, 20_000)
    ds = fundamental_discriminants(3, dmax)
    grams = [lll_gram(L.gram)[0] for L in class_gross_lattices(class_set(37, 2))]
    cases = {
        f"class_numbers ({len(ds)} discriminants, |D| <= {dmax})":
            lambda impl: kernels.class_numbers(ds, impl),
        f"ternary_theta ({len(grams)} lattices, bound {bound})":
            lambda impl: [impl.ternary_theta(B, bound) for B in grams],
    }
    kernels.spf_table(dmax)
    status = 0
    for name, run in cases.items():
        results = {}
        for backend in ("cython", "python"):
            impl = kernels.backend(backend)
            results[backend] = best_of(lambda: run(impl), args.repeat)
        (tc, oc), (tp, op) = results["cython"], results["python"]
        same = oc == op
        status |= not same
        print(f"{name}: cython {tc:.3f}s  python {tp:.3f}s  speedup {tp / tc:.1f}x  {'identical' if same else 'MISMATCH'}")
    return status


if __name__ == "__main__":
    sys.exit(main())
