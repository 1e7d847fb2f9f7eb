"""Compare the compiled and pure-Python kernel backends.

Times the hot kernels (LU factor + solve, sparse assembly, Gram-Schmidt
extension, IMQ matrix) at a few sizes, with scipy's LAPACK LU as a reference
point. Usage::

    python3 benchmarks/bench_kernels.py [--sizes 100 200 500] [--repeat 5]
"""

import argparse
import timeit

import numpy as np
import scipy.linalg

from morgreed import _pykernels
from morgreed.linalg import PIVOT_TOL
from morgreed.synthetic import SyntheticSpec, generate_synthetic

try:
    from morgreed import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_lu(kern, a, b, repeat):
    def go():
        lu = np.array(a, order="F", copy=True)
        piv = np.zeros(a.shape[0], dtype=np.intp)
        scale = np.linalg.norm(a, axis=0).max()
        kern.lu_factor_inplace(lu, piv, PIVOT_TOL * scale)
        x = np.array(b, order="F", copy=True)
        kern.lu_solve_inplace(lu, piv, x)
    return _best(go, repeat)


def bench_assemble(kern, sys, s, repeat):
    return _best(lambda: sys.assemble(s, kernels=kern), repeat)


def bench_mgs(kern, n, k, repeat):
    rng = np.random.default_rng(1)
    cand = np.asfortranarray(rng.standard_normal((n, k)))

    def go():
        basis = np.zeros((n, k), order="F")
        kern.mgs_extend(basis, 0, cand, 1e-10)
    return _best(go, repeat)


def bench_imq(kern, m, repeat):
    x = np.linspace(0.0, 1.0, m)
    return _best(lambda: kern.imq_matrix(x, x, 30.0), repeat)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 500])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.insert(0, ("cython", _ckernels))
    else:
        print("compiled extension not available; timing the Python fallback only")

    print(f"{'kernel':<10}{'n':>6}" + "".join(f"{name:>12}" for name, _ in backends)
          + f"{'scipy':>12}  (ms, best of {args.repeat})")
    for n in args.sizes:
        sys = generate_synthetic(SyntheticSpec(order=n, num_delays=5, resonances=min(6, n // 2)))
        s = complex(0.0, 2 * np.pi * 3e9)
        a = sys.assemble(s)
        b = sys.B
        row = [bench_lu(k, a, b, args.repeat) for _, k in backends]
        ref = _best(lambda: scipy.linalg.lu_solve(scipy.linalg.lu_factor(a), b), args.repeat)
        print(f"{'lu':<10}{n:>6}" + "".join(f"{1e3 * t:>12.2f}" for t in row) + f"{1e3 * ref:>12.2f}")
        row = [bench_assemble(k, sys, s, args.repeat) for _, k in backends]
        print(f"{'assemble':<10}{n:>6}" + "".join(f"{1e3 * t:>12.2f}" for t in row))
        row = [bench_mgs(k, n, 60, args.repeat) for _, k in backends]
        print(f"{'mgs(60)':<10}{n:>6}" + "".join(f"{1e3 * t:>12.2f}" for t in row))
    for m in (25, 110):
        row = [bench_imq(k, m, args.repeat) for _, k in backends]
        print(f"{'imq':<10}{m:>6}" + "".join(f"{1e3 * t:>12.3f}" for t in row))


if __name__ == "__main__":
    main()
