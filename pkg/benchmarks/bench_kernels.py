"""Compare the compiled and pure-Python kernel backends.

Times the pointwise constitutive and drag kernels alone and the full
right-hand side evaluation at a few cutoffs.

    python3 benchmarks/bench_kernels.py --N 16 32 --repeat 20
"""

import argparse
import timeit

import numpy as np

from voigt_evp import kernels
from voigt_evp.model import ForcingSpec, VoigtEVP, nondimensional_params, random_state
from voigt_evp.spectral import gradient, make_grid


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench(N, repeat):
    g = make_grid(N)
    p = nondimensional_params()
    s = random_state(g, p, np.random.default_rng(0), kmax=N)
    G = gradient(g, s.u)
    rows = []
    for name in kernels.available_backends():
        k = kernels.get_backend(name)
        t_const = best(lambda: k.constitutive(G, s.sigma, kernels.SIMPLIFIED, p.eps, p.gamma, p.e_bar, p.P),
                       repeat)
        t_drag = best(lambda: k.drag(s.u, 1.0, p.theta), repeat)
        rhs = VoigtEVP(g, p, ForcingSpec("periodic"), backend=name)
        t_rhs = best(lambda: rhs(s), repeat)
        rows.append((name, t_const, t_drag, t_rhs))
    return g.M, rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, nargs="+", default=[16, 32, 64])
    ap.add_argument("--repeat", type=int, default=10)
    args = ap.parse_args()
    print(f"{'N':>4} {'M':>5} {'backend':>9} {'constitutive':>13} {'drag':>10} {'full rhs':>10}  (ms)")
    for N in args.N:
        M, rows = bench(N, args.repeat)
        for name, tc, td, tr in rows:
            print(f"{N:4d} {M:5d} {name:>9} {1e3 * tc:13.3f} {1e3 * td:10.3f} {1e3 * tr:10.3f}")
        if len(rows) == 2:
            (_, c1, d1, r1), (_, c2, d2, r2) = rows
            print(f"{'':11} speedup {c2 / c1:13.1f}x {d2 / d1:9.1f}x {r2 / r1:9.1f}x")


if __name__ == "__main__":
    main()
