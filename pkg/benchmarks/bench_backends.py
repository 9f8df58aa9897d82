#!/usr/bin/env python3
"""Benchmark: compiled Cython kernels vs the NumPy fallback.

Times the spectral right-hand side, the two fixed-step integrators and the
rank-one coordinate ODE on both backends, and prints a speedup table.

Observed picture (x86-64, GCC -O3): the compiled backend wins big on the
coordinate ODE (no per-step Python/NumPy overhead) and at small cutoffs,
while NumPy's SIMD-optimized convolution/correlation overtakes the scalar C
loops at large cutoffs.  Run this on your own machine before choosing a
forced backend via QSZEGO_KERNELS.

Usage: python benchmarks/bench_backends.py [--repeat 5]
"""

import argparse
import time


from qszego.backend import available_backends, get_kernels
from qszego.rank_one import RationalState, to_spectrum


def best_of(repeat, fn, *args):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    names = available_backends()
    if "compiled" not in names:
        print("compiled kernels not built; benchmarking the fallback only")
    mods = {name: get_kernels(name) for name in names}

    state = RationalState(1.0, 1.0, 0.5)
    cases = []
    for cutoff in (32, 64, 128, 256, 512):
        u = to_spectrum(state, cutoff)
        cases.append((f"pde_rhs          cutoff={cutoff:4d} x200",
                      lambda m, u=u: [m.pde_rhs(u) for _ in range(200)]))
    for cutoff, nsteps in ((64, 2000), (256, 500)):
        u = to_spectrum(state, cutoff)
        cases.append((f"rk4_advance      cutoff={cutoff:4d} x{nsteps}",
                      lambda m, u=u, n=nsteps: m.pde_rk4_advance(u, 1e-3, n)))
        cases.append((f"gauss6_advance   cutoff={cutoff:4d} x{nsteps // 2}",
                      lambda m, u=u, n=nsteps // 2: m.pde_gauss6_advance(u, 1e-3, n)))
    cases.append(("rational ODE     200k steps",
                  lambda m: m.rational_rk4_advance(1.0, 1.0, 0.5, 1e-4, 200_000)))

    width = max(len(label) for label, _ in cases)
    header = f"{'case'.ljust(width)}  " + "  ".join(f"{n:>10}" for n in names)
    both = "compiled" in mods and "python" in mods
    if both:
        header += "   compiled speedup"
    print(header)
    print("-" * len(header))
    for label, fn in cases:
        times = {n: best_of(args.repeat, fn, mods[n]) for n in names}
        row = f"{label.ljust(width)}  " + "  ".join(
            f"{times[n] * 1e3:9.2f}ms" for n in names
        )
        if both and times["compiled"] > 0:
            row += f"   {times['python'] / times['compiled']:6.2f}x"
        print(row)


if __name__ == "__main__":
    main()
