"""Compare the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from udcscatter import kernels
from udcscatter.optics import gaussian_kernel


def cases():
    rng = np.random.default_rng(0)
    img = rng.random((800, 800))
    k7 = gaussian_kernel(7, 1.5).taps
    k15 = gaussian_kernel(15, 3.0).taps
    n = 3 * 800 * 800
    return [
        ("conv2d_wrap 800x800, 7x7", lambda impl: impl.conv2d_wrap(img, k7)),
        ("conv2d_wrap 800x800, 15x15", lambda impl: impl.conv2d_wrap(img, k15)),
        (f"standard_normals n={n}", lambda impl: impl.standard_normals(1, 0, n)),
        (f"uniforms n={n}", lambda impl: impl.uniforms(1, 0, n)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="timing repeats, best is reported (default 5)")
    args = ap.parse_args()
    names = kernels.available_backends()
    if "compiled" not in names:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':34s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for label, fn in cases():
        best = {}
        for name in names:
            impl = kernels.get_backend(name)
            fn(impl)  # warm up
            best[name] = min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat))
        row = f"{label:34s}" + "".join(f"{best[n] * 1e3:10.1f}ms" for n in names)
        if len(names) == 2:
            row += f"{best['python'] / best['compiled']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
