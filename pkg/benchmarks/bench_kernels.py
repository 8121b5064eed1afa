"""Time the compiled periodic-filter kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Also times a full dwt2/whf_extract call so the kernel share of the
end-to-end cost is visible.
"""

import argparse
import timeit

import numpy as np

from samwave import kernels, wavelets
from samwave.freqfeat import whf_extract

SHAPES = [(64, 192), (128, 384), (256, 768)]


def bench(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat)) * 1e3


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20, help="timing repeats (best is reported)")
    args = ap.parse_args()

    impls = kernels.backends()
    if "cython" not in impls:
        print("compiled kernels not built; only the python fallback is available")
    rng = np.random.default_rng(0)
    bank = wavelets.filter_bank("sym4")
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':<16}{'shape':<14}" + "".join(f"{k + ' ms':>12}" for k in impls) + f"{'speedup':>10}")
    for shape in SHAPES:
        x = rng.random(shape)
        half = rng.random((shape[0] // 2, shape[1]))
        cases = {
            "analysis": lambda impl: kernels.analysis(x, bank.dec_lo, bank.dec_hi, impl),
            "synthesis": lambda impl: kernels.synthesis(half, half, bank.rec_lo, bank.rec_hi, impl),
            "circular": lambda impl: kernels.circular_filter(x, bank.dec_lo, impl),
        }
        for name, case in cases.items():
            times = {k: bench(lambda: case(impl), args.repeat) for k, impl in impls.items()}
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            row = "".join(f"{t:12.3f}" for t in times.values())
            print(f"{name:<16}{str(shape):<14}{row}{speed:10.2f}x")

    img = rng.random((64, 64, 3))
    print(f"dwt2 64x64x3 sym4: {bench(lambda: wavelets.dwt2(img, 'sym4'), args.repeat):.3f} ms")
    print(f"whf_extract haar:  {bench(lambda: whf_extract(img, 'haar'), args.repeat):.3f} ms")
    print(f"whf_extract sy-a:  {bench(lambda: whf_extract(img, 'sy-a'), args.repeat):.3f} ms")


if __name__ == "__main__":
    main()
