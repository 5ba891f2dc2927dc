"""Time the numba and numpy pairwise-distance backends on the same input.

    python benchmarks/bench_kernels.py --n 4000 --d 3 --eps 0.2
"""
import argparse
import time

import numpy as np

from streamph import _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    p = argparse.ArgumentParser()
    p.add_argument("--n", type=int, default=3000)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--metric", choices=("euclidean", "manhattan"), default="euclidean")
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    pts = np.random.default_rng(0).random((args.n, args.d))
    metric = _kernels.EUCLIDEAN if args.metric == "euclidean" else _kernels.MANHATTAN
    pairs = args.n * (args.n - 1) // 2
    print(f"n={args.n} d={args.d} pairs={pairs} eps={args.eps} metric={args.metric}")

    t_np, ref = best_of(lambda: _kernels.pair_block_numpy(pts, 0, args.n, args.eps, metric), args.repeat)
    print(f"numpy : {t_np:8.3f} s  {pairs / t_np / 1e6:7.1f} Mpairs/s  kept={len(ref[0])}")
    if _kernels.pair_block_numba is None:
        print("numba : unavailable (not installed or STREAMPH_DISABLE_NUMBA set)")
        return
    _kernels.pair_block_numba(pts[:10], 0, 10, args.eps, metric)  # compile
    t_nb, out = best_of(lambda: _kernels.pair_block_numba(pts, 0, args.n, args.eps, metric), args.repeat)
    same = all(a.tobytes() == b.tobytes() for a, b in zip(ref, out))
    print(f"numba : {t_nb:8.3f} s  {pairs / t_nb / 1e6:7.1f} Mpairs/s  kept={len(out[0])}")
    print(f"speedup {t_np / t_nb:.2f}x, bit-identical={same}")


if __name__ == "__main__":
    main()
