"""Compare the compiled and numpy kernel backends on realistic Gram matrices.

Usage: python3 benchmarks/bench_kernels.py [--n 1024] [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from dtcs import _kernels_py
from dtcs.coherence import correlation_matrix
from dtcs.kernels import compiled_backend
from dtcs.matrices import MatrixKind, MatrixSpec, build


def cases(G):
    n = G.shape[0]
    return {
        "cumulative_topk k=2": lambda b: b.cumulative_topk(G, 13, 2),
        "cumulative_topk k=32": lambda b: b.cumulative_topk(G, 13, 32),
        "guarantee sweep k=2 (all d)": lambda b: [b.cumulative_topk(G, d, 2) for d in range(0, n - 2, 8)],
        "separation_maxima": lambda b: b.separation_maxima(G),
        "diagonal_spread": lambda b: b.diagonal_spread(G),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=1024)
    parser.add_argument("--m", type=int, default=64)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    G = np.ascontiguousarray(correlation_matrix(build(MatrixSpec(MatrixKind.FConsecBegin, args.m, args.n))))
    backends = {"python": _kernels_py}
    if compiled_backend is not None:
        backends["compiled"] = compiled_backend
    else:
        print("compiled backend not built; timing the numpy backend only")

    print(f"Gram matrix {args.n}x{args.n}, best of {args.repeat}")
    print(f"{'kernel':32s}" + "".join(f"{name:>12s}" for name in backends) + f"{'speedup':>10s}")
    for label, fn in cases(G).items():
        times = {name: min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat))
                 for name, b in backends.items()}
        speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        print(f"{label:32s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times.values()) + f"{speed:9.1f}x")


if __name__ == "__main__":
    main()
