"""Compare the compiled kernels with their pure-Python twin.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from snapfix import kernels, shapes
from snapfix.cover import EPS_COVER
from snapfix.mesh import merge_coplanar_facets
from snapfix.synth import build_candidate_map


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    sets = rng.normal(size=(2000, 8, 3))
    sets /= np.linalg.norm(sets, axis=2, keepdims=True)
    yield "covers_sphere x2000 (8 normals)", lambda K: [K.covers_sphere(s, EPS_COVER) for s in sets]

    for name in ("cube", "dodecahedron", "prism28", "truncated_cuboctahedron"):
        P = merge_coplanar_facets(shapes.builtin(name))
        M = build_candidate_map(P)
        k = 3 if name != "prism28" else 2

        def run(K, P=P, M=M, k=k):
            for i, C in M.items():
                K.enumerate_palm(P.normals, i, [c.body for c in C], [c.tip for c in C], k, EPS_COVER)

        yield f"enumerate_palm {name} k={k}", run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        compiled = kernels.get_backend("cython")
    except ImportError:
        raise SystemExit("compiled kernels are not built; run pip install -e . first")
    pure = kernels.get_backend("python")
    print(f"{'case':44s} {'cython ms':>10s} {'python ms':>10s} {'speedup':>8s}")
    for label, fn in cases():
        tc = _best(lambda: fn(compiled), args.repeat)
        tp = _best(lambda: fn(pure), args.repeat)
        print(f"{label:44s} {tc * 1e3:10.2f} {tp * 1e3:10.2f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
