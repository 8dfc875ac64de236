"""Benchmark the compiled Jacobi kernel against the pure-Python twin.

Runs the eigensolver on dense random symmetric matrices and on binarized
graph Laplacians (the shape the speaker-count search actually decomposes)
and prints a timing table plus agreement checks. numpy.linalg.eigh is
included as a reference point only.

Usage: python benchmarks/bench_eigh.py [--sizes 30,60,120,240]
"""

import argparse
import time

import numpy as np

from diarkit import _jacobi_py
from diarkit.eigh import CONVERGENCE_TOL, MAX_SWEEPS

try:
    from diarkit import _jacobi_cy

    HAVE_COMPILED = True
except ImportError:
    _jacobi_cy = None
    HAVE_COMPILED = False


def dense_symmetric(rng, n):
    x = rng.standard_normal((n, n))
    return (x + x.T) / 2.0


def binarized_laplacian(rng, n):
    """Laplacian of a top-p binarized affinity, like the count search sees."""
    from diarkit.clustering import _binarize_from_order, _laplacian, _row_order
    from diarkit.embeddings import cosine_affinity, EmbeddingSet
    from diarkit.timeline import Segment

    k = max(2, n // 30)
    centers = rng.standard_normal((k, 16))
    centers /= np.linalg.norm(centers, axis=1)[:, None]
    vecs = centers[rng.integers(0, k, n)] + 0.1 * rng.standard_normal((n, 16))
    e = EmbeddingSet.build(
        "bench", 16, [(Segment(i, i + 1.0), v) for i, v in enumerate(vecs)]
    )
    a = cosine_affinity(e)
    return _laplacian(_binarize_from_order(_row_order(a), max(2, n // 20)))


def run_kernel(kernel, a, with_vectors):
    work = a.copy()
    v = np.eye(a.shape[0]) if with_vectors else np.empty((1, 1))
    start = time.perf_counter()
    kernel.jacobi_sweeps(work, v, with_vectors, CONVERGENCE_TOL, MAX_SWEEPS)
    elapsed = time.perf_counter() - start
    return np.sort(np.diag(work)), elapsed


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="30,60,120,240")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)

    if not HAVE_COMPILED:
        print("compiled kernel not available; showing pure-Python only\n")

    header = f"{'matrix':<18} {'n':>4} {'python':>10} {'compiled':>10} {'speedup':>8} {'numpy':>10} {'agree':>9}"
    print(header)
    print("-" * len(header))
    for make, name in ((dense_symmetric, "dense symmetric"), (binarized_laplacian, "graph laplacian")):
        for n in sizes:
            a = make(rng, n)
            py_vals, py_t = run_kernel(_jacobi_py, a, with_vectors=False)
            t0 = time.perf_counter()
            np_vals = np.linalg.eigvalsh(a)
            np_t = time.perf_counter() - t0
            if HAVE_COMPILED:
                cy_vals, cy_t = run_kernel(_jacobi_cy, a, with_vectors=False)
                agree = float(np.max(np.abs(cy_vals - py_vals)))
                print(
                    f"{name:<18} {n:>4} {py_t:>9.3f}s {cy_t:>9.3f}s "
                    f"{py_t / cy_t:>7.1f}x {np_t:>9.3f}s {agree:>9.1e}"
                )
            else:
                agree = float(np.max(np.abs(py_vals - np_vals)))
                print(
                    f"{name:<18} {n:>4} {py_t:>9.3f}s {'-':>10} {'-':>8} "
                    f"{np_t:>9.3f}s {agree:>9.1e}"
                )


if __name__ == "__main__":
    main()
