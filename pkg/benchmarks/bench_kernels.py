"""Time the numba kernels against the numpy fallback on the same inputs.

    python benchmarks/bench_kernels.py [--n 4000] [--repeat 3]

Both backends are loaded side by side, so the env flag does not matter here.
The first numba call per kernel is a warm-up and is not timed.
"""
import argparse
import time
import warnings

import numpy as np
import scipy.sparse as sp

from codicil import _accel

warnings.filterwarnings("ignore", message="The TBB threading layer")
from codicil.similarity import minhash_params, projection_key


def _inputs(n, vocab, seed):
    rng = np.random.default_rng(seed)
    docs = sp.random(n, vocab, density=20 / vocab, format="csr", random_state=rng,
                     data_rvs=lambda k: rng.integers(1, 6, k).astype(float))
    docs.sort_indices()
    ptr, idx, data = docs.indptr.astype(np.int64), docs.indices.astype(np.int64), docs.data
    csc = docs.tocsc()
    csc.sort_indices()
    post = (csc.indptr.astype(np.int64), csc.indices.astype(np.int64), csc.data)

    A = sp.random(n, n, density=8 / n, format="csr", random_state=rng)
    A = ((A + A.T) > 0).astype(float).tocsr()
    A.setdiag(0)
    A.eliminate_zeros()
    A.sort_indices()
    gptr, gidx = A.indptr.astype(np.int64), A.indices.astype(np.int64)
    rows = np.repeat(np.arange(n), np.diff(gptr)).astype(np.int64)
    return rng, ptr, idx, data, post, gptr, gidx, rows


def _cases(n, vocab, seed):
    rng, ptr, idx, data, post, gptr, gidx, rows = _inputs(n, vocab, seed)
    mult, add = minhash_params(30, seed)
    key = np.uint64(projection_key(seed))
    empty = (np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))
    m = gidx.size
    simt, simc = rng.random(m), rng.random(m)
    keep = np.ceil(np.sqrt(np.maximum(np.diff(gptr), 1))).astype(np.int64)
    order = rng.permutation(n).astype(np.int64)

    def norms(mod):
        return np.sqrt(mod.row_sqnorms(ptr, data))

    return {
        "minhash_rows": lambda mod: mod.minhash_rows(ptr, idx, mult, add),
        "simhash_rows": lambda mod: mod.simhash_rows(ptr, idx, data, key, 512),
        "pair_cosine": lambda mod: mod.pair_cosine(ptr, idx, data, norms(mod), rows, gidx),
        "pair_jaccard": lambda mod: mod.pair_jaccard(ptr, idx, rows, gidx),
        "topk_cosine": lambda mod: mod.topk_cosine(ptr, idx, data, norms(mod), *post, 50, *empty, False),
        "select_edges": lambda mod: mod.select_edges(gptr, gidx, simt, simc, np.ones(m), 0.5, 0, keep),
        "label_propagation": lambda mod: mod.label_propagation(gptr, gidx, np.ones(m), order, 100),
    }


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4000, help="documents and vertices")
    ap.add_argument("--vocab", type=int, default=3000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = {"numpy": _accel.backend_module("numpy")}
    try:
        backends["numba"] = _accel.backend_module("numba")
    except ImportError:
        print("numba not installed; timing numpy only")

    print(f"n={args.n} vocab={args.vocab} best of {args.repeat}")
    print(f"{'kernel':<20}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, case in _cases(args.n, args.vocab, args.seed).items():
        row = {}
        for b, mod in backends.items():
            if b == "numba":
                case(mod)
            row[b] = _best(lambda: case(mod), args.repeat)
        speed = f"{row['numpy'] / row['numba']:9.1f}x" if "numba" in row else ""
        print(f"{name:<20}" + "".join(f"{row[b] * 1e3:10.1f}ms" for b in backends) + speed)


if __name__ == "__main__":
    main()
