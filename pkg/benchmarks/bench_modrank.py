"""Compare the compiled modular-rank kernel against the numpy fallback.

    python3 benchmarks/bench_modrank.py [--sizes 100 200 400] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from kronbound import _modrank_py
from kronbound.scalar import PRIMES

try:
    from kronbound import _modrank
except ImportError:
    _modrank = None


def _low_rank(n: int, rank: int, rng) -> np.ndarray:
    a = rng.integers(-5, 6, size=(n, rank))
    b = rng.integers(-5, 6, size=(rank, n))
    return a @ b


def _best(fn, mat, p, repeat):
    times = []
    for _ in range(repeat):
        m = mat.copy()
        t0 = time.perf_counter()
        r = fn(m, p)
        times.append(time.perf_counter() - t0)
    return r, min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400, 800])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    p = PRIMES[0]
    print(f"{'n':>6} {'rank':>6} {'numpy_s':>10} {'cython_s':>10} {'speedup':>8}")
    for n in args.sizes:
        mat = (_low_rank(n, n - n // 10, rng) % p).astype(np.uint64)
        r_py, t_py = _best(_modrank_py.rank_mod_p, mat, p, args.repeat)
        if _modrank is None:
            print(f"{n:>6} {r_py:>6} {t_py:>10.4f} {'n/a':>10} {'n/a':>8}")
            continue
        r_cy, t_cy = _best(_modrank.rank_mod_p, mat, p, args.repeat)
        if r_cy != r_py:
            raise SystemExit(f"backends disagree at n={n}: {r_cy} vs {r_py}")
        print(f"{n:>6} {r_cy:>6} {t_py:>10.4f} {t_cy:>10.4f} {t_py / t_cy:>8.1f}")


if __name__ == "__main__":
    main()
