"""numpy fallback for the modular rank kernel.

Products of residues below 2**62 are reduced with a long-double estimate of
the quotient followed by a wrapped uint64 correction, so no object arrays
are needed.
"""

import numpy as np


def mulmod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    pl = np.longdouble(p)
    q = np.floor(a.astype(np.longdouble) * b.astype(np.longdouble) / pl).astype(np.uint64)
    r = (a * b - q * np.uint64(p)).view(np.int64)
    r = np.where(r < 0, r + p, r)
    r = np.where(r >= p, r - p, r)
    return r.astype(np.uint64)


def rank_mod_p(mat, p: int) -> int:
    """Rank of ``mat`` (entries already reduced into [0, p)) over GF(p)."""
    A = np.array(mat, dtype=np.uint64, copy=True)
    nrows, ncols = A.shape
    pu = np.uint64(p)
    rank = 0
    for c in range(ncols):
        if rank == nrows:
            break
        col = A[rank:, c]
        hits = np.flatnonzero(col)
        if hits.size == 0:
            continue
        piv = rank + int(hits[0])
        if piv != rank:
            A[[rank, piv]] = A[[piv, rank]]
        prow = A[rank]
        nzc = np.flatnonzero(prow[c + 1:]) + c + 1
        below = np.flatnonzero(A[rank + 1:, c]) + rank + 1
        if below.size:
            inv = pow(int(prow[c]), p - 2, p)
            f = mulmod(A[below, c], np.full(below.size, inv, dtype=np.uint64), p)
            if nzc.size:
                sub = mulmod(f[:, None], prow[nzc][None, :], p)
                cur = A[np.ix_(below, nzc)]
                A[np.ix_(below, nzc)] = np.where(cur >= sub, cur - sub, cur + (pu - sub))
            A[below, c] = 0
        rank += 1
    return rank
