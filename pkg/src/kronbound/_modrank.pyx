# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Rank of a dense matrix modulo an odd prime below 2**63.

Row reduction with Montgomery multiplication (R = 2**64).  Only the nonzero
tail of each pivot row is swept over the rows below it, which keeps the
sparse Koszul matrices cheap until fill-in sets in.
"""

import numpy as np
cimport numpy as cnp

ctypedef unsigned long long u64

cdef extern from *:
    """
    typedef unsigned __int128 kb_u128;
    """
    ctypedef unsigned long long u128 "kb_u128"


cdef inline u64 _mont_reduce(u128 t, u64 p, u64 pneg) nogil:
    cdef u64 m = <u64>t * pneg
    cdef u128 s = (t + <u128>m * p) >> 64
    cdef u64 r = <u64>s
    if r >= p:
        r -= p
    return r


cdef inline u64 _mulmod(u64 a, u64 b, u64 p) nogil:
    return <u64>((<u128>a * b) % p)


cdef u64 _powmod(u64 a, u64 e, u64 p) nogil:
    cdef u64 r = 1
    a %= p
    while e:
        if e & 1:
            r = _mulmod(r, a, p)
        a = _mulmod(a, a, p)
        e >>= 1
    return r


def rank_mod_p(cnp.ndarray mat, u64 p):
    """Rank of ``mat`` (entries already reduced into [0, p)) over GF(p)."""
    cdef cnp.ndarray[cnp.uint64_t, ndim=2] A = np.ascontiguousarray(mat, dtype=np.uint64).copy()
    cdef Py_ssize_t nrows = A.shape[0], ncols = A.shape[1]
    if nrows == 0 or ncols == 0:
        return 0
    cdef u64[:, ::1] a = A
    cdef Py_ssize_t[::1] order = np.arange(nrows, dtype=np.intp)
    cdef Py_ssize_t[::1] nz = np.empty(ncols, dtype=np.intp)
    cdef Py_ssize_t rank = 0, c, i, j, k, piv, nnz, ri, rr, tmp
    cdef u64 inv, f, fm, x, y
    # Montgomery constants: pneg = -p^{-1} mod 2^64, r2 = R^2 mod p
    cdef u64 pinv = 1
    for k in range(6):
        pinv = pinv * (2 - p * pinv)
    cdef u64 pneg = <u64>0 - pinv
    cdef u64 rmod = <u64>((<u128>1 << 64) % p)
    cdef u64 r2 = _mulmod(rmod, rmod, p)
    with nogil:
        for c in range(ncols):
            if rank == nrows:
                break
            piv = -1
            for i in range(rank, nrows):
                if a[order[i], c] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            tmp = order[rank]
            order[rank] = order[piv]
            order[piv] = tmp
            rr = order[rank]
            nnz = 0
            for j in range(c + 1, ncols):
                if a[rr, j] != 0:
                    nz[nnz] = j
                    nnz += 1
            inv = _powmod(a[rr, c], p - 2, p)
            # fold inv and R^2 so that mont(fm, x) = f * x mod p
            inv = _mont_reduce(<u128>inv * r2, p, pneg)
            inv = _mont_reduce(<u128>inv * r2, p, pneg)
            for i in range(rank + 1, nrows):
                ri = order[i]
                f = a[ri, c]
                if f == 0:
                    continue
                fm = _mont_reduce(<u128>f * inv, p, pneg)
                a[ri, c] = 0
                for k in range(nnz):
                    j = nz[k]
                    y = _mont_reduce(<u128>fm * a[rr, j], p, pneg)
                    x = a[ri, j]
                    a[ri, j] = x - y if x >= y else x + (p - y)
            rank += 1
    return rank
