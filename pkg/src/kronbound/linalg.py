"""Exact and modular matrix rank, plus rational null spaces.

Exact rank uses fraction-free integer elimination, either dense (Bareiss,
vectorized over numpy object arrays) or sparse (dict rows with content
normalization).  Modular rank runs the compiled kernel when it is available;
setting ``KRONBOUND_PURE_PYTHON=1`` forces the numpy fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm

import numpy as np

from .errors import BadParameter, BadPrime
from .scalar import PRIMES, PrimeFieldElem, to_rational

from ._modrank_py import rank_mod_p as _rank_mod_p_py

if os.environ.get("KRONBOUND_PURE_PYTHON", "") not in ("", "0"):
    from ._modrank_py import rank_mod_p as _rank_mod_p_kernel

    BACKEND = "numpy"
else:
    try:
        from ._modrank import rank_mod_p as _rank_mod_p_kernel

        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._modrank_py import rank_mod_p as _rank_mod_p_kernel

        BACKEND = "numpy"

# Largest side handled by exact elimination at all, and by default in auto mode.
EXACT_LIMIT = 2500
EXACT_AUTO_LIMIT = 800
# Below this density the sparse exact routine is preferred.
SPARSE_DENSITY = 0.15

EXACT_BAREISS = "exact_bareiss"
EXACT_SPARSE = "exact_sparse"
MODULAR = "modular_lower_bound"


@dataclass(frozen=True)
class RankResult:
    rank: int
    method: str
    primes: tuple = ()
    modular_ranks: tuple = ()

    @property
    def exact(self) -> bool:
        return self.method != MODULAR

    @property
    def primes_agree(self) -> bool:
        return len(set(self.modular_ranks)) <= 1

    def describe(self) -> str:
        if self.exact:
            return self.method
        return f"{MODULAR}({','.join(str(p) for p in self.primes)})"


def integer_rows(M) -> np.ndarray:
    """Scale each row by the lcm of its denominators; returns an int64 or
    object array of Python ints with the same rank as ``M``."""
    a = np.asarray(M)
    if a.dtype.kind in "iub":
        return a.astype(np.int64)
    if a.dtype.kind == "f":
        raise BadParameter("float matrices have no exact rank")
    out = np.empty(a.shape, dtype=object)
    for i, row in enumerate(a):
        vals = [to_rational(x) for x in row]
        den = reduce(lcm, (v.denominator for v in vals), 1)
        out[i, :] = [int(v * den) for v in vals]
    return out


def _as_object_ints(a: np.ndarray) -> np.ndarray:
    if a.dtype == object:
        return a.copy()
    out = np.empty(a.shape, dtype=object)
    out.reshape(-1)[:] = [int(x) for x in a.reshape(-1)]
    return out


def rank_bareiss(M) -> int:
    """Exact rank by fraction-free Bareiss elimination."""
    A = _as_object_ints(integer_rows(M))
    if A.size == 0:
        return 0
    nrows, ncols = A.shape
    r = 0
    prev = 1
    for c in range(ncols):
        if r == nrows:
            break
        col = A[r:, c]
        hits = [i for i, x in enumerate(col) if x != 0]
        if not hits:
            continue
        piv = r + hits[0]
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        pv = A[r, c]
        if r + 1 < nrows:
            lower = A[r + 1:, c + 1:]
            A[r + 1:, c + 1:] = (pv * lower - np.outer(A[r + 1:, c], A[r, c + 1:])) // prev
            A[r + 1:, c] = 0
        prev = pv
        r += 1
    return r


def _content_normalize(row: dict) -> dict:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            break
    if g > 1:
        row = {k: v // g for k, v in row.items()}
    lead = row[min(row)]
    if lead < 0:
        row = {k: -v for k, v in row.items()}
    return row


def sparse_rows(M) -> list:
    A = integer_rows(M)
    rows = []
    for row in A:
        nz = np.flatnonzero(row != 0) if A.dtype != object else [j for j, x in enumerate(row) if x != 0]
        rows.append({int(j): int(row[j]) for j in nz})
    return rows


def rank_sparse_rows(rows, ncols: int | None = None) -> int:
    """Exact rank of integer rows given as ``{col: value}`` dicts."""
    pivots: dict[int, dict] = {}
    for row in rows:
        row = {k: v for k, v in row.items() if v != 0}
        while row:
            c = min(row)
            prow = pivots.get(c)
            if prow is None:
                pivots[c] = _content_normalize(row)
                break
            a, b = prow[c], row[c]
            g = gcd(a, b)
            a, b = a // g, b // g
            new = {k: a * v for k, v in row.items()}
            for k, v in prow.items():
                nv = new.get(k, 0) - b * v
                if nv:
                    new[k] = nv
                else:
                    new.pop(k, None)
            row = _content_normalize(new) if new else new
    return len(pivots)


def rank_sparse(M) -> int:
    return rank_sparse_rows(sparse_rows(M))


def reduce_matrix_mod_p(M, p: int) -> np.ndarray:
    a = np.asarray(M)
    if a.dtype.kind in "iub":
        return np.mod(a.astype(np.int64), p).astype(np.uint64)
    out = np.empty(a.shape, dtype=np.uint64)
    flat = out.reshape(-1)
    for i, x in enumerate(a.reshape(-1)):
        if isinstance(x, PrimeFieldElem):
            flat[i] = x.value
        else:
            v = to_rational(x)
            if v.denominator % p == 0:
                raise BadPrime(f"{p} divides a denominator")
            flat[i] = v.numerator * pow(v.denominator, -1, p) % p
    return out


def rank_mod_p(M, p: int) -> int:
    """Rank over GF(p).  For an integer matrix this is a lower bound on the
    rational rank."""
    red = reduce_matrix_mod_p(M, p)
    if red.size == 0:
        return 0
    if p == 2:  # the compiled kernel's Montgomery reduction needs an odd modulus
        return int(_rank_mod_p_py(red, p))
    return int(_rank_mod_p_kernel(red, p))


def _density(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    if a.dtype == object:
        return sum(1 for x in a.flat if x != 0) / a.size
    return float(np.count_nonzero(a)) / a.size


def exact_rank(M) -> RankResult:
    a = np.asarray(M)
    if max(a.shape, default=0) > EXACT_LIMIT:
        raise BadParameter(f"exact rank is limited to {EXACT_LIMIT} rows and columns")
    if _density(a) < SPARSE_DENSITY:
        return RankResult(rank_sparse(a), EXACT_SPARSE)
    return RankResult(rank_bareiss(a), EXACT_BAREISS)


def modular_rank(M, primes=PRIMES) -> RankResult:
    a = np.asarray(M)
    if a.dtype.kind not in "iub":
        a = integer_rows(a)
    ranks = []
    used = []
    for p in primes:
        try:
            ranks.append(rank_mod_p(a, p))
            used.append(p)
        except BadPrime:
            continue
    if not ranks:
        raise BadPrime("every prime divides some denominator")
    return RankResult(max(ranks), MODULAR, tuple(used), tuple(ranks))


def certify_rank(M, method: str = "auto") -> RankResult:
    """Rank of a rational matrix.

    ``method`` is ``"exact"``, ``"modular"`` or ``"auto"`` (exact when the
    larger side is at most ``EXACT_AUTO_LIMIT``).  Modular results are
    certified lower bounds for the rational rank.
    """
    a = np.asarray(M)
    if a.ndim != 2:
        raise BadParameter("certify_rank needs a 2-d matrix")
    if method == "exact":
        return exact_rank(a)
    if method == "modular":
        return modular_rank(a)
    if method != "auto":
        raise BadParameter(f"unknown rank method {method!r}")
    if max(a.shape, default=0) <= EXACT_AUTO_LIMIT:
        return exact_rank(a)
    return modular_rank(a)


def rref(M):
    """Reduced row echelon form over Q; returns (rows as Fraction lists, pivot columns)."""
    rows = [[to_rational(x) for x in row] for row in np.asarray(M, dtype=object)]
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def nullspace(M, ncols: int | None = None) -> list:
    """Basis of the right null space over Q as lists of Fractions."""
    a = np.asarray(M, dtype=object)
    if a.size == 0:
        n = ncols if ncols is not None else (a.shape[1] if a.ndim == 2 else 0)
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    n = a.shape[1]
    rows, pivots = rref(a)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * n
        v[fcol] = Fraction(1)
        for row, pc in zip(rows, pivots):
            v[pc] = -row[fcol]
        basis.append(v)
    return basis
