"""Koszul flattenings and the border-rank lower bounds they certify.

For a tensor T in A⊗B⊗C the p-th Koszul flattening maps Λ^p A ⊗ B* to
Λ^{p+1} A ⊗ C by X⊗β ↦ Σ T[i,j,k] β(b_j) (a_i ∧ X) ⊗ c_k.  Wedge bases are
increasing index tuples in lexicographic order; rows are indexed by
(wedge, c) and columns by (wedge, b), wedge-major.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import BadShape, DimensionMismatch, NotOneAGeneric
from .linalg import RankResult, certify_rank
from .scalar import QQ
from .tensor import LinearMap, Tensor, contract_axis, matmul


def wedge_basis(n: int, k: int) -> list:
    return list(itertools.combinations(range(n), k))


def wedge_sign(i: int, w) -> int:
    """Sign of a_i ∧ a_w against the sorted tuple: (-1)^#{x in w : x < i}."""
    return -1 if sum(1 for x in w if x < i) % 2 else 1


def _stack_blocks(slices, p: int):
    """Assemble the flattening from per-A-basis slices (each B×C)."""
    n = len(slices)
    if p < 0 or p + 1 > n:
        raise BadShape(f"need 0 <= p and p+1 <= dim A' (= {n})")
    B, C = slices[0].shape
    src = wedge_basis(n, p)
    dst = wedge_basis(n, p + 1)
    pos = {w: r for r, w in enumerate(dst)}
    obj = any(s.dtype == object for s in slices)
    M = np.zeros((len(dst) * C, len(src) * B), dtype=object if obj else np.int64)
    if obj:
        M[...] = 0
    blocks = [s.T for s in slices]
    for col, w in enumerate(src):
        for i in range(n):
            if i in w:
                continue
            row = pos[tuple(sorted(w + (i,)))]
            blk = blocks[i] if wedge_sign(i, w) > 0 else -blocks[i]
            M[row * C:(row + 1) * C, col * B:(col + 1) * B] += blk
    return M


def restricted_slices(T: Tensor, restriction: LinearMap | None = None) -> list:
    """Slices sum_a φ[e, a] T[a] for each row e of the restriction."""
    if T.order != 3:
        raise BadShape("Koszul flattenings need an order-3 tensor")
    arr = T.entries
    if restriction is None:
        return [arr[i] for i in range(arr.shape[0])]
    P = restriction.entries
    if P.shape[1] != arr.shape[0]:
        raise BadShape(f"restriction has {P.shape[1]} columns but dim A = {arr.shape[0]}")
    flat = matmul(P, arr.reshape(arr.shape[0], -1))
    return [flat[e].reshape(arr.shape[1:]) for e in range(P.shape[0])]


def power_restricted_slices(T: Tensor, N: int, restriction: LinearMap) -> list:
    """Restricted slices of the N-th Kronecker power of T without forming the power.

    Each row of the restriction is a functional on A^{⊗N}; its slice is the
    sum over the functional's support of Kronecker products of slices of T.
    """
    arr = T.entries
    a = arr.shape[0]
    P = restriction.entries
    if P.shape[1] != a ** N:
        raise BadShape(f"restriction needs {a ** N} columns")
    out = []
    for row in P:
        acc = None
        for flat in np.flatnonzero(row != 0):
            idx = np.unravel_index(int(flat), (a,) * N)
            term = arr[idx[0]]
            for x in idx[1:]:
                term = np.kron(term, arr[x])
            term = row[flat] * term
            acc = term if acc is None else acc + term
        if acc is None:
            acc = np.zeros((arr.shape[1] ** N, arr.shape[2] ** N), dtype=arr.dtype)
        out.append(acc)
    return out


def _check_restriction(T: Tensor, p: int, restriction):
    if restriction is None:
        return
    if restriction.rows != 2 * p + 1:
        raise BadShape(f"a restriction for p={p} must have {2 * p + 1} rows, got {restriction.rows}")


def flattening_matrix(T: Tensor, p: int, restriction: LinearMap | None = None) -> np.ndarray:
    _check_restriction(T, p, restriction)
    return _stack_blocks(restricted_slices(T, restriction), p)


def flattening_from_slices(slices, p: int) -> np.ndarray:
    return _stack_blocks(list(slices), p)


@dataclass(frozen=True)
class FlatteningCertificate:
    p: int
    restriction: LinearMap | None
    matrix_dims: tuple
    certified_rank: int
    rank_method: str
    bound: int
    divisor: int
    dim_a: int
    rank_result: RankResult = field(repr=False, default=None)

    @property
    def exact(self) -> bool:
        return self.rank_result is None or self.rank_result.exact

    def report(self) -> dict:
        out = {
            "p": self.p,
            "restriction": self.restriction.label if self.restriction is not None else "none",
            "matrix_dims": f"{self.matrix_dims[0]}x{self.matrix_dims[1]}",
            "rank": self.certified_rank,
            "method": self.rank_method,
            "divisor": self.divisor,
            "bound": self.bound,
        }
        if self.rank_result is not None and not self.rank_result.exact:
            out["modular_ranks"] = ",".join(map(str, self.rank_result.modular_ranks))
        return out


def divisor_for(p: int, dim_a: int, restricted: bool) -> int:
    return comb(2 * p, p) if restricted else comb(dim_a - 1, p)


def certificate_from_matrix(M, p: int, dim_a: int, restriction=None, method: str = "auto") -> FlatteningCertificate:
    res = certify_rank(M, method)
    div = divisor_for(p, dim_a, restriction is not None)
    return FlatteningCertificate(
        p=p,
        restriction=restriction,
        matrix_dims=tuple(M.shape),
        certified_rank=res.rank,
        rank_method=res.describe(),
        bound=-(-res.rank // div),
        divisor=div,
        dim_a=dim_a,
        rank_result=res,
    )


def border_rank_lower_bound(T: Tensor, p: int, restriction: LinearMap | None = None, method: str = "auto") -> FlatteningCertificate:
    """Rank of the (restricted) p-th Koszul flattening and the bound
    ceil(rank / divisor)."""
    M = flattening_matrix(T, p, restriction)
    return certificate_from_matrix(M, p, T.dims[0], restriction, method)


def power_border_rank_lower_bound(T: Tensor, N: int, p: int, restriction: LinearMap, method: str = "auto") -> FlatteningCertificate:
    """Same as :func:`border_rank_lower_bound` for the N-th Kronecker power of
    ``T`` restricted by a functional on A^{⊗N}, built slice by slice."""
    _check_restriction(T, p, restriction)
    M = _stack_blocks(power_restricted_slices(T, N, restriction), p)
    return certificate_from_matrix(M, p, T.dims[0] ** N, restriction, method)


def _full_rank_square(mat) -> bool:
    return certify_rank(mat, "auto").rank == mat.shape[0]


def find_one_generic_witness(T2: Tensor, attempts: int = 10, seed: int = 0):
    """Search for a functional α on A with T2(α) an invertible matrix."""
    b, c = T2.dims[1], T2.dims[2]
    if b != c:
        raise BadShape("1_A-genericity needs dim B = dim C")
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        alpha = rng.integers(-10, 11, size=T2.dims[0]).astype(np.int64)
        if _full_rank_square(contract_axis(T2, 0, alpha).entries):
            return alpha
    raise NotOneAGeneric(f"no full-rank functional found in {attempts} attempts")


def kron_propagated_bound(cert: FlatteningCertificate, T2: Tensor, witness=None, attempts: int = 10, seed: int = 0) -> int:
    """Lower bound for the border rank of T1 ⊠ T2 from a flattening
    certificate of T1 and a 1_A-generic T2: ceil(rank * dim B2 / divisor)."""
    if T2.order != 3:
        raise DimensionMismatch("T2 must have order 3")
    b2 = T2.dims[1]
    if T2.dims[2] != b2:
        raise BadShape("T2 must be square in its B and C axes")
    if witness is None:
        find_one_generic_witness(T2, attempts, seed)
    elif not _full_rank_square(contract_axis(T2, 0, np.asarray(witness)).entries):
        raise NotOneAGeneric("the supplied witness does not give a full-rank matrix")
    return -(-(cert.certified_rank * b2) // cert.divisor)


def identity_restriction(n: int) -> LinearMap:
    return LinearMap(np.eye(n, dtype=np.int64), QQ, f"identity({n})")
