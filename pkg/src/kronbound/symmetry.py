"""Symmetry Lie algebras and tightness of order-3 tensors.

The annihilator of T in gl(A)⊕gl(B)⊕gl(C) is the kernel of the linear map
(X, Y, Z) ↦ X·T + Y·T + Z·T.  It always contains the two-dimensional space
{(λI, μI, νI) : λ+μ+ν = 0}; g_T is the quotient by it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .linalg import nullspace, rank_sparse_rows
from .tensor import Tensor, kronecker


@dataclass(frozen=True)
class LieAnnihilatorResult:
    ambient_dim: int
    solution_dim: int
    g_dim: int
    concise: bool


@dataclass(frozen=True)
class TightnessWitness:
    a: tuple
    b: tuple
    c: tuple
    satisfied: bool
    blocking_pair: tuple | None = None  # (axis, i, i') forced equal on the solution space


def _support(T: Tensor):
    return [idx for idx, _ in T.nonzero()]


def is_concise(T: Tensor) -> bool:
    from .linalg import certify_rank

    arr = T.entries
    for axis in range(T.order):
        flat = np.moveaxis(arr, axis, 0).reshape(arr.shape[axis], -1)
        if certify_rank(flat).rank != arr.shape[axis]:
            return False
    return True


def action_columns(T: Tensor):
    """Sparse columns (as {row: value}) of the annihilator system, one per
    elementary matrix E_uv acting on one factor."""
    dims = T.dims
    strides = np.array([int(np.prod(dims[i + 1:])) for i in range(3)])
    support = list(T.nonzero())
    cols = []
    for axis in range(3):
        n = dims[axis]
        for u in range(n):
            for v in range(n):
                # (E_uv · T)[..., u, ...] = T[..., v, ...]
                col = {}
                for idx, val in support:
                    if idx[axis] != v:
                        continue
                    tgt = list(idx)
                    tgt[axis] = u
                    r = int(np.dot(strides, tgt))
                    col[r] = col.get(r, 0) + val
                cols.append({k: x for k, x in col.items() if x != 0})
    return cols


def _integer_rows(cols):
    """Clear denominators so the fraction-free rank routine applies."""
    out = []
    for col in cols:
        vals = [Fraction(x) for x in col.values()]
        den = 1
        for x in vals:
            den = den * x.denominator // np.gcd(den, x.denominator)
        out.append({k: int(Fraction(x) * den) for k, x in col.items()})
    return out


def lie_algebra_dim(T: Tensor) -> LieAnnihilatorResult:
    if T.order != 3:
        raise ValueError("lie_algebra_dim needs an order-3 tensor")
    concise = is_concise(T)
    if not concise:
        warnings.warn("tensor is not concise; reporting the raw annihilator dimension minus 2", stacklevel=2)
    cols = action_columns(T)
    # rank of the action matrix = rank of its transpose (columns as rows)
    rank = rank_sparse_rows(_integer_rows(cols))
    ambient = sum(d * d for d in T.dims)
    sol = ambient - rank
    return LieAnnihilatorResult(ambient, sol, sol - 2, concise)


def superadditivity_check(T: Tensor):
    """(dim g_T, dim g_{T⊠T}, strict) with strict meaning dim g_{T⊠T} > 2 dim g_T."""
    g1 = lie_algebra_dim(T).g_dim
    g2 = lie_algebra_dim(kronecker(T, T)).g_dim
    if g2 < 2 * g1:
        raise AssertionError(f"annihilator of the square is too small: {g2} < 2*{g1}")
    return g1, g2, g2 > 2 * g1


def tightness_check(T: Tensor, seed: int = 0, attempts: int = 10) -> TightnessWitness:
    """Search for weights with a_i + b_j + c_k = 0 on the support and
    pairwise-distinct entries within each factor."""
    dA, dB, dC = T.dims
    offs = (0, dA, dA + dB)
    nvars = dA + dB + dC
    rows = []
    for i, j, k in _support(T):
        r = [0] * nvars
        r[i] += 1
        r[dA + j] += 1
        r[dA + dB + k] += 1
        rows.append(r)
    basis = nullspace(np.array(rows, dtype=object), nvars) if rows else nullspace(np.zeros((0, nvars), dtype=object), nvars)
    pairs = [(axis, i, i2) for axis, d in enumerate((dA, dB, dC)) for i, i2 in combinations(range(d), 2)]
    # exact test: is the functional x_i - x_i' zero on the whole solution space?
    for axis, i, i2 in pairs:
        u, w = offs[axis] + i, offs[axis] + i2
        if all(v[u] == v[w] for v in basis):
            return TightnessWitness((), (), (), False, (axis, i, i2))
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        coeffs = [Fraction(int(x)) for x in rng.integers(-1000, 1001, size=len(basis))]
        x = [sum((c * v[t] for c, v in zip(coeffs, basis)), Fraction(0)) for t in range(nvars)]
        if all(x[offs[axis] + i] != x[offs[axis] + i2] for axis, i, i2 in pairs):
            return TightnessWitness(tuple(x[:dA]), tuple(x[dA:dA + dB]), tuple(x[dA + dB:]), True)
    # every pair is a nonzero functional, so a generic point works; this is
    # only reached through an extraordinarily unlucky seed
    raise RuntimeError("random sampling kept hitting a coincidence hyperplane")
