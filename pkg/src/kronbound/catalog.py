"""Named tensors and the explicit restriction maps used with them.

All tensors are built over Q in their standard coordinates.  The
Coppersmith-Winograd families index their bases from 0, so basis vector
``a_i`` is storage index ``i``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameter
from .tensor import LinearMap, Tensor

TENSOR_NAMES = ("cw", "CW", "skewcw", "matmult", "det3", "perm3", "CGJ", "tight")
PROJECTION_NAMES = ("phi2", "phi3", "skewbad_phi", "generic5")

# Supports of the tight tensors in C^3 ⊗ C^3 ⊗ C^3, written as 1-based abc triples.
TIGHT_SUPPORTS = {
    1: "113 122 212 331",
    2: "113 132 231 322",
    3: "113 122 131 212 321",
    4: "113 122 212 231 321",
    5: "113 122 231 312 321",
    6: "113 131 222 312 321",
    7: "113 132 222 312 331",
    8: "122 213 231 312 321",
    9: "113 122 131 212 221 311",
    10: "113 132 222 231 312 321",
    11: "123 132 213 222 231 312 321",
}
# t11 carries the parameter mu on this (1-based) entry
TIGHT_MU_ENTRY = (3, 2, 1)


@dataclass(frozen=True)
class NamedTensorSpec:
    name: str
    params: dict = field(default_factory=dict)

    def build(self) -> Tensor:
        return build(self.name, **self.params)


def _check_int(name, value, lo):
    if not isinstance(value, (int, np.integer)) or value < lo:
        raise BadParameter(f"{name} must be an integer >= {lo}, got {value!r}")
    return int(value)


def cw(q: int) -> Tensor:
    """Small Coppersmith-Winograd tensor: sum over j of a0 bj cj + aj b0 cj + aj bj c0."""
    q = _check_int("q", q, 1)
    T = np.zeros((q + 1,) * 3, dtype=np.int64)
    for j in range(1, q + 1):
        T[0, j, j] = T[j, 0, j] = T[j, j, 0] = 1
    return Tensor(T)


def w_term(q: int, j: int) -> Tensor:
    """The summand a0 bj cj + aj b0 cj + aj bj c0 of the small CW tensor."""
    q = _check_int("q", q, 1)
    if not 1 <= j <= q:
        raise BadParameter("j must lie in 1..q")
    T = np.zeros((q + 1,) * 3, dtype=np.int64)
    T[0, j, j] = T[j, 0, j] = T[j, j, 0] = 1
    return Tensor(T)


def big_cw(q: int) -> Tensor:
    """Big Coppersmith-Winograd tensor: the small one plus the three corner terms
    through the extra basis vector q+1."""
    q = _check_int("q", q, 1)
    T = np.zeros((q + 2,) * 3, dtype=np.int64)
    T[: q + 1, : q + 1, : q + 1] = cw(q).entries
    e = q + 1
    T[0, 0, e] = T[0, e, 0] = T[e, 0, 0] = 1
    return Tensor(T)


def skewcw(q: int) -> Tensor:
    q = _check_int("q", q, 2)
    if q % 2:
        raise BadParameter("skewcw requires even q")
    u = q // 2
    T = np.zeros((q + 1,) * 3, dtype=np.int64)
    for j in range(1, q + 1):
        T[0, j, j] = T[j, 0, j] = 1
    for x in range(1, u + 1):
        T[x, x + u, 0] = 1
        T[x + u, x, 0] = -1
    return Tensor(T)


def matmult(l: int, m: int | None = None, n: int | None = None) -> Tensor:
    """M<l,m,n> = sum x_ij ⊗ y_jk ⊗ z_ki with x_ij at index i*m + j, y_jk at
    j*n + k and z_ki at k*l + i."""
    m = l if m is None else m
    n = l if n is None else n
    l, m, n = (_check_int(s, v, 1) for s, v in (("l", l), ("m", m), ("n", n)))
    T = np.zeros((l * m, m * n, n * l), dtype=np.int64)
    for i in range(l):
        for j in range(m):
            for k in range(n):
                T[i * m + j, j * n + k, k * l + i] = 1
    return Tensor(T)


def _perm_sign(p) -> int:
    s = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


def _det_perm(signed: bool) -> Tensor:
    T = np.zeros((9, 9, 9), dtype=np.int64)
    for s in itertools.permutations(range(3)):
        for t in itertools.permutations(range(3)):
            v = _perm_sign(s) * _perm_sign(t) if signed else 1
            T[tuple(3 * s[k] + t[k] for k in range(3))] += v
    return Tensor(T)


def det3() -> Tensor:
    """3x3 determinant as a symmetric tensor on C^9 (x_ij at index 3i+j):
    sum over sigma, tau in S3 of sgn(sigma) sgn(tau) x_{s1 t1} ⊗ x_{s2 t2} ⊗ x_{s3 t3}."""
    return _det_perm(True)


def perm3() -> Tensor:
    return _det_perm(False)


def cgj(m: int) -> Tensor:
    m = _check_int("m", m, 3)
    A = np.eye(3, dtype=np.int64)
    B = np.eye(m, dtype=np.int64)
    T = np.zeros((3, m, m), dtype=np.int64)

    def add(coef, a, b, c):
        T[...] += coef * np.einsum("i,j,k->ijk", a, b, c)

    for i in range(3):
        add(1, A[i], B[i], B[i])
    s3 = B[0] + B[1] + B[2]
    add(1, A[0] + A[1] + A[2], s3, s3)
    add(2, A[0] + A[1], B[0] + B[2], B[1] + B[2])
    for s in range(3, m):
        add(1, A[2], B[s], B[s])
    return Tensor(T)


def tight(index: int, mu=None) -> Tensor:
    if index not in TIGHT_SUPPORTS:
        raise BadParameter("tight index must lie in 1..11")
    T = np.zeros((3, 3, 3), dtype=object)
    T[...] = 0
    for s in TIGHT_SUPPORTS[index].split():
        T[tuple(int(x) - 1 for x in s)] = 1
    if index == 11:
        if mu is None:
            raise BadParameter("tight 11 needs a parameter mu")
        if mu == 0:
            raise BadParameter("mu must be nonzero")
        T[tuple(x - 1 for x in TIGHT_MU_ENTRY)] = mu
    elif mu is not None:
        raise BadParameter("only tight 11 takes mu")
    return Tensor.from_array(T)


def build(name: str, **params) -> Tensor:
    if name == "cw":
        return cw(params["q"])
    if name == "CW":
        return big_cw(params["q"])
    if name == "skewcw":
        return skewcw(params["q"])
    if name == "matmult":
        if "n" in params and "l" not in params:
            return matmult(params["n"])
        return matmult(params["l"], params.get("m"), params.get("n"))
    if name == "det3":
        return det3()
    if name == "perm3":
        return perm3()
    if name == "CGJ":
        return cgj(params["m"])
    if name == "tight":
        return tight(params["index"], params.get("mu"))
    raise BadParameter(f"unknown tensor {name!r}; choose from {', '.join(TENSOR_NAMES)}")


def phi2(q: int, variant: int = 1) -> LinearMap:
    """Projection A⊗A -> C^3 used for the Kronecker square.

    Variant 1 sends a02, a20 to e1+e2 and a33, a21 to e2.  Variant 2 swaps
    the roles of a2 and a3 (a03, a30 -> e1+e2; a22, a31 -> e2), which is the
    form whose Schur blocks have the affine-in-q shape.
    """
    q = _check_int("q", q, 3)
    if variant not in (1, 2):
        raise BadParameter("phi2 variant must be 1 or 2")
    if variant == 2 and q < 4:
        raise BadParameter("phi2 variant 2 needs q >= 4")
    n = q + 1
    P = np.zeros((3, n * n), dtype=np.int64)

    def put(i, j, targets):
        for e in targets:
            P[e, i * n + j] += 1

    for ij in ((0, 0), (0, 1), (1, 0)):
        put(*ij, (0, 1))
    put(1, 1, (0,))
    if variant == 1:
        put(0, 2, (1, 2))
        put(2, 0, (1, 2))
        put(3, 3, (2,))
        put(2, 1, (2,))
        rest = range(3, q + 1)
    else:
        put(0, 3, (1, 2))
        put(3, 0, (1, 2))
        put(2, 2, (2,))
        put(3, 1, (2,))
        rest = [2] + list(range(4, q + 1))
    for i in rest:
        put(0, i, (1,))
        put(i, 0, (1,))
    return LinearMap(P, label=f"phi2(q={q},variant={variant})")


PHI3_ROWS = (
    "001 010 012 102 110 121 200 211",
    "022 030 031 100 103 -120 210 212 300",
    "002 004 011 014 020 023 032 040 100 122 220 303",
)


def phi3(q: int) -> LinearMap:
    """Projection A⊗A⊗A -> C^5 used for the Kronecker cube."""
    q = _check_int("q", q, 5)
    n = q + 1
    P = np.zeros((5, n ** 3), dtype=np.int64)

    def idx(i, j, k):
        return (i * n + j) * n + k

    P[0, idx(0, 0, 0)] = 1
    for i in range(1, q + 1):
        for t in ((i, 0, 0), (0, i, 0), (0, 0, i)):
            P[1, idx(*t)] += 1
    for r, row_words in enumerate(PHI3_ROWS, start=2):
        for word in row_words.split():
            sign = -1 if word.startswith("-") else 1
            P[r, idx(*(int(c) for c in word.lstrip("-")))] += sign
    return LinearMap(P, label=f"phi3(q={q})")


def skewbad_phi(q: int) -> LinearMap:
    """a0 -> e0, a1..au -> e1, a(u+1)..aq -> e2 with u = q/2."""
    q = _check_int("q", q, 2)
    if q % 2:
        raise BadParameter("skewbad_phi requires even q")
    u = q // 2
    P = np.zeros((3, q + 1), dtype=np.int64)
    P[0, 0] = 1
    P[1, 1: u + 1] = 1
    P[2, u + 1:] = 1
    return LinearMap(P, label=f"skewbad_phi(q={q})")


def generic5(dim: int, seed: int = 0, rows: int = 5) -> LinearMap:
    """Seeded random integer matrix with entries in [-5, 5]."""
    rng = np.random.default_rng(seed)
    P = rng.integers(-5, 6, size=(rows, dim)).astype(np.int64)
    return LinearMap(P, label=f"generic{rows}(seed={seed})")


def build_projection(name: str, q: int, seed: int | None = None, variant: int = 1, power: int = 2) -> LinearMap:
    if name == "phi2":
        return phi2(q, variant)
    if name == "phi3":
        return phi3(q)
    if name in ("skewbad_phi", "skewbad"):
        return skewbad_phi(q)
    if name == "generic5":
        return generic5((q + 1) ** power, 0 if seed is None else seed)
    raise BadParameter(f"unknown projection {name!r}; choose from {', '.join(PROJECTION_NAMES)}")


# Explicit changes of basis relating small CW tensors to monomial, alternating,
# permanent and determinant tensors.


def monomial_tensor() -> Tensor:
    """a0·a1·a2 as a symmetric tensor: 1 on every permutation of (0, 1, 2)."""
    T = np.zeros((3, 3, 3), dtype=np.int64)
    for p in itertools.permutations(range(3)):
        T[p] = 1
    return Tensor(T)


def alternating_tensor() -> Tensor:
    """a0 ∧ a1 ∧ a2 = Σ sgn(σ) a_σ(0) ⊗ a_σ(1) ⊗ a_σ(2)."""
    T = np.zeros((3, 3, 3), dtype=np.int64)
    for p in itertools.permutations(range(3)):
        T[p] = _perm_sign(p)
    return Tensor(T)


def cw2_to_monomial_maps() -> tuple:
    """Maps (g, g, g) with g(a0) = 2e0, g(a1) = (e1+e2)/2, g(a2) = -i(e1-e2)/2;
    they carry T_cw,2 to :func:`monomial_tensor` over Q(i)."""
    from fractions import Fraction

    from .scalar import QI, GaussianRational

    half = Fraction(1, 2)
    g = np.empty((3, 3), dtype=object)
    g[...] = GaussianRational(0)
    g[0, 0] = GaussianRational(2)
    g[1, 1] = g[2, 1] = GaussianRational(half)
    g[1, 2] = GaussianRational(0, -half)
    g[2, 2] = GaussianRational(0, half)
    m = LinearMap(g, QI, "cw2->monomial")
    return (m, m, m)


def skewcw2_to_alternating_maps() -> tuple:
    """Identity on A, b0 ↦ -b0 on B, and c1 ↦ c2, c2 ↦ -c1 on C."""
    gb = np.diag([-1, 1, 1]).astype(np.int64)
    gc = np.array([[1, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=np.int64)
    return (LinearMap(np.eye(3, dtype=np.int64), label="id"), LinearMap(gb, label="skew B"), LinearMap(gc, label="skew C"))


def kron_maps(maps1, maps2) -> tuple:
    """Axis-wise Kronecker products of two map triples (acting on T ⊠ S)."""
    from .scalar import join_domains

    out = []
    for m1, m2 in zip(maps1, maps2):
        a, b = np.asarray(m1.entries), np.asarray(m2.entries)
        if a.dtype == object or b.dtype == object:
            k = np.empty((a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), dtype=object)
            for i, j in itertools.product(range(a.shape[0]), range(a.shape[1])):
                k[i * b.shape[0]:(i + 1) * b.shape[0], j * b.shape[1]:(j + 1) * b.shape[1]] = a[i, j] * b
        else:
            k = np.kron(a, b)
        out.append(LinearMap(k, join_domains(m1.domain, m2.domain), f"{m1.label}⊠{m2.label}"))
    return tuple(out)
