"""Dense labeled tensors and linear maps over the exact scalar domains.

Storage policy: rational tensors with small integer entries live in int64
arrays (fast path for large Kronecker powers); anything else exact uses an
object array of ints, Fractions, Cyclo6 or GaussianRational values; float
tensors use float64.  Pairs of indices are flattened as ``x*d' + x'``
everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import prod

import numpy as np

from .errors import DimensionMismatch, NotAKroneckerPower, ScalarDomainMismatch
from .scalar import QQ, RR, coerce_to_domain, domain_of, join_domains

# Products that could leave this range trigger promotion to object dtype.
_INT_SAFE = 1 << 62


def _infer_domain(arr: np.ndarray) -> str:
    if arr.dtype.kind == "f":
        return RR
    if arr.dtype.kind in "iub":
        return QQ
    dom = QQ
    for x in arr.flat:
        d = domain_of(x)
        if d != QQ:
            dom = join_domains(dom, d)
    return dom


def exact_array(arr, domain: str = QQ) -> np.ndarray:
    """Return ``arr`` as int64 when every entry is a small integer, else as
    an object array with entries coerced into ``domain``."""
    a = np.asarray(arr)
    if domain == RR:
        return a.astype(np.float64)
    if a.dtype.kind in "iub":
        a64 = a.astype(np.int64)
        return a64
    if a.dtype.kind == "f":
        raise ScalarDomainMismatch("float entries in an exact tensor")
    if domain == QQ:
        flat = [coerce_to_domain(x, QQ) for x in a.flat]
        if all(isinstance(x, int) and -_INT_SAFE < x < _INT_SAFE for x in flat):
            return np.array(flat, dtype=np.int64).reshape(a.shape)
        out = np.empty(a.shape, dtype=object)
        out.reshape(-1)[:] = flat
        return out
    out = np.empty(a.shape, dtype=object)
    out.reshape(-1)[:] = [coerce_to_domain(x, domain) for x in a.flat]
    return out


def _object(a: np.ndarray) -> np.ndarray:
    if a.dtype == object:
        return a
    out = np.empty(a.shape, dtype=object)
    out.reshape(-1)[:] = [int(x) for x in a.reshape(-1)] if a.dtype.kind in "iub" else list(a.reshape(-1))
    return out


def _safe_int_product(a: np.ndarray, b: np.ndarray, terms: int = 1) -> bool:
    if a.dtype != np.int64 or b.dtype != np.int64:
        return False
    ma = int(np.abs(a).max(initial=0))
    mb = int(np.abs(b).max(initial=0))
    return ma * mb * max(terms, 1) < _INT_SAFE


@dataclass(frozen=True)
class Tensor:
    """Order-d tensor with an exact or float scalar domain.

    ``factors`` records, per axis, the dims of the Kronecker factors the axis
    was built from (a 1-tuple for an atomic axis).
    """

    entries: np.ndarray
    domain: str = QQ
    factors: tuple = field(default=None)

    def __post_init__(self):
        arr = np.asarray(self.entries)
        if arr.ndim == 0:
            raise DimensionMismatch("tensor must have order >= 1")
        object.__setattr__(self, "entries", arr)
        if self.factors is None:
            object.__setattr__(self, "factors", tuple((d,) for d in arr.shape))
        else:
            fs = tuple(tuple(int(x) for x in f) for f in self.factors)
            if len(fs) != arr.ndim or any(prod(f) != d for f, d in zip(fs, arr.shape)):
                raise DimensionMismatch("factor dims do not match axis dims")
            object.__setattr__(self, "factors", fs)
        arr.setflags(write=False)

    @classmethod
    def from_array(cls, arr, domain: str | None = None, factors=None) -> "Tensor":
        a = np.asarray(arr)
        dom = domain or _infer_domain(a)
        return cls(exact_array(a, dom) if dom != RR else a.astype(np.float64), dom, factors)

    @classmethod
    def zeros(cls, dims, domain: str = QQ) -> "Tensor":
        if domain == RR:
            return cls(np.zeros(tuple(dims)), RR)
        if domain == QQ:
            return cls(np.zeros(tuple(dims), dtype=np.int64), QQ)
        a = np.empty(tuple(dims), dtype=object)
        z = coerce_to_domain(0, domain)
        a.reshape(-1)[:] = [z] * a.size
        return cls(a, domain)

    @classmethod
    def from_entries(cls, dims, items, domain: str = QQ) -> "Tensor":
        """Build from an iterable of ``(index_tuple, value)`` pairs."""
        dims = tuple(dims)
        a = np.zeros(dims, dtype=object)
        for idx, v in items:
            a[tuple(idx)] = a[tuple(idx)] + v
        return cls.from_array(a, domain)

    @property
    def dims(self) -> tuple:
        return self.entries.shape

    @property
    def order(self) -> int:
        return self.entries.ndim

    def nonzero(self):
        """Yield ``(index, value)`` for nonzero entries in lexicographic order."""
        a = self.entries
        if a.dtype == object:
            for idx in np.ndindex(a.shape):
                v = a[idx]
                if v != 0:
                    yield idx, v
        else:
            for idx in zip(*np.nonzero(a)):
                yield tuple(int(i) for i in idx), a[idx].item()

    def nnz(self) -> int:
        if self.entries.dtype == object:
            return sum(1 for x in self.entries.flat if x != 0)
        return int(np.count_nonzero(self.entries))

    def as_object(self) -> np.ndarray:
        return _object(self.entries)

    def as_float(self) -> np.ndarray:
        if self.entries.dtype == object:
            if self.domain not in (QQ, RR):
                raise ScalarDomainMismatch(f"cannot convert {self.domain} tensor to floats")
            return np.array([float(x) for x in self.entries.flat]).reshape(self.dims)
        return self.entries.astype(np.float64)

    def slices(self, axis: int = 0) -> list:
        return [np.take(self.entries, i, axis=axis) for i in range(self.dims[axis])]

    def with_factors(self, factors) -> "Tensor":
        return Tensor(self.entries, self.domain, factors)

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return tensors_equal(self, other)

    __hash__ = None


@dataclass(frozen=True)
class LinearMap:
    """Matrix of a linear map (rows = target dim, cols = source dim)."""

    entries: np.ndarray
    domain: str = QQ
    label: str = ""

    def __post_init__(self):
        arr = np.asarray(self.entries)
        if arr.ndim != 2:
            raise DimensionMismatch("a linear map needs a 2-d matrix")
        object.__setattr__(self, "entries", arr)

    @classmethod
    def from_array(cls, arr, domain: str | None = None, label: str = "") -> "LinearMap":
        a = np.asarray(arr)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        dom = domain or _infer_domain(a)
        return cls(exact_array(a, dom), dom, label)

    @classmethod
    def identity(cls, n: int) -> "LinearMap":
        return cls(np.eye(n, dtype=np.int64), QQ, "identity")

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def compose(self, other: "LinearMap") -> "LinearMap":
        """``self ∘ other``."""
        if self.cols != other.rows:
            raise DimensionMismatch("cannot compose maps with mismatched dims")
        return LinearMap.from_array(matmul(self.entries, other.entries), join_domains(self.domain, other.domain))


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact matrix product that promotes to Python ints before overflow."""
    if a.dtype.kind == "f" or b.dtype.kind == "f":
        return np.asarray(a, dtype=np.float64) @ np.asarray(b, dtype=np.float64)
    if _safe_int_product(a, b, a.shape[-1]):
        return a @ b
    return np.dot(_object(a), _object(b))


def _map_matrix(m):
    if m is None:
        return None
    if isinstance(m, LinearMap):
        return m.entries, m.domain
    arr = np.asarray(m)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return exact_array(arr, _infer_domain(arr)) if arr.dtype.kind != "f" else arr, _infer_domain(arr)


def _tensordot_axis(mat: np.ndarray, arr: np.ndarray, axis: int) -> np.ndarray:
    """Apply ``mat`` to ``axis`` of ``arr`` keeping axis positions."""
    moved = np.moveaxis(arr, axis, 0)
    flat = moved.reshape(moved.shape[0], -1)
    out = matmul(mat, flat).reshape((mat.shape[0],) + moved.shape[1:])
    return np.moveaxis(out, 0, axis)


def _normalize(arr: np.ndarray, domain: str) -> np.ndarray:
    if arr.dtype == object and domain == QQ:
        return exact_array(arr, QQ)
    return arr


def apply_maps(T: Tensor, maps) -> Tensor:
    """Act on each axis of ``T`` by the corresponding map (``None`` = identity)."""
    if len(maps) != T.order:
        raise DimensionMismatch(f"expected {T.order} maps, got {len(maps)}")
    arr = T.entries
    dom = T.domain
    factors = list(T.factors)
    for axis, m in enumerate(maps):
        mm = _map_matrix(m)
        if mm is None:
            continue
        mat, mdom = mm
        if mat.shape[1] != arr.shape[axis]:
            raise DimensionMismatch(f"map on axis {axis} has {mat.shape[1]} columns, axis has {arr.shape[axis]}")
        dom = join_domains(dom, mdom)
        arr = _tensordot_axis(mat, arr, axis)
        factors[axis] = (mat.shape[0],)
    return Tensor(_normalize(arr, dom), dom, tuple(factors))


def kronecker(T: Tensor, S: Tensor) -> Tensor:
    """Kronecker product, pairing axis ``i`` of ``T`` with axis ``i`` of ``S``."""
    if T.order != S.order:
        raise DimensionMismatch("kronecker needs tensors of equal order")
    dom = join_domains(T.domain, S.domain)
    a, b = T.entries, S.entries
    if a.dtype == np.int64 and b.dtype == np.int64 and not _safe_int_product(a, b):
        a, b = _object(a), _object(b)
    elif (a.dtype == object) != (b.dtype == object) and dom != RR:
        a, b = _object(a), _object(b)
    d = T.order
    outer = np.multiply.outer(a, b)
    perm = [x for i in range(d) for x in (i, d + i)]
    arr = outer.transpose(perm).reshape([T.dims[i] * S.dims[i] for i in range(d)])
    factors = tuple(T.factors[i] + S.factors[i] for i in range(d))
    return Tensor(_normalize(arr, dom), dom, factors)


def kron_power(T: Tensor, n: int) -> Tensor:
    if n < 1:
        raise DimensionMismatch("Kronecker power needs n >= 1")
    out = T
    for _ in range(n - 1):
        out = kronecker(out, T)
    return out


def permute_kron_factors(T: Tensor, sigma) -> Tensor:
    """Permute the Kronecker slots of every axis simultaneously.

    Slot ``k`` of the result is slot ``sigma[k]`` of ``T``.
    """
    sigma = tuple(sigma)
    n = len(sigma)
    if sorted(sigma) != list(range(n)):
        raise NotAKroneckerPower("sigma is not a permutation")
    if any(len(f) != n for f in T.factors):
        raise NotAKroneckerPower(f"tensor axes do not all have {n} recorded factors")
    arr = T.entries.reshape([x for f in T.factors for x in f])
    perm = []
    for axis in range(T.order):
        perm.extend(axis * n + sigma[k] for k in range(n))
    out = arr.transpose(perm).reshape(T.dims)
    factors = tuple(tuple(f[sigma[k]] for k in range(n)) for f in T.factors)
    return Tensor(np.ascontiguousarray(out), T.domain, factors)


def contract_axis(T: Tensor, axis: int, functional) -> Tensor:
    """Sum over ``axis`` weighted by ``functional``; order drops by one."""
    vec = np.asarray(functional)
    if vec.ndim != 1 or vec.shape[0] != T.dims[axis]:
        raise DimensionMismatch("functional length must equal the contracted axis dim")
    if T.order == 1:
        raise DimensionMismatch("cannot contract the only axis of an order-1 tensor")
    mat, mdom = _map_matrix(vec)
    dom = join_domains(T.domain, mdom)
    out = _tensordot_axis(mat, T.entries, axis)
    out = np.take(out, 0, axis=axis)
    factors = T.factors[:axis] + T.factors[axis + 1:]
    return Tensor(_normalize(np.ascontiguousarray(out), dom), dom, factors)


def tensors_equal(T: Tensor, S: Tensor) -> bool:
    if T.dims != S.dims:
        return False
    join_domains(T.domain, S.domain)
    a, b = T.entries, S.entries
    if a.dtype != object and b.dtype != object:
        return bool(np.array_equal(a, b))
    return all(x == y for x, y in zip(a.flat, b.flat))


def regroup(T: Tensor, groups) -> Tensor:
    """Reshape into a tensor whose axes are the given groups of axes of ``T``.

    ``groups`` is a list of tuples of axis indices that together cover every
    axis exactly once; grouped axes are flattened in the listed order.
    """
    flat = [a for g in groups for a in g]
    if sorted(flat) != list(range(T.order)):
        raise DimensionMismatch("groups must partition the axes")
    arr = T.entries.transpose(flat)
    dims = [prod(T.dims[a] for a in g) for g in groups]
    factors = tuple(tuple(x for a in g for x in T.factors[a]) for g in groups)
    return Tensor(np.ascontiguousarray(arr.reshape(dims)), T.domain, factors)


def rank_one(*vectors, domain: str | None = None) -> Tensor:
    arr = np.asarray(vectors[0])
    for v in vectors[1:]:
        arr = np.multiply.outer(arr, np.asarray(v))
    return Tensor.from_array(arr, domain)


def frobenius_norm(T: Tensor) -> float:
    return float(np.linalg.norm(T.as_float().reshape(-1)))


def to_fraction_array(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    out.reshape(-1)[:] = [Fraction(x) if not isinstance(x, Fraction) else x for x in _object(a).reshape(-1)]
    return out
