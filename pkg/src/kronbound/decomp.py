"""Explicit decompositions: exact verification, border-rank curves and
numerical search.

Three kinds of decomposition are handled:

* Waring (symmetric) decompositions T = Σ λ_i w_i^⊗3, verified exactly;
* triple decompositions T ≈ Σ a_i⊗b_i⊗c_i, produced by the Gauss-Newton
  search and checked in floating point;
* degree-one curves Σ (a_i + t b_i)^⊗3 = t^2 T + O(t^3), expanded in t or
  turned into polynomial equations in symbolic unknowns.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import lcm, log

import numpy as np

from .decomp_data import CURVE17_PATTERN_TEXT, CURVE17_Z, WARING18_TEXT
from .errors import DimensionMismatch, DomainMismatch, NoMagnitudeGap, ScalarDomainMismatch
from .linalg import rank_sparse_rows
from .scalar import Q6, QQ, RR, Cyclo6, coerce_to_domain, format_scalar, join_domains, parse_scalar, to_rational
from .tensor import Tensor

SYM = "sym"  # domain tag for pencils whose entries are polynomials in unknowns


# ---------------------------------------------------------------------------
# sparse multivariate polynomials over Q


class ZPoly:
    """Polynomial in unknowns z1, z2, ... with rational coefficients.

    Monomials are tuples of ``(variable, exponent)`` pairs sorted by
    variable, so ``z10^2*z11`` is ``((10, 2), (11, 1))``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {m: Fraction(c) for m, c in (terms or {}).items() if c != 0}

    @classmethod
    def const(cls, c) -> "ZPoly":
        return cls({(): c})

    @classmethod
    def var(cls, v: int, coeff=1) -> "ZPoly":
        return cls({((v, 1),): coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        other = _zpoly(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return ZPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return ZPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_zpoly(other))

    def __rsub__(self, other):
        return _zpoly(other) - self

    def __mul__(self, other):
        other = _zpoly(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return ZPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ZPoly.const(other)
        return isinstance(other, ZPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def degree(self) -> int:
        return max((_mono_deg(m) for m in self.terms), default=-1)

    def sorted_terms(self) -> list:
        """Monomials by degree (descending), then lexicographically with z1 > z2 > ..."""
        return sorted(self.terms.items(), key=lambda mc: _mono_key(mc[0]))

    def canonical(self):
        """(self / c, c) where c is the coefficient of the leading monomial."""
        if not self.terms:
            return self, Fraction(1)
        lead = self.sorted_terms()[0][1]
        return ZPoly({m: c / lead for m, c in self.terms.items()}), lead

    def evaluate(self, values):
        """Evaluate with ``values[v]`` for variable ``v`` (a mapping or a
        sequence indexed from 1 via ``values[v - 1]``)."""
        get = values.__getitem__ if isinstance(values, dict) else (lambda v: values[v - 1])
        total = 0
        for m, c in self.terms.items():
            term = c
            for v, e in m:
                term = term * get(v) ** e
            total = total + term
        return total

    def __repr__(self):
        return f"ZPoly({format_zpoly(self)})"


def _zpoly(x) -> ZPoly:
    return x if isinstance(x, ZPoly) else ZPoly.const(to_rational(x))


def _mono_mul(m1, m2):
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _mono_deg(m) -> int:
    return sum(e for _, e in m)


def _mono_key(m):
    return (-_mono_deg(m), tuple((v, -e) for v, e in m))


def format_zpoly(p: ZPoly, var: str = "z") -> str:
    if p.is_zero():
        return "0"
    parts = []
    for m, c in p.sorted_terms():
        mono = "*".join(f"{var}{v}" + (f"^{e}" if e > 1 else "") for v, e in m)
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


_PATTERN_TOKEN = re.compile(r"^([+-]?)(?:([0-9/]+)\*?)?(?:z(\d+))?$")


def parse_pattern_entry(token: str) -> ZPoly:
    """Parse ``0``, ``-1``, ``2/3``, ``z7``, ``-z7`` or ``2*z7``."""
    m = _PATTERN_TOKEN.match(token.strip())
    if not m or (m.group(2) is None and m.group(3) is None):
        raise ValueError(f"cannot parse pattern entry {token!r}")
    sign, coeff, v = m.groups()
    c = Fraction(coeff) if coeff else Fraction(1)
    if sign == "-":
        c = -c
    return ZPoly.var(int(v), c) if v else ZPoly.const(c)


# ---------------------------------------------------------------------------
# decomposition types


def _vec(x, domain: str) -> np.ndarray:
    a = np.asarray(x)
    if domain == RR:
        return a.astype(np.float64).reshape(-1)
    out = np.empty(a.size, dtype=object)
    out[:] = [x if domain == SYM else coerce_to_domain(x, domain) for x in a.reshape(-1)]
    return out


@dataclass(frozen=True)
class WaringDecomposition:
    """Σ λ_i w_i^⊗3.  Matrices are flattened row-major; ``weights`` default to 1."""

    terms: tuple
    domain: str = QQ
    weights: tuple | None = None
    symmetric: bool = True

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(_vec(w, self.domain) for w in self.terms))
        if self.weights is not None:
            if len(self.weights) != len(self.terms):
                raise DimensionMismatch("one weight per term")
            object.__setattr__(self, "weights", tuple(coerce_to_domain(x, self.domain) for x in self.weights))
        if len({len(w) for w in self.terms}) > 1:
            raise DimensionMismatch("all terms must have the same length")

    @property
    def rank(self) -> int:
        return len(self.terms)

    @property
    def dim(self) -> int:
        return len(self.terms[0]) if self.terms else 0

    def drop(self, index: int) -> "WaringDecomposition":
        keep = [i for i in range(self.rank) if i != index]
        w = None if self.weights is None else tuple(self.weights[i] for i in keep)
        return WaringDecomposition(tuple(self.terms[i] for i in keep), self.domain, w)


@dataclass(frozen=True)
class Decomposition:
    """Σ a_i ⊗ b_i ⊗ c_i with each term a triple of vectors."""

    terms: tuple
    domain: str = RR

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(tuple(_vec(v, self.domain) for v in t) for t in self.terms))

    @property
    def rank(self) -> int:
        return len(self.terms)

    def factor_matrices(self):
        """(A, B, C) with the i-th column of each holding term i."""
        return tuple(np.stack([t[k] for t in self.terms], axis=1) for k in range(3))

    def reconstruct(self, dims=None) -> np.ndarray:
        if not self.terms:
            return np.zeros(tuple(dims), dtype=np.float64 if self.domain == RR else object)
        return sum(_outer3(*t) for t in self.terms)


@dataclass(frozen=True)
class CurveDecomposition:
    """Pencils w_i(t) = a_i + t b_i; Σ w_i(t)^⊗3 should equal t^order · T + O(t^(order+1))."""

    terms: tuple
    domain: str = RR
    target_order: int = 2

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((_vec(a, self.domain), _vec(b, self.domain)) for a, b in self.terms))

    @property
    def rank(self) -> int:
        return len(self.terms)

    def substitute(self, values, domain: str = RR) -> "CurveDecomposition":
        """Replace the unknowns of a symbolic pattern by numbers."""
        if self.domain != SYM:
            raise DomainMismatch("substitute needs a symbolic pattern")
        conv = float if domain == RR else to_rational
        terms = [tuple([conv(e.evaluate(values)) for e in v] for v in pair) for pair in self.terms]
        return CurveDecomposition(tuple(terms), domain, self.target_order)

    def evaluate(self, t) -> np.ndarray:
        """Dense Σ (a_i + t b_i)^⊗3 at a concrete t."""
        return sum(_outer3(w, w, w) for w in (a + t * b for a, b in self.terms))

    def unknowns(self) -> list:
        if self.domain != SYM:
            return []
        return sorted({v for a, b in self.terms for e in itertools.chain(a, b) for v in e.variables()})


def _outer3(x, y, z) -> np.ndarray:
    if all(v.dtype != object for v in (x, y, z)):
        return np.einsum("i,j,k->ijk", x, y, z)
    return np.multiply.outer(np.multiply.outer(x, y), z)


# ---------------------------------------------------------------------------
# text format


def write_decomposition(D) -> str:
    if isinstance(D, WaringDecomposition):
        lines = [f"decomposition {D.domain} {D.rank} waring"]
        for i, w in enumerate(D.terms):
            line = "term " + " ".join(format_scalar(x) for x in w)
            if D.weights is not None:
                line += " @ " + format_scalar(D.weights[i])
            lines.append(line)
    elif isinstance(D, CurveDecomposition):
        fmt = format_zpoly if D.domain == SYM else format_scalar
        lines = [f"decomposition {D.domain} {D.rank} curve"]
        for a, b in D.terms:
            lines.append("term " + " ".join(fmt(x).replace(" ", "") for x in a) + " ; " + " ".join(fmt(x).replace(" ", "") for x in b))
    elif isinstance(D, Decomposition):
        lines = [f"decomposition {D.domain} {D.rank} triple"]
        for t in D.terms:
            lines.append("term " + " | ".join(" ".join(format_scalar(x) for x in v) for v in t))
    else:
        raise TypeError(f"cannot write {type(D).__name__}")
    return "\n".join(lines) + "\n"


def read_decomposition(text: str, symbols: dict | None = None):
    """Parse the ``decomposition <domain> <rank> <mode>`` format.

    ``symbols`` maps bare names (such as ``a``) to values; a leading ``-``
    on a symbol negates it.
    """
    symbols = symbols or {}
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise ValueError("empty decomposition file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "decomposition":
        raise ValueError(f"bad header {lines[0]!r}")
    domain, rank, mode = head[1], int(head[2]), head[3]

    def entry(tok: str):
        if domain == SYM:
            return parse_pattern_entry(tok)
        name = tok.lstrip("+-")
        if name in symbols:
            v = symbols[name]
            return -v if tok.startswith("-") else v
        return parse_scalar(tok, domain)

    def vector(chunk: str):
        return [entry(t) for t in chunk.split()]

    terms, weights = [], []
    for ln in lines[1:]:
        if not ln.startswith("term"):
            raise ValueError(f"expected a term line, got {ln!r}")
        body = ln[4:]
        if mode == "waring":
            if "@" in body:
                body, wt = body.split("@")
                weights.append(entry(wt.strip()))
            terms.append(vector(body))
        elif mode == "triple":
            terms.append(tuple(vector(c) for c in body.split("|")))
        elif mode == "curve":
            a, b = body.split(";")
            terms.append((vector(a), vector(b)))
        else:
            raise ValueError(f"unknown mode {mode!r}")
    if len(terms) != rank:
        raise DimensionMismatch(f"header claims {rank} terms, found {len(terms)}")
    if mode == "waring":
        if weights and len(weights) != len(terms):
            raise ValueError("either every waring term has a weight or none does")
        return WaringDecomposition(tuple(terms), domain, tuple(weights) if weights else None)
    if mode == "triple":
        return Decomposition(tuple(terms), domain)
    return CurveDecomposition(tuple(terms), domain)


# ---------------------------------------------------------------------------
# exact Waring verification


def _parts(x):
    """(a, b, C0, C1) for x = a + b*g with g^2 = C1*g + C0; rationals have b = 0."""
    if hasattr(x, "b"):
        return Fraction(x.a), Fraction(x.b), type(x).C0, type(x).C1
    return to_rational(x), Fraction(0), 0, 0


def _integer_cube_sum(D: WaringDecomposition):
    """Σ λ_i w_i^⊗3 as (P, Q, L): the sum equals (P + Q·g) / L entrywise,
    with P and Q integer arrays.  Avoids per-entry field arithmetic."""
    n = D.dim
    C0 = C1 = 0
    terms = []
    for i, w in enumerate(D.terms):
        parts = [_parts(x) for x in w]
        for _, b, c0, c1 in parts:
            if b:
                C0, C1 = c0, c1
        den = reduce(lcm, (v.denominator for a, b, _, _ in parts for v in (a, b)), 1)
        A = np.array([int(a * den) for a, _, _, _ in parts], dtype=object)
        B = np.array([int(b * den) for _, b, _, _ in parts], dtype=object)
        wt = Fraction(1) if D.weights is None else D.weights[i]
        wa, wb, c0, c1 = _parts(wt)
        if wb:
            C0, C1 = c0, c1
        terms.append((A, B, wa / den ** 3, wb / den ** 3))

    L = reduce(lcm, (s.denominator for _, _, sa, sb in terms for s in (sa, sb)), 1)
    P = np.zeros((n, n, n), dtype=object)
    Q = np.zeros((n, n, n), dtype=object)
    for A, B, sa, sb in terms:
        # (A + Bg)⊗(A + Bg), reduced with g^2 = C1*g + C0
        BB = np.multiply.outer(B, B)
        aa = np.multiply.outer(A, A) + C0 * BB
        bb = np.multiply.outer(A, B) + np.multiply.outer(B, A) + C1 * BB
        # times (A + Bg) in the third slot
        ca = np.multiply.outer(aa, A) + C0 * np.multiply.outer(bb, B)
        cb = np.multiply.outer(aa, B) + np.multiply.outer(bb, A) + C1 * np.multiply.outer(bb, B)
        # times the weight sa + sb*g, scaled by L
        ka, kb = int(sa * L), int(sb * L)
        P = P + ka * ca + C0 * kb * cb
        Q = Q + ka * cb + kb * ca + C1 * kb * cb
    return P, Q, L, (C0, C1)


def waring_tensor(D: WaringDecomposition) -> np.ndarray:
    P, Q, L, _ = _integer_cube_sum(D)
    out = np.empty(P.shape, dtype=object)
    flat_p, flat_q = P.reshape(-1), Q.reshape(-1)
    out.reshape(-1)[:] = [
        coerce_to_domain(Fraction(int(a), L), D.domain) + (Fraction(int(b), L) * _generator(D.domain) if b else 0)
        for a, b in zip(flat_p, flat_q)
    ]
    return out


def _generator(domain: str):
    from .scalar import GaussianRational, QI

    if domain == Q6:
        return Cyclo6(0, 1)
    if domain == QI:
        return GaussianRational(0, 1)
    raise DomainMismatch(f"domain {domain} has no generator")


def _check_exact(T: Tensor, domain: str):
    if domain == RR or T.domain == RR:
        raise DomainMismatch("exact verification needs exact scalars on both sides")
    try:
        join_domains(T.domain, domain)
    except ScalarDomainMismatch as exc:
        raise DomainMismatch(str(exc)) from exc


def verify_waring(T: Tensor, D: WaringDecomposition) -> bool:
    """Exact test of Σ λ_i w_i^⊗3 == T."""
    _check_exact(T, D.domain)
    if T.order != 3 or any(d != D.dim for d in T.dims):
        raise DimensionMismatch(f"tensor dims {T.dims} do not match term length {D.dim}")
    P, Q, L, _ = _integer_cube_sum(D)
    for idx in np.ndindex(T.dims):
        a, b, _, _ = _parts(T.entries[idx])
        if P[idx] != a * L or Q[idx] != b * L:
            return False
    return True


def verify_decomposition(T: Tensor, D: Decomposition, tol: float | None = None):
    """Exact equality for exact data; for floats returns (ok, l2 residual)."""
    if D.domain == RR or T.domain == RR:
        res = float(np.linalg.norm(D.reconstruct(T.dims).astype(float) - T.as_float()))
        return res <= (1e-10 if tol is None else tol), res
    _check_exact(T, D.domain)
    diff = D.reconstruct(T.dims) - T.as_object()
    return all(x == 0 for x in diff.reshape(-1))


def published_waring18(a_value=None) -> WaringDecomposition:
    """The 18-term Waring decomposition of det3 over Q(theta).

    The symbol ``a`` defaults to the value found by
    :func:`resolve_waring_symbol`.
    """
    if a_value is None:
        a_value = resolve_waring_symbol().value
        if a_value is None:
            raise DomainMismatch("no value of the symbol a makes the decomposition exact")
    return read_decomposition(WARING18_TEXT, {"a": coerce_to_domain(a_value, Q6)})


@dataclass(frozen=True)
class SymbolResolution:
    symbol: str
    value: object | None  # the unique verified value, if any
    candidates: tuple
    verified: tuple
    residual_degree: int

    @property
    def unique(self) -> bool:
        return len(self.verified) == 1


def _interp_coeffs(xs, ys) -> list:
    """Coefficients (lowest first) of the interpolating polynomial; the
    values may be any ring elements supporting Fraction scaling."""
    n = len(xs)
    coeffs = [0] * n
    for i, xi in enumerate(xs):
        # basis polynomial prod_{j != i} (x - xj) / (xi - xj)
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, xj in enumerate(xs):
            if j == i:
                continue
            basis = [(basis[k - 1] if k > 0 else 0) - xj * (basis[k] if k < len(basis) else 0) for k in range(len(basis) + 1)]
            denom *= xi - xj
        for k, b in enumerate(basis):
            if b:
                coeffs[k] = coeffs[k] + ys[i] * (b / denom)
    return coeffs


def resolve_waring_symbol(T: Tensor | None = None) -> SymbolResolution:
    """Solve for the undetermined symbol of the published decomposition.

    The residual Σ w_i(a)^⊗3 − T is cubic in ``a`` entrywise; it is
    interpolated from a = 0..3, each entry of degree one proposes a root,
    and every proposal is then checked by exact evaluation.
    """
    from .catalog import det3

    T = det3() if T is None else T
    samples = [0, 1, 2, 3]
    residuals = [waring_tensor(read_decomposition(WARING18_TEXT, {"a": Cyclo6(a, 0)})) - T.as_object() for a in samples]
    candidates = []
    max_deg = 0
    for idx in np.ndindex(T.dims):
        coeffs = _interp_coeffs(samples, [r[idx] for r in residuals])
        nz = [k for k, c in enumerate(coeffs) if c != 0]
        if not nz:
            continue
        max_deg = max(max_deg, nz[-1])
        if nz[-1] == 1:
            root = -coeffs[0] / coeffs[1]
            root = root if isinstance(root, Cyclo6) else Cyclo6(root, 0)
            if root not in candidates:
                candidates.append(root)
    verified = tuple(c for c in candidates if verify_waring(T, read_decomposition(WARING18_TEXT, {"a": c})))
    value = verified[0] if len(verified) == 1 else None
    return SymbolResolution("a", value, tuple(candidates), verified, max_deg)


def monomial_waring() -> WaringDecomposition:
    """x⊗y⊗z symmetrized (entries 1 on the permutations of (0,1,2)) as
    ¼[(x+y+z)^3 − (x+y−z)^3 − (x−y+z)^3 − (−x+y+z)^3]."""
    signs = [(1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1)]
    weights = [Fraction(1, 4), Fraction(-1, 4), Fraction(-1, 4), Fraction(-1, 4)]
    return WaringDecomposition(tuple(signs), QQ, tuple(weights))


# ---------------------------------------------------------------------------
# curves


def _curve_coefficients(a, b):
    """Coefficients of t^0..t^3 in (a + t b)^⊗3."""
    aaa = _outer3(a, a, a)
    c1 = _outer3(b, a, a) + _outer3(a, b, a) + _outer3(a, a, b)
    c2 = _outer3(a, b, b) + _outer3(b, a, b) + _outer3(b, b, a)
    return [aaa, c1, c2, _outer3(b, b, b)]


def expand_curve(D: CurveDecomposition, order: int) -> list:
    """Tensors c_0..c_order with Σ w_i(t)^⊗3 = Σ_k t^k c_k."""
    if D.domain == SYM:
        raise DomainMismatch("substitute values into the pattern first")
    if not D.terms:
        raise DimensionMismatch("an empty curve has no dimension")
    n = len(D.terms[0][0])
    zero = np.zeros((n, n, n)) if D.domain == RR else np.zeros((n, n, n), dtype=object)
    acc = [zero.copy() for _ in range(4)]
    for a, b in D.terms:
        for k, c in enumerate(_curve_coefficients(a, b)):
            acc[k] = acc[k] + c
    out = []
    for k in range(order + 1):
        arr = acc[k] if k < 4 else zero
        out.append(Tensor(arr.astype(np.float64), RR) if D.domain == RR else Tensor.from_array(arr, D.domain))
    return out


def curve_residuals(D: CurveDecomposition, T: Tensor) -> dict:
    """l2 norms of the coefficients below the target order and of
    c_order − T."""
    cs = expand_curve(D, D.target_order)
    target = T.as_float()
    out = {f"c{k}": float(np.linalg.norm(cs[k].as_float())) for k in range(D.target_order)}
    out[f"c{D.target_order}-T"] = float(np.linalg.norm(cs[D.target_order].as_float() - target))
    return out


def curve17_pattern() -> CurveDecomposition:
    return read_decomposition(CURVE17_PATTERN_TEXT)


def curve17(z=None) -> CurveDecomposition:
    """Numerical pencils of the border-rank 17 curve for det3."""
    return curve17_pattern().substitute(list(CURVE17_Z if z is None else z))


@dataclass(frozen=True)
class CurveEquation:
    poly: ZPoly  # canonical: leading monomial has coefficient +1
    order: int  # power of t this equation comes from
    index: tuple  # tensor entry
    scale: Fraction  # raw coefficient = scale * poly

    def text(self) -> str:
        return f"{format_zpoly(self.poly)} = 0"


@dataclass(frozen=True)
class EquationSystem:
    unknowns: tuple
    equations: tuple
    raw_count: int
    linear_rank: int
    duplicates: dict = field(default_factory=dict, repr=False)  # canonical poly -> all sources

    def __len__(self):
        return len(self.equations)

    @property
    def distinct_count(self) -> int:
        return len(self.equations)

    def evaluate(self, values) -> np.ndarray:
        return np.array([float(e.poly.evaluate(values)) for e in self.equations])

    def monomials(self, i: int) -> set:
        return set(self.equations[i].poly.terms)


def _grevlex_key(index, n: int):
    e = [0] * n
    for x in index:
        e[x] += 1
    return tuple(e[::-1])


def _coefficient_polys(D: CurveDecomposition, n: int):
    coeff = [dict() for _ in range(3)]

    def add(k, idx, p):
        d = coeff[k]
        d[idx] = d[idx] + p if idx in d else p

    for a, b in D.terms:
        nza = [i for i in range(n) if not a[i].is_zero()]
        nzb = [i for i in range(n) if not b[i].is_zero()]
        for i, j, k in itertools.product(nza, repeat=3):
            add(0, (i, j, k), a[i] * a[j] * a[k])
        for pos in range(3):
            for idx in itertools.product(*[(nzb if s == pos else nza) for s in range(3)]):
                p = ZPoly.const(1)
                for s in range(3):
                    p = p * (b if s == pos else a)[idx[s]]
                add(1, idx, p)
            for idx in itertools.product(*[(nza if s == pos else nzb) for s in range(3)]):
                p = ZPoly.const(1)
                for s in range(3):
                    p = p * (a if s == pos else b)[idx[s]]
                add(2, idx, p)
    return coeff


def generate_curve_equations(D: CurveDecomposition, T: Tensor) -> EquationSystem:
    """Equations in the unknowns making Σ w_i(t)^⊗3 = t^2 T + O(t^3).

    Coefficients of t^0 and t^1 must vanish and the t^2 coefficient must
    equal T.  Equations are ordered by tensor entry (graded reverse
    lexicographic, with the t^1 and t^2 equations before the t^0 ones),
    scaled so their leading monomial has coefficient +1, and deduplicated.
    """
    if D.domain != SYM:
        raise DomainMismatch("generate_curve_equations needs a symbolic pattern")
    if T.domain not in (QQ,):
        raise DomainMismatch("the target tensor must be rational")
    n = T.dims[0]
    if T.order != 3 or len(set(T.dims)) != 1 or any(len(a) != n for a, _ in D.terms):
        raise DimensionMismatch("pencil length must match a cubic tensor")
    target = D.target_order
    if target > 2:
        raise DimensionMismatch("affine pencils only reach t^2 in the equations")
    coeff = _coefficient_polys(D, n)
    for idx, v in T.nonzero():
        coeff[target][idx] = coeff[target].get(idx, ZPoly()) - to_rational(v)
    raw = []
    for k in range(target + 1):
        for idx, p in coeff[k].items():
            if not p.is_zero():
                raw.append((k, idx, p))
    raw.sort(key=lambda r: (r[0] == 0, _grevlex_key(r[1], n), r[0], r[1]))
    seen: dict = {}
    eqs = []
    for k, idx, p in raw:
        can, lead = p.canonical()
        key = frozenset(can.terms.items())
        if key in seen:
            seen[key].append((k, idx))
            continue
        seen[key] = [(k, idx)]
        eqs.append(CurveEquation(can, k, idx, lead))
    unknowns = tuple(f"z{v}" for v in D.unknowns())
    return EquationSystem(unknowns, tuple(eqs), len(raw), _linear_rank(eqs), seen)


def _linear_rank(eqs) -> int:
    """Rank of the equations as vectors in the monomial basis."""
    cols: dict = {}
    rows = []
    for e in eqs:
        den = reduce(lcm, (c.denominator for c in e.poly.terms.values()), 1)
        rows.append({cols.setdefault(m, len(cols)): int(c * den) for m, c in e.poly.terms.items()})
    return rank_sparse_rows(rows)


# ---------------------------------------------------------------------------
# numerical search


@dataclass(frozen=True)
class SearchConfig:
    max_iter: int = 400
    damping: float = 1e-2
    restarts: int = 10
    seed: int = 0
    tol: float = 1e-12
    damping_up: float = 4.0
    damping_down: float = 0.3
    workers: int = 1
    stall_window: int = 200  # give up when the last window improved by less than stall_tol (relative)
    stall_tol: float = 1e-3
    target: float | None = None  # stop restarting once a run gets below this


@dataclass(frozen=True)
class SearchResult:
    decomposition: Decomposition
    residual: float
    restart: int
    iterations: int
    history: tuple = field(repr=False, default=())
    residuals: tuple = field(repr=False, default=())  # best residual of every restart


def levenberg_marquardt(fun, jac, x0, max_iter=200, damping=1e-2, tol=1e-12, up=4.0, down=0.3, mask=None, normal=None,
                        stall_window=0, stall_tol=0.0):
    """Damped Gauss-Newton on ‖fun(x)‖.

    A step is accepted only if it lowers the residual, so the recorded
    history is non-increasing.  ``mask`` (0/1 floats) freezes parameters.
    ``normal(x, r)`` may supply (JᵀJ, Jᵀr) directly instead of ``jac``.
    Returns (x, residual, history, iterations).
    """
    x = np.array(x0, dtype=np.float64)
    r = fun(x)
    res = float(np.linalg.norm(r))
    history = [res]
    lam = damping
    it = 0
    for it in range(1, max_iter + 1):
        if res <= tol:
            break
        if normal is not None:
            H, g = normal(x, r)
        else:
            J = jac(x)
            H, g = J.T @ J, J.T @ r
        if mask is not None:
            H = H * np.outer(mask, mask)
            g = g * mask
        accepted = False
        while lam < 1e16:
            try:
                step = np.linalg.solve(H + lam * np.eye(len(x)), -g)
            except np.linalg.LinAlgError:
                lam *= up
                continue
            xn = x + step
            rn = fun(xn)
            resn = float(np.linalg.norm(rn))
            if resn < res:
                x, r, res = xn, rn, resn
                lam = max(lam * down, 1e-15)
                accepted = True
                break
            lam *= up
        if not accepted:
            break
        history.append(res)
        if stall_window and len(history) > stall_window and history[-stall_window - 1] - res < stall_tol * res:
            break
    return x, res, history, it


def _cp_problem(T: np.ndarray, r: int):
    dims = T.shape
    sizes = [d * r for d in dims]
    target = T.reshape(-1)
    eyes = [np.eye(d) for d in dims]

    def split(x):
        out, o = [], 0
        for d, s in zip(dims, sizes):
            out.append(x[o:o + s].reshape(d, r))
            o += s
        return out

    def fun(x):
        A, B, C = split(x)
        return np.einsum("il,jl,kl->ijk", A, B, C).reshape(-1) - target

    def jac(x):
        A, B, C = split(x)
        n = target.size
        JA = np.einsum("im,jl,kl->ijkml", eyes[0], B, C).reshape(n, -1)
        JB = np.einsum("il,jm,kl->ijkml", A, eyes[1], C).reshape(n, -1)
        JC = np.einsum("il,jl,km->ijkml", A, B, eyes[2]).reshape(n, -1)
        return np.hstack([JA, JB, JC])

    def normal(x, res):
        # JᵀJ and Jᵀr from Gram matrices, without forming J
        A, B, C = split(x)
        GA, GB, GC = A.T @ A, B.T @ B, C.T @ C
        R = res.reshape(dims)
        nA, nB, nC = sizes
        H = np.empty((nA + nB + nC,) * 2)
        a, b = slice(0, nA), slice(nA, nA + nB)
        c = slice(nA + nB, None)
        H[a, a] = np.kron(eyes[0], GB * GC)
        H[b, b] = np.kron(eyes[1], GA * GC)
        H[c, c] = np.kron(eyes[2], GA * GB)
        H[a, b] = np.einsum("im,jl,lm->iljm", A, B, GC).reshape(nA, nB)
        H[a, c] = np.einsum("im,kl,lm->ilkm", A, C, GB).reshape(nA, nC)
        H[b, c] = np.einsum("jm,kl,lm->jlkm", B, C, GA).reshape(nB, nC)
        H[b, a] = H[a, b].T
        H[c, a] = H[a, c].T
        H[c, b] = H[b, c].T
        g = np.concatenate([
            np.einsum("ijk,jl,kl->il", R, B, C).reshape(-1),
            np.einsum("ijk,il,kl->jl", R, A, C).reshape(-1),
            np.einsum("ijk,il,jl->kl", R, A, B).reshape(-1),
        ])
        return H, g

    return fun, jac, normal, split, sum(sizes)


def _decomposition_from(split, x, r) -> Decomposition:
    A, B, C = split(x)
    return Decomposition(tuple((A[:, l], B[:, l], C[:, l]) for l in range(r)), RR)


def gauss_newton_search(T: Tensor, r: int, config: SearchConfig | None = None) -> SearchResult:
    """Best rank-r approximation found by damped Gauss-Newton from random
    starts uniform in [-1, 1]; each restart draws from its own child seed."""
    cfg = config or SearchConfig()
    arr = T.as_float()
    if T.order != 3:
        raise DimensionMismatch("search needs an order-3 tensor")
    if r <= 0:
        empty = Decomposition((), RR)
        res = float(np.linalg.norm(arr))
        return SearchResult(empty, res, 0, 0, (res,), (res,))
    fun, jac, normal, split, nparams = _cp_problem(arr, r)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)

    def run(i):
        rng = np.random.default_rng(seeds[i])
        x0 = rng.uniform(-1.0, 1.0, size=nparams)
        return levenberg_marquardt(fun, jac, x0, cfg.max_iter, cfg.damping, cfg.tol, cfg.damping_up, cfg.damping_down,
                                   normal=normal, stall_window=cfg.stall_window, stall_tol=cfg.stall_tol)

    stop = max(cfg.tol, cfg.target or 0.0)
    if cfg.workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(cfg.workers) as pool:
            runs = list(pool.map(run, range(cfg.restarts)))
        # keep the sequential result: discard restarts after the first early stop
        first = next((i for i, rr in enumerate(runs) if rr[1] <= stop), len(runs) - 1)
        runs = runs[: first + 1]
    else:
        runs = []
        for i in range(cfg.restarts):
            runs.append(run(i))
            if runs[-1][1] <= stop:
                break
    best = min(range(len(runs)), key=lambda i: runs[i][1])
    x, res, hist, its = runs[best]
    return SearchResult(_decomposition_from(split, x, r), res, best, its, tuple(hist), tuple(rr[1] for rr in runs))


def sparsify(T: Tensor, result: SearchResult, config: SearchConfig | None = None, factor: float = 10.0, floor: float = 1e-12):
    """Greedily zero the smallest free parameter and re-optimize; a step is
    rolled back when the residual grows beyond ``factor`` times the
    previous one (measured against ``floor`` for exact fits).

    Returns (SearchResult, number of zeroed parameters).
    """
    cfg = config or SearchConfig()
    arr = T.as_float()
    D = result.decomposition
    r = D.rank
    fun, jac, normal, split, nparams = _cp_problem(arr, r)
    x = np.concatenate([M.reshape(-1) for M in D.factor_matrices()])
    mask = np.ones(nparams)
    res = result.residual
    tried = np.zeros(nparams, dtype=bool)
    while True:
        cand = np.where((mask > 0) & ~tried)[0]
        if cand.size == 0:
            break
        p = cand[np.argmin(np.abs(x[cand]))]
        tried[p] = True
        x_try = x.copy()
        x_try[p] = 0.0
        m_try = mask.copy()
        m_try[p] = 0.0
        xn, resn, _, _ = levenberg_marquardt(fun, jac, x_try, cfg.max_iter, cfg.damping, cfg.tol, cfg.damping_up, cfg.damping_down, m_try, normal)
        if resn <= factor * max(res, floor):
            x, mask, res = xn, m_try, resn
    zeroed = int(np.sum(mask == 0))
    return SearchResult(_decomposition_from(split, x, r), res, result.restart, result.iterations), zeroed


def grade_singular_values(values, t0: float) -> tuple:
    """k_j = round(log(σ_max/σ_j) / log(1/t0)); raises NoMagnitudeGap when all agree."""
    if not 0 < t0 < 1:
        raise ValueError("t0 must lie in (0, 1)")
    vals = np.asarray(values, dtype=np.float64)
    if vals.size == 0:
        raise NoMagnitudeGap("no singular values")
    smax = float(vals.max())
    tiny = smax * np.finfo(float).eps
    grades = tuple(int(round(log(smax / max(float(s), tiny)) / log(1.0 / t0))) for s in vals)
    if len(set(grades)) == 1:
        raise NoMagnitudeGap("singular values form a single magnitude cluster")
    return grades


@dataclass(frozen=True)
class CurveFit:
    grading: tuple
    singular_values: tuple
    curve: CurveDecomposition
    fit_residuals: tuple


def _fit_pencil(G0, G1, w0, max_iter=200):
    n = len(w0)
    I = np.eye(n)

    def fun(x):
        a, b = x[:n], x[n:]
        c0, c1 = _curve_coefficients(a, b)[:2]
        return np.concatenate([(c0 - G0).reshape(-1), (c1 - G1).reshape(-1)])

    def sym_d(u, v):
        # derivative of u⊗u⊗v + u⊗v⊗u + v⊗u⊗u with respect to v
        return (np.einsum("i,j,pk->ijkp", u, u, I) + np.einsum("i,pj,k->ijkp", u, I, u) + np.einsum("pi,j,k->ijkp", I, u, u)).reshape(-1, n)

    def jac(x):
        a, b = x[:n], x[n:]
        d0a = sym_d(a, a)
        d1b = sym_d(a, a)
        d1a = (
            np.einsum("i,pj,k->ijkp", b, I, a) + np.einsum("i,j,pk->ijkp", b, a, I)
            + np.einsum("pi,j,k->ijkp", I, b, a) + np.einsum("i,j,pk->ijkp", a, b, I)
            + np.einsum("pi,j,k->ijkp", I, a, b) + np.einsum("i,pj,k->ijkp", a, I, b)
        ).reshape(-1, n)
        top = np.hstack([d0a, np.zeros_like(d0a)])
        bottom = np.hstack([d1a, d1b])
        return np.vstack([top, bottom])

    x0 = np.concatenate([np.asarray(w0, dtype=float), np.zeros(n)])
    x, res, _, _ = levenberg_marquardt(fun, jac, x0, max_iter, 1e-3, 1e-14)
    return x[:n], x[n:], res


def curve_fit_from_svd(sample: WaringDecomposition, t0: float) -> CurveFit:
    """Turn a floating near-decomposition Σ w_i'^⊗3 into affine pencils.

    The map e_i ↦ w_i'^⊗3 is factored as U Σ V*; singular values are
    graded by powers of t0, each σ_j is replaced by σ_j (t/t0)^k_j, and for
    every term the orders t^0 and t^1 of the graded image are fitted by
    (a_i + t b_i)^⊗3.
    """
    if sample.domain != RR:
        raise DomainMismatch("curve fitting works on floating decompositions")
    W = [np.asarray(w, dtype=float) for w in sample.terms]
    M = np.stack([_outer3(w, w, w).reshape(-1) for w in W], axis=1)
    U, S, Vh = np.linalg.svd(M, full_matrices=False)
    grades = grade_singular_values(S, t0)
    n = len(W[0])
    pencils, fits = [], []
    for i, w in enumerate(W):
        G = [np.zeros(n ** 3), np.zeros(n ** 3)]
        for j, k in enumerate(grades):
            if k < 2:
                G[k] += U[:, j] * S[j] * Vh[j, i] / t0 ** k
        a, b, res = _fit_pencil(G[0].reshape(n, n, n), G[1].reshape(n, n, n), w)
        pencils.append((a, b))
        fits.append(res)
    return CurveFit(grades, tuple(float(s) for s in S), CurveDecomposition(tuple(pencils), RR), tuple(fits))
