"""Exact scalar domains.

Rationals are ``fractions.Fraction`` (plain ``int`` is accepted wherever a
rational is).  Two quadratic extensions of Q are provided, Q(theta) with
theta a primitive 6th root of unity and the Gaussian rationals Q(i).  Prime
field residues, polynomials in the formal parameter ``q`` and Lagrange
interpolation complete the set.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Rational as _RationalABC

from .errors import BadParameter, BadPrime, InconsistentSamples, ScalarDomainMismatch

Rational = Fraction

# Two primes just below 2**62 used for modular rank certificates.
PRIMES = (4611686018427387847, 4611686018427387817)

# Domain tags used by tensors and file formats.
QQ = "QQ"
Q6 = "Q6"
QI = "QI"
RR = "RR"
DOMAINS = (QQ, Q6, QI, RR)


def to_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Integral):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, _RationalABC):
        return Fraction(x.numerator, x.denominator)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def normalize_rational(x):
    """Return ``x`` as an int when it is integral, else as a Fraction."""
    x = to_rational(x)
    return x.numerator if x.denominator == 1 else x


class _QuadraticElement:
    """Element a + b*x of Q[x]/(x^2 - C1*x - C0).

    Subclasses fix the minimal polynomial and the printed generator name.
    """

    __slots__ = ("a", "b")
    C0: int = 0
    C1: int = 0
    SYMBOL = "x"
    DOMAIN = ""

    def __init__(self, a=0, b=0):
        self.a = to_rational(a)
        self.b = to_rational(b)

    @classmethod
    def gen(cls):
        return cls(0, 1)

    def _coerce(self, other):
        if isinstance(other, type(self)):
            return other
        if isinstance(other, (Integral, Fraction)):
            return type(self)(other, 0)
        if isinstance(other, _QuadraticElement):
            raise ScalarDomainMismatch(f"cannot combine {type(self).__name__} and {type(other).__name__}")
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return type(self)(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return type(self)(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return type(self)(-self.a, -self.b)

    def __pos__(self):
        return self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        bd = self.b * o.b
        return type(self)(self.a * o.a + bd * self.C0, self.a * o.b + self.b * o.a + bd * self.C1)

    __rmul__ = __mul__

    def conj(self):
        # the other root of the minimal polynomial is C1 - x
        return type(self)(self.a + self.b * self.C1, -self.b)

    def norm(self) -> Fraction:
        n = self * self.conj()
        assert n.b == 0
        return n.a

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.conj()
        return type(self)(c.a / n, c.b / n)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, Integral):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = type(self)(1, 0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (Integral, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, type(self)):
            return self.a == other.a and self.b == other.b
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((type(self).__name__, self.a, self.b))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def is_rational(self) -> bool:
        return self.b == 0

    def __repr__(self):
        return f"{type(self).__name__}({self.a}, {self.b})"

    def __str__(self):
        return format_scalar(self)


class Cyclo6(_QuadraticElement):
    """a + b*theta with theta = exp(2 pi i / 6), so theta^2 = theta - 1."""

    __slots__ = ()
    C0 = -1
    C1 = 1
    SYMBOL = "w"
    DOMAIN = Q6


class GaussianRational(_QuadraticElement):
    """a + b*i with i^2 = -1."""

    __slots__ = ()
    C0 = -1
    C1 = 0
    SYMBOL = "i"
    DOMAIN = QI


THETA = Cyclo6(0, 1)
THETA_BAR = Cyclo6(1, -1)
IMAG = GaussianRational(0, 1)


def cyclo6_mul(x: Cyclo6, y: Cyclo6) -> Cyclo6:
    return Cyclo6(x.a, x.b) * y


@dataclass(frozen=True)
class PrimeFieldElem:
    value: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.p)

    def _other(self, other):
        if isinstance(other, PrimeFieldElem):
            if other.p != self.p:
                raise ScalarDomainMismatch("different moduli")
            return other.value
        if isinstance(other, Integral):
            return int(other)
        if isinstance(other, Fraction):
            return reduce_mod_p(other, self.p).value
        return None

    def __add__(self, other):
        v = self._other(other)
        return NotImplemented if v is None else PrimeFieldElem(self.value + v, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._other(other)
        return NotImplemented if v is None else PrimeFieldElem(self.value - v, self.p)

    def __rsub__(self, other):
        v = self._other(other)
        return NotImplemented if v is None else PrimeFieldElem(v - self.value, self.p)

    def __mul__(self, other):
        v = self._other(other)
        return NotImplemented if v is None else PrimeFieldElem(self.value * v, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return PrimeFieldElem(-self.value, self.p)

    def inverse(self):
        if self.value == 0:
            raise ZeroDivisionError("inverse of zero")
        return PrimeFieldElem(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        v = self._other(other)
        if v is None:
            return NotImplemented
        return self * PrimeFieldElem(v, self.p).inverse()

    def __eq__(self, other):
        v = self._other(other)
        if v is None:
            return NotImplemented
        return self.value == v % self.p

    def __hash__(self):
        return hash((self.value, self.p))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value


def reduce_mod_p(x, p: int) -> PrimeFieldElem:
    x = to_rational(x)
    if x.denominator % p == 0:
        raise BadPrime(f"{p} divides the denominator of {x}")
    return PrimeFieldElem(x.numerator * pow(x.denominator, -1, p), p)


class PolyQ:
    """Polynomial with rational coefficients in the formal parameter q."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [to_rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def const(cls, c):
        return cls([c])

    @classmethod
    def q(cls):
        return cls([0, 1])

    @classmethod
    def affine(cls, slope, offset):
        return cls([offset, slope])

    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else float("-inf")

    def is_zero(self):
        return not self.coeffs

    def is_constant(self):
        return len(self.coeffs) <= 1

    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, k) -> Fraction:
        return self.coeffs[k] if k < len(self.coeffs) else Fraction(0)

    def __call__(self, q):
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * q + c
        return acc

    def eval_int(self, q) -> int:
        v = self(q)
        if v.denominator != 1:
            raise ValueError(f"{self} is not integral at q={q}")
        return v.numerator

    @staticmethod
    def _lift(other):
        if isinstance(other, PolyQ):
            return other
        if isinstance(other, (Integral, Fraction)):
            return PolyQ([other])
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        n = max(len(self.coeffs), len(o.coeffs))
        return PolyQ([self.coeff(k) + o.coeff(k) for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return PolyQ([-c for c in self.coeffs])

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if not self.coeffs or not o.coeffs:
            return PolyQ()
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(o.coeffs):
                out[i + j] += a * b
        return PolyQ(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = PolyQ([1])
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        if len(self.coeffs) <= 1:
            return hash(self.coeff(0))
        return hash(("PolyQ", self.coeffs))

    def __bool__(self):
        return bool(self.coeffs)

    def __repr__(self):
        return f"PolyQ({format_polyq(self)!r})"

    __str__ = lambda self: format_polyq(self)  # noqa: E731


def format_polyq(p: PolyQ, var: str = "q") -> str:
    if p.is_zero():
        return "0"
    parts = []
    for k in range(len(p.coeffs) - 1, -1, -1):
        c = p.coeffs[k]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = -c if c < 0 else c
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        parts.append((sign, body))
    first_sign, first_body = parts[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        out += sign + body
    return out


_POLY_TERM = re.compile(r"([+-]?)([^+-]+)")


def parse_polyq(text: str, var: str = "q") -> PolyQ:
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty polynomial")
    coeffs: dict[int, Fraction] = {}
    pos = 0
    for m in _POLY_TERM.finditer(s):
        if m.start() != pos:
            raise ValueError(f"cannot parse polynomial {text!r}")
        pos = m.end()
        sign = -1 if m.group(1) == "-" else 1
        body = m.group(2)
        if var in body:
            if "*" in body:
                cstr, mono = body.split("*", 1)
                c = Fraction(cstr)
            else:
                c, mono = Fraction(1), body
            if mono == var:
                k = 1
            elif mono.startswith(var + "^"):
                k = int(mono[len(var) + 1:])
            else:
                raise ValueError(f"bad monomial {mono!r}")
        else:
            c, k = Fraction(body), 0
        coeffs[k] = coeffs.get(k, Fraction(0)) + sign * c
    if pos != len(s):
        raise ValueError(f"cannot parse polynomial {text!r}")
    n = max(coeffs) + 1 if coeffs else 0
    return PolyQ([coeffs.get(k, 0) for k in range(n)])


def interpolate_poly(samples, degree_bound: int) -> PolyQ:
    """Fit a polynomial of degree <= ``degree_bound`` through the first
    ``degree_bound + 1`` samples and check every remaining sample against it.
    """
    pts = [(to_rational(x), to_rational(y)) for x, y in samples]
    need = degree_bound + 1
    if len(pts) < need:
        raise BadParameter(f"need at least {need} samples, got {len(pts)}")
    xs = [x for x, _ in pts]
    if len(set(xs)) != len(xs):
        raise BadParameter("sample q-values must be distinct")
    fit, rest = pts[:need], pts[need:]
    poly = PolyQ()
    for i, (xi, yi) in enumerate(fit):
        basis = PolyQ([1])
        denom = Fraction(1)
        for j, (xj, _) in enumerate(fit):
            if j != i:
                basis = basis * PolyQ([-xj, 1])
                denom *= xi - xj
        poly = poly + basis * (yi / denom)
    for x, y in rest:
        if poly(x) != y:
            raise InconsistentSamples(f"sample ({x}, {y}) disagrees with fitted {format_polyq(poly)}")
    return poly


def lagrange_values(xs, ys):
    """Coefficients (lowest first) of the interpolating polynomial through
    (xs[i], ys[i]) with rational nodes and values in any ring containing Q.
    """
    n = len(xs)
    out = [0] * n
    for i in range(n):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j in range(n):
            if j == i:
                continue
            nxt = [Fraction(0)] * (len(basis) + 1)
            for k, c in enumerate(basis):
                nxt[k] -= c * xs[j]
                nxt[k + 1] += c
            basis = nxt
            denom *= xs[i] - xs[j]
        for k, c in enumerate(basis):
            out[k] = out[k] + ys[i] * (c / denom)
    return out


def domain_of(x) -> str:
    if isinstance(x, Cyclo6):
        return Q6
    if isinstance(x, GaussianRational):
        return QI
    if isinstance(x, float):
        return RR
    return QQ


def join_domains(d1: str, d2: str) -> str:
    if d1 == d2:
        return d1
    if d1 == QQ:
        return d2
    if d2 == QQ:
        return d1
    raise ScalarDomainMismatch(f"incompatible scalar domains {d1} and {d2}")


def coerce_to_domain(x, domain: str):
    if domain == QQ:
        if isinstance(x, _QuadraticElement):
            if x.b != 0:
                raise ScalarDomainMismatch(f"{x} is not rational")
            return normalize_rational(x.a)
        return normalize_rational(x)
    if domain == Q6:
        return x if isinstance(x, Cyclo6) else Cyclo6(to_rational(x), 0)
    if domain == QI:
        return x if isinstance(x, GaussianRational) else GaussianRational(to_rational(x), 0)
    if domain == RR:
        return float(x)
    raise BadParameter(f"unknown domain {domain}")


def format_scalar(x) -> str:
    if isinstance(x, _QuadraticElement):
        if x.b == 0:
            return str(x.a)
        b = x.b
        if x.a == 0:
            return f"{b}*{x.SYMBOL}"
        sign = "-" if b < 0 else "+"
        return f"{x.a}{sign}{abs(b)}*{x.SYMBOL}"
    if isinstance(x, float):
        return repr(float(x))  # plain repr; numpy scalars print their type
    return str(to_rational(x))


_QUAD_RE = re.compile(r"^\s*([+-]?[0-9/]+)?\s*(?:([+-])\s*([0-9/]*)\s*\*?\s*([wi]))?\s*$")
_PURE_GEN_RE = re.compile(r"^\s*([+-]?)\s*([0-9/]*)\s*\*?\s*([wi])\s*$")


def parse_scalar(text: str, domain: str | None = None):
    """Parse ``p/q``, ``n``, ``a+b*w`` (Q6), ``a+b*i`` (QI) or a decimal float."""
    s = text.strip()
    if domain == RR or (domain is None and re.search(r"[.eE]", s) and not re.search(r"[wi]", s)):
        return float(s)
    m = _PURE_GEN_RE.match(s)
    if m:
        sign, mag, sym = m.groups()
        b = Fraction(mag) if mag else Fraction(1)
        if sign == "-":
            b = -b
        cls = Cyclo6 if sym == "w" else GaussianRational
        return coerce_to_domain(cls(0, b), domain) if domain else cls(0, b)
    m = _QUAD_RE.match(s)
    if not m or (m.group(1) is None and m.group(2) is None):
        raise ValueError(f"cannot parse scalar {text!r}")
    a = Fraction(m.group(1)) if m.group(1) else Fraction(0)
    if m.group(2) is None:
        value = normalize_rational(a)
        return coerce_to_domain(value, domain) if domain else value
    b = Fraction(m.group(3)) if m.group(3) else Fraction(1)
    if m.group(2) == "-":
        b = -b
    cls = Cyclo6 if m.group(4) == "w" else GaussianRational
    value = cls(a, b)
    return coerce_to_domain(value, domain) if domain else value
