"""Exponent bounds and Kronecker-power border-rank lower bounds.

Real-valued outputs are computed with mpmath at 60 significant digits so
reports are identical across platforms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import BadParameter

WORKING_DPS = 60
REPORT_DIGITS = 30

# tags attached to reported numbers
TAG_LASER = "cw-laser-bound"
TAG_POWER = "kronecker-power-flattening"
TAG_BINI = "bini-limit"


def report(x, digits: int = REPORT_DIGITS) -> str:
    """Decimal string of ``x`` to ``digits`` significant digits."""
    with mpmath.workdps(WORKING_DPS):
        return mpmath.nstr(x, digits)


def _mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _check_int(name, x, lo):
    if int(x) != x or x < lo:
        raise BadParameter(f"{name} must be an integer >= {lo}, got {x!r}")
    return int(x)


@dataclass(frozen=True)
class OmegaBound:
    q: int
    k: int
    br_value: object
    bound: mpmath.mpf
    family: str = "cw"

    @property
    def meaningful(self) -> bool:
        return self.bound >= 2

    def text(self, digits: int = REPORT_DIGITS) -> str:
        return report(self.bound, digits)


def omega_bound(q: int, k: int, br, family: str = "cw") -> OmegaBound:
    """log_q((4/27) · br^(3/k)) for a border-rank upper bound ``br`` of the
    k-th Kronecker power of the (skew) small CW tensor."""
    q = _check_int("q", q, 2)
    k = _check_int("k", k, 1)
    if family not in ("cw", "skewcw"):
        raise BadParameter("family must be cw or skewcw")
    if family == "skewcw" and q % 2:
        raise BadParameter("the skew family needs even q")
    if br < 1:
        raise BadParameter("br must be >= 1")
    if not 2 <= q <= 10:
        warnings.warn(f"q={q} is outside the range 2..10 where this bound is usually applied", stacklevel=2)
    with mpmath.workdps(WORKING_DPS):
        val = +(mpmath.log(mpmath.mpf(4) / 27 * _mpf(br) ** (mpmath.mpf(3) / k)) / mpmath.log(q))
    return OmegaBound(q, k, br, val, family)


def omega_limit(q: int, per_power) -> mpmath.mpf:
    """Limit of the bound as k grows when br(T^⊠k) = per_power^k."""
    q = _check_int("q", q, 2)
    with mpmath.workdps(WORKING_DPS):
        return +(mpmath.log(mpmath.mpf(4) / 27 * _mpf(per_power) ** 3) / mpmath.log(q))


def cw_power_lower_bound(q: int, N: int) -> int:
    """Border-rank lower bound for the N-th Kronecker power of T_cw,q.

    q > 4: the square and cube are (q+2)^2 and (q+2)^3 exactly; higher
    powers multiply the cube bound by (q+1) per extra factor, since each
    further factor is 1_A-generic with dim B = q+1.  q = 4: the square
    gives 36 and each further factor multiplies by 5.
    """
    q = _check_int("q", q, 1)
    N = _check_int("N", N, 1)
    if q < 4:
        raise BadParameter("the flattening bounds need q >= 4")
    if q == 4:
        return 6 if N == 1 else 36 * 5 ** (N - 2)
    if N <= 3:
        return (q + 2) ** N
    return (q + 1) ** (N - 3) * (q + 2) ** 3


def prior_power_bound(q: int, N: int) -> int:
    """(q+1)^N + 2^N − 1, the bound available before the flattening argument."""
    return (q + 1) ** N + 2 ** N - 1


def bini_omega(n: int, br) -> mpmath.mpf:
    """log_n of a border-rank value for n×n matrix multiplication."""
    n = _check_int("n", n, 2)
    if br < n * n:
        raise BadParameter(f"border rank of M<{n}> is at least {n * n}")
    with mpmath.workdps(WORKING_DPS):
        return +(mpmath.log(_mpf(br)) / mpmath.log(n))
