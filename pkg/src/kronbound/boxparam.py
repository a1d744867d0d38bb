"""Box-parameterized tensor families.

A basic term is ``p(q) * [indices lie in an affine box and satisfy
equalities]``.  Internally each term keeps its equality classes as
variables x_c with resolved affine bounds lo_c(q) <= x_c <= hi_c(q); a slot
(index position) stores its class and an affine offset, so the index value
is x_c + offset(q).  Plain equalities have offset 0; offsets are what lets
the skew family pair a_ξ with b_{ξ+u}.

Bounds are resolved symbolically: max/min of two affine functions is
replaced by one argument, valid from a threshold in q onward, and the
threshold is folded into ``q_min``.  For slopes in {0, 1} with integer
intercepts the threshold is max(|h_i - h_j|, |d_i - d_j|); otherwise it is
the exact crossing point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from math import ceil, floor

import numpy as np

from .errors import BadParameter, BelowThreshold, DimensionMismatch, EmptyRange
from .scalar import PolyQ, parse_polyq, format_polyq
from .tensor import Tensor, exact_array

ZERO = PolyQ()


def affine(slope=0, const=0) -> PolyQ:
    return PolyQ([const, slope])


def _slope(p: PolyQ) -> Fraction:
    if p.degree() > 1:
        raise BadParameter("bounds and offsets must be affine in q")
    return p.coeff(1)


def _eventually_positive(p: PolyQ) -> bool:
    """True when p(q) > 0 for all large q."""
    s, c = _slope(p), p.coeff(0)
    return s > 0 or (s == 0 and c > 0)


def _sign_threshold(p: PolyQ) -> int:
    """Smallest integer q0 >= 0 such that the sign of p on [q0, inf) is constant
    (an affine function changes sign at most once)."""
    s = _slope(p)
    if s == 0:
        return 0
    root = -p.coeff(0) / s
    return max(0, floor(root) + 1)


def _unit_slope_integral(p: PolyQ, r: PolyQ) -> bool:
    return all(_slope(x) in (0, 1) and x.coeff(0).denominator == 1 for x in (p, r))


def _resolve(a: PolyQ, b: PolyQ, take_max: bool):
    """Pick max(a, b) (or min) for large q; returns (choice, threshold)."""
    diff = a - b
    a_wins = _eventually_positive(diff) or diff.is_zero()
    choice = a if a_wins == take_max else b
    if diff.is_zero():
        return choice, 0
    if _unit_slope_integral(a, b):
        return choice, int(abs(a.coeff(0) - b.coeff(0)))
    return choice, _sign_threshold(diff)


@dataclass(frozen=True)
class BasicBoxTensor:
    coefficient: PolyQ
    classes: tuple  # ((lo, hi), ...) affine bounds of the class variables
    slots: tuple  # ((class index, offset), ...) one per tensor index

    @property
    def arity(self) -> int:
        return len(self.slots)

    def partition(self) -> list:
        """Equality classes as lists of slot positions."""
        groups = {}
        for j, (c, _off) in enumerate(self.slots):
            groups.setdefault(c, []).append(j)
        return list(groups.values())

    def slot_bounds(self, j: int):
        c, off = self.slots[j]
        lo, hi = self.classes[c]
        return lo + off, hi + off


@dataclass(frozen=True)
class BoxTensor:
    terms: tuple
    dims: tuple  # affine PolyQ per index
    q_min: int = 0

    @property
    def arity(self) -> int:
        return len(self.dims)


def _compact(term: BasicBoxTensor) -> BasicBoxTensor:
    """Drop unreferenced classes and renumber."""
    used = sorted({c for c, _ in term.slots})
    remap = {c: i for i, c in enumerate(used)}
    return BasicBoxTensor(
        term.coefficient,
        tuple(term.classes[c] for c in used),
        tuple((remap[c], off) for c, off in term.slots),
    )


def basic_term(coefficient, bounds, equal=(), offsets=None) -> tuple:
    """Build a basic term from per-index bounds (lo, hi) and equality pairs.

    Returns ``(term or None, threshold)``; ``None`` means the term is empty
    for all q at or beyond the threshold.
    """
    k = len(bounds)
    coef = coefficient if isinstance(coefficient, PolyQ) else PolyQ([coefficient])
    offsets = [ZERO] * k if offsets is None else [o if isinstance(o, PolyQ) else PolyQ([o]) for o in offsets]
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in equal:
        parent[find(i)] = find(j)
    roots = sorted({find(j) for j in range(k)})
    cls_index = {r: n for n, r in enumerate(roots)}
    threshold = 0
    classes = []
    for r in roots:
        members = [j for j in range(k) if find(j) == r]
        lo = hi = None
        for j in members:
            l, h = _as_poly(bounds[j][0]) - offsets[j], _as_poly(bounds[j][1]) - offsets[j]
            if lo is None:
                lo, hi = l, h
            else:
                lo, t1 = _resolve(lo, l, True)
                hi, t2 = _resolve(hi, h, False)
                threshold = max(threshold, t1, t2)
        classes.append((lo, hi))
    for lo, hi in classes:
        cnt = _count(lo, hi)
        if not _eventually_positive(cnt):
            return None, max(threshold, _sign_threshold(cnt))
    term =BasicBoxTensor(coef, tuple(classes), tuple((cls_index[find(j)], offsets[j]) for j in range(k)))
    return term, threshold


def _as_poly(x) -> PolyQ:
    if isinstance(x, PolyQ):
        return x
    if isinstance(x, tuple):
        return affine(*x)
    return PolyQ([x])


def make_box(terms_spec, dims, q_min: int = 0) -> BoxTensor:
    """``terms_spec``: iterable of (coefficient, bounds, equal[, offsets])."""
    terms = []
    for term_spec in terms_spec:
        term, t = basic_term(*term_spec)
        q_min = max(q_min, t)
        if term is not None and not term.coefficient.is_zero():
            terms.append(term)
    return BoxTensor(tuple(terms), tuple(_as_poly(d) for d in dims), q_min)


def scalar_box(p) -> BoxTensor:
    return BoxTensor((BasicBoxTensor(_as_poly(p), (), ()),), (), 0)


def box_product(S: BoxTensor, T: BoxTensor) -> BoxTensor:
    terms = []
    for s in S.terms:
        shift = len(s.classes)
        for t in T.terms:
            terms.append(
                BasicBoxTensor(
                    s.coefficient * t.coefficient,
                    s.classes + t.classes,
                    s.slots + tuple((c + shift, off) for c, off in t.slots),
                )
            )
    return BoxTensor(tuple(terms), S.dims + T.dims, max(S.q_min, T.q_min))


def _count(lo: PolyQ, hi: PolyQ) -> PolyQ:
    return hi - lo + 1


def _sum_slot(term: BasicBoxTensor, j: int, q_min: int):
    """Sum one slot out of a term; returns (term or None, q_min)."""
    c, _off = term.slots[j]
    rest = term.slots[:j] + term.slots[j + 1:]
    if any(cc == c for cc, _ in rest):
        return _compact(BasicBoxTensor(term.coefficient, term.classes, rest)), q_min
    lo, hi = term.classes[c]
    cnt = _count(lo, hi)
    if not _eventually_positive(cnt):
        # empty for all large q; exact from the point the count goes non-positive
        return None, max(q_min, _sign_threshold(cnt) if _slope(cnt) != 0 else 0)
    if _slope(cnt) != 0:
        # the count formula is only right where the count is non-negative
        q_min = max(q_min, ceil(-cnt.coeff(0) / _slope(cnt)))
    coef = term.coefficient * cnt
    return _compact(BasicBoxTensor(coef, term.classes, rest)), q_min


def box_sum_index(T: BoxTensor, index: int) -> BoxTensor:
    if not 0 <= index < T.arity:
        raise DimensionMismatch(f"index {index} out of range for arity {T.arity}")
    q_min = T.q_min
    terms = []
    for term in T.terms:
        new, q_min = _sum_slot(term, index, q_min)
        if new is not None and not new.coefficient.is_zero():
            terms.append(new)
    if T.terms and not terms:
        raise EmptyRange(f"summing index {index} leaves no nonempty term")
    return BoxTensor(tuple(terms), T.dims[:index] + T.dims[index + 1:], q_min)


def _equate(term: BasicBoxTensor, j: int, k: int, q_min: int):
    """Adjoin i_j = i_k; returns (term or None, q_min)."""
    cj, oj = term.slots[j]
    ck, ok = term.slots[k]
    if cj == ck:
        diff = oj - ok
        if diff.is_zero():
            return term, q_min
        if diff.is_constant():
            return None, q_min
        # equal offsets at a single q only
        return None, max(q_min, _sign_threshold(diff))
    shift = oj - ok  # x_ck = x_cj + shift
    lo_j, hi_j = term.classes[cj]
    lo_k, hi_k = term.classes[ck]
    lo, t1 = _resolve(lo_j, lo_k - shift, True)
    hi, t2 = _resolve(hi_j, hi_k - shift, False)
    q_min = max(q_min, t1, t2)
    cnt = _count(lo, hi)
    if not _eventually_positive(cnt):
        return None, max(q_min, _sign_threshold(cnt))
    classes = list(term.classes)
    classes[cj] = (lo, hi)
    slots = tuple((cj, off + shift) if c == ck else (c, off) for c, off in term.slots)
    return _compact(BasicBoxTensor(term.coefficient, tuple(classes), slots)), q_min


def box_equate(T: BoxTensor, j: int, k: int) -> BoxTensor:
    q_min = T.q_min
    terms = []
    for term in T.terms:
        new, q_min = _equate(term, j, k, q_min)
        if new is not None:
            terms.append(new)
    return BoxTensor(tuple(terms), T.dims, q_min)


def box_contract(T: BoxTensor, j: int, k: int) -> BoxTensor:
    """Adjoin i_j = i_k and sum both indices out."""
    if j == k or not (0 <= j < T.arity and 0 <= k < T.arity):
        raise DimensionMismatch("contract needs two distinct valid indices")
    E = box_equate(T, j, k)
    hi, lo = max(j, k), min(j, k)
    return box_sum_index(box_sum_index(E, hi), lo)


def box_permute(T: BoxTensor, order) -> BoxTensor:
    """Reorder indices: new index n is old index order[n]."""
    order = list(order)
    if sorted(order) != list(range(T.arity)):
        raise DimensionMismatch("order must be a permutation of the indices")
    terms = tuple(replace(t, slots=tuple(t.slots[o] for o in order)) for t in T.terms)
    return BoxTensor(terms, tuple(T.dims[o] for o in order), T.q_min)


def box_add(S: BoxTensor, T: BoxTensor) -> BoxTensor:
    if S.arity != T.arity:
        raise DimensionMismatch("cannot add box tensors of different arity")
    return BoxTensor(S.terms + T.terms, S.dims, max(S.q_min, T.q_min))


def _eval_int(p: PolyQ, q: int) -> int:
    v = p(q)
    if v.denominator != 1:
        raise BadParameter(f"{format_polyq(p)} is not an integer at q={q}")
    return v.numerator


def box_instantiate(T: BoxTensor, q: int):
    """Dense tensor at parameter q (a plain scalar for arity 0)."""
    if q < T.q_min:
        raise BelowThreshold(f"q={q} is below the validity threshold {T.q_min}")
    dims = tuple(_eval_int(d, q) for d in T.dims)
    if not dims:
        return sum((t.coefficient(q) for t in T.terms), Fraction(0))
    acc = np.zeros(dims, dtype=object)
    acc[...] = 0
    for term in T.terms:
        ranges = [range(_eval_int(lo, q), _eval_int(hi, q) + 1) for lo, hi in term.classes]
        if any(len(r) == 0 for r in ranges):
            continue
        coef = term.coefficient(q)
        grids = np.meshgrid(*[np.arange(r.start, r.stop) for r in ranges], indexing="ij")
        idx = []
        for j, (c, off) in enumerate(term.slots):
            v = grids[c].reshape(-1) + _eval_int(off, q)
            if v.size and (v.min() < 0 or v.max() >= dims[j]):
                raise DimensionMismatch(f"index {j} leaves its axis at q={q}")
            idx.append(v)
        np.add.at(acc, tuple(idx), coef)
    return Tensor.from_array(acc)


# ---- constructors for the families used with Koszul flattenings ----


def box_from_dense(arr, dims=None) -> BoxTensor:
    """Constant family: one point term per nonzero entry."""
    a = np.asarray(arr)
    specs = []
    for idx in zip(*np.nonzero(a != 0)):
        val = a[idx]
        specs.append((Fraction(val) if not isinstance(val, Fraction) else val, [(int(i), int(i)) for i in idx]))
    return make_box(specs, dims if dims is not None else a.shape)


def box_identity(lo=0, hi=(1, 0), dim=(1, 1)) -> BoxTensor:
    """δ(i1, i2) on lo <= i <= hi; default range 0..q."""
    return make_box([(1, [(lo, hi), (lo, hi)], [(0, 1)])], [dim, dim])


def box_ones(arity: int, lo=0, hi=(1, 0), dim=(1, 1)) -> BoxTensor:
    return make_box([(1, [(lo, hi)] * arity)], [dim] * arity)


def box_cw() -> BoxTensor:
    """Small CW family in the parameter q (dims q+1)."""
    j = ((0, 1), (1, 0))  # 1 <= j <= q
    z = (0, 0)
    specs = [
        (1, [z, j, j], [(1, 2)]),
        (1, [j, z, j], [(0, 2)]),
        (1, [j, j, z], [(0, 1)]),
    ]
    return make_box(specs, [(1, 1)] * 3, q_min=1)


def box_skewcw() -> BoxTensor:
    """Skew CW family in the parameter u = q/2 (dims 2u+1).

    a0 bj cj + aj b0 cj for 1 <= j <= 2u, plus a_ξ b_{ξ+u} c0 - a_{ξ+u} b_ξ c0
    for 1 <= ξ <= u.
    """
    j = ((0, 1), (2, 0))
    xi = ((0, 1), (1, 0))
    xiu = ((1, 1), (2, 0))  # u+1 <= ξ+u <= 2u
    z = (0, 0)
    u = affine(1, 0)
    specs = [
        (1, [z, j, j], [(1, 2)]),
        (1, [j, z, j], [(0, 2)]),
        (1, [xi, xiu, z], [(0, 1)], [ZERO, u, ZERO]),
        (-1, [xiu, xi, z], [(0, 1)], [u, ZERO, ZERO]),
    ]
    return make_box(specs, [(2, 1)] * 3, q_min=1)


def box_phi2(variant: int = 1) -> BoxTensor:
    """φ₂ as a 3-index family (e, a1, a2) in the parameter q."""
    pts = [((0, 0), (0, 1)), ((0, 1), (0, 1)), ((1, 0), (0, 1)), ((1, 1), (0,))]
    if variant == 1:
        pts += [((0, 2), (1, 2)), ((2, 0), (1, 2)), ((3, 3), (2,)), ((2, 1), (2,))]
        tails = [(3, None)]
        q0 = 3
    elif variant == 2:
        pts += [((0, 3), (1, 2)), ((3, 0), (1, 2)), ((2, 2), (2,)), ((3, 1), (2,))]
        tails = [(2, 2), (4, None)]
        q0 = 4
    else:
        raise BadParameter("phi2 variant must be 1 or 2")
    specs = []
    for (i, j), targets in pts:
        for e in targets:
            specs.append((1, [(e, e), (i, i), (j, j)]))
    for lo, hi in tails:
        rng = (lo, (1, 0) if hi is None else hi)
        specs.append((1, [(1, 1), (0, 0), rng]))
        specs.append((1, [(1, 1), rng, (0, 0)]))
    return make_box(specs, [3, (1, 1), (1, 1)], q_min=q0)


def koszul_p1_tensor(n: int = 3) -> np.ndarray:
    """κ[w', e, w] = sign of a_e ∧ a_w in the basis of Λ² (w' indexes Λ²)."""
    from .koszul import wedge_basis, wedge_sign

    src = wedge_basis(n, 1)
    dst = wedge_basis(n, 2)
    pos = {w: r for r, w in enumerate(dst)}
    K = np.zeros((len(dst), n, len(src)), dtype=np.int64)
    for col, w in enumerate(src):
        for e in range(n):
            if e in w:
                continue
            K[pos[tuple(sorted(w + (e,)))], e, col] = wedge_sign(e, w)
    return K


def box_square_flattening(variant: int = 1) -> BoxTensor:
    """p = 1 Koszul flattening of φ₂(T_cw,q^⊠2) as a 6-index family with index
    order (w', c1, c2, w, b1, b2): rows (w', c) and columns (w, b).

    Built as KF ⊠ T' with KF = κ ⊠ δ_B ⊠ δ_B ⊠ δ_C ⊠ δ_C, contracted left to right.
    """
    cw = box_cw()
    T2 = box_product(cw, cw)  # a1 b1 c1 a2 b2 c2
    T = box_product(box_phi2(variant), T2)  # e a1' a2' | a1 b1 c1 a2 b2 c2
    T = box_contract(T, 1, 3)  # e a2' b1 c1 a2 b2 c2
    T = box_contract(T, 1, 4)  # e b1 c1 b2 c2
    kf = box_from_dense(koszul_p1_tensor(3))  # w' e w
    for _ in range(4):
        kf = box_product(kf, box_identity())
    # kf: w' e w  b1 b1' | b2 b2' | c1 c1' | c2 c2'   (pairs from the identities)
    F = box_product(kf, T)  # ... then e b1 c1 b2 c2 at positions 11..15
    F = box_contract(F, 1, 11)  # e
    # indices now: w' w b1 b1' b2 b2' c1 c1' c2 c2' | b1 c1 b2 c2
    F = box_contract(F, 3, 10)  # b1' with T's b1
    # w' w b1 b2 b2' c1 c1' c2 c2' | c1 b2 c2
    F = box_contract(F, 6, 9)  # c1' with T's c1
    # w' w b1 b2 b2' c1 c2 c2' | b2 c2
    F = box_contract(F, 4, 8)  # b2'
    # w' w b1 b2 c1 c2 c2' | c2
    F = box_contract(F, 6, 7)  # c2'
    # w' w b1 b2 c1 c2
    return box_permute(F, [0, 4, 5, 1, 2, 3])


def flattening_from_box(F: BoxTensor, q: int) -> np.ndarray:
    """Instantiate a 6-index flattening family and reshape to its matrix."""
    T = box_instantiate(F, q)
    d = T.dims
    return T.entries.reshape(d[0] * d[1] * d[2], d[3] * d[4] * d[5])


# ---- text format ----


def _bound_text(p: PolyQ) -> tuple:
    return p.coeff(1), p.coeff(0)


def write_boxtensor(T: BoxTensor) -> str:
    lines = [f"boxtensor {T.arity}"]
    lines.append("dims " + " ".join(format_polyq(d) for d in T.dims))
    if T.q_min:
        lines.append(f"qmin {T.q_min}")
    for term in T.terms:
        if any(not off.is_zero() for _, off in term.slots):
            raise BadParameter("terms with index offsets have no plain-text form")
        lines.append(f"coeff {format_polyq(term.coefficient)}")
        for j in range(term.arity):
            lo, hi = term.slot_bounds(j)
            f, h = _bound_text(lo)
            g, d = _bound_text(hi)
            lines.append(f"bounds {f} {h} {g} {d}")
        for group in term.partition():
            for a, b in zip(group, group[1:]):
                lines.append(f"equal {a} {b}")
    return "\n".join(lines) + "\n"


def read_boxtensor(text: str) -> BoxTensor:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    head = lines[0].split()
    if head[0] != "boxtensor":
        raise BadParameter("not a boxtensor file")
    arity = int(head[1])
    dims = None
    q_min = 0
    specs = []
    cur = None
    for ln in lines[1:]:
        key, *rest = ln.split(None, 1)
        arg = rest[0] if rest else ""
        if key == "dims":
            dims = [parse_polyq(x) for x in arg.split()]
        elif key == "qmin":
            q_min = int(arg)
        elif key == "coeff":
            cur = [parse_polyq(arg), [], []]
            specs.append(cur)
        elif key == "bounds":
            f, h, g, d = (Fraction(x) for x in arg.split())
            cur[1].append((affine(f, h), affine(g, d)))
        elif key == "equal":
            i, j = (int(x) for x in arg.split())
            cur[2].append((i, j))
        else:
            raise BadParameter(f"unknown boxtensor line {ln!r}")
    for s in specs:
        if len(s[1]) != arity:
            raise BadParameter("each term needs one bounds line per index")
    if dims is None:
        dims = [None] * arity
        for j in range(arity):
            his = [s[1][j][1] for s in specs]
            best = his[0]
            for h in his[1:]:
                best, _ = _resolve(best, h, True)
            dims[j] = best + 1
    return make_box([tuple(s) for s in specs], dims, q_min)


def all_index_tuples(dims):
    return itertools.product(*[range(d) for d in dims])
