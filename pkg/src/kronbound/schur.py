"""Isotypic block reduction of the restricted Kronecker-power flattenings.

The symmetric group S_{q-s} permutes the basis vectors s+1..q of each
Kronecker slot.  On one slot the permutation module splits as s+2 copies of
the trivial representation plus one copy of the standard one; the maps E
(projections) and F (inclusions) realize this splitting.  Blocks are
E_L · (slice)^T · F_L for a label L in {triv, std}^N, assembled into a
Koszul matrix; by Schur's lemma the full rank is the sum of block ranks
weighted by the irrep dimensions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .catalog import cw, phi2, phi3
from .errors import BadParameter, ShapeMismatch
from .koszul import flattening_from_slices, power_restricted_slices
from .linalg import certify_rank
from .scalar import PolyQ, interpolate_poly
from .tensor import LinearMap, Tensor

TRIV = "triv"
STD = "std"


@dataclass(frozen=True)
class EFMaps:
    """Per-slot projections and inclusions.

    ``F_triv``/``F_std`` are the inverse columns multiplied by ``scale``
    (= q - s) so every entry is an integer; divide by ``scale`` for the
    true inverse.
    """

    E_triv: LinearMap
    E_std: LinearMap | None
    F_triv: LinearMap
    F_std: LinearMap | None
    scale: int

    def exact_F(self, label: str) -> np.ndarray:
        F = self.F_triv if label == TRIV else self.F_std
        out = np.empty(F.entries.shape, dtype=object)
        out.reshape(-1)[:] = [Fraction(int(x), self.scale) for x in F.entries.reshape(-1)]
        return out

    def E(self, label: str) -> np.ndarray:
        return (self.E_triv if label == TRIV else self.E_std).entries

    def F(self, label: str) -> np.ndarray:
        return (self.F_triv if label == TRIV else self.F_std).entries


def build_E_F(q: int, s: int) -> EFMaps:
    if q < s + 1:
        raise BadParameter(f"need q >= s+1 (q={q}, s={s})")
    n = q + 1
    m = q - s
    Et = np.zeros((s + 2, n), dtype=np.int64)
    Ft = np.zeros((n, s + 2), dtype=np.int64)
    for i in range(s + 1):
        Et[i, i] = 1
        Ft[i, i] = m
    Et[s + 1, s + 1:] = 1
    Ft[s + 1:, s + 1] = 1
    Es = Fs = None
    if q >= s + 2:
        es = np.zeros((1, n), dtype=np.int64)
        es[0, s + 1], es[0, s + 2] = -1, 1
        fs = np.zeros((n, 1), dtype=np.int64)
        fs[s + 1, 0] = -(m - 1)
        fs[s + 2:, 0] = 1
        Es = LinearMap(es, label="E_std")
        Fs = LinearMap(fs, label="F_std")
    return EFMaps(LinearMap(Et, label="E_triv"), Es, LinearMap(Ft, label="F_triv"), Fs, m)


@dataclass(frozen=True)
class Component:
    label: tuple
    multiplicity_dim: int
    irrep_dim: PolyQ

    def irrep_dim_at(self, q: int) -> int:
        return self.irrep_dim.eval_int(q)


@dataclass(frozen=True)
class IsotypicPlan:
    q: int
    s: int
    slots: int
    components: tuple

    @property
    def group(self) -> str:
        return f"S_{self.q - self.s}^{self.slots}"

    def ambient_dim(self) -> int:
        return (self.q + 1) ** self.slots

    def check(self) -> bool:
        total = sum(c.multiplicity_dim * c.irrep_dim_at(self.q) for c in self.components)
        return total == self.ambient_dim()


def isotypic_plan(q: int, s: int, slots: int) -> IsotypicPlan:
    std_dim = PolyQ([-(s + 1), 1])
    comps = []
    for label in itertools.product((TRIV, STD), repeat=slots):
        k = label.count(STD)
        comps.append(Component(label, (s + 2) ** (slots - k), std_dim ** k))
    return IsotypicPlan(q, s, slots, tuple(comps))


@dataclass(frozen=True)
class FlatteningInputs:
    """A restricted Kronecker power T^{⊠N} and the data for its p-th Koszul
    flattening.  ``order`` lists the A' basis in the order used for blocks."""

    base: Tensor
    N: int
    restriction: LinearMap
    p: int
    q: int
    s: int
    order: tuple = (0, 1, 2)
    family: str = ""

    def slices(self) -> list:
        return power_restricted_slices(self.base, self.N, self.restriction)

    def full_matrix(self) -> np.ndarray:
        return flattening_from_slices(self.slices(), self.p)


def square_inputs(q: int, variant: int = 2) -> FlatteningInputs:
    """φ₂-restricted T_cw,q^⊠2, p = 1.  A' is listed as (e1, e0, e2) so the
    blocks come out in the form [[-X, Y, 0], [-Z, 0, Y], [0, -Z, X]]."""
    return FlatteningInputs(cw(q), 2, phi2(q, variant), 1, q, 3, (1, 0, 2), "cw-square")


def cube_inputs(q: int) -> FlatteningInputs:
    return FlatteningInputs(cw(q), 3, phi3(q), 2, q, 4, (0, 1, 2, 3, 4), "cw-cube")


def family_inputs(family: str, q: int, variant: int = 2) -> FlatteningInputs:
    if family == "cw-square":
        return square_inputs(q, variant)
    if family == "cw-cube":
        return cube_inputs(q)
    raise BadParameter(f"unknown family {family!r}")


def _kron_all(mats):
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def _normalize_block(a: np.ndarray) -> np.ndarray:
    if a.dtype != object:
        return a
    vals = [Fraction(x) for x in a.reshape(-1)]
    if all(v.denominator == 1 for v in vals):
        return np.array([int(v) for v in vals], dtype=np.int64).reshape(a.shape)
    out = np.empty(a.shape, dtype=object)
    out.reshape(-1)[:] = vals
    return out


def block_slices(inputs: FlatteningInputs, label, clear_scale: bool = False) -> list:
    """Per-A' slices E_L · S_e^T · F_L of one isotypic component (rows indexed
    by the C-side multiplicity space, columns by the B side)."""
    label = tuple(label)
    if len(label) != inputs.N or any(x not in (TRIV, STD) for x in label):
        raise ShapeMismatch(f"label must be {inputs.N} entries from {{triv, std}}")
    ef = build_E_F(inputs.q, inputs.s)
    if STD in label and ef.E_std is None:
        raise ShapeMismatch(f"no standard component at q={inputs.q}")
    base = inputs.base.entries
    E = [ef.E(l) for l in label]
    F = [ef.F(l) if clear_scale else ef.exact_F(l) for l in label]
    # mixed-product rule: one small factor per slot
    per_slot = [
        [E[k] @ base[i].T @ F[k] if F[k].dtype != object else np.dot(E[k] @ base[i].T, F[k]) for i in range(base.shape[0])]
        for k in range(inputs.N)
    ]
    a = base.shape[0]
    out = []
    P = inputs.restriction.entries
    for e in inputs.order:
        acc = None
        for flat in np.flatnonzero(P[e] != 0):
            idx = np.unravel_index(int(flat), (a,) * inputs.N)
            term = int(P[e, flat]) * _kron_all([per_slot[k][idx[k]] for k in range(inputs.N)])
            acc = term if acc is None else acc + term
        out.append(_normalize_block(acc))
    return out


def isotypic_block(inputs: FlatteningInputs, label, clear_scale: bool = False) -> np.ndarray:
    """Koszul matrix of one isotypic component.

    With ``clear_scale`` the F maps carry the factor (q-s) per slot, so the
    block is (q-s)^N times the exact one; ranks agree.
    """
    blocks = block_slices(inputs, label, clear_scale)
    return flattening_from_slices([b.T for b in blocks], inputs.p)


@dataclass
class BlockRankTable:
    q: int
    entries: list = field(default_factory=list)  # (label, dims, rank, irrep_dim, method)

    @property
    def total_rank(self) -> int:
        return recombine(self, self.q)

    def ranks_by_std_count(self) -> dict:
        out = {}
        for label, _dims, rank, _irr, _m in self.entries:
            out.setdefault(label.count(STD), set()).add(rank)
        return out


def block_rank_table(inputs: FlatteningInputs, method: str = "auto") -> BlockRankTable:
    plan = isotypic_plan(inputs.q, inputs.s, inputs.N)
    table = BlockRankTable(inputs.q)
    cache = {}
    for comp in plan.components:
        irr = comp.irrep_dim_at(inputs.q)
        if irr == 0:
            continue
        # blocks with the same number of std slots are conjugate under slot swaps
        key = tuple(sorted(comp.label))
        if key not in cache:
            M = isotypic_block(inputs, comp.label, clear_scale=True)
            res = certify_rank(M, method)
            cache[key] = (M.shape, res)
        shape, res = cache[key]
        table.entries.append((comp.label, shape, res.rank, irr, res.describe()))
    return table


def recombine(table: BlockRankTable, q: int) -> int:
    return sum(rank * irr for _label, _dims, rank, irr, _m in table.entries)


def interpolate_block_matrix(block_builder, q_samples, degree_bound: int = 1) -> np.ndarray:
    """Fit every entry of ``block_builder(q)`` by a polynomial in q of degree
    <= ``degree_bound`` using the first degree_bound+1 samples; the remaining
    samples validate the fit."""
    mats = [(q, np.asarray(block_builder(q), dtype=object)) for q in q_samples]
    shape = mats[0][1].shape
    if any(m.shape != shape for _, m in mats):
        raise ShapeMismatch("block dims change with q")
    out = np.empty(shape, dtype=object)
    for idx in np.ndindex(shape):
        out[idx] = interpolate_poly([(q, m[idx]) for q, m in mats], degree_bound)
    return out


def instantiate_poly_matrix(P: np.ndarray, q: int) -> np.ndarray:
    out = np.empty(P.shape, dtype=object)
    for idx in np.ndindex(P.shape):
        out[idx] = P[idx](q)
    return _normalize_block(out)


def slot_permutation(q: int, slots: int, slot: int, i: int, j: int) -> np.ndarray:
    """Index permutation of (C^{q+1})^{⊗slots} swapping basis i and j in one slot."""
    n = q + 1
    perm = np.arange(n ** slots).reshape((n,) * slots)
    idx = [slice(None)] * slots
    a = perm.copy()
    idx[slot] = i
    b_i = tuple(idx)
    idx[slot] = j
    b_j = tuple(idx)
    a[b_i], a[b_j] = perm[b_j], perm[b_i]
    return a.reshape(-1)


def equivariance_spot_check(inputs: FlatteningInputs, seed: int = 0) -> bool:
    """A random transposition of S_{q-s} on a random slot permutes rows and
    columns of the full flattening into itself."""
    rng = np.random.default_rng(seed)
    lo, hi = inputs.s + 1, inputs.q
    if hi - lo < 1:
        return True
    i, j = rng.choice(np.arange(lo, hi + 1), size=2, replace=False)
    slot = int(rng.integers(inputs.N))
    perm = slot_permutation(inputs.q, inputs.N, slot, int(i), int(j))
    slices = inputs.slices()
    moved = [S[np.ix_(perm, perm)] for S in slices]
    M = flattening_from_slices(slices, inputs.p)
    M2 = flattening_from_slices(moved, inputs.p)
    return bool(np.array_equal(M, M2))


def square_block_dims(s: int = 3) -> dict:
    """Koszul block dims (rows, cols) by number of std slots for p=1, dim A'=3."""
    return {k: (3 * (s + 2) ** (2 - k), 3 * (s + 2) ** (2 - k)) for k in range(3)}


def cube_block_dims(s: int = 4) -> dict:
    return {k: (comb(5, 3) * (s + 2) ** (3 - k), comb(5, 2) * (s + 2) ** (3 - k)) for k in range(4)}


def reference_square_blocks() -> dict:
    """Hand-derived square-case blocks as matrices of polynomials in q.

    Keys: ``phi4`` (std,std Koszul block), ``phi2`` (triv,std Koszul block)
    and ``X``, ``Y``, ``Z`` (the triv,triv slices for A' basis e0, e1, e2).
    The token ``qp`` in the data file stands for q - 3.
    """
    from importlib.resources import files

    text = files("kronbound").joinpath("data/square_blocks.txt").read_text(encoding="utf-8")
    qp = PolyQ([-3, 1])
    out, cur, name = {}, None, None
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "block":
            name, r, c = parts[1], int(parts[2]), int(parts[3])
            cur = []
            out[name] = (r, c, cur)
            continue
        cur.append([qp if t == "qp" else PolyQ([int(t)]) for t in parts])
    mats = {}
    for name, (r, c, rows) in out.items():
        M = np.empty((r, c), dtype=object)
        for i, row in enumerate(rows):
            M[i, :] = row
        mats[name] = M
    return mats
