from fractions import Fraction

import numpy as np
import pytest

from kronbound import catalog as cat
from kronbound.errors import BadParameter
from kronbound.linalg import certify_rank
from kronbound.tensor import apply_maps, kronecker, regroup, tensors_equal

from oracles import cw_dense, det3_dense, perm3_dense


def flattening_ranks(T):
    return tuple(certify_rank(regroup(T, [(a,), tuple(b for b in range(3) if b != a)]).entries).rank for a in range(3))


@pytest.mark.parametrize("q", [1, 2, 3, 5, 8])
def test_cw_matches_oracle_and_is_concise(q):
    T = cat.cw(q)
    assert np.array_equal(T.entries, cw_dense(q))
    assert T.nnz() == 3 * q
    assert flattening_ranks(T) == (q + 1,) * 3


@pytest.mark.parametrize("q", [1, 2, 4, 6])
def test_big_cw_is_concise(q):
    T = cat.big_cw(q)
    assert T.nnz() == 3 * q + 3
    assert flattening_ranks(T) == (q + 2,) * 3


@pytest.mark.parametrize("q", [2, 4, 6, 8])
def test_skewcw_is_concise(q):
    assert flattening_ranks(cat.skewcw(q)) == (q + 1,) * 3


@pytest.mark.parametrize("q", [1, 3, 5])
def test_skewcw_rejects_odd_q(q):
    with pytest.raises(BadParameter):
        cat.skewcw(q)


def test_det_and_perm_match_oracle():
    assert np.array_equal(cat.perm3().entries, perm3_dense())
    assert all(int(x) == y for x, y in zip(cat.det3().entries.flat, det3_dense().flat))
    # symmetric under all axis permutations
    D = cat.det3().entries
    assert np.array_equal(D, D.transpose(1, 0, 2)) and np.array_equal(D, D.transpose(0, 2, 1))


@pytest.mark.parametrize(
    "index,mu,nnz",
    [(1, None, 4), (2, None, 4), (3, None, 5), (4, None, 5), (5, None, 5), (6, None, 5), (7, None, 5),
     (8, None, 5), (9, None, 6), (10, None, 6), (11, -1, 7), (11, 2, 7)],
)
def test_tight_support_sizes(index, mu, nnz):
    assert cat.tight(index, mu).nnz() == nnz


def test_tight_parameter_rules():
    with pytest.raises(BadParameter):
        cat.tight(11)
    with pytest.raises(BadParameter):
        cat.tight(11, 0)
    with pytest.raises(BadParameter):
        cat.tight(3, 2)
    with pytest.raises(BadParameter):
        cat.tight(12)
    assert cat.tight(11, Fraction(1, 2)).entries[2, 1, 0] == Fraction(1, 2)


def _pair_index(n, m):
    """Kronecker index of x_ij ⊗ x'_kl  ->  index of x_(i,k),(j,l) in M<nm>."""
    perm = np.empty(n * n * m * m, dtype=np.int64)
    for i in range(n):
        for j in range(n):
            for k in range(m):
                for l in range(m):
                    perm[(i * n + j) * m * m + (k * m + l)] = (i * m + k) * n * m + (j * m + l)
    return perm


@pytest.mark.parametrize("n,m", [(1, 2), (2, 2), (2, 3)])
def test_matmult_kronecker_is_matmult(n, m):
    K = kronecker(cat.matmult(n), cat.matmult(m)).entries
    perm = _pair_index(n, m)
    out = np.zeros_like(K)
    out[np.ix_(perm, perm, perm)] = K
    assert np.array_equal(out, cat.matmult(n * m).entries)


def test_matmult_rectangular_shape():
    T = cat.matmult(2, 3, 4)
    assert T.dims == (6, 12, 8)
    assert T.nnz() == 24


@pytest.mark.parametrize("m", [3, 4, 6])
def test_cgj_shape(m):
    T = cat.cgj(m)
    assert T.dims == (3, m, m)
    assert T.nnz() > 0


def test_basis_changes():
    cw2 = kronecker(cat.cw(2), cat.cw(2))
    g = cat.cw2_to_monomial_maps()
    assert tensors_equal(apply_maps(cat.cw(2), g), cat.monomial_tensor())
    assert tensors_equal(apply_maps(cw2, cat.kron_maps(g, g)), cat.perm3())
    h = cat.skewcw2_to_alternating_maps()
    assert tensors_equal(apply_maps(cat.skewcw(2), h), cat.alternating_tensor())
    sk2 = kronecker(cat.skewcw(2), cat.skewcw(2))
    assert tensors_equal(apply_maps(sk2, cat.kron_maps(h, h)), cat.det3())


def test_alternating_sign_pattern():
    A = cat.alternating_tensor().entries
    assert A[0, 1, 2] == 1 and A[1, 0, 2] == -1 and A[0, 0, 1] == 0


@pytest.mark.parametrize("q,variant", [(4, 1), (5, 1), (5, 2), (8, 2)])
def test_phi2_shape(q, variant):
    P = cat.phi2(q, variant)
    assert (P.rows, P.cols) == (3, (q + 1) ** 2)


def test_phi3_and_skewbad_shapes():
    assert (cat.phi3(5).rows, cat.phi3(5).cols) == (5, 216)
    P = cat.skewbad_phi(6)
    assert P.entries.tolist() == [[1, 0, 0, 0, 0, 0, 0], [0, 1, 1, 1, 0, 0, 0], [0, 0, 0, 0, 1, 1, 1]]


def test_generic5_is_seeded():
    a = cat.generic5(16, seed=3).entries
    assert np.array_equal(a, cat.generic5(16, seed=3).entries)
    assert not np.array_equal(a, cat.generic5(16, seed=4).entries)
    assert a.min() >= -5 and a.max() <= 5


def test_unknown_names():
    with pytest.raises(BadParameter):
        cat.build("nope")
    with pytest.raises(BadParameter):
        cat.build_projection("nope", 3)
