from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from kronbound import catalog as cat
from kronbound.errors import NotOneAGeneric
from kronbound.koszul import (
    border_rank_lower_bound,
    divisor_for,
    find_one_generic_witness,
    flattening_matrix,
    kron_propagated_bound,
    power_border_rank_lower_bound,
    wedge_basis,
    wedge_sign,
)
from kronbound.linalg import certify_rank
from kronbound.tensor import LinearMap, Tensor, apply_maps, kronecker

from oracles import fraction_rank, koszul_p1_dense


def test_wedge_basis_order():
    assert wedge_basis(4, 2) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert wedge_sign(0, (1, 2)) == 1
    assert wedge_sign(1, (0, 2)) == -1


@settings(max_examples=25, deadline=None)
@given(arrays(np.int64, st.tuples(st.just(3), st.integers(1, 4), st.integers(1, 4)), elements=st.integers(-2, 2)))
def test_p1_flattening_matches_hand_built_oracle(a):
    M = flattening_matrix(Tensor.from_array(a), 1)
    expected = koszul_p1_dense(a)
    assert M.shape == expected.shape
    assert all(int(x) == int(y) for x, y in zip(M.flat, expected.flat))


@pytest.mark.parametrize("q", [2, 4, 6, 8])
def test_skew_restricted_flattening(q):
    T = cat.skewcw(q)
    phi = cat.skewbad_phi(q)
    cert = border_rank_lower_bound(T, 1, phi, "exact")
    oracle = koszul_p1_dense(apply_maps(T, (phi, None, None)).entries)
    assert cert.certified_rank == fraction_rank(oracle.tolist()) == 2 * q + 5
    assert cert.divisor == 2
    assert cert.bound == q + 3


@pytest.mark.parametrize("q", [2, 4])
def test_restricted_and_unrestricted_are_consistent(q):
    T = cat.skewcw(q)
    restricted = border_rank_lower_bound(T, 1, cat.skewbad_phi(q), "exact")
    full = border_rank_lower_bound(T, 1)
    assert full.divisor == comb(q, 1)
    assert restricted.bound <= certify_rank(flattening_matrix(T, 1, cat.skewbad_phi(q))).rank
    # both are lower bounds for the same border rank, and neither exceeds dims
    assert max(restricted.bound, full.bound) <= (q + 1) ** 2


@pytest.mark.parametrize("p", [1, 2, 3])
def test_det3_bounds_are_below_decomposition_rank(p):
    cert = border_rank_lower_bound(cat.det3(), p)
    assert cert.bound <= 18


@pytest.mark.parametrize("q", [4, 5, 8])
def test_cw_unrestricted(q):
    cert = border_rank_lower_bound(cat.cw(q), 1)
    assert cert.matrix_dims == (comb(q + 1, 2) * (q + 1), (q + 1) ** 2)
    assert cert.bound == -(-cert.certified_rank // q)


def test_divisor_rule():
    assert divisor_for(1, 9, True) == 2
    assert divisor_for(2, 9, True) == 6
    assert divisor_for(2, 9, False) == comb(8, 2)


@settings(max_examples=25, deadline=None)
@given(
    arrays(np.int64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.integers(-3, 3)),
    arrays(np.int64, st.tuples(st.integers(1, 4), st.integers(1, 4)), elements=st.integers(-3, 3)),
)
def test_rank_multiplicative_under_kron(M1, M2):
    assert certify_rank(np.kron(M1, M2)).rank == certify_rank(M1).rank * certify_rank(M2).rank


@settings(max_examples=40, deadline=None)
@given(arrays(np.int64, st.tuples(st.integers(1, 8), st.integers(1, 8)), elements=st.integers(-3, 3)))
def test_modular_never_exceeds_exact(M):
    assert certify_rank(M, "modular").rank <= certify_rank(M, "exact").rank


@pytest.mark.parametrize("q", [5, 6])
def test_square_direct_rank(q):
    cert = power_border_rank_lower_bound(cat.cw(q), 2, 1, cat.phi2(q, 2), "exact")
    assert cert.certified_rank == 2 * (q + 2) ** 2
    assert cert.bound == (q + 2) ** 2
    direct = border_rank_lower_bound(kronecker(cat.cw(q), cat.cw(q)), 1, cat.phi2(q, 2), "exact")
    assert direct.certified_rank == cert.certified_rank


def test_certificate_report_fields():
    rep = border_rank_lower_bound(cat.cw(4), 1).report()
    assert set(rep) >= {"p", "restriction", "matrix_dims", "rank", "method", "divisor", "bound"}


def test_kron_propagation():
    cert = border_rank_lower_bound(cat.skewcw(4), 1, cat.skewbad_phi(4), "exact")
    assert kron_propagated_bound(cert, cat.cw(3)) == -(-cert.certified_rank * 4 // 2)
    alpha = find_one_generic_witness(cat.cw(3))
    assert alpha.shape == (4,)


def test_not_one_generic():
    T = Tensor.from_array(np.zeros((2, 2, 2), dtype=np.int64))
    with pytest.raises(NotOneAGeneric):
        find_one_generic_witness(T, attempts=3)
