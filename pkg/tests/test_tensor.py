from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from kronbound import catalog as cat
from kronbound.errors import DimensionMismatch, NotAKroneckerPower
from kronbound.fileio import read_tensor, write_tensor
from kronbound.scalar import THETA
from kronbound.tensor import (
    LinearMap,
    Tensor,
    apply_maps,
    contract_axis,
    kron_power,
    kronecker,
    permute_kron_factors,
    regroup,
    tensors_equal,
)

small = st.integers(1, 3)


def int_tensor(shape):
    return arrays(np.int64, shape, elements=st.integers(-3, 3)).map(Tensor.from_array)


@st.composite
def tensor3(draw):
    return draw(int_tensor(tuple(draw(small) for _ in range(3))))


def test_kronecker_matches_einsum_oracle():
    rng = np.random.default_rng(1)
    a = rng.integers(-3, 4, size=(2, 3, 2))
    b = rng.integers(-3, 4, size=(3, 2, 2))
    K = kronecker(Tensor.from_array(a), Tensor.from_array(b)).entries
    for i, j, k, x, y, z in np.ndindex(2, 3, 2, 3, 2, 2):
        assert K[i * 3 + x, j * 2 + y, k * 2 + z] == a[i, j, k] * b[x, y, z]
    assert kronecker(Tensor.from_array(a), Tensor.from_array(b)).factors == ((2, 3), (3, 2), (2, 2))


@settings(max_examples=30, deadline=None)
@given(tensor3(), tensor3(), tensor3())
def test_kronecker_associative(S, T, U):
    left = kronecker(kronecker(S, T), U)
    right = kronecker(S, kronecker(T, U))
    assert np.array_equal(left.entries, right.entries)


@settings(max_examples=30, deadline=None)
@given(tensor3(), tensor3())
def test_kronecker_multiplies_nonzero_count(S, T):
    assert kronecker(S, T).nnz() == S.nnz() * T.nnz()


@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_apply_maps_composes(data):
    T = data.draw(tensor3())
    gs, hs = [], []
    for d in T.dims:
        m = data.draw(small)
        n = data.draw(small)
        hs.append(data.draw(arrays(np.int64, (m, d), elements=st.integers(-2, 2))))
        gs.append(data.draw(arrays(np.int64, (n, m), elements=st.integers(-2, 2))))
    seq = apply_maps(apply_maps(T, hs), gs)
    once = apply_maps(T, [g @ h for g, h in zip(gs, hs)])
    assert np.array_equal(seq.entries, once.entries)


@pytest.mark.parametrize(
    "name,params,N",
    [
        ("cw", {"q": 2}, 2),
        ("cw", {"q": 2}, 3),
        ("skewcw", {"q": 2}, 2),
        ("skewcw", {"q": 2}, 3),
        ("tight", {"index": 5}, 2),
        ("tight", {"index": 5}, 3),
        ("matmult", {"n": 2}, 2),
    ],
)
def test_kron_power_is_slot_symmetric(name, params, N):
    T = cat.build(name, **params)
    P = kron_power(T, N)
    for sigma in permutations(range(N)):
        assert tensors_equal(permute_kron_factors(P, sigma), P)


def test_permute_needs_recorded_factors():
    with pytest.raises(NotAKroneckerPower):
        permute_kron_factors(cat.cw(2), (1, 0))


@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_contract_axis_is_linear(data):
    T = data.draw(tensor3())
    axis = data.draw(st.integers(0, 2))
    vec = st.lists(st.integers(-3, 3), min_size=T.dims[axis], max_size=T.dims[axis])
    u, v = np.array(data.draw(vec)), np.array(data.draw(vec))
    a, b = data.draw(st.integers(-3, 3)), data.draw(st.integers(-3, 3))
    lhs = contract_axis(T, axis, a * u + b * v).entries
    rhs = a * contract_axis(T, axis, u).entries + b * contract_axis(T, axis, v).entries
    assert np.array_equal(lhs, rhs)


def test_contract_rejects_wrong_length():
    with pytest.raises(DimensionMismatch):
        contract_axis(cat.cw(2), 0, [1, 2])


def test_regroup_flattens_in_order():
    T = Tensor.from_array(np.arange(24).reshape(2, 3, 4))
    R = regroup(T, [(0, 1), (2,)])
    assert R.dims == (6, 4)
    assert np.array_equal(R.entries, np.arange(24).reshape(6, 4))


@settings(max_examples=30, deadline=None)
@given(tensor3())
def test_tensor_text_round_trip(T):
    assert tensors_equal(read_tensor(write_tensor(T)), T)


def test_cyclotomic_tensor_round_trip():
    T = Tensor.from_entries((2, 2), [((0, 1), THETA), ((1, 0), Fraction(1, 3))], "Q6")
    text = write_tensor(T)
    assert text.splitlines()[0] == "tensor Q6 2 2"
    assert tensors_equal(read_tensor(text), T)


def test_float_tensor_round_trip():
    T = Tensor(np.array([[0.5, -1.25], [0.0, 3.0]]), "RR")
    assert np.array_equal(read_tensor(write_tensor(T)).entries, T.entries)


def test_linear_map_compose():
    a = LinearMap.from_array([[1, 2], [0, 1]])
    b = LinearMap.from_array([[1, 0, 1], [0, 1, 1]])
    assert np.array_equal(a.compose(b).entries, np.array([[1, 2, 3], [0, 1, 1]]))
    with pytest.raises(DimensionMismatch):
        b.compose(a)
