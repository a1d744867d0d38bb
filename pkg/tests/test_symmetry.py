import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from kronbound import catalog as cat
from kronbound.symmetry import is_concise, lie_algebra_dim, superadditivity_check, tightness_check
from kronbound.tensor import Tensor

TABLE = [
    ((1, None), (5, 22)),
    ((2, None), (3, 9)),
    ((3, None), (5, 13)),
    ((4, None), (4, 9)),
    ((5, None), (3, 7)),
    ((6, None), (4, 9)),
    ((7, None), (2, 5)),
    ((8, None), (4, 9)),
    ((9, None), (6, 28)),
    ((10, None), (1, 2)),
    ((11, -1), (5, 10)),
    ((11, 2), (1, 2)),
]


def annihilator_dim_oracle(T: np.ndarray) -> int:
    """Dense float rank of the map (X, Y, Z) -> X.T + T.Y + T.Z."""
    cols = []
    for axis in range(3):
        n = T.shape[axis]
        for u in range(n):
            for v in range(n):
                E = np.zeros((n, n))
                E[u, v] = 1
                cols.append(np.moveaxis(np.tensordot(E, T, axes=([1], [axis])), 0, axis).reshape(-1))
    A = np.array(cols).T.astype(float)
    return A.shape[1] - np.linalg.matrix_rank(A)


@pytest.mark.parametrize("key,expected", TABLE)
def test_symmetry_table(key, expected):
    T = cat.tight(*key)
    g1, g2, strict = superadditivity_check(T)
    assert (g1, g2) == expected
    assert strict == (key[0] <= 9)


@pytest.mark.parametrize("key", [k for k, _ in TABLE])
def test_lie_dim_matches_dense_oracle(key):
    T = cat.tight(*key)
    assert lie_algebra_dim(T).solution_dim == annihilator_dim_oracle(T.entries.astype(float))


@pytest.mark.parametrize("key", [k for k, _ in TABLE])
def test_tight_tensors_are_tight(key):
    w = tightness_check(cat.tight(*key))
    assert w.satisfied
    for i, j, k in zip(*np.nonzero(cat.tight(*key).entries.astype(float))):
        assert w.a[i] + w.b[j] + w.c[k] == 0
    for vec in (w.a, w.b, w.c):
        assert len(set(vec)) == len(vec)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_cw_is_not_tight(q):
    w = tightness_check(cat.cw(q))
    assert not w.satisfied
    assert w.blocking_pair is not None


@pytest.mark.parametrize("key", [(3, None), (6, None), (9, None), (11, 2)])
@pytest.mark.parametrize("perm", [(1, 0, 2), (2, 1, 0), (1, 2, 0)])
def test_tightness_invariant_under_factor_permutation(key, perm):
    T = cat.tight(*key)
    P = Tensor.from_array(T.entries.transpose(perm))
    assert tightness_check(P).satisfied == tightness_check(T).satisfied


@settings(max_examples=30, deadline=None)
@given(arrays(np.int64, st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3)), elements=st.integers(-2, 2)))
def test_scaling_kernel_always_present(a):
    if not a.any():
        return
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = lie_algebra_dim(Tensor.from_array(a))
    assert res.solution_dim >= 2
    assert res.solution_dim == annihilator_dim_oracle(a.astype(float))


@pytest.mark.parametrize("name,params", [("cw", {"q": 2}), ("skewcw", {"q": 2}), ("tight", {"index": 7})])
def test_square_at_least_doubles(name, params):
    g1, g2, _ = superadditivity_check(cat.build(name, **params))
    assert g2 >= 2 * g1


def test_non_concise_warns():
    a = np.zeros((2, 2, 2), dtype=np.int64)
    a[0, 0, 0] = 1
    T = Tensor.from_array(a)
    assert not is_concise(T)
    with pytest.warns(UserWarning):
        res = lie_algebra_dim(T)
    assert not res.concise
