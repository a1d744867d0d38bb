import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from kronbound import _modrank_py, linalg
from kronbound.errors import BadParameter
from kronbound.linalg import (
    EXACT_BAREISS,
    EXACT_SPARSE,
    MODULAR,
    certify_rank,
    exact_rank,
    modular_rank,
    nullspace,
    rank_bareiss,
    rank_mod_p,
    rank_sparse,
)
from kronbound.scalar import PRIMES

from oracles import fraction_rank

try:
    from kronbound import _modrank
except ImportError:
    _modrank = None

shapes = st.tuples(st.integers(1, 7), st.integers(1, 7))
int_mats = shapes.flatmap(lambda s: arrays(np.int64, s, elements=st.integers(-4, 4)))


@settings(max_examples=60, deadline=None)
@given(int_mats)
def test_exact_ranks_match_oracle(M):
    r = fraction_rank(M.tolist())
    assert rank_bareiss(M) == r
    assert rank_sparse(M) == r


@settings(max_examples=60, deadline=None)
@given(int_mats)
def test_modular_rank_is_lower_bound(M):
    exact = fraction_rank(M.tolist())
    for p in PRIMES + (2, 3):
        assert rank_mod_p(M, p) <= exact


def test_small_prime_can_undercount():
    M = np.array([[1, 1], [1, 3]])
    assert rank_mod_p(M, 2) == 1
    assert certify_rank(M, "exact").rank == 2


def test_rational_entries():
    M = np.array([[Fraction(1, 2), Fraction(1, 3)], [Fraction(3, 2), 1]], dtype=object)
    assert exact_rank(M).rank == 1
    assert modular_rank(M).rank == 1


@settings(max_examples=40, deadline=None)
@given(int_mats)
def test_nullspace_is_kernel(M):
    basis = nullspace(M)
    assert len(basis) == M.shape[1] - fraction_rank(M.tolist())
    for v in basis:
        assert all(sum(Fraction(int(a)) * b for a, b in zip(row, v)) == 0 for row in M)


@pytest.mark.skipif(_modrank is None, reason="compiled kernel not built")
@pytest.mark.parametrize("seed", range(5))
def test_backends_agree(seed):
    rng = np.random.default_rng(seed)
    n, m, r = rng.integers(5, 60, size=3)
    A = rng.integers(-5, 6, size=(n, r)) @ rng.integers(-5, 6, size=(r, m))
    for p in PRIMES:
        red = (A % p).astype(np.uint64)
        assert _modrank.rank_mod_p(red.copy(), p) == _modrank_py.rank_mod_p(red.copy(), p)


def test_pure_python_switch():
    env = dict(os.environ, KRONBOUND_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import kronbound.linalg as l; print(l.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_auto_method_labels():
    sparse = np.eye(20, dtype=np.int64)
    assert certify_rank(sparse).method == EXACT_SPARSE
    dense = np.ones((4, 4), dtype=np.int64) + np.eye(4, dtype=np.int64)
    assert certify_rank(dense).method == EXACT_BAREISS
    big = np.eye(linalg.EXACT_AUTO_LIMIT + 1, dtype=np.int64)
    res = certify_rank(big)
    assert res.method == MODULAR and not res.exact
    assert res.rank == linalg.EXACT_AUTO_LIMIT + 1
    assert res.describe().startswith(MODULAR)


def test_exact_limit_enforced():
    with pytest.raises(BadParameter):
        exact_rank(np.zeros((linalg.EXACT_LIMIT + 1, 1), dtype=np.int64))
    with pytest.raises(BadParameter):
        certify_rank(np.eye(2), "magic")
