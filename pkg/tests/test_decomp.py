import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kronbound import catalog as cat
from kronbound import decomp as dc
from kronbound.errors import DomainMismatch, NoMagnitudeGap
from kronbound.koszul import border_rank_lower_bound
from kronbound.scalar import THETA, Cyclo6
from kronbound.decomp_data import CURVE17_Z
from kronbound.tensor import Tensor

from oracles import cp_tensor, det3_dense


# ---- polynomials in the unknowns

monos = st.dictionaries(
    st.lists(st.tuples(st.integers(1, 4), st.integers(1, 3)), max_size=3, unique_by=lambda t: t[0]).map(
        lambda m: tuple(sorted(m))
    ),
    st.integers(-5, 5),
    max_size=4,
)
points = st.lists(st.integers(-3, 3), min_size=4, max_size=4)


@given(monos, monos, points)
def test_zpoly_ring_operations_commute_with_evaluation(p, q, z):
    P, Q = dc.ZPoly(p), dc.ZPoly(q)
    assert (P * Q).evaluate(z) == P.evaluate(z) * Q.evaluate(z)
    assert (P + Q).evaluate(z) == P.evaluate(z) + Q.evaluate(z)
    assert (P - P).is_zero()


@given(monos.filter(bool))
def test_canonical_form(p):
    P = dc.ZPoly(p)
    if P.is_zero():
        return
    can, lead = P.canonical()
    assert can.sorted_terms()[0][1] == 1
    assert can * lead == P


@pytest.mark.parametrize("token", ["z1", "-z3", "2*z2", "0", "-1"])
def test_pattern_entries(token):
    p = dc.parse_pattern_entry(token)
    assert dc.parse_pattern_entry(dc.format_zpoly(p).replace(" ", "")) == p


# ---- exact Waring decompositions

def test_published_waring18():
    D = dc.published_waring18()
    assert D.rank == 18 and D.domain == "Q6"
    assert dc.verify_waring(cat.det3(), D)
    # an independent dense sum with the oracle det3
    acc = np.zeros((9, 9, 9), dtype=object)
    acc[...] = Cyclo6(0)
    for w in D.terms:
        acc = acc + np.multiply.outer(np.multiply.outer(w, w), w)
    assert all(x == y for x, y in zip(acc.flat, det3_dense().flat))


@pytest.mark.parametrize("i", [0, 5, 6, 17])
def test_dropping_a_term_breaks_it(i):
    assert not dc.verify_waring(cat.det3(), dc.published_waring18().drop(i))


def test_symbol_resolution_is_unique_theta():
    res = dc.resolve_waring_symbol()
    assert res.unique and res.verified
    assert res.value == THETA
    assert dc.published_waring18(THETA).rank == 18


def test_wrong_symbol_value_fails():
    assert not dc.verify_waring(cat.det3(), dc.published_waring18(1 - THETA))


def test_monomial_waring():
    D = dc.monomial_waring()
    assert D.rank == 4
    assert dc.verify_waring(cat.monomial_tensor(), D)


def test_waring_soundness_against_flattenings():
    D = dc.published_waring18()
    assert dc.verify_waring(cat.det3(), D)
    for p in (1, 2):
        assert border_rank_lower_bound(cat.det3(), p).bound <= D.rank


def test_domain_mismatch():
    with pytest.raises(DomainMismatch):
        dc.verify_waring(cat.det3(), dc.WaringDecomposition(tuple(np.ones((2, 9))), "RR"))


def test_waring_text_round_trip():
    D = dc.published_waring18()
    R = dc.read_decomposition(dc.write_decomposition(D))
    assert R.rank == D.rank
    assert all(all(x == y for x, y in zip(a, b)) for a, b in zip(R.terms, D.terms))
    M = dc.monomial_waring()
    R = dc.read_decomposition(dc.write_decomposition(M))
    assert R.weights == M.weights


# ---- curves

def test_curve17_residuals():
    r = dc.curve_residuals(dc.curve17(), cat.det3())
    assert r["c0"] < 1e-6 and r["c1"] < 1e-6 and r["c2-T"] < 1e-4


@pytest.mark.parametrize("t", [0.5, 0.1, -0.3, 0.01])
def test_expansion_agrees_with_dense_evaluation(t):
    D = dc.curve17()
    cs = dc.expand_curve(D, 3)
    series = sum(t ** k * c.as_float() for k, c in enumerate(cs))
    assert np.allclose(series, D.evaluate(t), atol=1e-9 * max(1.0, np.abs(series).max()))


def test_exact_curve_expansion():
    # (x + t y)^3 - x^3 = t (x x y + x y x + y x x) + O(t^2)
    terms = (([1, 0], [0, 1]), ([-1, 0], [0, 0]))
    D = dc.CurveDecomposition(terms, "QQ", target_order=1)
    c0, c1 = dc.expand_curve(D, 1)
    assert not np.any(c0.entries.astype(int))
    expected = np.zeros((2, 2, 2), dtype=int)
    expected[0, 0, 1] = expected[0, 1, 0] = expected[1, 0, 0] = 1
    assert np.array_equal(c1.entries.astype(int), expected)


def test_equation_system_shape():
    sysm = dc.generate_curve_equations(dc.curve17_pattern(), cat.det3())
    assert len(sysm.unknowns) == 44
    assert sysm.raw_count == 231
    assert sysm.linear_rank <= sysm.distinct_count
    assert all(e.order in (0, 1, 2) for e in sysm.equations)
    first = {((41, 2), (42, 1)), ((15, 2),), ((26, 1), (31, 2)), ((31, 2), (32, 1)), ((36, 2), (37, 1)),
             ((9, 1), (22, 2)), ((7, 1), (36, 2)), ((28, 2), (29, 1)), ((10, 2), (11, 1))}
    assert sysm.monomials(0) == first


def test_equations_vanish_at_published_values():
    sysm = dc.generate_curve_equations(dc.curve17_pattern(), cat.det3())

    vals = sysm.evaluate(list(CURVE17_Z))
    r = dc.curve_residuals(dc.curve17(), cat.det3())
    # the same data through two code paths: both are at round-off level
    assert np.abs(vals).max() < 1e-6
    assert max(r.values()) < 1e-6
    bumped = list(CURVE17_Z)
    bumped[0] += 0.1
    assert np.abs(sysm.evaluate(bumped)).max() > 1e-3
    assert max(dc.curve_residuals(dc.curve17(bumped), cat.det3()).values()) > 1e-3


def test_curve_text_round_trip():
    P = dc.curve17_pattern()
    R = dc.read_decomposition(dc.write_decomposition(P))
    assert R.rank == 17 and R.unknowns() == P.unknowns()
    N = dc.curve17()
    R = dc.read_decomposition(dc.write_decomposition(N))
    assert np.allclose(R.evaluate(0.2), N.evaluate(0.2))


# ---- numerical search

@pytest.mark.parametrize("seed", range(4))
def test_plant_and_recover(seed):
    rng = np.random.default_rng(seed)
    r = 3
    dims = tuple(int(d) for d in rng.integers(3, 6, size=3))
    A, B, C = (rng.standard_normal((d, r)) for d in dims)
    T = Tensor(cp_tensor(A, B, C), "RR")
    res = dc.gauss_newton_search(T, r, dc.SearchConfig(restarts=5, seed=seed))
    assert res.residual < 1e-10
    assert np.allclose(res.decomposition.reconstruct(), T.entries, atol=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_history_is_non_increasing(seed, r):
    rng = np.random.default_rng(seed)
    T = Tensor(rng.standard_normal((3, 3, 3)), "RR")
    res = dc.gauss_newton_search(T, r, dc.SearchConfig(max_iter=60, restarts=2, seed=seed))
    h = np.array(res.history)
    assert np.all(np.diff(h) <= 1e-15)
    assert res.residual == pytest.approx(h[-1])


def test_search_is_deterministic():
    T = Tensor(np.random.default_rng(5).standard_normal((3, 3, 3)), "RR")
    cfg = dc.SearchConfig(max_iter=50, restarts=3, seed=11)
    a, b = dc.gauss_newton_search(T, 2, cfg), dc.gauss_newton_search(T, 2, cfg)
    assert a.residual == b.residual and a.restart == b.restart


@pytest.mark.parametrize("target", [None, 2.7])
def test_parallel_restarts_match_sequential(target):
    T = Tensor(np.random.default_rng(6).standard_normal((3, 3, 3)), "RR")
    seq = dc.gauss_newton_search(T, 2, dc.SearchConfig(max_iter=50, restarts=6, seed=3, target=target))
    par = dc.gauss_newton_search(T, 2, dc.SearchConfig(max_iter=50, restarts=6, seed=3, target=target, workers=3))
    assert (par.residual, par.restart, par.residuals) == (seq.residual, seq.restart, seq.residuals)
    assert len(seq.residuals) == (6 if target is None else 1)


def test_zero_rank_returns_norm():
    T = Tensor(np.ones((2, 2, 2)), "RR")
    assert dc.gauss_newton_search(T, 0).residual == pytest.approx(np.sqrt(8))


def test_sparsify_keeps_exact_fit():
    A = np.array([[1.0, 0], [0, 1.0]])
    T = Tensor(cp_tensor(A, A, A), "RR")
    res = dc.gauss_newton_search(T, 2, dc.SearchConfig(restarts=5, seed=1))
    sp, zeroed = dc.sparsify(T, res, dc.SearchConfig(max_iter=100))
    assert sp.residual < 1e-8
    assert zeroed >= 6  # two rank-one terms of unit vectors have six zeros at best


# ---- graded initial guess from an SVD

def test_grading():
    assert dc.grade_singular_values([1.0, 0.5, 1e-3, 2e-3, 1e-6], 1e-3) == (0, 0, 1, 1, 2)
    with pytest.raises(NoMagnitudeGap):
        dc.grade_singular_values([1.0, 0.9, 0.5], 1e-3)


@pytest.mark.parametrize("n,seed", [(3, 0), (4, 1)])
def test_pencil_fit_recovers_planted_pencil(n, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(n), rng.standard_normal(n)
    c0, c1 = dc._curve_coefficients(a, b)[:2]
    A, B, res = dc._fit_pencil(c0, c1, a + 0.05 * rng.standard_normal(n))
    assert res < 1e-10
    assert np.allclose(A, a) and np.allclose(B, b)


def test_curve_fit_shapes():
    D = dc.curve17()
    t0 = 1e-2
    sample = dc.WaringDecomposition(tuple(a + t0 * b for a, b in D.terms), "RR")
    fit = dc.curve_fit_from_svd(sample, t0)
    assert len(fit.grading) == 17 and len(set(fit.grading)) > 1
    assert fit.curve.rank == 17
    assert all(np.isfinite(r) for r in fit.fit_residuals)
    with pytest.raises(DomainMismatch):
        dc.curve_fit_from_svd(dc.published_waring18(), t0)
