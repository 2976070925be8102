import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mpf, workdps

from genli import numerics as nm
from genli.errors import AccuracyError, DomainError


def test_ext_converts_fractions_exactly():
    with workdps(50):
        assert nm.ext(Fraction(1, 3), 50) == mpf(1) / 3


def test_ext_rejects_tiny_precision():
    with pytest.raises(DomainError):
        nm.ext(1, 4)


def test_to_decimal_round_trips():
    with workdps(40):
        x = mpmath.pi / 7
        assert abs(nm.ext(nm.to_decimal(x, 40), 40) - x) < mpf(10) ** -38


def test_comp_sum_cancellation():
    # 1e16 + 1 - 1e16 loses the 1 in naive float addition.
    terms = [1e16, 1.0, -1e16] * 1000
    assert nm.comp_sum(terms, 30) == 1000


def test_comp_sum_matches_exact_rational():
    rng = np.random.default_rng(7)
    vals = rng.standard_normal(5000) * 10.0 ** rng.integers(-8, 8, 5000)
    exact = sum(Fraction(v) for v in vals.tolist())
    # Float arrays come back correctly rounded to binary64.
    assert float(nm.comp_sum(vals, 40)) == float(exact)
    got = nm.comp_sum(vals.tolist(), 40)
    with workdps(40):
        assert abs(got - mpf(exact.numerator) / exact.denominator) <= mpf(10) ** -30 * max(1, abs(got))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=200),
       st.integers(1, 50))
def test_comp_sum_chunking_agrees_with_fsum(values, chunk):
    ref = math.fsum(values)
    got = float(nm.comp_sum(values, 30, chunk_size=chunk))
    assert got == pytest.approx(ref, abs=1e-9 * (1 + max(abs(v) for v in values)))


def test_comp_sum_chunked_is_deterministic():
    vals = np.random.default_rng(1).standard_normal(10000).tolist()
    a = nm.comp_sum(vals, 30, chunk_size=97)
    b = nm.comp_sum(vals, 30, chunk_size=97)
    assert a == b


@pytest.mark.parametrize("x", ["0.25", "1", "2.5", "7", "100.5", "1e6"])
def test_digamma_against_mpmath(x):
    with workdps(80):
        ref = mpmath.digamma(mpf(x))
    got = nm.digamma(x, 60)
    assert abs(got - ref) < mpf(10) ** -55 * max(1, abs(ref))


def test_digamma_at_one_is_minus_gamma():
    with workdps(60):
        assert abs(nm.digamma(1, 60) + mpmath.euler) < mpf(10) ** -58


def test_digamma_domain():
    with pytest.raises(DomainError):
        nm.digamma(0)


@pytest.mark.parametrize("m", [0, 1, 2, 5, 12, 30])
@pytest.mark.parametrize("x", ["0", "0.7", "3", "25"])
def test_laguerre_recurrence_against_explicit_sum(m, x):
    a = nm.laguerre_l1(m, x, 40)
    b = nm.laguerre_l1_explicit(m, x, 40)
    with workdps(40):
        assert abs(a - b) <= mpf(10) ** -30 * max(1, abs(b))


def test_laguerre_against_sympy():
    X = sympy.Symbol("x")
    for m in range(0, 8):
        poly = sympy.assoc_laguerre(m, 1, X)
        for x in (sympy.Rational(1, 3), sympy.Integer(5)):
            ref = sympy.nsimplify(poly.subs(X, x))
            assert abs(float(nm.laguerre_l1(m, float(x), 30)) - float(ref)) < 1e-12 * max(1, abs(float(ref)))


def test_laguerre_l1_is_minus_derivative():
    with workdps(40):
        for m in (1, 4, 9):
            d = mpmath.diff(lambda t: mpmath.laguerre(m + 1, 0, t), mpf("1.3"))
            assert abs(nm.laguerre_l1(m, "1.3", 40) + d) < mpf(10) ** -25


def test_laguerre_all_matches_single():
    vals = nm.laguerre_l1_all(10, "2.2", 40)
    for m, v in enumerate(vals):
        assert abs(v - nm.laguerre_l1(m, "2.2", 40)) < mpf(10) ** -35


def test_chebyshev_u_against_mpmath_and_identity():
    with workdps(40):
        for m in (0, 1, 5, 40):
            for x in ("-0.9", "0.1", "0.999"):
                assert abs(nm.chebyshev_u(m, x, 40) - mpmath.chebyu(m, mpf(x))) < mpf(10) ** -30
        th = mpf("0.37")
        assert abs(nm.chebyshev_u(9, mpmath.cos(th), 40) * mpmath.sin(th) - mpmath.sin(10 * th)) < mpf(10) ** -30


def test_chebyshev_array_matches_scalar():
    x = np.linspace(-1, 1, 11)
    arr = nm.chebyshev_u_array(7, x)
    for xi, ai in zip(x, arr):
        assert ai == pytest.approx(float(nm.chebyshev_u(7, xi, 30)), abs=1e-12)


def test_chebyshev_domain():
    with pytest.raises(DomainError):
        nm.chebyshev_u(3, 1.5)


@pytest.mark.parametrize("j,q", [(2, "1"), (3, "0.25"), (7, "2.5"), (20, "0.75")])
def test_hurwitz_against_mpmath(j, q):
    with workdps(70):
        ref = mpmath.zeta(j, mpf(q))
    assert abs(nm.hurwitz_zeta_int(j, q, 60) - ref) < mpf(10) ** -55 * ref


def test_hurwitz_domain():
    with pytest.raises(DomainError):
        nm.hurwitz_zeta_int(1, 1)


def test_gauss_legendre_exact_on_polynomials():
    x, w = nm.gauss_legendre(10, 30)
    with workdps(30):
        for k in range(0, 20):
            got = mpmath.fsum(wi * xi**k for xi, wi in zip(x, w))
            exact = mpf(2) / (k + 1) if k % 2 == 0 else 0
            assert abs(got - exact) < mpf(10) ** -25


def test_quad_finite_and_half_line():
    r = nm.quad_adaptive(lambda t: mpmath.exp(-t * t), 0, 3, 1e-25, prec=40)
    with workdps(40):
        assert abs(r.value - mpmath.sqrt(mpmath.pi) / 2 * mpmath.erf(3)) < mpf(10) ** -24
    r = nm.quad_adaptive(lambda t: mpmath.exp(-t), 0, mpmath.inf, 1e-20, prec=40)
    assert abs(r.value - 1) < mpf(10) ** -18


def test_quad_oscillatory_half_line():
    # Dirichlet integral: sin t / t over [0, inf) is pi/2.
    f = lambda t: mpmath.sin(t) / t if t != 0 else mpf(1)
    r = nm.quad_adaptive(f, 0, mpmath.inf, 1e-12, prec=30, period=mpmath.pi)
    assert abs(r.value - mpmath.pi / 2) < 1e-10


def test_quad_vectorized():
    r = nm.quad_adaptive(lambda t: np.cos(t) ** 2, 0.0, 10.0, 1e-12, vectorized=True)
    assert r.value == pytest.approx(5 + math.sin(20) / 4, abs=1e-11)


def test_quad_reports_failure():
    with pytest.raises(AccuracyError):
        nm.quad_adaptive(lambda t: np.abs(np.sin(1 / t)) / t, 1e-9, 1.0, 1e-14, vectorized=True, max_intervals=20)
