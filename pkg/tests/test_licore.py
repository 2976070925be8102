import math

import mpmath
import numpy as np
import pytest
import sympy
from mpmath import mpf, workdps

from genli import licore
from genli.errors import AccuracyError, DomainError
from genli.licore import Route


def d_oracle(n, b, dps=40):
    """(1/(n-1)!) d^n/dz^n ((z+b)^(n-1) ln xi(z)) at z = 1 + b by numerical differentiation."""
    with workdps(dps):
        b = mpf(b)

        def f(z):
            xi = z * (z - 1) / 2 * mpmath.pi ** (-z / 2) * mpmath.gamma(z / 2) * mpmath.zeta(z)
            return (z + b) ** (n - 1) * mpmath.log(xi)
        return mpmath.diff(f, 1 + b, n) / mpmath.factorial(n - 1)


def zeta_part_oracle(n, b, dps=40):
    """Zeta part sum_j C(n,j) s^(j-1)/(j-1)! (ln zeta)^(j)(1+b)."""
    with workdps(dps):
        s = 2 * mpf(b) + 1
        return mpmath.fsum(mpmath.binomial(n, j) * s ** (j - 1) / mpmath.factorial(j - 1)
                           * mpmath.diff(lambda z: mpmath.log(mpmath.zeta(z)), 1 + mpf(b), j)
                           for j in range(1, n + 1))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_convention_on_one_zero_pair(n):
    # For f with zeros at 1/2 +- iT only, the generalized coefficient of ln f
    # and the zero sum differ by exactly the factor 2b + 1.
    z = sympy.Symbol("z")
    b = sympy.Rational(3, 4)
    T = sympy.Rational(7, 2)
    rho = sympy.Rational(1, 2) + sympy.I * T
    lnf = sympy.log(z - rho) + sympy.log(z - sympy.conjugate(rho))
    D = sympy.diff((z + b) ** (n - 1) * lnf, z, n).subs(z, 1 + b) / sympy.factorial(n - 1)
    k = sum(1 - ((r + b) / (r - 1 - b)) ** n for r in (rho, sympy.conjugate(rho)))
    assert sympy.simplify(sympy.nsimplify(sympy.expand_complex(k / D))) == 2 * b + 1


def test_parse_route():
    assert licore.parse_route("a") is Route.ZERO_SUM
    assert licore.parse_route("contour") is Route.CONTOUR
    with pytest.raises(ValueError):
        licore.parse_route("Z")


def test_zero_phase_consistency():
    p = licore.zero_phase(14.134725, 1, 30)
    with workdps(30):
        assert abs(mpmath.sin(p.theta) - p.sin) < mpf(10) ** -25
        assert abs(mpmath.cos(p.theta) - p.cos) < mpf(10) ** -25


def test_lambda1_closed_form():
    with workdps(40):
        ref = mpmath.diff(lambda z: mpmath.log(z * (z - 1) / 2 * mpmath.pi ** (-z / 2) * mpmath.gamma(z / 2)
                                               * mpmath.zeta(z)), 1)
        assert abs(licore.lambda1(40) - ref) < mpf(10) ** -30


def test_route_a_lambda1(zeros):
    r = licore.k_sum_zeros(1, 0, zeros)
    assert abs(r.value - licore.lambda1()) <= r.err
    assert r.k_value == r.value


@pytest.mark.parametrize("n,b", [(1, 1), (2, 1), (3, 0.5), (4, 2)])
def test_route_a_against_derivative_oracle(zeros, n, b):
    r = licore.k_sum_zeros(n, b, zeros)
    ref = d_oracle(n, b)
    assert abs(r.value - ref) <= r.err + mpf("1e-12")
    with workdps(30):
        assert abs(r.k_value - (2 * mpf(b) + 1) * r.value) < mpf(10) ** -25


def test_route_a_terms_are_nonnegative(zeros):
    for n in (1, 7, 50):
        assert (licore._phase_terms(n, 3.0, np.asarray(zeros.ordinates[:1000])) >= 0).all()


def test_route_a_tail_shrinks_error(zeros):
    small = zeros.head(2000)
    with_tail = licore.k_sum_zeros(3, 1, small)
    ref = d_oracle(3, 1)
    assert abs(with_tail.value - ref) <= with_tail.err
    raw = licore.k_sum_zeros(3, 1, small, tail=False)
    assert abs(with_tail.value - ref) < abs(raw.value - ref) / 10


def test_domain_checks(zeros):
    with pytest.raises(DomainError):
        licore.k_sum_zeros(0, 1, zeros)
    with pytest.raises(DomainError):
        licore.k_sum_zeros(1, -0.5, zeros)
    with pytest.raises(DomainError):
        licore.d_pole_term(3, 0)


def test_trivial_zero_sum_against_nsum():
    for n, b in [(2, 0), (5, 1), (12, 0.5)]:
        S, err = licore.trivial_zero_sum_inf(n, b, 30)
        with workdps(30):
            ref = mpmath.nsum(lambda k: licore._trivial_summand(n, mpf(b), k), [1, mpmath.inf])
            assert abs(S - ref) <= err + mpf(10) ** -20


def test_trivial_partial_sum_tail_bound():
    S_inf, _ = licore.trivial_zero_sum_inf(6, 1, 30)
    S_K, tail = licore.trivial_zero_sum(6, 1, 200, 30)
    assert abs(S_inf - S_K) <= tail


def test_gamma_term_against_derivative():
    for n, b in [(2, 1), (4, 0.5)]:
        with workdps(50):
            bb = mpf(b)
            f = lambda z: (z + bb) ** (n - 1) * mpmath.log(z * mpmath.gamma(z / 2))
            ref = mpmath.diff(f, 1 + bb, n) / mpmath.factorial(n - 1)
        assert abs(licore.d_gamma_term(n, b, 40) - ref) < mpf(10) ** -25


def test_pole_term_against_derivative():
    for n, b in [(1, 1), (3, 0.5), (6, 2)]:
        with workdps(50):
            bb = mpf(b)
            ref = mpmath.diff(lambda z: (z + bb) ** (n - 1) * mpmath.log(z - 1), 1 + bb, n) \
                / mpmath.factorial(n - 1)
        assert abs(licore.d_pole_term(n, b, 40) - ref) < mpf(10) ** -25


def test_pole_term_size_at_30():
    assert licore.d_pole_term(30, 1) == pytest.approx((1 - 2**30) / 3)


def test_anchor_matches_route_a(zeros, sieve):
    for b in (0.5, 1, 2):
        a, err = licore.d1_anchor(b, sieve, with_err=True)
        r = licore.k_sum_zeros(1, b, zeros)
        assert abs(a - r.value) <= err + r.err


def test_plan_precision_feasibility():
    M = 10**7
    P6, ok6 = licore.plan_precision(6, 1, M, 1e-3)
    P30, ok30 = licore.plan_precision(30, 1, M, 1e-3)
    assert ok6 and not ok30
    assert P30 >= P6 >= 16
    assert licore.plan_precision(1, 1, M, 1e-3)[0] < 25


@pytest.mark.parametrize("n", [1, 3, 6])
def test_laguerre_series_against_oracle(sieve, n):
    r = licore.laguerre_series(n, 1, sieve)
    assert abs(r.value - zeta_part_oracle(n, 1)) <= r.err
    assert r.limit == sieve.limit and len(r.checkpoints) == 4


def test_laguerre_series_small_table_is_infeasible(small_sieve):
    with pytest.raises(AccuracyError) as e:
        licore.laguerre_series(6, 0.5, small_sieve, tol=1e-8)
    assert e.value.estimate is not None


def test_route_b_reports_infeasible(small_sieve):
    r = licore.d_xi_route_b(6, 0.5, small_sieve, tol=1e-8)
    assert r.status == "infeasible"


def test_route_b_and_d_agree(sieve):
    b_res = licore.d_xi_route_b(4, 1, sieve, nmax=6)
    d_res = licore.k_route_arithmetic(4, 2, sieve, nmax=6)
    with workdps(40):
        assert abs(d_res.value - b_res.value) < mpf(10) ** -20
        assert abs(d_res.k_value - 3 * b_res.value) < mpf(10) ** -19


def test_route_d_domain(sieve):
    with pytest.raises(DomainError):
        licore.k_route_arithmetic(2, 1.0, sieve)


def test_hurwitz_term_small_cases():
    assert licore.hurwitz_trivial_term(1, 2) == 0
    with workdps(40):
        ref = mpf(3) ** 2 / 4 * mpmath.zeta(2, 1)
    assert abs(licore.hurwitz_trivial_term(2, 2, 40) - ref) < mpf(10) ** -30


def test_route_c_against_oracle():
    r = licore.d_xi_route_c(2, 1, tol=1e-6)
    assert abs(r.value - d_oracle(2, 1)) <= r.err
    assert r.meta["t_cut"] >= 50


def test_contour_abscissa_domain():
    with pytest.raises(DomainError):
        licore.d_zeta_contour(2, 1, c=2.5)


def test_contour_prime_series_option(sieve):
    a = licore.d_zeta_contour(1, 1, tol=1e-4, lnzeta="primes", table=sieve)
    assert abs(a.value - zeta_part_oracle(1, 1)) <= a.err


def test_d_shifted_n1_closed_form(zeros, sieve):
    r = licore.d_shifted(1, 1, zeros)
    assert abs(r.value - licore.shifted_n1_closed_form(1, sieve)) <= r.err + mpf("1e-8")


def test_d_shifted_stable_vs_contour(zeros):
    a = licore.d_shifted(3, 1, zeros)
    c = licore.d_shifted_contour(3, 1, tol=1e-6)
    assert abs(a.value - c.value) <= a.err + c.err


def test_d_shifted_unstable_path(zeros, sieve):
    r = licore.d_shifted(4, 1, zeros, sieve)
    assert r.meta["unstable_feasible"]
    assert abs(r.meta["unstable"] - r.value) <= r.meta["unstable_err"] + r.err


@pytest.mark.parametrize("n,b", [(1, 1), (2, 2), (4, 1)])
def test_zero_sum_identity(zeros, sieve, n, b):
    rep = licore.verify_eq22(n, b, zeros, sieve)
    assert rep.passed, rep.extra


def test_bound_report_serialises():
    rep = licore.BoundReport("x", {"n": 2}, mpf(1), mpf(2), mpf(1), True, {"note": "ok"})
    d = rep.as_dict()
    assert d["pass"] is True and d["note"] == "ok" and d["lhs"].startswith("1")
