import math

import mpmath
import numpy as np
import pytest
import sympy
from mpmath import mpf, workdps

from genli import arithfn
from genli.errors import DomainError, ResourceError


def brute_lambda(m):
    f = sympy.factorint(m)
    return math.log(next(iter(f))) if len(f) == 1 else 0.0


def test_sieve_matches_factorisation(small_sieve):
    for m in list(range(1, 2000)) + [65536, 59049, 99991, 99989 * 1, 97 * 97, 2 * 3 * 5 * 7]:
        assert small_sieve(m) == pytest.approx(brute_lambda(m), abs=1e-15), m


def test_sieve_segment_boundaries():
    # Values straddling the 2^20 segment edge.
    t = arithfn.sieve_von_mangoldt(arithfn.SEGMENT + 5000)
    for m in range(arithfn.SEGMENT - 300, arithfn.SEGMENT + 300):
        assert t(m) == pytest.approx(brute_lambda(m), abs=1e-15), m


def test_chebyshev_psi_against_sympy(small_sieve):
    for x in (10, 100, 1000, 99999):
        ref = sum(math.log(p) * int(math.log(x) / math.log(p) + 1e-12) for p in sympy.primerange(2, x + 1))
        assert small_sieve.chebyshev_psi(x) == pytest.approx(ref, rel=1e-13)


def test_prime_powers_listing(small_sieve):
    m, lam = small_sieve.prime_powers(32)
    assert m.tolist() == [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32]
    assert lam[2] == pytest.approx(math.log(2))


def test_lambda_ext(small_sieve):
    with workdps(50):
        assert small_sieve.lambda_ext(81, 50) == mpmath.log(3)
        assert small_sieve.lambda_ext(12, 50) == 0


def test_cache_round_trip(tmp_path):
    a = arithfn.sieve_von_mangoldt(5000, cache_dir=tmp_path)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    b = arithfn.sieve_von_mangoldt(5000, cache_dir=tmp_path)
    assert np.array_equal(a.base, b.base) and np.array_equal(a.lam, b.lam)


def test_cache_rejects_garbage(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"nonsense")
    with pytest.raises(Exception):
        arithfn.read_table(p)


def test_memory_budget():
    with pytest.raises(ResourceError):
        arithfn.sieve_von_mangoldt(10**9, memory_bytes=10**6)


def test_sieve_domain():
    with pytest.raises(DomainError):
        arithfn.sieve_von_mangoldt(1)


def test_psi_within_sanity_band(sieve):
    M = sieve.limit
    assert abs(sieve.chebyshev_psi() - M) < arithfn.psi_sanity_band(M)


@pytest.mark.parametrize("c,t", [(1.5, 0.0), (2.0, 10.0), (1.3, 100.0)])
def test_log_zeta_line_against_mpmath(sieve, c, t):
    r = arithfn.log_zeta_line(c, t, sieve)
    with workdps(30):
        ref = mpmath.log(mpmath.zeta(mpmath.mpc(c, t)))
    assert abs(r.re - ref.real) <= r.tail
    assert abs(r.im - ref.imag) <= r.tail


def test_log_zeta_smooth_tail_is_much_closer(sieve):
    r = arithfn.log_zeta_line(1.5, 10.0, sieve, smooth_tail=True)
    with workdps(30):
        ref = mpmath.log(mpmath.zeta(mpmath.mpc(1.5, 10)))
    assert abs(r.re - ref.real) < 1e-8 and abs(r.im - ref.imag) < 1e-8


def test_log_zeta_array_matches_scalar(sieve):
    t = np.array([0.0, 3.0, 40.0])
    arr = arithfn.log_zeta_array(1.6, t, sieve, smooth_tail=False)
    for ti, v in zip(t, arr):
        s = arithfn.log_zeta_line(1.6, ti, sieve)
        assert v.real == pytest.approx(float(s.re), abs=1e-10)
        assert v.imag == pytest.approx(float(s.im), abs=1e-10)


def test_prime_series_abscissa_guard(small_sieve):
    with pytest.raises(DomainError):
        arithfn.log_zeta_line(1.01, 0.0, small_sieve)


@pytest.mark.parametrize("c", [1.5, 2.0, 3.0])
def test_zeta_log_deriv_against_mpmath(sieve, c):
    with workdps(30):
        ref = mpmath.zeta(c, derivative=1) / mpmath.zeta(c)
    raw, bound = arithfn.zeta_log_deriv(c, sieve)
    assert abs(raw - ref) <= bound
    sm, rh = arithfn.zeta_log_deriv(c, sieve, smooth_tail=True, delta=0.0)
    assert abs(sm - ref) <= rh
    assert rh < bound


def test_zeta_dirichlet_against_mpmath():
    z = np.array([1.5 + 0j, 2 + 14j, 1.2 + 500j, 1.1 + 1500j, 0.5 + 20j])
    vals, err = arithfn.zeta_dirichlet_array(z)
    for zi, v, e in zip(z, vals, err):
        with workdps(30):
            ref = complex(mpmath.zeta(mpmath.mpc(zi.real, zi.imag)))
        assert abs(v - ref) <= max(e, 1e-13 * abs(ref)) + 1e-13


def test_log_zeta_dirichlet_against_mpmath():
    t = np.array([0.0, 7.0, 250.0, 1200.0])
    vals, err = arithfn.log_zeta_dirichlet_array(1.45, t)
    for ti, v in zip(t, vals):
        with workdps(30):
            ref = complex(mpmath.log(mpmath.zeta(mpmath.mpc(1.45, ti))))
        assert abs(v - ref) < 1e-12
    with pytest.raises(DomainError):
        arithfn.log_zeta_dirichlet_array(1.02, t)


def test_rh_stieltjes_bound_positive():
    b = arithfn.rh_stieltjes_bound(lambda x: x ** -2, lambda x: -2 * x ** -3, 10**6, 20)
    assert 0 < b < 1e-7
