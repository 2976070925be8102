"""Generalized Li coefficients at z = 1 + b by four independent routes.

Notation used throughout: s = 2b + 1,

    D_n(b) = 1/(n-1)! d^n/dz^n [(z + b)^(n-1) ln xi(z)] at z = 1 + b,
    k_{n,b} = sum over zeros rho of 1 - ((rho + b)/(rho - 1 - b))^n,

and k_{n,b} = s D_n(b).  Routes:

* ZeroSum: k from stored ordinates (assumes every zero is on the critical line).
* XiDecomp: D from the Gamma factor, the pole and the Laguerre-von Mangoldt
  series for the zeta part.
* Contour: the zeta part as a vertical-line integral of ln zeta.
* Arithmetic: k with the trivial zeros folded into Hurwitz zeta values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import gmpy2
import mpmath
import numpy as np
from mpmath import mpf, workdps

from . import arithfn
from .errors import AccuracyError, DomainError
from .numerics import DEFAULT_PREC, GUARD, digamma, hurwitz_zeta_int, quad_adaptive
from .zerodata import ORDINATE_ERROR, ZeroTable, n_of_t_array


class Route(str, Enum):
    ZERO_SUM = "ZeroSum"
    XI_DECOMP = "XiDecomp"
    CONTOUR = "Contour"
    ARITHMETIC = "Arithmetic"


ROUTE_ALIASES = {"a": Route.ZERO_SUM, "b": Route.XI_DECOMP, "c": Route.CONTOUR, "d": Route.ARITHMETIC}


def parse_route(name: str) -> Route:
    key = name.strip()
    if key.lower() in ROUTE_ALIASES:
        return ROUTE_ALIASES[key.lower()]
    for r in Route:
        if r.value.lower() == key.lower():
            return r
    raise ValueError(f"unknown route {name!r}; expected one of {', '.join(r.value for r in Route)} or A-D")


@dataclass(frozen=True)
class CoeffResult:
    """One computed coefficient; ``k_value`` is always s times ``value``."""

    n: int
    b: float
    route: str
    value: mpf
    k_value: mpf
    err: mpf
    terms_used: int
    meta: dict = field(default_factory=dict, compare=False)
    status: str = "ok"


def _result(n, b, route, value, err, terms, prec, meta=None, status="ok"):
    with workdps(prec):
        value = +mpf(value)
        return CoeffResult(n, float(b), route.value if isinstance(route, Route) else route, value,
                           (2 * mpf(b) + 1) * value, abs(mpf(err)), int(terms), meta or {}, status)


def _check_n_b(n, b):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if not b > -0.5:
        raise DomainError(f"b must exceed -1/2, got {b}")


# ------------------------------------------------------------------ phases


@dataclass(frozen=True)
class ZeroPhase:
    """Argument of (rho + b)/(rho - 1 - b) for rho = 1/2 + iT."""

    T: mpf
    theta: mpf
    sin: mpf
    cos: mpf


def zero_phase(T, b, prec: int = DEFAULT_PREC) -> ZeroPhase:
    with workdps(prec + GUARD):
        T, b = mpf(T), mpf(b)
        s = 2 * b + 1
        den = T * T + s * s / 4
        sin_t = -s * T / den
        cos_t = (T * T - s * s / 4) / den
        theta = -2 * mpmath.atan(s / (2 * T))
    with workdps(prec):
        return ZeroPhase(+T, +theta, +sin_t, +cos_t)


# ------------------------------------------------------- n = 1 and pieces


def xi_log_deriv(z, zeta_log_deriv_value, prec: int = DEFAULT_PREC) -> mpf:
    """xi'/xi(z) = 1/z + 1/(z-1) - (ln pi)/2 + psi(z/2)/2 + zeta'/zeta(z)."""
    with workdps(prec + GUARD):
        z = mpf(z)
        psi = mpmath.digamma(z / 2) if z <= 0 else digamma(z / 2, prec + GUARD)
        v = 1 / z + 1 / (z - 1) - mpmath.log(mpmath.pi) / 2 + psi / 2 + mpf(zeta_log_deriv_value)
    with workdps(prec):
        return +v


def lambda1(prec: int = DEFAULT_PREC) -> mpf:
    """xi'/xi(1) = 1 + gamma/2 - ln(4 pi)/2, the first Li coefficient."""
    with workdps(prec + GUARD):
        v = 1 + mpmath.euler / 2 - mpmath.log(4 * mpmath.pi) / 2
    with workdps(prec):
        return +v


def d1_anchor(b, table: arithfn.VonMangoldtTable, prec: int = DEFAULT_PREC, with_err: bool = False):
    """D_1(b) = xi'/xi(1 + b), with zeta'/zeta(1 + b) from the prime series."""
    if not b > 0:
        raise DomainError(f"d1_anchor needs b > 0, got {b}")
    zl, err = arithfn.zeta_log_deriv(1 + b, table, prec=prec, delta=0.0, smooth_tail=True)
    v = xi_log_deriv(1 + mpf(b), zl, prec)
    return (v, err) if with_err else v


def _trivial_summand(n, b, k):
    s = 2 * b + 1
    w = s / (2 * k + b + 1)
    return 1 - (1 - w) ** n - n * w


def _trivial_tail_integral(n, b, K, prec):
    """Closed form of the integral of the trivial-zero summand over [K, inf)."""
    s = 2 * mpf(b) + 1
    wK = s / (2 * K + b + 1)
    # The j-sum alternates; carry enough digits for its largest term.
    big = max(0.0, max(float(mpmath.log10(mpmath.binomial(n, j)) + (j - 1) * mpmath.log10(wK))
                       for j in range(2, n + 1))) if n >= 2 else 0.0
    with workdps(prec + GUARD + int(big) + 5):
        s = 2 * mpf(b) + 1
        wK = s / (2 * K + b + 1)
        total = mpmath.fsum(mpmath.binomial(n, j) * (-1) ** j * wK ** (j - 1) / (j - 1) for j in range(2, n + 1))
        return -s / 2 * total


def trivial_zero_sum(n: int, b, K: int, prec: int = DEFAULT_PREC) -> tuple[mpf, mpf]:
    """Partial sum over k <= K of 1 - ((2k-b)/(2k+b+1))^n - n s/(2k+b+1), and a tail bound.

    Every summand is <= 0 and its size decreases in k, so the missing tail
    lies between minus the integral of |summand| over [K, inf) and 0; the
    returned bound is that integral.
    """
    _check_n_b(n, b)
    if K < 1:
        raise DomainError(f"cutoff K must be >= 1, got {K}")
    with workdps(prec + GUARD):
        bb = mpf(b)
        total = mpmath.fsum(_trivial_summand(n, bb, mpf(k)) for k in range(1, K + 1))
        tail = abs(_trivial_tail_integral(n, bb, K, prec))
    with workdps(prec):
        return +total, +tail


def _series_log(coeffs_len, x0, scale):
    """Taylor coefficients in h of ln(scale*(x0 + h)) around h = 0."""
    out = [mpmath.log(scale * x0)]
    r = 1 / x0
    for j in range(1, coeffs_len):
        out.append((-1) ** (j + 1) * r ** j / j)
    return out


def _series_exp(a):
    """Coefficients of exp(A(h)) from those of A(h)."""
    e = [mpmath.exp(a[0])]
    for k in range(1, len(a)):
        e.append(mpmath.fsum(j * a[j] * e[k - j] for j in range(1, k + 1)) / k)
    return e


@lru_cache(maxsize=256)
def _trivial_sum_inf(n: int, b_key: str, prec: int):
    b = mpf(b_key)
    s = 2 * b + 1
    K0 = max(64, int(math.ceil(n * float(s))))
    order = 2 * (prec // 4 + 8)
    with workdps(prec + GUARD + 10):
        b = mpf(b_key)
        s = 2 * b + 1
        head = mpmath.fsum(_trivial_summand(n, b, mpf(k)) for k in range(1, K0 + 1))
        integral = _trivial_tail_integral(n, b, K0, prec + 10)
        # Taylor coefficients of g(K0 + h) = 1 - exp(n ln((2x-b)/(2x+b+1))) - n s/(2x+b+1).
        x0 = mpf(K0)
        la = _series_log(order + 2, x0 - b / 2, 2)
        lb = _series_log(order + 2, x0 + (b + 1) / 2, 2)
        e = _series_exp([n * (u - v) for u, v in zip(la, lb)])
        c0 = x0 + (b + 1) / 2
        g = [-ek for ek in e]
        g[0] += 1
        for j in range(len(g)):
            g[j] -= n * s / 2 * (-1) ** j / c0 ** (j + 1)
        # Euler-Maclaurin: sum_{k>K0} g(k) = int - g(K0)/2 - sum B_2j/(2j)! g^(2j-1)(K0).
        corr = []
        for j in range(1, order // 2 + 1):
            deriv = g[2 * j - 1] * mpmath.factorial(2 * j - 1)
            corr.append(mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j) * deriv)
        # Stop at the smallest term of the asymptotic series.
        mags = [abs(t) for t in corr]
        stop = int(np.argmin([float(m) if m else 0.0 for m in mags])) if mags else 0
        em = mpmath.fsum(corr[:stop])
        err = mags[stop] if mags else mpf(0)
        total = head + integral - g[0] / 2 - em
    return total, err, K0


def trivial_zero_sum_inf(n: int, b, prec: int = DEFAULT_PREC) -> tuple[mpf, mpf]:
    """The full trivial-zero sum (K = inf): direct terms, then Euler-Maclaurin."""
    _check_n_b(n, b)
    total, err, _ = _trivial_sum_inf(n, mpmath.nstr(mpf(b), 40), prec)
    with workdps(prec):
        return +total, +err + mpf(10) ** (-prec)


def d_gamma_term(n: int, b, prec: int = DEFAULT_PREC) -> mpf:
    """-S/s + (n/2) psi((b+1)/2) + n/(b+1), S the full trivial-zero sum."""
    _check_n_b(n, b)
    S, _ = trivial_zero_sum_inf(n, b, prec)
    with workdps(prec + GUARD):
        b = mpf(b)
        v = -S / (2 * b + 1) + n * digamma((b + 1) / 2, prec + GUARD) / 2 + n / (b + 1)
    with workdps(prec):
        return +v


def d_pole_term(n: int, b, prec: int = DEFAULT_PREC) -> mpf:
    """(1 + (-1)^(n+1) (1 + 1/b)^n)/s."""
    _check_n_b(n, b)
    if b == 0:
        raise DomainError("the pole contribution is singular at b = 0")
    with workdps(prec + GUARD):
        b = mpf(b)
        v = (1 + (-1) ** (n + 1) * (1 + 1 / b) ** n) / (2 * b + 1)
    with workdps(prec):
        return +v


# --------------------------------------------------------------- route A


def _phase_terms(n, s, T):
    a = np.arctan(s / (2 * T))
    return 4 * np.sin(n * a) ** 2


def _phase_terms_deriv(n, s, T):
    a = np.arctan(s / (2 * T))
    return -4 * n * np.sin(2 * n * a) * (s / 2) / (T * T + s * s / 4)


def trudgian_S_bound(T):
    """Bound on |N(T) - (T/2π) ln(T/2π) + T/2π - 7/8| for T >= e."""
    T = np.asarray(T, dtype=float)
    return 0.112 * np.log(T) + 0.278 * np.log(np.log(T)) + 2.51 + 0.2 / T


TAIL_SAFETY = 2.0


def zero_sum_tail(f, df, t_max: float, count: int, rel_tol: float = 1e-11, magnitude: float | None = None):
    """Estimate and bound the sum of f over zeros above t_max.

    The estimate integrates f against the smooth density (1/2π) ln(T/2π)
    and adds f(t_max) times the excess of the smooth count over the true
    count at t_max.  The bound integrates |f'| against TAIL_SAFETY times
    the explicit bound on the counting error, plus that bound times
    |f(t_max)|.  Both integrands are vectorised and must take float arrays.
    Quadrature tolerances are relative to ``magnitude`` (default |f(t_max)|),
    which should be the size of the terms f is built from when f cancels.
    """
    dens = lambda T: f(T) * np.log(T / (2 * math.pi)) / (2 * math.pi)
    f0 = float(f(np.array([t_max]))[0])
    # Both integrals are of order |f(t_max)| t_max ln t_max.
    mag = abs(f0) if magnitude is None else magnitude
    tol = rel_tol * mag * t_max * math.log(t_max) + 1e-300
    main = quad_adaptive(dens, t_max, math.inf, tol, vectorized=True, scale=t_max)
    smooth = float(n_of_t_array(np.array([t_max]))[0]) + 7 / 8
    estimate = main.value + f0 * (smooth - count)
    B = lambda T: TAIL_SAFETY * trudgian_S_bound(T)
    var = quad_adaptive(lambda T: np.abs(df(T)) * B(T), t_max, math.inf, tol, vectorized=True, scale=t_max)
    bound = float(B(np.array([t_max]))[0]) * abs(f0) + var.value + main.err_estimate + var.err_estimate
    return estimate, bound


def quadratic_tail_bound(n, b, t_max):
    """n^2 s^2 (ln(t/2π) + 1)/(π t) from 1 - cos x <= x^2/2 with safety factor 2."""
    s = 2 * b + 1
    return 2 * n * n * s * s * (math.log(t_max / (2 * math.pi)) + 1) / (2 * math.pi * t_max)


def k_sum_zeros(n: int, b, zeros: ZeroTable, prec: int = DEFAULT_PREC, tail: bool = True) -> CoeffResult:
    """Route A: k_{n,b} = sum over stored ordinates of 2(1 - cos(n theta(T))).

    Each ordinate stands for the pair 1/2 +- iT.  With ``tail`` the
    contribution of zeros above the table is estimated from the counting
    function and added; ``err`` bounds what is left, plus the effect of
    rounding in the stored ordinates.
    """
    _check_n_b(n, b)
    if zeros is None or zeros.count == 0:
        raise DomainError("route A needs a nonempty zero table")
    s = 2 * float(b) + 1
    T = np.asarray(zeros.ordinates)
    terms = _phase_terms(n, s, T)
    raw = math.fsum(terms.tolist())
    perturb = 2 * n * s * ORDINATE_ERROR * math.fsum((1 / T**2).tolist())
    meta = {"t_max": zeros.t_max, "zeros": zeros.count, "raw_sum": raw,
            "quadratic_tail_bound": quadratic_tail_bound(n, float(b), zeros.t_max),
            "ordinate_perturbation": perturb}
    est, bound = 0.0, 0.0
    if tail:
        est, bound = zero_sum_tail(lambda x: _phase_terms(n, s, x), lambda x: _phase_terms_deriv(n, s, x),
                                   zeros.t_max, zeros.count)
    meta.update(tail_estimate=est, tail_bound=bound)
    with workdps(prec):
        k = mpf(raw) + mpf(est)
        value = k / (2 * mpf(b) + 1)
        err = (mpf(bound) + mpf(perturb) + abs(k) * 2 ** -50) / (2 * mpf(b) + 1)
    return _result(n, b, Route.ZERO_SUM, value, err, zeros.count, prec, meta)


# --------------------------------------------------------------- route B


def laguerre_envelope_term(n, m, b=None):
    """n ln m / sqrt(m): bound on |Λ(m) m^-(b+1) L^1_{n-1}(s ln m)| for every b >= 0."""
    return n * math.log(m) / math.sqrt(m)


def _monomial_peak(n, b, M):
    """Largest (s ln m)^(n-1) n/(n-1)! m^-(b+1) for 2 <= m <= M, in log10."""
    s = 2 * b + 1
    u_star = (n - 1) / (b + 1) if n > 1 else math.log(2)
    u = min(max(u_star, math.log(2)), math.log(M))
    return ((n - 1) * math.log(s * u) + math.log(n) - math.lgamma(n) - (b + 1) * u) / math.log(10)


# sum over zeros of 1/|rho|^2 = 2 + gamma - ln(4 pi), valid under RH.
ZERO_RECIPROCAL_SQUARES = 0.046191


def _residual_model(n, b, M):
    """Predicted residual of the tail-corrected series at limit M.

    After the smooth correction what is left is the integral of phi' against
    psi(x) - x, whose zero expansion gives roughly |phi(x)| sqrt(x) times the
    sum of 1/|rho|^2, with phi(x) = x^-(b+1) L^1_{n-1}(s ln x).  The size is
    taken as the largest of that expression over a few points x >= M.
    """
    s = 2 * b + 1
    best = 0.0
    for x in (M, 2 * M, 4 * M, 16 * M, 256 * M):
        y = s * math.log(x)
        val = abs(float(mpmath.laguerre(n - 1, 1, y))) * x ** (-(b + 0.5))
        best = max(best, val)
    return ZERO_RECIPROCAL_SQUARES * best


def plan_precision(n: int, b, M: int, tol) -> tuple[int, bool]:
    """Working digits for the Laguerre series and whether tol is reachable at limit M.

    Digits: 16 + log10(max magnitude/tol), where the magnitude is the larger
    of the Laguerre envelope n e^(y/2) at y = s ln M and the peak of the
    leading monomial term.  Feasible when the residual model is below tol.
    """
    b = float(b)
    tol = float(tol)
    s = 2 * b + 1
    # L^1_0 = 1, so at n = 1 no Laguerre intermediate exceeds 1.
    env = math.log10(n) + s * math.log(M) / 2 / math.log(10) if n > 1 else 0.0
    mag = max(env, _monomial_peak(n, b, M))
    P = max(16, int(math.ceil(16 + mag - math.log10(tol))))
    return P, _residual_model(n, b, M) < tol


@dataclass(frozen=True)
class LaguerreSeries:
    """Laguerre-von Mangoldt series for one (n, b) with its truncation diagnostics."""

    value: mpf
    err: mpf
    limit: int
    digits: int
    checkpoints: tuple
    rh_bound: mpf | None = None


_SERIES_CACHE: dict = {}


def _gmpy_ctx(digits):
    ctx = gmpy2.context(gmpy2.get_context())
    ctx.precision = int(math.ceil((digits + GUARD) * 3.33)) + 8
    return ctx


def laguerre_prime_sums(nmax: int, b, table: arithfn.VonMangoldtTable, digits: int, fractions=(8, 4, 2, 1)):
    """Partial sums of Λ(m) m^-(b+1) L^1_{j}(s ln m), j < nmax, at m <= M/f for each f.

    One pass over the prime powers; the Laguerre values come from the
    three-term recurrence in the degree.  Returns {limit: [sums...]} with
    values as mpf strings at ``digits``.
    """
    key = (id(table), table.limit, repr(float(b)), digits)
    hit = _SERIES_CACHE.get(key)
    if hit is not None and hit[0] >= nmax:
        return hit[1]
    M = table.limit
    stops = sorted({M // f for f in fractions})
    m_all, _ = table.prime_powers()
    bases = table.base[m_all]
    out = {}
    with _gmpy_ctx(digits):
        bb = gmpy2.mpfr(float(b))
        s = 2 * bb + 1
        neg_exp = -(bb + 1)
        sums = [gmpy2.mpfr(0)] * nmax
        logs = {}
        rec = [gmpy2.mpfr(k) for k in range(nmax + 2)]
        si = 0
        for m, p in zip(m_all.tolist(), bases.tolist()):
            while m > stops[si]:
                out[stops[si]] = list(sums)
                si += 1
            lp = logs.get(p)
            if lp is None:
                lp = logs[p] = gmpy2.log(p)
            lnm = gmpy2.log(m)
            w = lp * gmpy2.exp(neg_exp * lnm)
            y = s * lnm
            prev = gmpy2.mpfr(1)
            sums[0] += w
            if nmax > 1:
                cur = 2 - y
                sums[1] += w * cur
                for k in range(1, nmax - 1):
                    prev, cur = cur, ((2 * k + 2 - y) * cur - rec[k + 1] * prev) / rec[k + 1]
                    sums[k + 1] += w * cur
        while si < len(stops):
            out[stops[si]] = list(sums)
            si += 1
    with workdps(digits + GUARD):
        result = {lim: [_to_mpf(v) for v in vals] for lim, vals in out.items()}
    _SERIES_CACHE[key] = (nmax, result)
    return result


def _to_mpf(v):
    man, exp = v.as_mantissa_exp()
    return mpmath.ldexp(mpf(int(man)), int(exp))


def laguerre_smooth_tail(n: int, b, M: int, psi_M, prec: int = DEFAULT_PREC) -> mpf:
    """Estimate of the sum over m > M of Λ(m) phi(m) with ψ(x) replaced by x.

    phi(x) = x^-(b+1) L^1_{n-1}(s ln x).  The integral over [M, inf) is
    (1/s) e^(-qY) sum_r P^(r)(Y)/q^(r+1) with q = b/s, Y = s ln M and
    P^(r) = (-1)^r L^(1+r)_{n-1-r}; the jump term is phi(M)(M - ψ(M)).
    """
    with workdps(prec + GUARD):
        b = mpf(b)
        s = 2 * b + 1
        q = b / s
        Y = s * mpmath.log(M)
        integral = mpmath.exp(-q * Y) / s * mpmath.fsum(
            (-1) ** r * mpmath.laguerre(n - 1 - r, 1 + r, Y) / q ** (r + 1) for r in range(n))
        phiM = mpf(M) ** (-(b + 1)) * mpmath.laguerre(n - 1, 1, Y)
        v = integral + phiM * (M - mpf(psi_M))
    with workdps(prec):
        return +v


def laguerre_rh_bound(n: int, b, M: int, prec: int = 20) -> mpf:
    """Bound, assuming RH, on the residual after :func:`laguerre_smooth_tail`."""
    with workdps(prec):
        bb = mpf(b)
        s = 2 * bb + 1
        phi = lambda x: x ** (-(bb + 1)) * mpmath.laguerre(n - 1, 1, s * mpmath.log(x))
        dphi = lambda x: x ** (-(bb + 2)) * (-(bb + 1) * mpmath.laguerre(n - 1, 1, s * mpmath.log(x))
                                            - (s * mpmath.laguerre(n - 2, 2, s * mpmath.log(x)) if n > 1 else 0))
        return arithfn.rh_stieltjes_bound(phi, dphi, M, prec)


def laguerre_series(n: int, b, table: arithfn.VonMangoldtTable, tol=None, prec: int = DEFAULT_PREC,
                    nmax: int | None = None, rh_bound: bool = False) -> LaguerreSeries:
    """-sum over m <= M of Λ(m) m^-(b+1) L^1_{n-1}(s ln m), tail-corrected, with diagnostics.

    ``err`` comes from the doubling criterion: the larger of the change
    between the corrected sums at M/2 and M, and half the change between
    M/4 and M/2.  It is a heuristic, not a bound; ``rh_bound`` adds the
    bound that holds under RH.
    """
    _check_n_b(n, b)
    if not b > 0:
        raise DomainError(f"the Laguerre-von Mangoldt series needs b > 0, got {b}")
    M = table.limit
    digits = max(plan_precision(max(n, nmax or n), b, M, tol if tol else 1e-20)[0], 20)
    digits = min(digits, prec + GUARD)
    sums = laguerre_prime_sums(max(n, nmax or n), b, table, digits)
    checkpoints = []
    with workdps(digits + GUARD):
        for lim in sorted(sums):
            partial = -sums[lim][n - 1]
            corr = -laguerre_smooth_tail(n, b, lim, table.chebyshev_psi(lim), digits + GUARD)
            checkpoints.append((lim, partial + corr))
        vals = [v for _, v in checkpoints]
        d1 = abs(vals[-1] - vals[-2])
        d2 = abs(vals[-2] - vals[-3]) / 2
        err = max(d1, d2)
        value = vals[-1]
    bound = laguerre_rh_bound(n, b, M) if rh_bound else None
    with workdps(prec):
        res = LaguerreSeries(+value, +err, M, digits, tuple((lim, +v) for lim, v in checkpoints), bound)
    if tol is not None and res.err > tol:
        raise AccuracyError(f"Laguerre series for n={n}, b={b} changes by {mpmath.nstr(res.err, 3)} "
                            f"between M/2 and M={M}, above tol {tol}", estimate=res.value, err=res.err)
    return res


def d_zeta_laguerre(n: int, b, table: arithfn.VonMangoldtTable, tol=None,
                    prec: int = DEFAULT_PREC, nmax: int | None = None) -> tuple[mpf, mpf]:
    """Zeta part of D_n(b) from the Laguerre-von Mangoldt series: (value, err)."""
    res = laguerre_series(n, b, table, tol=tol, prec=prec, nmax=nmax)
    return res.value, res.err


def d_xi_route_b(n: int, b, table: arithfn.VonMangoldtTable, tol=None, prec: int = DEFAULT_PREC,
                 nmax: int | None = None) -> CoeffResult:
    """Route B: D_n(b) = gamma part - n (ln pi)/2 + pole part + Laguerre series.

    ``nmax`` sizes the shared prime pass so later calls with n <= nmax reuse it.
    """
    _check_n_b(n, b)
    if not b > 0:
        raise DomainError(f"route B needs b > 0, got {b}")
    P, feasible = plan_precision(n, b, table.limit, tol if tol else 1e-3)
    meta = {"limit": table.limit, "planned_digits": P, "planned_feasible": feasible}
    try:
        series = laguerre_series(n, b, table, tol=tol, prec=prec, nmax=nmax)
    except AccuracyError as exc:
        with workdps(prec):
            meta["series"] = exc.estimate
        return _result(n, b, Route.XI_DECOMP, exc.estimate if exc.estimate is not None else 0,
                       exc.err if exc.err is not None else mpf("inf"), table.limit, prec, meta, "infeasible")
    S_err = trivial_zero_sum_inf(n, b, prec)[1]
    with workdps(prec + GUARD):
        gamma = d_gamma_term(n, b, prec + GUARD)
        pole = d_pole_term(n, b, prec + GUARD)
        value = gamma - n * mpmath.log(mpmath.pi) / 2 + pole + series.value
        err = series.err + S_err / (2 * mpf(b) + 1)
    meta.update(gamma_term=gamma, pole_term=pole, zeta_part=series.value,
                checkpoints=series.checkpoints)
    return _result(n, b, Route.XI_DECOMP, value, err, table.limit, prec, meta)


# --------------------------------------------------------------- route C


def default_abscissa(b) -> float:
    """1 + 0.45 min(1, b), never above (b + 2)/2."""
    b = float(b)
    return min(1 + 0.45 * min(1.0, b), (b + 2) / 2)


def contour_kernel(n, b, c, t):
    """(c + b + it)^(n-1)/(c - b - 1 + it)^(n+1) over a float array of t."""
    t = np.asarray(t, dtype=float)
    return (c + b + 1j * t) ** (n - 1) / (c - b - 1 + 1j * t) ** (n + 1)


def contour_integrand(n, b, c, t, lnzeta="dirichlet", table=None):
    """-(n/2π) ln zeta(c + it) times the kernel, complex, over a float array of t."""
    t = np.asarray(t, dtype=float)
    if lnzeta == "dirichlet":
        lz, _ = arithfn.log_zeta_dirichlet_array(c, t)
    else:
        lz = arithfn.log_zeta_array(c, t, table)
    return -n / (2 * math.pi) * lz * contour_kernel(n, b, c, t)


@lru_cache(maxsize=64)
def _log_zeta_line_mass(c: float) -> float:
    """sum Λ(m)/(ln^2 m m^c) = integral of ln zeta(sigma) over [c, inf)."""
    with workdps(20):
        return float(mpmath.quad(lambda x: mpmath.log(mpmath.zeta(x)), [c, c + 1, c + 10, mpmath.inf]))


def contour_tail_bound(n, b, c, T) -> float:
    """(2n/π)|K(T)| sum Λ(m)/(ln^2 m m^c): one integration by parts per Dirichlet term."""
    K = abs(complex(contour_kernel(n, b, c, np.array([T]))[0]))
    return 2 * n / math.pi * K * _log_zeta_line_mass(c)


def d_zeta_contour(n: int, b, c=None, tol=1e-5, *, lnzeta: str = "dirichlet", table=None,
                   t_cut=None, t_cap: float = 6000.0, prec: int = DEFAULT_PREC) -> CoeffResult:
    """Route C: the zeta part of D_n(b) as a line integral at Re z = c.

    value = -(n/π) Re of the integral over t >= 0 of ln zeta(c+it) K(t), with
    K the kernel above.  The range is cut at the first T (at most
    ``t_cap``) where the tail bound drops below tol/4; err adds the
    quadrature estimate, the tail bound and the ln zeta error propagated
    through the kernel.
    """
    _check_n_b(n, b)
    b = float(b)
    c = default_abscissa(b) if c is None else float(c)
    if not 1 < c < b + 1:
        raise DomainError(f"contour abscissa must satisfy 1 < c < b + 1 = {b + 1}, got {c}")
    tol = float(tol)
    if t_cut is None:
        t_cut = 50.0
        while contour_tail_bound(n, b, c, t_cut) > tol / 4 and t_cut < t_cap:
            t_cut = min(t_cut * 1.25, t_cap)
    t_cut = float(t_cut)
    if lnzeta == "dirichlet":
        f = lambda t: (contour_integrand(n, b, c, t)).real
        lz_err = lambda t: np.abs(contour_kernel(n, b, c, t)) * arithfn.log_zeta_dirichlet_array(c, t)[1]
    elif lnzeta == "primes":
        if table is None:
            raise DomainError("lnzeta='primes' needs a von Mangoldt table")
        f = lambda t: (contour_integrand(n, b, c, t, "primes", table)).real
        bound = arithfn.log_zeta_tail_bound(c, table.limit)
        lz_err = lambda t: np.abs(contour_kernel(n, b, c, t)) * bound
    else:
        raise DomainError(f"unknown ln zeta method {lnzeta!r}")
    # Break at the kernel scale so the peak near t = 0 is resolved first.
    width = b + 1 - c
    points = [x for x in (width, 4 * width, 16 * width, 64 * width) if x < t_cut]
    q = quad_adaptive(f, 0.0, t_cut, tol / 4, vectorized=True, points=points, max_intervals=20000)
    tail = contour_tail_bound(n, b, c, t_cut)
    prop = quad_adaptive(lz_err, 0.0, t_cut, max(tol / 100, 1e-18), vectorized=True, points=points,
                         max_intervals=20000)
    value = 2 * q.value
    err = 2 * q.err_estimate + 2 * tail + 2 * n / (2 * math.pi) * prop.value
    meta = {"c": c, "t_cut": t_cut, "tail_bound": 2 * tail, "quad_err": 2 * q.err_estimate,
            "lnzeta": lnzeta, "evaluations": q.evaluations}
    with workdps(prec):
        return _result(n, b, Route.CONTOUR, mpf(value), mpf(err), q.evaluations, prec, meta)


def d_xi_route_c(n: int, b, c=None, tol=1e-5, prec: int = DEFAULT_PREC, **kw) -> CoeffResult:
    """D_n(b) with the zeta part from :func:`d_zeta_contour`."""
    zc = d_zeta_contour(n, b, c, tol, prec=prec, **kw)
    S_err = trivial_zero_sum_inf(n, b, prec)[1]
    with workdps(prec + GUARD):
        value = d_gamma_term(n, b, prec + GUARD) - n * mpmath.log(mpmath.pi) / 2 + d_pole_term(n, b, prec + GUARD) \
            + zc.value
        err = zc.err + S_err / (2 * mpf(b) + 1)
    meta = dict(zc.meta, zeta_part=zc.value)
    return _result(n, b, Route.CONTOUR, value, err, zc.terms_used, prec, meta)


# --------------------------------------------------------------- route D


def hurwitz_trivial_term(n: int, a, prec: int = DEFAULT_PREC) -> mpf:
    """sum_{j=2}^n C(n,j) (-1)^j 2^-j (2a-1)^j zeta(j, a/2)."""
    a = mpf(a)
    if n < 2:
        with workdps(prec):
            return mpf(0)
    big = max(float(mpmath.log10(mpmath.binomial(n, j))) + j * math.log10(float(2 * a - 1) / 2)
              for j in range(2, n + 1))
    work = prec + GUARD + max(0, int(big))
    with workdps(work):
        a = mpf(a)
        total = mpmath.fsum(mpmath.binomial(n, j) * (-1) ** j * ((2 * a - 1) / 2) ** j
                            * hurwitz_zeta_int(j, a / 2, work) for j in range(2, n + 1))
    with workdps(prec):
        return +total


def k_route_arithmetic(n: int, a, table: arithfn.VonMangoldtTable, tol=None,
                       prec: int = DEFAULT_PREC, nmax: int | None = None) -> CoeffResult:
    """Route D: k_{n,b} with a = b + 1 from pole terms, digamma, Hurwitz zeta and the Λ-series.

    The Λ part is summed over m first through the Laguerre kernel; it equals
    s times the series of route B.
    """
    a_f = float(a)
    if not a_f > 1:
        raise DomainError(f"route D needs a = b + 1 > 1, got {a}")
    b = a_f - 1
    _check_n_b(n, b)
    meta = {"limit": table.limit}
    try:
        series = laguerre_series(n, b, table, tol=tol, prec=prec, nmax=nmax)
        status = "ok"
        zeta_part, zeta_err = series.value, series.err
    except AccuracyError as exc:
        status = "infeasible"
        zeta_part, zeta_err = exc.estimate, exc.err
    with workdps(prec + GUARD):
        a = mpf(a_f)
        s = 2 * a - 1
        poles = 2 - (-1 + 1 / a) ** n - (-1 - 1 / (a - 1)) ** n
        lam_part = s * zeta_part
        gam = n * s / 2 * (digamma(a / 2, prec + GUARD) - mpmath.log(mpmath.pi))
        hur = hurwitz_trivial_term(n, a, prec + GUARD)
        k = poles + lam_part + gam + hur
        err = zeta_err
        value = k / s
    meta.update(pole_terms=poles, lambda_part=lam_part, digamma_part=gam, hurwitz_part=hur)
    return _result(n, b, Route.ARITHMETIC, value, err, table.limit, prec, meta, status)


# --------------------------------------------------- shifted coefficient


def d_shifted(n: int, b, zeros: ZeroTable, table: arithfn.VonMangoldtTable | None = None,
              tol=1e-3, prec: int = DEFAULT_PREC, route_a: CoeffResult | None = None) -> CoeffResult:
    """Coefficient of ln((z-1) zeta(z)): D + S/s - (n/2) psi((b+1)/2) - n/(b+1) + (n/2) ln pi.

    D comes from route A, so no large terms cancel.  With a table and a
    feasible precision plan, the direct form pole + Laguerre series is also
    evaluated and stored in ``meta`` for comparison.
    """
    _check_n_b(n, b)
    if not b > 0:
        raise DomainError(f"d_shifted needs b > 0, got {b}")
    ra = route_a if route_a is not None else k_sum_zeros(n, b, zeros, prec)
    S, S_err = trivial_zero_sum_inf(n, b, prec)
    with workdps(prec + GUARD):
        bb = mpf(b)
        s = 2 * bb + 1
        value = ra.value + S / s - n * digamma((bb + 1) / 2, prec + GUARD) / 2 - n / (bb + 1) \
            + n * mpmath.log(mpmath.pi) / 2
        err = ra.err + S_err / s
    meta = {"route_a": ra.value, "pole_term": d_pole_term(n, b, prec)}
    if table is not None:
        P, feasible = plan_precision(n, b, table.limit, tol)
        meta["unstable_feasible"] = feasible
        if feasible:
            try:
                series = laguerre_series(n, b, table, tol=None, prec=prec)
                with workdps(prec):
                    meta["unstable"] = meta["pole_term"] + series.value
                    meta["unstable_err"] = series.err
            except AccuracyError as exc:
                meta["unstable_error"] = str(exc)
    return _result(n, b, "Shifted", value, err, ra.terms_used, prec, meta)


def shifted_n1_closed_form(b, table: arithfn.VonMangoldtTable, prec: int = DEFAULT_PREC) -> mpf:
    """1/b + zeta'/zeta(1 + b): log-derivative of (z-1) zeta(z) at 1 + b."""
    zl, _ = arithfn.zeta_log_deriv(1 + float(b), table, prec=prec, delta=0.0, smooth_tail=True)
    with workdps(prec):
        return 1 / mpf(b) + zl


def d_shifted_contour(n: int, b, c=None, tol=1e-5, prec: int = DEFAULT_PREC) -> CoeffResult:
    """Same coefficient as :func:`d_shifted` from the kernel integral of ln((c-1+it) zeta(c+it)).

    The ln zeta part is cut where its tail bound is small; the ln(c-1+it)
    part does not oscillate and decays only like ln t/t^2, so it is
    integrated over the whole half-line.
    """
    _check_n_b(n, b)
    b = float(b)
    c = default_abscissa(b) if c is None else float(c)
    if not 1 < c < b + 1:
        raise DomainError(f"contour abscissa must satisfy 1 < c < b + 1, got {c}")
    zc = d_zeta_contour(n, b, c, tol, prec=prec)
    width = b + 1 - c
    g = lambda t: (-n / (2 * math.pi) * np.log(c - 1 + 1j * np.asarray(t)) * contour_kernel(n, b, c, t)).real
    points = [x for x in (width, 4 * width, 16 * width) if x < 64]
    head = quad_adaptive(g, 0.0, 64.0, tol / 100, vectorized=True, points=points)
    tail = quad_adaptive(g, 64.0, math.inf, tol / 100, vectorized=True, scale=64.0)
    with workdps(prec):
        value = zc.value + 2 * mpf(head.value + tail.value)
        err = zc.err + 2 * mpf(head.err_estimate + tail.err_estimate)
    return _result(n, b, "ShiftedContour", value, err, zc.terms_used + head.evaluations + tail.evaluations, prec,
                   {"c": c, "t_cut": zc.meta["t_cut"], "log_part": 2 * (head.value + tail.value)})


# ------------------------------------------------- zero-sum identity check


@dataclass
class BoundReport:
    name: str
    inputs: dict
    lhs: object
    rhs: object
    slack: object
    passed: bool
    extra: dict = field(default_factory=dict)

    def as_dict(self, digits: int = 30) -> dict:
        fmt = lambda v: mpmath.nstr(mpf(v), digits) if isinstance(v, (mpf, float, int)) else v
        return {"name": self.name, "inputs": {k: fmt(v) for k, v in self.inputs.items()},
                "lhs": fmt(self.lhs), "rhs": fmt(self.rhs), "slack": fmt(self.slack), "pass": bool(self.passed),
                **{k: fmt(v) for k, v in self.extra.items()}}


def regularized_zero_sum(n: int, b, zeros: ZeroTable) -> tuple[float, float, dict]:
    """sum over zero pairs of 2 Re[1 - R^n + n s/(rho - 1 - b)], R = (rho+b)/(rho-1-b).

    Each pair contributes 4 sin^2(n atan(s/2T)) - n s^2/(T^2 + s^2/4), which
    is O(1/T^2).  Returns (sum with tail estimate, error bound, details).
    """
    s = 2 * float(b) + 1
    T = np.asarray(zeros.ordinates)
    f = lambda x: _phase_terms(n, s, x) - n * s * s / (x * x + s * s / 4)
    df = lambda x: _phase_terms_deriv(n, s, x) + 2 * n * s * s * x / (x * x + s * s / 4) ** 2
    raw = math.fsum(f(T).tolist())
    est, bound = zero_sum_tail(f, df, zeros.t_max, zeros.count,
                               magnitude=n * s * s / zeros.t_max**2 + n * n * s * s / zeros.t_max**2)
    perturb = (2 * n * s + 2 * n * s * s / 14.0) * ORDINATE_ERROR * math.fsum((1 / T**2).tolist())
    return raw + est, bound + perturb, {"raw": raw, "tail_estimate": est, "tail_bound": bound}


def verify_eq22(n: int, b, zeros: ZeroTable, table: arithfn.VonMangoldtTable,
                prec: int = DEFAULT_PREC) -> BoundReport:
    """Shifted coefficient two ways: stable path vs. regularized zero sum.

    right = (1/s) sum_pairs[1 - R^n + n s/(rho-1-b)] + S/s + n zeta'/zeta(1+b) + n/b.
    """
    if not b > 0:
        raise DomainError(f"needs b > 0, got {b}")
    left = d_shifted(n, b, zeros, None, prec=prec)
    zsum, zerr, detail = regularized_zero_sum(n, b, zeros)
    S, S_err = trivial_zero_sum_inf(n, b, prec)
    zl, zl_err = arithfn.zeta_log_deriv(1 + float(b), table, prec=prec, delta=0.0, smooth_tail=True)
    with workdps(prec + GUARD):
        bb = mpf(b)
        s = 2 * bb + 1
        right = (mpf(zsum) + S) / s + n * zl + n / bb
        right_err = (mpf(zerr) + S_err) / s + n * zl_err
        diff = abs(left.value - right)
        allowed = left.err + right_err
    with workdps(prec):
        return BoundReport("eq22", {"n": n, "b": float(b)}, +left.value, +right, +(allowed - diff),
                           bool(diff <= allowed),
                           {"difference": +diff, "allowed": +allowed, "zero_sum": zsum})
