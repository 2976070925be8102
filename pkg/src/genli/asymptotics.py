"""Checks of the bounds, identities and large-n behaviour of the coefficients."""

from __future__ import annotations

import math

import mpmath
import numpy as np
from mpmath import mpf, workdps

from . import licore
from .errors import DomainError
from .licore import BoundReport
from .numerics import DEFAULT_PREC, GUARD, chebyshev_u_array, digamma, laguerre_l1, quad_adaptive
from .zerodata import ZeroTable, n_of_t_array


def li_asymptotic(n: int, b, prec: int = DEFAULT_PREC) -> mpf:
    """(|s|/2) n ln n + (|s|/2)(gamma - 1 - ln(2 pi/|s|)) n, the large-n form of k_{n,b} under RH."""
    if n < 2:
        raise DomainError(f"needs n >= 2, got {n}")
    if b == -0.5:
        raise DomainError("b = -1/2 is excluded")
    with workdps(prec + GUARD):
        a = abs(2 * mpf(b) + 1)
        v = a / 2 * n * mpmath.log(n) + a / 2 * (mpmath.euler - 1 - mpmath.log(2 * mpmath.pi / a)) * n
    with workdps(prec):
        return +v


def theorem6_residual(n: int, b, zeros: ZeroTable, prec: int = DEFAULT_PREC) -> dict:
    """(k_{n,b} - li_asymptotic)/n from route A, with the tail diagnostics."""
    r = licore.k_sum_zeros(n, b, zeros, prec)
    with workdps(prec):
        resid = (r.k_value - li_asymptotic(n, b, prec)) / n
        k_err = r.err * (2 * mpf(b) + 1)
    return {"n": n, "b": float(b), "k": r.k_value, "asymptotic": li_asymptotic(n, b, prec), "residual": resid,
            "k_err": k_err, "tail_estimate": r.meta["tail_estimate"], "tail_bound": r.meta["tail_bound"],
            "quadratic_tail_bound": r.meta["quadratic_tail_bound"],
            "tail_fraction": float(k_err / abs(r.k_value))}


def theorem6_report(b, zeros: ZeroTable, n_small: int = 200, n_large: int = 800, cap: float = 0.25,
                    tail_fraction: float = 0.01, prec: int = DEFAULT_PREC) -> BoundReport:
    """|r_large| < |r_small|, |r_large| < cap, and the route-A error below tail_fraction of k at n_large."""
    small = theorem6_residual(n_small, b, zeros, prec)
    large = theorem6_residual(n_large, b, zeros, prec)
    with workdps(prec):
        rs, rl = abs(small["residual"]), abs(large["residual"])
        ok = rl < rs and rl < cap and large["tail_fraction"] < tail_fraction
        slack = min(rs - rl, cap - rl, mpf(tail_fraction - large["tail_fraction"]))
    return BoundReport("theorem6", {"b": float(b), "n_small": n_small, "n_large": n_large, "zeros": zeros.count},
                       rl, rs, slack, bool(ok),
                       {"residual_small": small["residual"], "residual_large": large["residual"],
                        "tail_fraction": large["tail_fraction"],
                        "quadratic_tail_fraction": large["quadratic_tail_bound"] / float(abs(large["k"])),
                        "k_large": large["k"], "k_small": small["k"]})


# ------------------------------------------------------------- trivial-zero sum


def lemma2_core_integral(n: int, prec: int = DEFAULT_PREC) -> mpf:
    """n(psi(n) + gamma - 1) + 1, the value of the integral of ((1-y)^n - 1 + ny)/y^2 over [0, 1]."""
    if n < 1:
        raise DomainError(f"needs n >= 1, got {n}")
    with workdps(prec + GUARD):
        v = n * (digamma(n, prec + GUARD) + mpmath.euler - 1) + 1
    with workdps(prec):
        return +v


def lemma2_core_quadrature(n: int, tol=1e-20, prec: int = DEFAULT_PREC):
    """Quadrature of the same integral; the integrand is a polynomial of degree n - 2."""
    def f(y):
        if y == 0:
            return mpf(n) * (n - 1) / 2
        return ((1 - y) ** n - 1 + n * y) / y**2
    with workdps(prec + GUARD + n // 3):
        return quad_adaptive(f, 0, 1, tol, prec=prec + n // 3)


def _lemma2_f(n, s, b, shift=0):
    def f(x):
        w = s / (2 * (x - shift) + b + 1)
        return (1 - w) ** n - 1 + n * w
    return f


def lemma2_sandwich(n: int, b, prec: int = 40) -> BoundReport:
    """Integral comparison for S = sum_k f(k), f(x) = (1 - s/(2x+b+1))^n - 1 + n s/(2x+b+1).

    f decreases, so the integrals of f(x) and f(x-1) over [1, inf) bracket S.
    Both are computed by quadrature; S is the full trivial-zero sum with its
    sign flipped.
    """
    if n < 2 or b < 0:
        raise DomainError(f"needs n >= 2 and b >= 0, got n={n}, b={b}")
    S_neg, S_err = licore.trivial_zero_sum_inf(n, b, prec)
    with workdps(prec + GUARD):
        bb = mpf(b)
        s = 2 * bb + 1
        S = -S_neg
        tol = abs(S) * mpf(10) ** (-(prec // 2))
        scale = max(1, n * float(s))
        lower = quad_adaptive(_lemma2_f(n, s, bb), 1, mpmath.inf, tol, prec=prec, scale=scale, max_panels=2000)
        upper = quad_adaptive(_lemma2_f(n, s, bb, 1), 1, mpmath.inf, tol, prec=prec, scale=scale, max_panels=2000)
        lo = lower.value + lower.err_estimate
        hi = upper.value - upper.err_estimate
        ok = lo <= S - S_err and S + S_err <= hi
        lead = s / 2 * n * mpmath.log(n)
        ratio = S / lead
        slack = min(S - lo, hi - S)
    with workdps(prec):
        return BoundReport("lemma2", {"n": n, "b": float(b)}, +lo, +hi, +slack, bool(ok),
                           {"sum": +S, "leading_ratio": +ratio, "lower_integral": +lower.value,
                            "upper_integral": +upper.value})


def lemma2_leading_ratio(n: int, b, prec: int = 40) -> mpf:
    """S/((s/2) n ln n) with S the full sum above."""
    S_neg, _ = licore.trivial_zero_sum_inf(n, b, prec)
    with workdps(prec):
        return -S_neg / ((2 * mpf(b) + 1) / 2 * n * mpmath.log(n))


def lemma2_monotone(n: int, b, k_max: int = 2000) -> bool:
    """The summand's size |f(k)| decreases on k = 1..k_max."""
    s = 2 * float(b) + 1
    k = np.arange(1, k_max + 1, dtype=float)
    w = s / (2 * k + float(b) + 1)
    f = (1 - w) ** n - 1 + n * w
    return bool(np.all(np.diff(f) <= 0))


# ------------------------------------------------------------- odd-part kernel integral


def lemma3_constant(n: int, b) -> mpf:
    """(2b/(4b^2-1)) (2b)^(n+1), times an extra 2b at n = 1."""
    b = mpf(b)
    c = 2 * b / (4 * b * b - 1) * (2 * b) ** (n + 1)
    return c * 2 * b if n == 1 else c


def lemma3_integrand(n, b):
    b = mpf(b)
    return lambda t: (4 * b * b + t * t) ** (mpf(n - 1) / 2) / (1 + t * t) ** (mpf(n + 1) / 2)


def lemma3_integral(n: int, b, rel_tol=1e-12, prec: int = 30):
    """The integral over the real line as twice the half-line integral."""
    with workdps(prec + GUARD):
        f = lemma3_integrand(n, b)
        scale = max(1.0, 2 * float(b))
        # Rough size of the answer fixes the absolute tolerance.
        size = 2 * float(b) ** (n - 1) * math.pi + 1
        q = quad_adaptive(f, 0, mpmath.inf, rel_tol * size, prec=prec, scale=scale, max_panels=3000)
        return 2 * q.value, 2 * q.err_estimate


def lemma3_bound(n: int, b, prec: int = 30) -> BoundReport:
    """Kernel integral vs. the constant bound; pass when I <= bound."""
    if not b > 0.5:
        raise DomainError(f"needs b > 1/2, got {b}")
    if n < 1:
        raise DomainError(f"needs n >= 1, got {n}")
    I, err = lemma3_integral(n, b, prec=prec)
    with workdps(prec):
        bound = lemma3_constant(n, b)
        return BoundReport("lemma3", {"n": n, "b": float(b)}, +I, +bound, +(bound - I - err), bool(I + err <= bound),
                           {"quad_err": +err, "ratio": +(I / bound)})


# ---------------------------------------------------------- laguerre-exp


def laguerre_exp_closed_form(q, n: int, prec: int = DEFAULT_PREC) -> mpf:
    with workdps(prec):
        q = mpf(q)
        return 1 - (1 - 1 / q) ** n


def laguerre_exp_identity(q, n: int, prec: int = 40, rel_tol=1e-10) -> BoundReport:
    """Quadrature of exp(-qx) L^1_{n-1}(x) over [0, inf) against 1 - (1 - 1/q)^n."""
    if not q > 0:
        raise DomainError(f"needs q > 0, got {q}")
    with workdps(prec + GUARD):
        qq = mpf(q)
        closed = laguerre_exp_closed_form(qq, n, prec + GUARD)
        # Integrand peaks near x = (n-1)/q; its size there sets the working scale.
        peak_x = max(1.0, (n - 1) / float(q))
        scale = 1.0 / float(q)
        f = lambda x: mpmath.exp(-qq * x) * laguerre_l1(n - 1, x, prec + GUARD)
        size = max(abs(closed), mpf(1))
        res = quad_adaptive(f, 0, mpmath.inf, size * mpf(10) ** -16, prec=prec, scale=scale,
                            points=None, max_panels=400)
        resid = abs(res.value - closed) / size
    with workdps(prec):
        return BoundReport("eq20", {"q": float(q), "n": n}, +res.value, +closed, +(rel_tol - resid),
                           bool(resid <= rel_tol), {"residual": +resid, "quad_err": +res.err_estimate,
                                                   "peak_x": peak_x})


# ---------------------------------------------------------- positivity


def positivity_scan(m_max: int, b_grid, zeros: ZeroTable, prec: int = 30) -> dict:
    """D_n(b), n = 1..m_max, over a grid of b by route A.

    Reports the smallest grid b with every D_n(b) > 0 and, at the largest
    grid b, the ratio D_n(b)/((n/2) psi((b+1)/2)) for each n.
    """
    if m_max < 1:
        raise DomainError("m_max must be >= 1")
    grid = [float(b) for b in b_grid]
    rows = []
    first_ok = None
    for b in grid:
        vals = [licore.k_sum_zeros(n, b, zeros, prec) for n in range(1, m_max + 1)]
        all_pos = all(r.value > 0 for r in vals)
        rows.append({"b": b, "values": [r.value for r in vals], "errs": [r.err for r in vals],
                     "all_positive": all_pos})
        if all_pos and first_ok is None:
            first_ok = b
    b_top = grid[-1]
    ratios = []
    with workdps(prec):
        psi = digamma((mpf(b_top) + 1) / 2, prec)
        for n, v in enumerate(rows[-1]["values"], start=1):
            ratios.append(v / (n * psi / 2) if psi > 0 else mpmath.inf)
    return {"rows": rows, "smallest_positive_b": first_ok, "dominance_b": b_top, "dominance_ratios": ratios,
            "all_positive": all(r["all_positive"] for r in rows)}


# -------------------------------------------------- shifted coefficient


def proposition1_margin(n: int, b, eps, zeros: ZeroTable, prec: int = DEFAULT_PREC) -> BoundReport:
    """d_shifted(n, b) + (1 - eps)(n/2) ln n; passes when positive."""
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    r = licore.d_shifted(n, b, zeros, prec=prec)
    with workdps(prec):
        term = (1 - mpf(eps)) * n * mpmath.log(n) / 2
        margin = r.value + term
        return BoundReport("proposition1", {"n": n, "b": float(b), "eps": float(eps)}, +r.value, -term, +margin,
                           bool(margin > r.err), {"margin": +margin, "err": r.err})


def compensation_band(n: int, b, prec: int = DEFAULT_PREC) -> tuple[mpf, mpf, mpf]:
    """(prediction without A, low end, high end) for the shifted coefficient, before the 0.5 n allowance.

    prediction = (n/2) ln(b + 1/2) - (n/2) psi((b+1)/2) - n/(b+1), and A lies
    between (n/2) ln(2 - 5/(b+3)) and (n/2) ln(2 - 1/(b+1)).
    """
    with workdps(prec + GUARD):
        b = mpf(b)
        base = n / mpf(2) * mpmath.log(b + mpf(1) / 2) - n * digamma((b + 1) / 2, prec + GUARD) / 2 - n / (b + 1)
        a_lo = n / mpf(2) * mpmath.log(2 - 5 / (b + 3))
        a_hi = n / mpf(2) * mpmath.log(2 - 1 / (b + 1))
        lo, hi = base - a_hi, base - a_lo
    with workdps(prec):
        return +base, +lo, +hi


def compensation_report(n: int, b, zeros: ZeroTable, allowance: float = 0.5,
                        prec: int = DEFAULT_PREC) -> BoundReport:
    """Pole term size, stable shifted coefficient, and band membership with allowance * n."""
    if not b > 0:
        raise DomainError(f"needs b > 0, got {b}")
    pole = licore.d_pole_term(n, b, prec)
    r = licore.d_shifted(n, b, zeros, prec=prec)
    base, lo, hi = compensation_band(n, b, prec)
    with workdps(prec):
        lo_a, hi_a = lo - allowance * n, hi + allowance * n
        slack = min(r.value - lo_a, hi_a - r.value)
        return BoundReport("compensation", {"n": n, "b": float(b)}, +r.value, (+lo_a, +hi_a), +slack,
                           bool(slack >= 0), {"pole_term": pole, "band_low": lo, "band_high": hi,
                                             "shifted_err": r.err, "cancellation_digits":
                                             float(mpmath.log10(abs(pole) / max(abs(r.value), mpf(10) ** -30)))})


# ------------------------------------------------------- chebyshev model


def _model_count(T):
    return np.maximum(n_of_t_array(T), 0.0)


def chebyshev_model_integrand(n, b):
    s = 2 * float(b) + 1

    def g(T):
        T = np.asarray(T, dtype=float)
        den = T * T + s * s / 4
        x = np.clip((T * T - s * s / 4) / den, -1.0, 1.0)
        return 2 * n * s * s * T / den**2 * chebyshev_u_array(n - 1, x) * _model_count(T)
    return g


def chebyshev_model_sum(n: int, b, rel_tol: float = 1e-9) -> tuple[float, float]:
    """Model of k_{n,b}: 2n times the integral over T of s^2 T/(T^2+s^2/4)^2 U_{n-1}(x(T)) N_model(T).

    N_model is the smooth count clamped at 0, so the range starts at 2 pi e.
    Returns (value, quadrature error estimate).
    """
    if n < 2:
        raise DomainError(f"needs n >= 2, got {n}")
    if not b > -0.5:
        raise DomainError(f"needs b > -1/2, got {b}")
    s = 2 * float(b) + 1
    t0 = 2 * math.pi * math.e
    g = chebyshev_model_integrand(n, b)
    # Oscillations of U_{n-1}(x(T)) die out once n s/T is small.
    t_osc = max(t0 * 2, 4.0 * n * s)
    size = n * s * math.log(n + 2) + 1
    head = quad_adaptive(g, t0, t_osc, rel_tol * size, vectorized=True, max_intervals=200000)
    tail = quad_adaptive(g, t_osc, math.inf, rel_tol * size, vectorized=True, scale=t_osc, max_panels=200)
    return head.value + tail.value, head.err_estimate + tail.err_estimate


def chebyshev_model_sum_x(n: int, b, rel_tol: float = 1e-9) -> tuple[float, float]:
    """The same model written as 2n times the integral of U_{n-1}(x) N(T(x)) dx up to x = 1.

    T(x) = (s/2) sqrt((1+x)/(1-x)).  The integrable singularity at x = 1 is
    removed by x = 1 - u^2.
    """
    s = 2 * float(b) + 1
    t0 = 2 * math.pi * math.e
    x0 = (t0 * t0 - s * s / 4) / (t0 * t0 + s * s / 4)
    u0 = math.sqrt(1 - x0)

    def g(u):
        u = np.asarray(u, dtype=float)
        x = 1 - u * u
        T = (s / 2) * np.sqrt((2 - u * u) / np.maximum(u * u, 1e-300))
        return 2 * n * chebyshev_u_array(n - 1, x) * _model_count(T) * 2 * u

    size = n * s * math.log(n + 2) + 1
    # Split where the T-oscillations end, mapped to u.
    t_osc = max(t0 * 2, 4.0 * n * s)
    u_osc = math.sqrt(1 - (t_osc**2 - s * s / 4) / (t_osc**2 + s * s / 4))
    a = quad_adaptive(g, u_osc, u0, rel_tol * size, vectorized=True, max_intervals=200000)
    c = quad_adaptive(g, 0.0, u_osc, rel_tol * size, vectorized=True, max_intervals=200000)
    return a.value + c.value, a.err_estimate + c.err_estimate


def sine_identity_residual(n: int, b, T: np.ndarray) -> float:
    """max |U_{n-1}(cos theta) sin theta - sin(n theta)| over T, theta = theta(T)."""
    s = 2 * float(b) + 1
    T = np.asarray(T, dtype=float)
    theta = -2 * np.arctan(s / (2 * T))
    den = T * T + s * s / 4
    lhs = chebyshev_u_array(n - 1, (T * T - s * s / 4) / den) * (-s * T / den)
    return float(np.max(np.abs(lhs - np.sin(n * theta))))


def chebyshev_model_report(n: int, b, zeros: ZeroTable, rel: float = 0.2) -> BoundReport:
    """Model vs. route-A k_{n,b}; pass when within ``rel`` relative."""
    model, err = chebyshev_model_sum(n, b)
    k = float(licore.k_sum_zeros(n, b, zeros).k_value)
    dev = abs(model - k) / abs(k)
    return BoundReport("chebyshev_model", {"n": n, "b": float(b)}, model, k, rel - dev, bool(dev <= rel),
                       {"relative_deviation": dev, "quad_err": err})
