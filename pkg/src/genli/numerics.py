"""Extended-precision arithmetic, summation, special functions and quadrature.

Extended reals are :class:`mpmath.mpf` values.  Every public function takes a
``prec`` argument in decimal digits and runs under :func:`mpmath.workdps`, so
the global mpmath precision is only changed for the duration of a call.
Arithmetic done by the caller on returned values happens at whatever
precision the caller has active; wrap it in ``workdps(prec)`` as well.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import mpmath
import numpy as np
from mpmath import mpf, workdps

from .errors import AccuracyError, DomainError

ExtReal = mpf

DEFAULT_PREC = 60
MIN_PREC = 16
GUARD = 10


def ext(x, prec: int = DEFAULT_PREC) -> mpf:
    """Convert ``x`` (int, float, str, Fraction or mpf) to an extended real at ``prec`` digits."""
    if prec < MIN_PREC:
        raise DomainError(f"precision must be at least {MIN_PREC} digits, got {prec}")
    with workdps(prec):
        if hasattr(x, "numerator") and hasattr(x, "denominator") and not isinstance(x, (int, float)):
            return mpf(x.numerator) / x.denominator
        return mpf(x)


def to_decimal(x, digits: int = DEFAULT_PREC) -> str:
    """Decimal string with ``digits`` significant digits (round-trips through :func:`ext`)."""
    return mpmath.nstr(mpf(x), digits, strip_zeros=False, min_fixed=-4, max_fixed=digits)


# ---------------------------------------------------------------- summation


def comp_sum(terms: Iterable, prec: int = DEFAULT_PREC, chunk_size: int | None = None) -> mpf:
    """Neumaier-compensated sum at ``prec`` digits.

    With ``chunk_size`` the input is split into consecutive chunks that are
    summed independently and then combined in chunk order, the same shape a
    parallel reduction would take; the result depends only on the input order
    and the chunk size.
    """
    if isinstance(terms, np.ndarray) and terms.dtype.kind == "f" and chunk_size is None:
        # fsum is correctly rounded for binary64 input.
        with workdps(prec):
            return mpf(math.fsum(terms.tolist()))
    with workdps(prec + GUARD):
        if chunk_size is not None:
            items = list(terms)
            partials = [_neumaier(items[i:i + chunk_size]) for i in range(0, len(items), chunk_size)]
            total = _neumaier(partials)
        else:
            total = _neumaier(terms)
    with workdps(prec):
        return +total


def _neumaier(terms):
    s = mpf(0)
    c = mpf(0)
    for x in terms:
        x = mpf(x)
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
    return s + c


# -------------------------------------------------------- special functions


@lru_cache(maxsize=None)
def _bernoulli_even(count: int, prec: int) -> tuple:
    """B_2, B_4, ..., B_{2*count} at ``prec`` digits."""
    with workdps(prec):
        return tuple(mpmath.bernoulli(2 * k) for k in range(1, count + 1))


def digamma(x, prec: int = DEFAULT_PREC) -> mpf:
    """psi(x) for real x > 0 by upward recurrence and the Stirling-type asymptotic series."""
    with workdps(prec + GUARD):
        x = mpf(x)
        if x <= 0:
            raise DomainError(f"digamma needs x > 0, got {x}")
        shift_to = max(12, int(0.4 * (prec + GUARD)) + 1)
        shift = []
        while x < shift_to:
            shift.append(1 / x)
            x += 1
        eps = mpf(10) ** (-(prec + GUARD))
        bern = _bernoulli_even(4 * prec, prec + GUARD)
        x2 = x * x
        xp = x2
        series = []
        for k, b2k in enumerate(bern, start=1):
            term = b2k / (2 * k * xp)
            series.append(term)
            if abs(term) < eps:
                break
            xp *= x2
        result = mpmath.log(x) - 1 / (2 * x) - _neumaier(series) - _neumaier(shift)
    with workdps(prec):
        return +result


def laguerre(m: int, alpha, x, prec: int = DEFAULT_PREC) -> mpf:
    """Generalized Laguerre polynomial L^(alpha)_m(x) by the three-term recurrence in m."""
    if m < 0:
        raise DomainError(f"Laguerre degree must be >= 0, got {m}")
    with workdps(prec + GUARD):
        x = mpf(x)
        alpha = mpf(alpha)
        prev, cur = mpf(1), 1 + alpha - x
        if m == 0:
            cur = prev
        for k in range(1, m):
            prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    with workdps(prec):
        return +cur


def laguerre_l1(m: int, x, prec: int = DEFAULT_PREC) -> mpf:
    """L^1_m(x) = -d/dx L_{m+1}(x)."""
    return laguerre(m, 1, x, prec)


def laguerre_l1_all(m_max: int, x, prec: int = DEFAULT_PREC) -> list:
    """[L^1_0(x), ..., L^1_{m_max}(x)] from a single recurrence pass."""
    if m_max < 0:
        raise DomainError(f"Laguerre degree must be >= 0, got {m_max}")
    with workdps(prec + GUARD):
        x = mpf(x)
        out = [mpf(1), 2 - x]
        for k in range(1, m_max):
            out.append(((2 * k + 2 - x) * out[k] - (k + 1) * out[k - 1]) / (k + 1))
    with workdps(prec):
        return [+v for v in out[: m_max + 1]]


def laguerre_l1_explicit(m: int, x, prec: int = DEFAULT_PREC) -> mpf:
    """Coefficient form sum_{j=1}^{m+1} C(m+1, j) (-1)^(j-1) x^(j-1)/(j-1)!.

    Kept as an independent check on :func:`laguerre_l1`; it needs more
    working digits than the recurrence because the terms alternate.
    """
    with workdps(2 * prec + GUARD):
        x = mpf(x)
        n = m + 1
        terms = [mpmath.binomial(n, j) * (-1) ** (j - 1) * x ** (j - 1) / mpmath.factorial(j - 1)
                 for j in range(1, n + 1)]
        total = mpmath.fsum(terms)
    with workdps(prec):
        return +total


def chebyshev_u(m: int, x, prec: int = DEFAULT_PREC) -> mpf:
    """Chebyshev polynomial of the second kind U_m(x) on [-1, 1] by recurrence."""
    if m < 0:
        raise DomainError(f"Chebyshev degree must be >= 0, got {m}")
    with workdps(prec + GUARD):
        x = mpf(x)
        if abs(x) > 1:
            raise DomainError(f"chebyshev_u is only provided on [-1, 1], got {x}")
        prev, cur = mpf(1), 2 * x
        if m == 0:
            cur = prev
        for _ in range(1, m):
            prev, cur = cur, 2 * x * cur - prev
    with workdps(prec):
        return +cur


def chebyshev_u_array(m: int, x: np.ndarray) -> np.ndarray:
    """Binary64 U_m over an array; used inside vectorised quadratures."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1):
        raise DomainError("chebyshev_u_array is only provided on [-1, 1]")
    prev = np.ones_like(x)
    if m == 0:
        return prev
    cur = 2 * x
    for _ in range(1, m):
        prev, cur = cur, 2 * x * cur - prev
    return cur


def hurwitz_zeta_int(j: int, q, prec: int = DEFAULT_PREC) -> mpf:
    """zeta(j, q) = sum_{k>=0} (k+q)^-j for integer j >= 2, q > 0 (Euler-Maclaurin tail)."""
    if j < 2:
        raise DomainError(f"Hurwitz zeta diverges for j < 2, got {j}")
    with workdps(prec + GUARD):
        q = mpf(q)
        if q <= 0:
            raise DomainError(f"Hurwitz zeta needs q > 0, got {q}")
        n_direct = max(prec + GUARD, 2 * j)
        head = _neumaier((k + q) ** (-j) for k in range(n_direct))
        a = n_direct + q
        eps = mpf(10) ** (-(prec + GUARD)) * abs(head)
        tail = [a ** (1 - j) / (j - 1), a ** (-j) / 2]
        bern = _bernoulli_even(4 * prec, prec + GUARD)
        rising = mpf(j)  # j (j+1) ... (j+2i-2)
        power = a ** (-j - 1)
        fact = mpf(2)
        for i, b2i in enumerate(bern, start=1):
            term = b2i / fact * rising * power
            tail.append(term)
            if abs(term) < eps:
                break
            rising *= (j + 2 * i - 1) * (j + 2 * i)
            power /= a * a
            fact *= (2 * i + 1) * (2 * i + 2)
        result = head + _neumaier(tail)
    with workdps(prec):
        return +result


# --------------------------------------------------------------- quadrature


@dataclass(frozen=True)
class QuadResult:
    value: object
    err_estimate: object
    evaluations: int


@lru_cache(maxsize=None)
def gauss_legendre(order: int, prec: int) -> tuple:
    """Nodes and weights on [-1, 1] at ``prec`` digits (Newton on P_order)."""
    with workdps(prec + GUARD):
        nodes, weights = [], []
        for i in range(1, order + 1):
            x = mpf(math.cos(math.pi * (i - 0.25) / (order + 0.5)))
            for _ in range(100):
                p0, p1 = mpf(1), x
                for k in range(2, order + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = order * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < mpf(10) ** (-(prec + GUARD - 2)):
                    break
            p0, p1 = mpf(1), x
            for k in range(2, order + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = order * (x * p1 - p0) / (x * x - 1)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
        return tuple(nodes), tuple(weights)


class _Rule:
    """One Gauss-Legendre rule bound to either mpf scalars or float64 arrays."""

    def __init__(self, f, order, prec, vectorized):
        self.f = f
        self.vectorized = vectorized
        self.evaluations = 0
        if vectorized:
            x, w = np.polynomial.legendre.leggauss(order)
            self.x, self.w = x, w
        else:
            self.x, self.w = gauss_legendre(order, prec)

    def apply(self, lo, hi):
        """Integrals over a batch of intervals (lists for mpf, arrays for float)."""
        if self.vectorized:
            lo = np.asarray(lo, dtype=float)
            hi = np.asarray(hi, dtype=float)
            half = (hi - lo) / 2
            mid = (hi + lo) / 2
            t = mid[:, None] + half[:, None] * self.x[None, :]
            vals = np.asarray(self.f(t.ravel()))
            self.evaluations += t.size
            vals = vals.reshape(t.shape + vals.shape[1:])
            w = self.w.reshape((1, -1) + (1,) * (vals.ndim - 2))
            return (vals * w).sum(axis=1) * half.reshape((-1,) + (1,) * (vals.ndim - 2))
        out = []
        for a, b in zip(lo, hi):
            half = (b - a) / 2
            mid = (b + a) / 2
            acc = [wi * self.f(mid + half * xi) for xi, wi in zip(self.x, self.w)]
            self.evaluations += len(acc)
            out.append(half * mpmath.fsum(acc))
        return out


def _adaptive_finite(rule: _Rule, a, b, tol, max_intervals):
    """Global adaptive bisection; interval error is |G(I) - G(left) - G(right)|."""
    if rule.vectorized:
        return _adaptive_finite_vec(rule, float(a), float(b), tol, max_intervals)
    whole = rule.apply([a], [b])[0]
    mid = (a + b) / 2
    left, right = rule.apply([a, mid], [mid, b])
    heap = []
    counter = 0

    def push(lo, hi, w, l, r):
        nonlocal counter
        err = abs(w - l - r)
        heapq.heappush(heap, (-err, counter, lo, hi, l, r))
        counter += 1

    push(a, b, whole, left, right)
    while True:
        total_err = mpmath.fsum(-e for e, *_ in heap)
        if total_err <= tol:
            break
        if len(heap) >= max_intervals:
            value = mpmath.fsum(l + r for _, _, _, _, l, r in heap)
            raise AccuracyError(f"quadrature did not converge in {max_intervals} intervals",
                                estimate=value, err=total_err)
        _, _, lo, hi, l, r = heapq.heappop(heap)
        mid = (lo + hi) / 2
        q1, q2 = (lo + mid) / 2, (mid + hi) / 2
        ll, lr, rl, rr = rule.apply([lo, q1, mid, q2], [q1, mid, q2, hi])
        push(lo, mid, l, ll, lr)
        push(mid, hi, r, rl, rr)
    value = mpmath.fsum(l + r for _, _, _, _, l, r in heap)
    return value, total_err


def _adaptive_finite_vec(rule, a, b, tol, max_intervals):
    lo = np.array([a])
    hi = np.array([b])
    whole = rule.apply(lo, hi)
    done_val = 0.0
    done_err = 0.0
    n_intervals = 1
    while len(lo):
        mid = (lo + hi) / 2
        halves = rule.apply(np.concatenate([lo, mid]), np.concatenate([mid, hi]))
        left, right = halves[: len(lo)], halves[len(lo):]
        diff = whole - left - right
        err = np.abs(diff) if diff.ndim == 1 else np.abs(diff).reshape(len(lo), -1).max(axis=1)
        width = hi - lo
        ok = err <= tol * width / (b - a)
        done_val = done_val + (left[ok] + right[ok]).sum(axis=0)
        done_err += err[ok].sum()
        n_intervals += int((~ok).sum())
        if n_intervals > max_intervals:
            value = done_val + (left[~ok] + right[~ok]).sum(axis=0)
            raise AccuracyError(f"quadrature did not converge in {max_intervals} intervals",
                                estimate=value, err=done_err + err[~ok].sum())
        keep = ~ok
        lo, mid_k, hi = lo[keep], mid[keep], hi[keep]
        whole = np.concatenate([left[keep], right[keep]])
        lo, hi = np.concatenate([lo, mid_k]), np.concatenate([mid_k, hi])
    return done_val, done_err


def wynn_epsilon(partials: Sequence) -> tuple:
    """Wynn epsilon acceleration of a sequence of partial sums.

    Returns (estimate, err) where err is the distance between the two most
    recent even-column extrapolations.
    """
    n = len(partials)
    if n < 3:
        last = partials[-1]
        return last, abs(last - partials[0]) if n > 1 else abs(last)
    eps_prev = [0 * partials[0]] * (n + 1)
    eps_cur = list(partials)
    best = [partials[-1], partials[-2]]
    col = 0
    while len(eps_cur) > 1:
        nxt = []
        for i in range(len(eps_cur) - 1):
            d = eps_cur[i + 1] - eps_cur[i]
            if d == 0:
                nxt.append(eps_cur[i + 1])
                continue
            nxt.append(eps_prev[i + 1] + 1 / d)
        eps_prev, eps_cur = eps_cur, nxt
        col += 1
        if col % 2 == 0:
            best.append(eps_cur[-1])
    estimate = best[-1]
    err = abs(best[-1] - best[-2]) if len(best) > 1 else abs(estimate)
    return estimate, err


def quad_adaptive(
    f: Callable,
    a,
    b,
    tol,
    *,
    prec: int = DEFAULT_PREC,
    vectorized: bool = False,
    period=None,
    scale=None,
    points: Sequence | None = None,
    order: int = 20,
    max_intervals: int = 4000,
    max_panels: int = 400,
) -> QuadResult:
    """Adaptive Gauss-Legendre quadrature of f over [a, b], b possibly +inf.

    ``tol`` is an absolute target.  Finite intervals are bisected globally
    until the summed nested-rule differences drop below ``tol``.  For
    ``b = inf`` the half-line is cut into panels: with ``period`` the panels
    are consecutive periods of an oscillating integrand and the partial sums
    are accelerated with Wynn's epsilon; otherwise panels grow geometrically
    from width ``scale`` (default 1) until their contributions fall below
    tol/100.  ``points`` are interior breakpoints for finite ranges.

    With ``vectorized=True`` the integrand takes a float64 array of nodes and
    returns an array (optionally with trailing dimensions for vector-valued
    integrands); the whole computation then runs in binary64.
    """
    rule = _Rule(f, order, prec, vectorized)
    conv = float if vectorized else mpf
    with workdps(prec + (0 if vectorized else GUARD)):
        a = conv(a)
        tol = conv(tol)
        if b == math.inf or (not vectorized and b == mpmath.inf):
            value, err = _half_line(rule, a, tol, period, scale, max_intervals, max_panels, conv)
        else:
            b = conv(b)
            cuts = [a] + sorted(conv(p) for p in (points or []) if a < conv(p) < b) + [b]
            value, err = 0 * tol, 0 * tol
            share = tol / (len(cuts) - 1)
            for lo, hi in zip(cuts[:-1], cuts[1:]):
                v, e = _adaptive_finite(rule, lo, hi, share, max_intervals)
                value = value + v
                err = err + e
    if not vectorized:
        with workdps(prec):
            value, err = +value, +err
    return QuadResult(value, err, rule.evaluations)


def _half_line(rule, a, tol, period, scale, max_intervals, max_panels, conv):
    if period is not None:
        period = conv(period)
        # First panel ends at the next multiple of the period.
        k0 = math.floor(float(a / period)) + 1
        edges = [a, k0 * period]
        partial = []
        running, run_err = 0 * tol, 0 * tol
        estimates = []
        for k in range(max_panels):
            lo, hi = edges[-2], edges[-1]
            v, e = _adaptive_finite(rule, lo, hi, tol / 100, max_intervals)
            running = running + v
            run_err = run_err + e
            partial.append(running)
            edges.append(hi + period)
            if len(partial) >= 8:
                est, acc_err = wynn_epsilon(partial[-min(len(partial), 24):])
                estimates.append(est)
                if len(estimates) >= 3:
                    spread = max(abs(estimates[-1] - estimates[-2]), abs(estimates[-2] - estimates[-3]))
                    if _maxabs(spread) <= tol / 2:
                        return est, spread + run_err
        est = estimates[-1] if estimates else running
        raise AccuracyError("oscillatory tail did not settle", estimate=est, err=None)
    width = conv(1 if scale is None else scale)
    lo = a
    total, total_err = 0 * tol, 0 * tol
    small = 0
    for _ in range(max_panels):
        hi = lo + width
        v, e = _adaptive_finite(rule, lo, hi, tol / 100, max_intervals)
        total = total + v
        total_err = total_err + e
        if _maxabs(v) <= tol / 100:
            small += 1
            if small >= 3:
                return total, total_err + abs(v)
        else:
            small = 0
        lo = hi
        width = width * 2
    raise AccuracyError("integrand did not decay on the half line", estimate=total, err=None)


def _maxabs(v):
    if isinstance(v, np.ndarray):
        return float(np.max(np.abs(v))) if v.size else 0.0
    return abs(v)
