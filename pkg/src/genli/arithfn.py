"""Von Mangoldt tables and prime-series values of ln zeta and zeta'/zeta for Re z > 1."""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import mpmath
import numpy as np
from mpmath import mpf, workdps
from scipy.special import exp1

from .errors import DomainError, ResourceError
from .numerics import DEFAULT_PREC

MAGIC = b"GLIV1"
DEFAULT_DELTA = 0.05
DEFAULT_MEMORY_BYTES = 2 * 1024**3
SEGMENT = 1 << 20
# Bytes held per m while building: Λ as float64 plus the prime base as uint32.
_BYTES_PER_ENTRY = 12


@dataclass(frozen=True)
class VonMangoldtTable:
    """Λ(m) for 0 <= m <= limit (index 0 unused).

    ``base[m]`` is the prime p with m = p^k, or 0; ``lam[m]`` is ln p as a
    double.  ``support`` lists the prime powers in increasing order, which is
    what every series loop actually iterates over.
    """

    limit: int
    base: np.ndarray
    lam: np.ndarray
    built_by: str
    support: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.support is None:
            object.__setattr__(self, "support", np.flatnonzero(self.base))
        for arr in (self.base, self.lam, self.support):
            arr.setflags(write=False)

    def __call__(self, m: int) -> float:
        return float(self.lam[m])

    def lambda_ext(self, m: int, prec: int = DEFAULT_PREC) -> mpf:
        """Λ(m) as ln p recomputed at ``prec`` digits."""
        p = int(self.base[m])
        with workdps(prec):
            return mpmath.log(p) if p else mpf(0)

    def chebyshev_psi(self, upto: int | None = None) -> float:
        """Chebyshev psi(x) = sum of Λ(m) for m <= x."""
        upto = self.limit if upto is None else min(upto, self.limit)
        idx = self.support[self.support <= upto]
        return math.fsum(self.lam[idx].tolist())

    def prime_powers(self, upto: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(m, Λ(m)) over the prime powers m <= upto."""
        idx = self.support if upto is None else self.support[self.support <= upto]
        return idx, self.lam[idx]


def _small_primes(limit: int) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.flatnonzero(flags)


def _sieve(limit: int) -> np.ndarray:
    """Prime base of every prime power up to ``limit``, by a segmented sieve."""
    base = np.zeros(limit + 1, dtype=np.uint32)
    root = math.isqrt(limit)
    small = _small_primes(max(root, 2))
    for lo in range(2, limit + 1, SEGMENT):
        hi = min(lo + SEGMENT, limit + 1)
        flags = np.ones(hi - lo, dtype=bool)
        for p in small:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, -(-lo // p) * p)
            flags[start - lo::p] = False
        seg = np.flatnonzero(flags) + lo
        base[seg] = seg
    for p in small:
        p = int(p)
        q = p * p
        while q <= limit:
            base[q] = p
            q *= p
    return base


def _cache_path(cache_dir, limit: int) -> Path:
    return Path(cache_dir) / f"vonmangoldt_{limit}.bin"


def write_table(table: VonMangoldtTable, path) -> None:
    """Write the cache file: magic, M (u64 LE), then Λ(1..M) as f64 LE."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", table.limit))
        fh.write(table.lam[1:].astype("<f8").tobytes())
    os.replace(tmp, path)


def read_table(path) -> VonMangoldtTable:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC) + 8)
        if head[: len(MAGIC)] != MAGIC:
            raise ValueError(f"{path}: not a von Mangoldt cache file")
        (limit,) = struct.unpack("<Q", head[len(MAGIC):])
        body = np.frombuffer(fh.read(), dtype="<f8")
    if body.size != limit:
        raise ValueError(f"{path}: expected {limit} entries, found {body.size}")
    lam = np.zeros(limit + 1)
    lam[1:] = body
    base = np.zeros(limit + 1, dtype=np.uint32)
    nz = np.flatnonzero(lam)
    base[nz] = np.rint(np.exp(lam[nz])).astype(np.uint32)
    return VonMangoldtTable(limit, base, lam, built_by=f"cache:{path.name}")


def sieve_von_mangoldt(M: int, cache_dir=None, memory_bytes: int = DEFAULT_MEMORY_BYTES) -> VonMangoldtTable:
    """Exact Λ(m) table for m <= M, read from or written to ``cache_dir`` when given."""
    if M < 2:
        raise DomainError(f"sieve limit must be >= 2, got {M}")
    need = _BYTES_PER_ENTRY * (M + 1)
    if need > memory_bytes:
        raise ResourceError(f"sieve to {M} needs about {need / 2**20:.0f} MiB, budget is {memory_bytes / 2**20:.0f} MiB")
    if cache_dir is not None:
        path = _cache_path(cache_dir, M)
        if path.exists():
            return read_table(path)
    base = _sieve(M)
    lam = np.zeros(M + 1)
    nz = np.flatnonzero(base)
    lam[nz] = np.log(base[nz].astype(float))
    table = VonMangoldtTable(M, base, lam, built_by="segmented-sieve")
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        write_table(table, _cache_path(cache_dir, M))
    return table


def psi_sanity_band(M: int) -> float:
    """Half-width 3 sqrt(M) ln^2 M of the build check on psi(M) - M."""
    return 3 * math.sqrt(M) * math.log(M) ** 2


# ------------------------------------------------------------ line values


class LogZeta(NamedTuple):
    re: mpf
    im: mpf
    tail: mpf


def _check_abscissa(c, delta):
    if c <= 1 + delta:
        raise DomainError(f"prime series needs c > 1 + {delta}, got c = {c}")


def _tail_bound(c: float, M: int) -> float:
    return 2 * M ** (1 - c) / ((c - 1) * math.log(M))


def log_zeta_line(c, t, table: VonMangoldtTable, *, prec: int = DEFAULT_PREC,
                  delta: float = DEFAULT_DELTA, smooth_tail: bool = False) -> LogZeta:
    """ln zeta(c + it) from the truncated prime series over m <= table.limit.

    Returns the real part (ln|zeta|), the imaginary part (continuous
    argument) and the tail bound 2 M^(1-c)/((c-1) ln M).  The truncated
    series is returned as is unless ``smooth_tail`` is set, in which case the
    prime-number-theorem estimate of the missing part is added (see
    :func:`log_zeta_array`).  Summation is in binary64 with exactly rounded
    accumulation, which is far below the truncation error for any M this
    package sieves.
    """
    c = float(c)
    _check_abscissa(c, delta)
    m, lam = table.prime_powers()
    lnm = np.log(m.astype(float))
    amp = lam / lnm * np.exp(-c * lnm)
    if t == 0:
        re_terms, im_terms = amp, np.zeros(1)
    else:
        phase = float(t) * lnm
        re_terms, im_terms = amp * np.cos(phase), -amp * np.sin(phase)
    re = math.fsum(re_terms.tolist())
    im = math.fsum(im_terms.tolist())
    if smooth_tail:
        corr = complex(_smooth_log_tail(np.array([complex(c, float(t))]), table.limit, table.chebyshev_psi())[0])
        re, im = re + corr.real, im + corr.imag
    with workdps(prec):
        return LogZeta(mpf(re), mpf(im), mpf(_tail_bound(c, table.limit)))


def _smooth_log_tail(z: np.ndarray, M: int, psi_M: float) -> np.ndarray:
    """Sum over m > M of Λ(m)/(ln m m^z) with ψ(x) replaced by x, plus the jump at M."""
    L = math.log(M)
    return exp1((z - 1) * L) + np.exp(-z * L) / L * (M - psi_M)


def log_zeta_array(c: float, t: np.ndarray, table: VonMangoldtTable, limit: int | None = None,
                   smooth_tail: bool = True, block: int = 64) -> np.ndarray:
    """Vectorised ln zeta(c + it) over an array of t (binary64, complex result).

    Uses the prime powers up to ``limit`` (default: the whole table).  With
    ``smooth_tail`` the remainder beyond the limit is estimated by replacing
    ψ(x) with x in the Stieltjes integral, which gives E1((z-1) ln M) plus
    the boundary term (M - ψ(M)) M^-z/ln M.
    """
    t = np.asarray(t, dtype=float)
    limit = table.limit if limit is None else min(limit, table.limit)
    m, lam = table.prime_powers(limit)
    lnm = np.log(m.astype(float))
    coef = lam / lnm * np.exp(-c * lnm)
    out = np.empty(t.shape, dtype=complex)
    flat_t = t.ravel()
    flat_out = out.reshape(-1)
    for i in range(0, flat_t.size, block):
        ph = np.outer(lnm, flat_t[i:i + block])
        flat_out[i:i + block] = coef @ np.cos(ph) - 1j * (coef @ np.sin(ph))
    if smooth_tail:
        out += _smooth_log_tail(c + 1j * t, limit, table.chebyshev_psi(limit))
    return out


def log_zeta_tail_bound(c: float, M: int) -> float:
    return _tail_bound(c, M)


def zeta_log_deriv(c, table: VonMangoldtTable, *, prec: int = DEFAULT_PREC,
                   delta: float = DEFAULT_DELTA, smooth_tail: bool = False) -> tuple[mpf, mpf]:
    """zeta'(c)/zeta(c) = -sum of Λ(m) m^-c over m <= M, and its tail bound 2 M^(1-c)/(c-1).

    With ``smooth_tail`` the estimate -(M^(1-c)/(c-1) + (M - ψ(M)) M^-c) of
    the missing part is added; the returned bound is then the one that holds
    under RH, c ∫_M^∞ x^(-c-1) E(x) dx with E(x) = sqrt(x) ln^2 x/(8π)
    bounding |ψ(x) - x|, plus E(M) M^-c.
    """
    c = float(c)
    _check_abscissa(c, delta)
    M = table.limit
    m, lam = table.prime_powers()
    # Exactly rounded binary64 accumulation; the truncation error dominates.
    total = -math.fsum((lam * np.exp(-c * np.log(m.astype(float)))).tolist())
    with workdps(prec):
        total = mpf(total)
        if not smooth_tail:
            return total, mpf(2 * M ** (1 - c) / (c - 1))
        cc = mpf(c)
        psi_M = mpf(table.chebyshev_psi())
        total -= mpf(M) ** (1 - cc) / (cc - 1) + (M - psi_M) * mpf(M) ** (-cc)
        return +total, rh_stieltjes_bound(lambda x: x ** (-cc), lambda x: -cc * x ** (-cc - 1), M, prec)


def schoenfeld_E(x):
    """|ψ(x) - x| < sqrt(x) ln^2 x/(8π) for x >= 73.2, assuming RH."""
    return mpmath.sqrt(x) * mpmath.log(x) ** 2 / (8 * mpmath.pi)


def rh_stieltjes_bound(phi, dphi, M, prec: int = DEFAULT_PREC, upper=None):
    """Bound on |∫_M^∞ phi d(ψ - x)| given |ψ(x) - x| <= E(x): E(M)|phi(M)| + ∫ |phi'| E."""
    with workdps(max(prec, 20)):
        M = mpf(M)
        hi = mpmath.inf if upper is None else upper
        integral = mpmath.quad(lambda x: abs(dphi(x)) * schoenfeld_E(x), [M, 4 * M, 64 * M, hi])
        return schoenfeld_E(M) * abs(phi(M)) + integral



# Bernoulli numbers B_2 .. B_40 over (2j)!, in binary64.
_EM_COEF = np.array([float(mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j)) for j in range(1, 21)])


def zeta_dirichlet_array(z: np.ndarray, terms: int | None = None, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """zeta(z) for complex z with Re z > 0, z != 1, from the Dirichlet series and an Euler-Maclaurin tail.

    Sums k^-z for k < N, with N = max(30, |Im z|/2 + 10) unless ``terms``
    is given, then adds N^(1-z)/(z-1) + N^-z/2 and ``order`` Bernoulli
    corrections.  Returns (values, error bounds); the bound is the first
    omitted correction times |z + 2 order + 1|/(Re z + 2 order + 1).
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if order > len(_EM_COEF) - 1:
        raise DomainError(f"order must be <= {len(_EM_COEF) - 1}")
    out = np.empty_like(z)
    err = np.empty(z.shape)
    flat, flat_out, flat_err = z.ravel(), out.reshape(-1), err.reshape(-1)
    n_need = np.maximum(30, np.abs(flat.imag) / 2 + 10).astype(int) if terms is None else np.full(flat.size, terms)
    order_idx = np.argsort(n_need, kind="stable")
    for start in range(0, flat.size, 256):
        sel = order_idx[start:start + 256]
        zz = flat[sel]
        N = int(n_need[sel].max())
        logk = np.log(np.arange(1, N, dtype=float))
        head = np.exp(-np.outer(logk, zz)).sum(axis=0)
        lnN = math.log(N)
        NmZ = np.exp(-zz * lnN)
        total = head + N * NmZ / (zz - 1) + NmZ / 2
        rising = zz.copy()
        power = NmZ / N
        for j in range(order):
            total += _EM_COEF[j] * rising * power
            rising = rising * (zz + 2 * j + 1) * (zz + 2 * j + 2)
            power = power / (N * N)
        nxt = np.abs(_EM_COEF[order] * rising * power)
        flat_out[sel] = total
        flat_err[sel] = nxt * np.abs(zz + 2 * order + 1) / (zz.real + 2 * order + 1)
    return out, err


def log_zeta_dirichlet_array(c: float, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """ln zeta(c + it) as the principal log of :func:`zeta_dirichlet_array`.

    For c > 1.05 the prime series bounds |Im ln zeta| by ln zeta(c) < pi, so
    the principal branch is the continuous one.  Returns (values, error
    bounds) with the bound |dzeta|/(|zeta| - |dzeta|).
    """
    if c <= 1.05:
        raise DomainError(f"principal-branch log of zeta needs c > 1.05, got {c}")
    t = np.asarray(t, dtype=float)
    zv, ze = zeta_dirichlet_array(c + 1j * t)
    mag = np.abs(zv)
    return np.log(zv).reshape(t.shape), (ze / np.maximum(mag - ze, 1e-300)).reshape(t.shape)
