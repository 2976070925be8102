#!/usr/bin/env python3
"""Generate a table of zeta-zero ordinates (Odlyzko-style, one per line).

The first ``count`` ordinates of zeros of Z(t) are located by a vectorised
Riemann-Siegel evaluation (main sum plus the C0..C4 correction terms),
bracketed on a grid finer than the local mean spacing, checked block by
block against Rosser's rule on Gram points, refined by the Illinois method
and, below ``--polish-below``, polished with mpmath's ``siegelz``.

    python tools/make_zero_table.py --count 100000 --out data/zeros_100k.txt
"""

import argparse
import math
import sys
import time

import mpmath
import numpy as np

TWO_PI = 2.0 * math.pi


def _psi(p):
    return mpmath.cos(2 * mpmath.pi * (p * p - p - mpmath.mpf(1) / 16)) / mpmath.cos(2 * mpmath.pi * p)


def _correction_polys(degree=70, dps=60):
    """Chebyshev fits (on p in [0, 1]) of the Riemann-Siegel coefficients C0..C4."""
    pi = math.pi
    with mpmath.workdps(dps):
        nodes = [(mpmath.cos(mpmath.pi * (k + mpmath.mpf(1) / 2) / (degree + 1)) + 1) / 2
                 for k in range(degree + 1)]
        # Taylor coefficients of psi at each node, up to order 12.
        derivs = []
        for p in nodes:
            coeffs = mpmath.taylor(_psi, p, 12)
            derivs.append([coeffs[k] * mpmath.factorial(k) for k in range(13)])
    d = np.array([[float(v) for v in row] for row in derivs])
    c = [
        d[:, 0],
        -d[:, 3] / (96 * pi**2),
        d[:, 2] / (64 * pi**2) + d[:, 6] / (18432 * pi**4),
        -d[:, 1] / (64 * pi**2) - d[:, 5] / (3840 * pi**4) - d[:, 9] / (5308416 * pi**6),
        d[:, 0] / (128 * pi**2) + 19 * d[:, 4] / (24576 * pi**4)
        + 11 * d[:, 8] / (5898240 * pi**6) + d[:, 12] / (2038431744 * pi**8),
    ]
    x = np.array([float(2 * p - 1) for p in nodes])
    return [np.polynomial.chebyshev.Chebyshev.fit(x, ck, degree, domain=[-1, 1]) for ck in c]


class RiemannSiegel:
    def __init__(self):
        self.polys = _correction_polys()

    @staticmethod
    def theta(t):
        t = np.asarray(t, dtype=float)
        return (t / 2 * np.log(t / TWO_PI) - t / 2 - math.pi / 8
                + 1 / (48 * t) + 7 / (5760 * t**3) + 31 / (80640 * t**5))

    def z(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        tau = np.sqrt(t / TWO_PI)
        n_terms = np.floor(tau).astype(np.int64)
        p = tau - n_terms
        th = self.theta(t)
        main = np.zeros_like(t)
        for n in range(1, int(n_terms.max()) + 1):
            mask = n_terms >= n
            main += np.where(mask, np.cos(th - t * math.log(n)) / math.sqrt(n), 0.0)
        x = 2 * p - 1
        a = 1 / tau
        corr = np.zeros_like(t)
        for k in reversed(range(len(self.polys))):
            corr = corr * a + self.polys[k](x)
        sign = np.where(n_terms % 2 == 1, 1.0, -1.0)
        return 2 * main + sign * corr / np.sqrt(tau)

    def gram_point(self, j):
        # Newton on theta(g) = j*pi, vectorised.
        j = np.asarray(j, dtype=float)
        g = 2 * math.pi * np.exp(1 + _lambertw((8 * j + 1) / (8 * math.e)))
        for _ in range(6):
            g -= (self.theta(g) - j * math.pi) / (0.5 * np.log(g / TWO_PI))
        return g


def _lambertw(x):
    w = np.log1p(x)
    for _ in range(40):
        w -= (w * np.exp(w) - x) / (np.exp(w) * (w + 1))
    return w


def _sign_changes(ts, zs):
    idx = np.nonzero(np.signbit(zs[:-1]) != np.signbit(zs[1:]))[0]
    return ts[idx], ts[idx + 1]


def _grid(rs, lo, hi, frac):
    pts = [lo]
    t = lo
    while t < hi:
        t += frac * TWO_PI / math.log(max(t, 20.0) / TWO_PI)
        pts.append(min(t, hi))
    ts = np.array(pts)
    return ts


def locate(rs, t_end, frac=0.1, chunk=20000):
    # Gram points are grid points, so no bracket straddles a block boundary.
    jmax = int(rs.theta(np.array([t_end]))[0] / math.pi) - 1
    js = np.arange(-1, jmax + 1)
    gs = rs.gram_point(js)
    ts = np.union1d(_grid(rs, 10.0, t_end, frac), gs)
    zs = np.concatenate([rs.z(ts[i:i + chunk]) for i in range(0, len(ts), chunk)])
    lo, hi = _sign_changes(ts, zs)

    # Rosser's rule check on Gram blocks (valid far beyond this height).
    gz = rs.z(gs)
    good = (np.where(js % 2 == 0, 1.0, -1.0) * gz) > 0
    good_idx = np.nonzero(good)[0]
    bad_blocks = 0
    for a, b in zip(good_idx[:-1], good_idx[1:]):
        expected = b - a
        found = np.count_nonzero((lo >= gs[a]) & (hi <= gs[b]))
        if found != expected:
            bad_blocks += 1
            fine = np.linspace(gs[a], gs[b], 200 * expected + 1)
            flo, fhi = _sign_changes(fine, rs.z(fine))
            if len(flo) != expected:
                raise RuntimeError(f"Rosser block [{gs[a]}, {gs[b]}]: {len(flo)} zeros, expected {expected}")
            keep = ~((lo >= gs[a]) & (hi <= gs[b]))
            lo = np.sort(np.concatenate([lo[keep], flo]))
            hi = np.sort(np.concatenate([hi[keep], fhi]))
    return lo, hi, bad_blocks


def refine(rs, lo, hi, iters=60):
    a, b = lo.copy(), hi.copy()
    fa, fb = rs.z(a), rs.z(b)
    side = np.zeros_like(a)
    for _ in range(iters):
        c = (a * fb - b * fa) / (fb - fa)
        fc = rs.z(c)
        left = np.signbit(fc) == np.signbit(fa)
        # Illinois modification.
        a = np.where(left, c, a)
        fa_new = np.where(left, fc, fa)
        fb = np.where(left & (side == 1), fb / 2, fb)
        b = np.where(left, b, c)
        fb = np.where(left, fb, fc)
        fa_new = np.where(~left & (side == -1), fa_new / 2, fa_new)
        side = np.where(left, 1, -1)
        fa = fa_new
        if np.max(b - a) < 1e-11:
            break
    return (a * fb - b * fa) / (fb - fa)


def polish(ts, below):
    out = ts.copy()
    with mpmath.workdps(25):
        for i in np.nonzero(ts < below)[0]:
            t0 = ts[i]
            out[i] = float(mpmath.findroot(mpmath.siegelz, (t0 - 1e-3, t0 + 1e-3), solver="secant"))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--count", type=int, default=100000)
    ap.add_argument("--out", default="data/zeros_100k.txt")
    ap.add_argument("--polish-below", type=float, default=2000.0)
    args = ap.parse_args(argv)

    start = time.time()
    rs = RiemannSiegel()
    # Smooth count inverse plus margin.
    t_end = 20.0
    while t_end / TWO_PI * math.log(t_end / TWO_PI) - t_end / TWO_PI + 7 / 8 < args.count + 20:
        t_end *= 1.01
    lo, hi, bad = locate(rs, t_end)
    print(f"bracketed {len(lo)} zeros below {t_end:.1f} ({bad} refined blocks)", file=sys.stderr)
    if len(lo) < args.count:
        raise RuntimeError("not enough zeros bracketed")
    roots = refine(rs, lo[: args.count], hi[: args.count])
    roots = polish(roots, args.polish_below)
    if np.any(np.diff(roots) <= 0):
        raise RuntimeError("ordinates not strictly increasing")
    with open(args.out, "w") as fh:
        for t in roots:
            fh.write(f"{t:.9f}\n")
    print(f"wrote {len(roots)} ordinates, last {roots[-1]:.9f}, {time.time() - start:.1f}s", file=sys.stderr)


if __name__ == "__main__":
    main()
