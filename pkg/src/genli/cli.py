"""Command line front end: ``genli compute|verify|zeros|sieve``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import mpmath
from mpmath import mpf

from . import arithfn, asymptotics, licore, zerodata
from .errors import AccuracyError, DomainError, ResourceError, ZeroTableError
from .licore import Route
from .numerics import DEFAULT_PREC, MIN_PREC, to_decimal

log = logging.getLogger("genli")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INCONCLUSIVE = 0, 1, 2, 3
CSV_HEADER = ["n", "b", "route", "value", "k_value", "err", "terms", "wall_ms", "status"]
SUITES = ("lemma2", "lemma3", "eq20", "eq22", "theorem6", "compensation", "positivity", "routes")
ROUTE_ORDER = (Route.ZERO_SUM, Route.XI_DECOMP, Route.CONTOUR, Route.ARITHMETIC)
DEFAULT_CACHE = os.environ.get("GENLI_CACHE", str(Path.home() / ".cache" / "genli"))


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    precision: int = DEFAULT_PREC
    zeros: str | None = None
    max_zeros: int | None = None
    sieve_limit: int = 10**7
    tol: float = 1e-3
    routes: tuple = ROUTE_ORDER
    n_values: tuple = (1,)
    b_values: tuple = (1.0,)
    fmt: str = "csv"
    cache_dir: str = DEFAULT_CACHE
    timing: bool = False
    jobs: int = 1
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def digits(self) -> int:
        return min(self.precision, 30)


# ------------------------------------------------------------ parsing


def parse_n_range(text: str) -> tuple:
    """'1-6', '1..6', '3' or '1,4,9' (and mixtures) into a sorted tuple."""
    out = []
    for part in str(text).replace(" ", "").split(","):
        if not part:
            continue
        sep = ".." if ".." in part else ("-" if "-" in part[1:] else None)
        try:
            if sep:
                lo, hi = part.split(sep, 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise UsageError(f"bad n range {text!r}") from None
    if not out:
        raise UsageError(f"n range {text!r} is empty")
    if min(out) < 1:
        raise UsageError("n values must be positive integers")
    return tuple(sorted(set(out)))


def parse_b_list(text: str) -> tuple:
    try:
        vals = tuple(float(x) for x in str(text).replace(" ", "").split(",") if x)
    except ValueError:
        raise UsageError(f"bad b list {text!r}") from None
    if not vals:
        raise UsageError("b list is empty")
    for b in vals:
        if not b > -0.5:
            raise UsageError(f"b = {b} violates b > -1/2")
    return vals


def parse_routes(text: str) -> tuple:
    if str(text).strip().lower() == "all":
        return ROUTE_ORDER
    try:
        picked = {licore.parse_route(x) for x in str(text).split(",") if x.strip()}
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not picked:
        raise UsageError("route list is empty")
    return tuple(r for r in ROUTE_ORDER if r in picked)


def _positive_int(text) -> int:
    try:
        v = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _positive_float(text) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def check_route_domain(routes, b_values):
    """Reject route/b pairs outside the route's domain before any work starts."""
    for b in b_values:
        for r in routes:
            if r is Route.XI_DECOMP and not b > 0:
                raise UsageError(f"route XiDecomp needs b > 0 (got b = {b})")
            if r is Route.ARITHMETIC and not b > 0:
                raise UsageError(f"route Arithmetic needs a = b + 1 > 1 (got b = {b})")
            if r is Route.CONTOUR and not licore.default_abscissa(b) > 1.05:
                raise UsageError(f"route Contour needs an abscissa 1.05 < c < b + 1 (got b = {b})")


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment; keys use flag names."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        k, v = (x.strip() for x in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' file; command-line flags override it")
    common.add_argument("--n", default="1", help="n values: '1-6', '1..6' or '1,2,5' (default 1)")
    common.add_argument("--b", default="1", help="comma-separated b values, each > -1/2 (default 1)")
    common.add_argument("--routes", default="all",
                        help="comma-separated routes ZeroSum,XiDecomp,Contour,Arithmetic or A-D, or 'all'")
    common.add_argument("--zeros", help="zero-ordinate file, one per line (needed by ZeroSum and several suites)")
    common.add_argument("--max-zeros", type=_positive_int, help="read only this many ordinates")
    common.add_argument("--sieve-limit", type=_positive_int, default=10**7, help="von Mangoldt limit M (default 1e7)")
    common.add_argument("--precision", type=_positive_int, default=DEFAULT_PREC,
                        help=f"working decimal digits P (default {DEFAULT_PREC}, minimum {MIN_PREC})")
    common.add_argument("--tol", type=_positive_float, default=1e-3,
                        help="target absolute error for the series and contour routes (default 1e-3)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--cache-dir", default=DEFAULT_CACHE, help=f"sieve and zero cache (default {DEFAULT_CACHE})")
    common.add_argument("--timing", action="store_true", help="fill wall_ms; output is then not reproducible")
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker processes over (b, route) groups")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="genli", description="Generalized Li coefficients D_n(b) and k_{n,b}.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("compute", parents=[common], help="compute coefficients, one row per (n, b, route)")
    v = sub.add_parser("verify", parents=[common], help="run a verification suite and emit a JSON report")
    v.add_argument("suite", help=f"one of {', '.join(SUITES)}")
    z = sub.add_parser("zeros", parents=[common], help="import or validate a zero table")
    z.add_argument("action", choices=("import", "validate"))
    z.add_argument("path")
    z.add_argument("--manifest", help="JSON manifest with the expected sha256")
    sub.add_parser("sieve", parents=[common], help="build and cache the von Mangoldt table")
    return p


def parse_args(argv) -> tuple[argparse.Namespace, RunConfig]:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config_file(args.config)
        sub_defaults = {k: v for k, v in cfg.items() if k not in ("config", "suite", "action", "path")}
        if "format" in sub_defaults:
            sub_defaults["fmt"] = sub_defaults.pop("format")
        # Re-parse with the file as defaults so explicit flags still win.
        for action in parser._subparsers._group_actions[0].choices.values():
            action.set_defaults(**_coerce_config(action, sub_defaults))
        args = parser.parse_args(argv)
    if args.precision < MIN_PREC:
        raise UsageError(f"precision must be at least {MIN_PREC}")
    config = RunConfig(precision=args.precision, zeros=args.zeros, max_zeros=args.max_zeros,
                       sieve_limit=args.sieve_limit, tol=args.tol, routes=parse_routes(args.routes),
                       n_values=parse_n_range(args.n), b_values=parse_b_list(args.b), fmt=args.fmt,
                       cache_dir=args.cache_dir, timing=args.timing, jobs=args.jobs)
    return args, config


def _coerce_config(subparser, values: dict) -> dict:
    known = {a.dest: a for a in subparser._actions}
    out = {}
    for k, v in values.items():
        if k not in known:
            raise UsageError(f"unknown config key {k!r}")
        act = known[k]
        if isinstance(act, argparse._StoreTrueAction):
            out[k] = str(v).lower() in ("1", "true", "yes", "on")
        elif act.type is not None:
            try:
                out[k] = act.type(v)
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"config {k}: {exc}") from None
        else:
            out[k] = v
    return out


# ------------------------------------------------------------ data


def load_zero_table(config: RunConfig) -> zerodata.ZeroTable:
    if not config.zeros:
        raise DataError("a zero table is required: pass --zeros PATH")
    try:
        return zerodata.load_zeros(config.zeros, config.max_zeros)
    except FileNotFoundError as exc:
        raise DataError(str(exc)) from None
    except ZeroTableError as exc:
        raise DataError(f"{config.zeros}: {exc}") from None


def load_sieve(config: RunConfig) -> arithfn.VonMangoldtTable:
    return arithfn.sieve_von_mangoldt(config.sieve_limit, cache_dir=config.cache_dir)


# ------------------------------------------------------------ compute


def compute_cell(route: Route, n: int, b: float, config: RunConfig, zeros=None, table=None,
                 nmax: int | None = None, contour_tol: float | None = None) -> licore.CoeffResult:
    P = config.precision
    if route is Route.ZERO_SUM:
        return licore.k_sum_zeros(n, b, zeros, P)
    if route is Route.XI_DECOMP:
        return licore.d_xi_route_b(n, b, table, tol=config.tol, prec=P, nmax=nmax)
    if route is Route.CONTOUR:
        return licore.d_xi_route_c(n, b, tol=contour_tol or config.tol, prec=P)
    return licore.k_route_arithmetic(n, b + 1, table, tol=config.tol, prec=P, nmax=nmax)


def _group_rows(task):
    route, b, config = task
    zeros = load_zero_table(config) if route is Route.ZERO_SUM else None
    table = load_sieve(config) if route in (Route.XI_DECOMP, Route.ARITHMETIC) else None
    nmax = max(config.n_values)
    rows = []
    for n in config.n_values:
        t0 = time.perf_counter()
        try:
            r = compute_cell(route, n, b, config, zeros, table, nmax)
        except AccuracyError as exc:
            est = exc.estimate if exc.estimate is not None else mpf("nan")
            err = exc.err if exc.err is not None else mpf("inf")
            r = licore._result(n, b, route, est, err, 0, config.precision, status="inaccurate")
        ms = (time.perf_counter() - t0) * 1000
        rows.append(format_row(r, config, ms))
    return rows


def format_row(r: licore.CoeffResult, config: RunConfig, wall_ms: float | None = None) -> dict:
    d = config.digits
    return {"n": str(r.n), "b": _fmt_b(r.b), "route": r.route, "value": to_decimal(r.value, d),
            "k_value": to_decimal(r.k_value, d), "err": mpmath.nstr(mpf(r.err), 3) if math.isfinite(float(r.err))
            else "inf", "terms": str(r.terms_used),
            "wall_ms": f"{wall_ms:.1f}" if config.timing and wall_ms is not None else "", "status": r.status}


def _fmt_b(b: float) -> str:
    return repr(float(b))


def cmd_compute(config: RunConfig) -> tuple[int, str]:
    """All (n, b, route) cells in request order; returns (exit status, rendered output)."""
    check_route_domain(config.routes, config.b_values)
    if Route.ZERO_SUM in config.routes:
        load_zero_table(config)
    tasks = [(route, b, config) for b in config.b_values for route in config.routes]
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            groups = list(pool.map(_group_rows, tasks))
    else:
        groups = [_group_rows(t) for t in tasks]
    # Request order is n-major within each b, so regroup.
    by_key = {(t[0], t[1]): g for t, g in zip(tasks, groups)}
    rows = []
    for b in config.b_values:
        for i, _ in enumerate(config.n_values):
            for route in config.routes:
                rows.append(by_key[(route, b)][i])
    status = EXIT_INCONCLUSIVE if any(r["status"] == "inaccurate" for r in rows) else EXIT_OK
    return status, render_rows(rows, config.fmt)


def render_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_HEADER, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# ------------------------------------------------------------ verify


def _jsonable(v, digits):
    # Plain floats are inputs or diagnostics; mpf values carry working precision.
    if isinstance(v, float):
        return v if math.isfinite(v) else str(v)
    if isinstance(v, mpf):
        return to_decimal(v, digits) if mpmath.isfinite(v) else str(float(v))
    if isinstance(v, (list, tuple)):
        return [_jsonable(x, digits) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x, digits) for k, x in v.items()}
    if hasattr(v, "item"):
        return _jsonable(v.item(), digits)
    return v


def _entry(suite, case, report: licore.BoundReport, digits):
    return {"suite": suite, "case": case, "inputs": _jsonable(report.inputs, digits),
            "lhs": _jsonable(report.lhs, digits), "rhs": _jsonable(report.rhs, digits),
            "slack": _jsonable(report.slack, digits), "pass": bool(report.passed),
            "extra": _jsonable(report.extra, digits)}


def _plain(name, inputs, lhs, rhs, slack, passed, extra=None):
    return licore.BoundReport(name, inputs, lhs, rhs, slack, bool(passed), extra or {})


def suite_lemma2(config):
    for n in (1, 2, 10):
        closed = asymptotics.lemma2_core_integral(n, config.precision)
        q = asymptotics.lemma2_core_quadrature(n, prec=config.precision)
        diff = abs(q.value - closed)
        yield f"core n={n}", _plain("lemma2_core", {"n": n}, q.value, closed, mpf("1e-10") - diff, diff <= 1e-10)
    for n in (10, 100, 1000):
        for b in (0, 1, 5):
            r = asymptotics.lemma2_sandwich(n, b)
            mono = asymptotics.lemma2_monotone(n, b)
            r.extra["monotone"] = mono
            r.passed = r.passed and mono
            yield f"sandwich n={n} b={b}", r
    ratio = asymptotics.lemma2_leading_ratio(10**4, 0)
    yield "leading ratio n=10000 b=0", _plain("lemma2_ratio", {"n": 10**4, "b": 0.0}, ratio, (0.9, 1.1),
                                               min(ratio - 0.9, 1.1 - ratio), 0.9 <= ratio <= 1.1)


def suite_lemma3(config):
    for b in (0.75, 1, 2):
        for n in range(1, 41):
            yield f"n={n} b={b}", asymptotics.lemma3_bound(n, b)


def suite_eq20(config):
    for q in (0.3, 1 / 3, 0.45, 1, 2):
        for n in range(1, 21):
            yield f"q={q:.6g} n={n}", asymptotics.laguerre_exp_identity(q, n)


def suite_eq22(config):
    zeros, table = load_zero_table(config), load_sieve(config)
    for n in (1, 2, 4):
        for b in (1, 2):
            yield f"n={n} b={b}", licore.verify_eq22(n, b, zeros, table, config.precision)


def suite_theorem6(config):
    zeros = load_zero_table(config)
    for b in (0, 1):
        r = asymptotics.theorem6_report(b, zeros, prec=config.precision)
        if r.extra["tail_fraction"] >= 0.01:
            r.extra["inconclusive"] = True
            log.warning("b=%s: route-A error is %.3g of k at n=800 with %d zeros, above the 1%% target",
                        b, r.extra["tail_fraction"], zeros.count)
        yield f"b={b}", r


def suite_compensation(config):
    zeros = load_zero_table(config)
    for n in (10, 30, 100):
        for b in (1, 4):
            yield f"band n={n} b={b}", asymptotics.compensation_report(n, b, zeros, prec=config.precision)
    pole = licore.d_pole_term(30, 1, config.precision)
    stable = licore.d_shifted(30, 1, zeros, prec=config.precision)
    yield "cancellation n=30 b=1", _plain("compensation_size", {"n": 30, "b": 1.0}, abs(pole), abs(stable.value),
                                          min(abs(pole) - 10**8, 10**3 - abs(stable.value)),
                                          abs(pole) >= 10**8 and abs(stable.value) <= 10**3)
    table = load_sieve(config)
    for n in range(1, 7):
        r = licore.d_shifted(n, 1, zeros, table, prec=config.precision)
        u, ue = r.meta["unstable"], r.meta["unstable_err"]
        diff = abs(u - r.value)
        allowed = ue + r.err
        yield f"unstable n={n} b=1", _plain("compensation_paths", {"n": n, "b": 1.0}, r.value, u, allowed - diff,
                                            diff <= allowed, {"pole_term": r.meta["pole_term"]})


def suite_positivity(config):
    zeros = load_zero_table(config)
    grid = (1, 2, 4, 8, 16, 32, 64)
    rep = asymptotics.positivity_scan(10, grid, zeros, prec=config.precision)
    for row in rep["rows"]:
        low = min(row["values"])
        yield f"b={row['b']:g}", _plain("positivity", {"b": row["b"], "m_max": 10}, low, 0, low, row["all_positive"])
    ratio = rep["dominance_ratios"][-1]
    yield "dominance n=10 b=64", _plain("dominance", {"n": 10, "b": 64.0}, ratio, (0.5, 2),
                                        min(ratio - 0.5, 2 - ratio), 0.5 <= ratio <= 2)


def suite_routes(config):
    zeros, table = load_zero_table(config), load_sieve(config)
    b_values = config.b_values if config.extra.get("b_given") else (0.5, 1.0)
    n_values = config.n_values if config.extra.get("n_given") else tuple(range(1, 7))
    for b in b_values:
        nmax = max(n_values)
        for n in n_values:
            res = {}
            for route in ROUTE_ORDER:
                res[route] = compute_cell(route, n, b, config, zeros, table, nmax, contour_tol=1e-5)
            names = list(res)
            for i, r1 in enumerate(names):
                for r2 in names[i + 1:]:
                    a, c = res[r1], res[r2]
                    diff = abs(a.value - c.value)
                    allowed = min(a.err + c.err, mpf("1e-3")) if a.status == c.status == "ok" else mpf(0)
                    ok = a.status == c.status == "ok" and diff <= a.err + c.err and diff <= 1e-3
                    yield (f"n={n} b={b} {r1.value}-{r2.value}",
                           _plain("routes", {"n": n, "b": b, "routes": f"{r1.value},{r2.value}"}, a.value, c.value,
                                  allowed - diff, ok, {"err_1": a.err, "err_2": c.err}))


SUITE_FUNCS = {"lemma2": suite_lemma2, "lemma3": suite_lemma3, "eq20": suite_eq20, "eq22": suite_eq22,
               "theorem6": suite_theorem6, "compensation": suite_compensation, "positivity": suite_positivity,
               "routes": suite_routes}


def cmd_verify(suite: str, config: RunConfig) -> tuple[int, str]:
    if suite not in SUITE_FUNCS:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    entries, inconclusive = [], False
    for case, report in SUITE_FUNCS[suite](config):
        entries.append(_entry(suite, case, report, config.digits))
        inconclusive |= bool(report.extra.get("inconclusive"))
    if inconclusive:
        status = EXIT_INCONCLUSIVE
    else:
        status = EXIT_OK if all(e["pass"] for e in entries) else EXIT_INCONCLUSIVE
    return status, json.dumps(entries, indent=2) + "\n"


# ------------------------------------------------------------ zeros / sieve


def cmd_zeros(action: str, path: str, config: RunConfig, manifest=None) -> tuple[int, str]:
    if action == "import":
        try:
            target, wrote = zerodata.import_zeros(path, config.cache_dir)
        except FileNotFoundError as exc:
            raise DataError(str(exc)) from None
        except ZeroTableError as exc:
            raise DataError(f"{path}: {exc}") from None
        msg = f"imported {path} -> {target}" if wrote else f"{target} already holds an identical table; nothing to do"
        return EXIT_OK, msg + "\n"
    try:
        table, lines = zerodata.load_zeros_lenient(path)
    except FileNotFoundError as exc:
        raise DataError(str(exc)) from None
    except ZeroTableError as exc:
        raise DataError(f"{path}: {exc}") from None
    report = zerodata.validate_zeros(table, lines, manifest)
    text = json.dumps(report.as_dict(), indent=2) + "\n"
    return (EXIT_OK if report.ok else EXIT_DATA), text


def cmd_sieve(config: RunConfig) -> tuple[int, str]:
    table = load_sieve(config)
    M = table.limit
    dev = table.chebyshev_psi(M) - M
    band = arithfn.psi_sanity_band(M)
    ok = abs(dev) <= band
    text = json.dumps({"limit": M, "cache_dir": config.cache_dir, "psi_minus_M": dev, "band": band,
                       "ok": bool(ok)}, indent=2) + "\n"
    return (EXIT_OK if ok else EXIT_DATA), text


# ------------------------------------------------------------ main


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, config = parse_args(argv)
    except UsageError as exc:
        print(f"genli: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    except DataError as exc:
        print(f"genli: {exc}", file=sys.stderr)
        return EXIT_DATA
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="genli: %(message)s")
    config = replace(config, extra={"n_given": "--n" in argv or _in_config(args, "n"),
                                    "b_given": "--b" in argv or _in_config(args, "b")})
    try:
        if args.command == "compute":
            status, text = cmd_compute(config)
        elif args.command == "verify":
            status, text = cmd_verify(args.suite, config)
        elif args.command == "zeros":
            status, text = cmd_zeros(args.action, args.path, config, args.manifest)
        else:
            status, text = cmd_sieve(config)
    except UsageError as exc:
        print(f"genli: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ZeroTableError, FileNotFoundError) as exc:
        print(f"genli: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DomainError as exc:
        print(f"genli: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceError, AccuracyError) as exc:
        print(f"genli: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    _emit(text, args.out)
    return status


def _in_config(args, key) -> bool:
    return bool(args.config) and key in read_config_file(args.config)


if __name__ == "__main__":
    sys.exit(main())
