"""Tables of zeta-zero ordinates and the smooth zero-counting main term."""

from __future__ import annotations

import hashlib
import json
import math
import shutil
from dataclasses import dataclass, field
from pathlib import Path

import mpmath
import numpy as np
from mpmath import mpf, workdps

from .errors import DomainError, ZeroTableError
from .numerics import DEFAULT_PREC

FIRST_ORDINATE = 14.134725141734693
# Published tables round ordinates to about 1e-9.
ORDINATE_ERROR = 3e-9


@dataclass(frozen=True)
class ZeroTable:
    ordinates: np.ndarray = field(repr=False)
    source_digest: str
    path: str | None = None

    def __post_init__(self):
        self.ordinates.setflags(write=False)

    @property
    def count(self) -> int:
        return int(self.ordinates.size)

    @property
    def t_max(self) -> float:
        return float(self.ordinates[-1])

    def head(self, count: int) -> "ZeroTable":
        """The first ``count`` ordinates as a new table (digest of the slice)."""
        sub = np.array(self.ordinates[:count])
        return ZeroTable(sub, _digest_array(sub), self.path)


def _digest_array(arr: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(arr, dtype="<f8").tobytes()).hexdigest()


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _parse(path, max_count, strict):
    values = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            try:
                value = float(text)
            except ValueError:
                raise ZeroTableError(f"not a number: {text!r}", line=lineno) from None
            if not math.isfinite(value) or value <= 0:
                raise ZeroTableError(f"ordinate must be a positive finite number: {text!r}", line=lineno)
            if strict and values and value <= values[-1][0]:
                raise ZeroTableError(f"ordinate {text} does not exceed the previous one", line=lineno)
            values.append((value, lineno))
            if max_count is not None and len(values) >= max_count:
                break
    return values


def load_zeros(path, max_count: int | None = None) -> ZeroTable:
    """Read one ordinate per line; blank lines and '#' comments are skipped.

    The digest is the sha256 of the whole file, so a truncated or edited copy
    is distinguishable from the original even when ``max_count`` reads only
    a prefix.
    """
    if max_count is not None and max_count < 1:
        raise ZeroTableError("max_count must be at least 1; an empty table is not usable")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"zero table not found: {path}")
    values = _parse(path, max_count, strict=True)
    if not values:
        raise ZeroTableError(f"{path}: no ordinates found")
    ords = np.array([v for v, _ in values])
    return ZeroTable(ords, file_digest(path), str(path))


def load_zeros_lenient(path, max_count: int | None = None) -> tuple[ZeroTable, list[int]]:
    """Like :func:`load_zeros` without the monotonicity check, for validation.

    Also returns the source line number of every ordinate.
    """
    path = Path(path)
    values = _parse(path, max_count, strict=False)
    if not values:
        raise ZeroTableError(f"{path}: no ordinates found")
    ords = np.array([v for v, _ in values])
    return ZeroTable(ords, file_digest(path), str(path)), [ln for _, ln in values]


def n_of_t(T, prec: int = DEFAULT_PREC) -> mpf:
    """(T/2π) ln(T/2π) - T/2π, the two main terms of the zero count N(T)."""
    with workdps(prec + 5):
        T = mpf(T)
        if T <= 1:
            raise DomainError(f"n_of_t needs T > 1, got {T}")
        u = T / (2 * mpmath.pi)
        value = u * (mpmath.log(u) - 1)
    with workdps(prec):
        return +value


def n_of_t_array(T: np.ndarray) -> np.ndarray:
    u = np.asarray(T, dtype=float) / (2 * math.pi)
    return u * (np.log(u) - 1)


def count_band(T: float) -> float:
    """Allowed |k - n_of_t(T_k)|: 5 ln T + 10."""
    return 5 * math.log(T) + 10


@dataclass
class ValidationReport:
    count: int
    t_max: float
    digest: str
    violations: list = field(default_factory=list)
    manifest_match: bool | None = None

    @property
    def ok(self) -> bool:
        return not self.violations and self.manifest_match is not False

    def as_dict(self) -> dict:
        return {"count": self.count, "t_max": self.t_max, "digest": self.digest,
                "violations": self.violations, "manifest_match": self.manifest_match}


def validate_zeros(table: ZeroTable, lines: list[int] | None = None, manifest=None) -> ValidationReport:
    """Monotonicity, counting-function band and first-ordinate checks.

    Each violation is a dict with ``kind``, 0-based ``index`` and, when
    ``lines`` is given, the source ``line``.  With a ``manifest`` (dict or
    JSON path holding sha256 and count) the digest is compared as well.
    """
    t = np.asarray(table.ordinates)
    report = ValidationReport(table.count, table.t_max, table.source_digest)

    def add(kind, idx, detail):
        entry = {"kind": kind, "index": int(idx), "detail": detail}
        if lines is not None:
            entry["line"] = lines[idx]
        report.violations.append(entry)

    for i in np.flatnonzero(np.diff(t) <= 0) + 1:
        add("monotonicity", i, f"{t[i]!r} does not exceed {t[i - 1]!r}")
    k = np.arange(1, t.size + 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        dev = np.abs(k - n_of_t_array(t))
        band = 5 * np.log(t) + 10
    for i in np.flatnonzero(~(dev <= band)):
        add("count", i, f"|k - N(T_k)| = {dev[i]:.2f} exceeds {band[i]:.2f}")
    if abs(t[0] - FIRST_ORDINATE) > 1e-3:
        add("first", 0, f"first ordinate {t[0]!r} is not 14.134725")
    if manifest is not None:
        if not isinstance(manifest, dict):
            manifest = json.loads(Path(manifest).read_text())
        report.manifest_match = manifest.get("sha256") == table.source_digest
        if not report.manifest_match:
            add("digest", 0, f"sha256 {table.source_digest} differs from manifest {manifest.get('sha256')}")
    return report


def write_manifest(table: ZeroTable, path) -> dict:
    manifest = {"path": table.path, "sha256": table.source_digest, "count": table.count}
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def import_zeros(path, cache_dir) -> tuple[Path, bool]:
    """Copy a validated zero file into ``cache_dir`` under its digest.

    Returns the cached path and whether anything was written (False when an
    identical file is already present).
    """
    table = load_zeros(path)
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    target = cache_dir / f"zeros_{table.source_digest[:16]}.txt"
    manifest_path = target.with_suffix(".json")
    if target.exists() and file_digest(target) == table.source_digest:
        return target, False
    shutil.copyfile(path, target)
    write_manifest(ZeroTable(table.ordinates, table.source_digest, str(target)), manifest_path)
    return target, True
