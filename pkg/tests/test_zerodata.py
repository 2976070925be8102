import json
import math

import mpmath
import numpy as np
import pytest

from genli import zerodata
from genli.errors import DomainError, ZeroTableError

from conftest import MANIFEST_PATH, ZEROS_PATH


def write(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return path


FIRST = ["14.134725142", "21.022039639", "25.010857580", "30.424876126", "32.935061588"]


def test_load_skips_comments_and_blanks(tmp_path):
    p = write(tmp_path / "z.txt", ["# header", ""] + FIRST)
    t = zerodata.load_zeros(p)
    assert t.count == 5
    assert t.t_max == pytest.approx(32.935061588)
    assert len(t.source_digest) == 64


def test_load_reports_line_numbers(tmp_path):
    p = write(tmp_path / "z.txt", FIRST[:2] + ["abc"] + FIRST[2:])
    with pytest.raises(ZeroTableError) as e:
        zerodata.load_zeros(p)
    assert e.value.line == 3
    p = write(tmp_path / "z2.txt", [FIRST[1], FIRST[0]])
    with pytest.raises(ZeroTableError) as e:
        zerodata.load_zeros(p)
    assert e.value.line == 2


def test_load_rejects_nonpositive_and_empty(tmp_path):
    with pytest.raises(ZeroTableError):
        zerodata.load_zeros(write(tmp_path / "a.txt", ["-3.0"]))
    with pytest.raises(ZeroTableError):
        zerodata.load_zeros(write(tmp_path / "b.txt", ["# nothing"]))
    with pytest.raises(ZeroTableError):
        zerodata.load_zeros(write(tmp_path / "c.txt", FIRST), max_count=0)
    with pytest.raises(FileNotFoundError):
        zerodata.load_zeros(tmp_path / "missing.txt")


def test_max_count_and_head(zeros):
    t = zerodata.load_zeros(ZEROS_PATH, max_count=100)
    assert t.count == 100
    assert np.array_equal(t.ordinates, zeros.head(100).ordinates)
    assert t.source_digest == zeros.source_digest


def test_table_is_read_only(zeros):
    with pytest.raises(ValueError):
        zeros.ordinates[0] = 1.0


def test_bundled_table_spot_checks(zeros):
    assert zeros.count == 100000
    for k in (1, 2, 1000, 54321, 100000):
        with mpmath.workdps(20):
            ref = float(mpmath.zetazero(k).imag)
        assert zeros.ordinates[k - 1] == pytest.approx(ref, abs=1e-8)


def test_bundled_table_validates_with_manifest(zeros):
    rep = zerodata.validate_zeros(zeros, manifest=MANIFEST_PATH)
    assert rep.ok and rep.manifest_match
    assert json.loads(MANIFEST_PATH.read_text())["count"] == zeros.count


def test_validate_flags_shuffle_with_lines(tmp_path):
    p = write(tmp_path / "s.txt", ["# c", FIRST[0], FIRST[2], FIRST[1], FIRST[3]])
    table, lines = zerodata.load_zeros_lenient(p)
    rep = zerodata.validate_zeros(table, lines)
    assert not rep.ok
    mono = [v for v in rep.violations if v["kind"] == "monotonicity"]
    assert mono and mono[0]["line"] == 4


def test_validate_flags_wrong_first_and_digest(tmp_path):
    p = write(tmp_path / "w.txt", ["15.0", "21.0"])
    table, lines = zerodata.load_zeros_lenient(p)
    rep = zerodata.validate_zeros(table, lines, manifest={"sha256": "0" * 64})
    kinds = {v["kind"] for v in rep.violations}
    assert {"first", "digest"} <= kinds
    assert rep.manifest_match is False


def test_validate_flags_missing_zero(zeros, tmp_path):
    # Dropping a block of zeros pushes k - N(T_k) outside the band.
    t = np.delete(np.asarray(zeros.ordinates[:5000]), slice(1000, 1100))
    table = zerodata.ZeroTable(t, "x")
    rep = zerodata.validate_zeros(table)
    assert any(v["kind"] == "count" for v in rep.violations)


def test_n_of_t_values():
    T = 2 * math.pi * math.e ** 2
    assert float(zerodata.n_of_t(T)) == pytest.approx(math.e**2)
    assert zerodata.n_of_t_array(np.array([T]))[0] == pytest.approx(math.e**2)
    with pytest.raises(DomainError):
        zerodata.n_of_t(0.5)


def test_count_tracks_smooth_term(zeros):
    # N(T) = n_of_t(T) + 7/8 + S(T) + O(1/T); at T = T_k the count already
    # includes zero k, so S sits half a step above its zero mean.
    k = np.arange(1, zeros.count + 1)
    dev = k - zerodata.n_of_t_array(zeros.ordinates)
    assert abs(dev.mean() - 1.375) < 0.05


def test_import_is_idempotent(tmp_path):
    src = write(tmp_path / "z.txt", FIRST)
    cache = tmp_path / "cache"
    p1, wrote1 = zerodata.import_zeros(src, cache)
    p2, wrote2 = zerodata.import_zeros(src, cache)
    assert wrote1 and not wrote2 and p1 == p2
    manifest = json.loads(p1.with_suffix(".json").read_text())
    assert manifest["sha256"] == zerodata.file_digest(src)


def test_write_manifest(tmp_path):
    t = zerodata.load_zeros(write(tmp_path / "z.txt", FIRST))
    m = zerodata.write_manifest(t, tmp_path / "m.json")
    assert m["count"] == 5 and json.loads((tmp_path / "m.json").read_text()) == m
