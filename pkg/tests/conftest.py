import os
from pathlib import Path

import pytest

from genli import arithfn, zerodata

ROOT = Path(__file__).resolve().parents[1]
ZEROS_PATH = ROOT / "data" / "zeros_100k.txt"
MANIFEST_PATH = ROOT / "data" / "zeros_100k.json"
SIEVE_LIMIT = 10**7


@pytest.fixture(scope="session")
def cache_dir(request):
    env = os.environ.get("GENLI_TEST_CACHE")
    if env:
        return Path(env)
    return Path(request.config.cache.mkdir("genli"))


@pytest.fixture(scope="session")
def zeros():
    return zerodata.load_zeros(ZEROS_PATH)


@pytest.fixture(scope="session")
def sieve(cache_dir):
    return arithfn.sieve_von_mangoldt(SIEVE_LIMIT, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def small_sieve():
    return arithfn.sieve_von_mangoldt(10**5)


CRITERIA: dict = {}


@pytest.fixture
def criterion(request):
    """Record PASS/FAIL for an acceptance criterion; the line is printed now and in the summary."""
    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        CRITERIA[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])
