import os
import sys
from pathlib import Path

import mpmath
import pytest

from cfdim.disc import optimize_disc
from cfdim.hardy import build_bound_ladder, build_norm_table
from cfdim.mobius import DigitSet
from cfdim.numerics import PrecisionContext
from cfdim.orbits import orbit_table

sys.path.insert(0, str(Path(__file__).parent))

import reference_values as ref  # noqa: E402

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


def record_criterion(number: int, name: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS[number] = (name, passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        name, passed, detail = ACCEPTANCE_RESULTS[number]
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number:>2} {status}  {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


def agreeing_digits(computed, reference: str) -> float:
    """Significant decimal digits on which ``computed`` agrees with ``reference``."""
    with mpmath.workdps(400):
        r = mpmath.mpf(reference)
        c = mpmath.mpf(str(computed))
        diff = abs(c - r)
        if diff == 0:
            return float("inf")
        return float(-mpmath.log10(diff / abs(r)))


def printed_digits(reference: str) -> int:
    mant = reference.split("e")[0].lstrip("-").replace(".", "").lstrip("0")
    return len(mant)


def matches_printed(computed, reference: str) -> bool:
    """True when ``computed`` differs from ``reference`` by at most one unit in its last printed place."""
    with mpmath.workdps(400):
        mant, _, exp = reference.partition("e")
        decimals = len(mant.split(".")[1]) if "." in mant else 0
        ulp = mpmath.mpf(10) ** (int(exp or 0) - decimals)
        return abs(mpmath.mpf(str(computed)) - mpmath.mpf(reference)) <= ulp


@pytest.fixture(scope="session")
def A12():
    return DigitSet([1, 2])


@pytest.fixture(scope="session")
def ctx150():
    return PrecisionContext.with_working_digits(150)


@pytest.fixture(scope="session")
def ctx200():
    return PrecisionContext.with_working_digits(200)


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    env = os.environ.get("CFDIM_CACHE_DIR")
    return Path(env) if env else tmp_path_factory.mktemp("orbit-cache")


@pytest.fixture(scope="session")
def disc150(A12, ctx150):
    return optimize_disc(A12, ctx150)


@pytest.fixture(scope="session")
def norms_desk(A12, disc150, ctx150):
    """Norm table at s^- on the optimised disc with N = 200."""
    return build_norm_table(A12, disc150, ctx150.real(ref.S_MINUS), 200, ctx150)


@pytest.fixture(scope="session")
def ladder_desk(norms_desk):
    return build_bound_ladder(norms_desk, 28, 150)


@pytest.fixture(scope="session")
def table18(A12, ctx200, cache_dir):
    return orbit_table(A12, 18, ctx200, cache_dir)
