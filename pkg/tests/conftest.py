import numpy as np
import pytest

from renyigof import data_path
from renyigof.censoring import CensoringScheme, ProgressiveSample, parse_scheme
from renyigof import mc

NELSON_X = (0.19, 0.78, 0.96, 1.31, 2.78, 4.85, 6.50, 7.35)
NELSON_SCHEME = "n=19 m=8 R=0,0,3,0,3,0,0,5"


@pytest.fixture
def nelson_scheme() -> CensoringScheme:
    return parse_scheme(NELSON_SCHEME)


@pytest.fixture
def nelson(nelson_scheme) -> ProgressiveSample:
    return ProgressiveSample(nelson_scheme, np.array(NELSON_X))


@pytest.fixture
def nelson_csv():
    return str(data_path("nelson.csv"))


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("RENYIGOF_CACHE_DIR", str(tmp_path / "cache"))
    mc.clear_memo()
    yield
    mc.clear_memo()


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
