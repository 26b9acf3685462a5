import pytest

from agedist import make_truncated_exponential, make_truncated_gaussian, make_uniform_source
from agedist.experiments import DENSE_LEVELS, run_sweep


@pytest.fixture(scope="session")
def exp_source():
    return make_truncated_exponential(1.0, 0.0, 15.0)


@pytest.fixture(scope="session")
def gauss_source():
    return make_truncated_gaussian(0.0, 1.0, -5.0, 5.0)


@pytest.fixture(scope="session")
def unit_source():
    return make_uniform_source(0.0, 1.0)


@pytest.fixture(scope="session")
def section_sources(exp_source, gauss_source):
    return {"exp": exp_source, "gauss": gauss_source}


@pytest.fixture(scope="session")
def dense_rows(section_sources):
    """Dense N = 2..32 sweep of every quantizer/code pairing, per source."""
    return {name: run_sweep(model, DENSE_LEVELS) for name, model in section_sources.items()}


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
