import pytest

from kickosc import experiments as ex

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record an acceptance result; the terminal summary prints one line per criterion."""

    def record(number, passed, detail):
        _CRITERIA[number] = (bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


def _run(name, **overrides):
    fn, defaults = ex.EXPERIMENTS[name]
    out = ex.Outcome()
    fn({**defaults, **overrides}, 0, 1, out)
    return out


@pytest.fixture(scope="session")
def fig5_outcome():
    return _run("fig5_entropies")


@pytest.fixture(scope="session")
def echo_outcome():
    return _run("echo_regimes")


@pytest.fixture(scope="session")
def fig3_outcome():
    return _run("fig3_m2_growth")
