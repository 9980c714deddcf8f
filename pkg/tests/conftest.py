import numpy as np
import pytest

from dirac_gbdt.triples import ParameterTriple, Signature, SystemKind

_ACCEPTANCE_KEY = pytest.StashKey[list]()


def make_t1():
    """Self-adjoint scalar fixture: A = 2i, S0 = 3/4, Pi0 = [2, 1]."""
    return ParameterTriple(SystemKind.SELF_ADJOINT, Signature(1, 1),
                           np.array([[2j]]), np.array([[0.75]]), np.array([[2.0, 1.0]]))


def make_t2():
    """Skew scalar fixture: A = 2i, S0 = 5/4, Pi0 = [2, 1]."""
    return ParameterTriple(SystemKind.SKEW, Signature(1, 1),
                           np.array([[2j]]), np.array([[1.25]]), np.array([[2.0, 1.0]]))


@pytest.fixture
def t1():
    return make_t1()


@pytest.fixture
def t2():
    return make_t2()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_line(request):
    """Record one pass/fail line per acceptance criterion for the terminal summary."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, title, passed, detail=""):
        line = f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {title}"
        if detail:
            line += f" :: {detail}"
        print(line)
        lines.append((number, line))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
