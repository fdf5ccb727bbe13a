import pytest

from aggrlim.mixing import make_mixing_law
from aggrlim.processes import Ar1Params, Inar1Params


@pytest.fixture(scope="session")
def law():
    return make_mixing_law("constant", 1.0)


@pytest.fixture(scope="session")
def inar():
    return Inar1Params(1.0)


@pytest.fixture(scope="session")
def ar():
    return Ar1Params(1.0)


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE_LINES, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
