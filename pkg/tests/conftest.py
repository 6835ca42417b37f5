import numpy as np
import pytest

from chainwave import ChainSpec

ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def chain10():
    return ChainSpec(10)


@pytest.fixture
def acceptance_report(request):
    """Collects acceptance verdict lines; they are echoed in the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def report(line):
        print(line)
        lines.append(line)
    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
