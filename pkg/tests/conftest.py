import pytest

from cdma_ra.model import PowerClass, PowerProfile, SystemConfig

TWO_CLASS_POWERS = (10.0, 1000.0)
TWO_CLASS_FRACTIONS = (10 / 11, 1 / 11)


def two_class(thetas=(1.0, 1.0), arrival_rates=None):
    return PowerProfile.from_arrays(TWO_CLASS_POWERS, TWO_CLASS_FRACTIONS, thetas, arrival_rates)


def single_class(p=10.0, theta=1.0):
    return PowerProfile((PowerClass(p, 1.0, theta),))


@pytest.fixture
def profile():
    return two_class()


@pytest.fixture
def system():
    return SystemConfig(alpha=0.95, noise_var=1.0)


# -- acceptance gate reporting --------------------------------------------------------

GATE_KEY = pytest.StashKey[list]()


@pytest.fixture
def gate(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(GATE_KEY, [])

    def record(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(GATE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
