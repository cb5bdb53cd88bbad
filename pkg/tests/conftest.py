import math

import pytest

from bathdisc.measures import SpectralDensity

FLAT = SpectralDensity.flat(math.pi, 0.0, 1.0)


def all_families():
    """One representative per family, keyed by a readable label."""
    return {
        "flat": FLAT,
        "power_s-0.5": SpectralDensity.power_law(-0.5, 0.3, 0.0, 1.0),
        "power_s0.5": SpectralDensity.power_law(0.5, 0.3, 0.0, 1.0),
        "power_s1": SpectralDensity.power_law(1.0, 0.3, 0.0, 1.0),
        "power_massive": SpectralDensity.power_law(0.5, 0.2, 0.5, 2.0),
        "semicircle": SpectralDensity.semicircle(1.0, 0.0, 2.0),
        "rubin": SpectralDensity.rubin(1.0, 0.0, 1.0),
        "rubin_massive": SpectralDensity.rubin(1.0, 0.3, 1.0),
        "gapped": SpectralDensity.gapped(SpectralDensity.power_law(0.5, 0.3, 0.0, 2.0), 0.8, 1.2),
        "tabulated": SpectralDensity.tabulated([0.0, 0.25, 0.5, 0.75, 1.0],
                                               [0.0, 1.0, 0.5, 2.0, 0.0]),
    }


@pytest.fixture
def flat():
    return FLAT


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_log(request):
    """Record one PASS/FAIL line per acceptance criterion for the run summary."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
