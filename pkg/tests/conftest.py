import pytest

from jjha import ChargeGrid, JunctionParams, junction_spectrum

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def reference_spectra():
    """Exact k = 0 spectra at T = 100, T' in {0, 60}, n_max = 40."""
    out = {}
    for tp in (0.0, 60.0):
        p = JunctionParams(100.0, tp)
        g = ChargeGrid(40)
        out[tp] = (p, g, junction_spectrum(p, g))
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
