import pytest

from propertime.spinor_algebra import build_gamma_basis

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def basis():
    return build_gamma_basis()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
