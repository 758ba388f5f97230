import pytest

from actuplace.flow import KERNELS

from helpers import ACCEPTANCE_LINES


@pytest.fixture(params=sorted(KERNELS))
def backend(request, monkeypatch):
    """Run the test once per available max-flow kernel."""
    import actuplace.flow as flow

    monkeypatch.setattr(flow, "BACKEND", request.param)
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
