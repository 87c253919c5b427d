import os

import pytest

# one line per acceptance criterion, echoed after the run so the
# verdicts are visible even though pytest captures stdout
ACCEPTANCE_LINES = []


def data_path() -> str:
    here = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    return os.environ.get("HCVPIPE_DATA", os.path.join(here, "data", "hcv_synth.csv"))


@pytest.fixture(scope="session")
def hcv_csv():
    path = data_path()
    if not os.path.exists(path):
        pytest.fail(f"data file not found: {path}")
    return path


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance summary:")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line("  " + line)
