import pathlib
import sys

import pytest

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def problems_dir() -> pathlib.Path:
    return REPO_ROOT / "problems"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # one line per acceptance criterion, printed after capture is torn down
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "ACCEPTANCE_RESULTS", None) if module else None
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)
