import pathlib
import sys

import pytest

# test-local helpers (reference oracles, run cache) import by bare name
sys.path.insert(0, str(pathlib.Path(__file__).parent))

_CRITERIA: dict[int, str] = {}


@pytest.fixture
def report():
    """Record one acceptance verdict line; printed again in the terminal summary."""
    def _report(number: int, title: str, passed: bool, detail: str) -> bool:
        line = f"criterion {number} {'PASS' if passed else 'FAIL'}: {title} ({detail})"
        _CRITERIA[number] = line
        print(line)
        return passed
    return _report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
