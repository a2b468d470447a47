import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest  # noqa: E402


@pytest.fixture(scope="session")
def mini_run():
    """A two-iteration coupled run on the cut-down fixture, shared across modules."""
    from scenario_toys import mini
    from softlink.coupler import run_coupled

    return mini(), run_coupled(mini(), max_iterations=2, threshold=0.0)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
