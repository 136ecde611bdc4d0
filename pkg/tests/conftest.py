import pytest

# filled by test_acceptance.verdict(); echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def bundled_configs():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "configs"
    return {"terrain": root / "desk_terrain.ini", "cross": root / "desk_cross.ini"}
