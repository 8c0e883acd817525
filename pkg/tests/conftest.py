import pytest

from parsetalk.grammar import load_fixture_bundle

# one "PASS/FAIL criterion N: ..." line per acceptance criterion, shown at the end of the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def bundle():
    return load_fixture_bundle()


@pytest.fixture
def criterion():
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
