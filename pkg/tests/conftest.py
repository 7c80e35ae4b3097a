import pytest

from artifact.ingest import load_fixture


@pytest.fixture(scope="session")
def bundle():
    return load_fixture()


@pytest.fixture(scope="session")
def facts(bundle):
    return bundle.facts


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
