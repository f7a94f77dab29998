from pathlib import Path

import pytest

from devperf.ingest import load_csv

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def breast():
    return load_csv(DATA / "BreastCancer.csv", "Class")


@pytest.fixture(scope="session")
def iris():
    return load_csv(DATA / "iris.csv", "Species")


@pytest.fixture
def write_csv(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p
    return _write


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
