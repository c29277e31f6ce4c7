from pathlib import Path

import pytest

from hamperm.graph import parse_graph
from hamperm.tour import parse_tour

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def worked25():
    """25-vertex graph with three degree-2 vertices and its known circuit."""
    return parse_graph(fixture_text("worked25.txt")), parse_tour(fixture_text("worked25_circuit.txt"))


@pytest.fixture(scope="session")
def chains25():
    return parse_graph(fixture_text("chains25.txt"))


@pytest.fixture(scope="session")
def chains25_contracted():
    return parse_graph(fixture_text("chains25_contracted.txt"))


#: criterion number -> (title, passed, detail); filled by the acceptance suite
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
