import pytest

from infolaw.bits import strings_of_length, strings_up_to
from infolaw.enumerator import build_table


@pytest.fixture(scope="session")
def plain22():
    """UPM-1, empty condition, default desk-scale bounds, programs kept."""
    return build_table("UPM-1", [""], 22, 4096, 8, collect_programs=True)


@pytest.fixture(scope="session")
def domain4():
    return strings_up_to(4)


@pytest.fixture(scope="session")
def hypercube4():
    return strings_of_length(4)


@pytest.fixture(scope="session")
def table4(domain4):
    """UPM-1 conditional table over every string of at most 4 bits."""
    return build_table("UPM-1", domain4, 22, 4096, 8)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
