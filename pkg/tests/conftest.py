import pytest

from wallplan import build_graph, generate_wall, make_team
from wallplan.datasets import load_fixture

# lines collected by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def wall5():
    return load_fixture("wall_5")


@pytest.fixture(scope="session")
def wall18():
    return load_fixture("wall_18")


@pytest.fixture(scope="session")
def five_over_six():
    """Five full bricks below, six bricks (half at both ends) above."""
    return generate_wall(3.0, 0.4)


@pytest.fixture
def team3():
    return make_team(3)


@pytest.fixture
def graph18(wall18):
    return build_graph(wall18, make_team(3), d_min=0.8)
