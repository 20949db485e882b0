import pytest

from condwalk.steplaw import make_builtin_law

BUILTINS = ("lazy_srw", "three_point")

# lines recorded by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(params=BUILTINS)
def law(request):
    return make_builtin_law(request.param)


@pytest.fixture
def lazy():
    return make_builtin_law("lazy_srw")


@pytest.fixture
def three():
    return make_builtin_law("three_point")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
