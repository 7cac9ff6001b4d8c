import pytest

from envgen import DEFAULT_SIGNALS, example_envs


@pytest.fixture
def signals():
    return DEFAULT_SIGNALS


@pytest.fixture(params=[1, 2, 3])
def example(request):
    return request.param, example_envs(request.param)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
