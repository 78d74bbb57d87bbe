import pytest

from qeuclid import ExtendedAlgebra, ScalarContext


@pytest.fixture(scope="session")
def ctx3():
    return ScalarContext(3)


@pytest.fixture(scope="session")
def ctx4():
    return ScalarContext(4)


@pytest.fixture(scope="session")
def alg3(ctx3):
    return ExtendedAlgebra(ctx3)


@pytest.fixture(scope="session")
def alg4(ctx4):
    return ExtendedAlgebra(ctx4)


@pytest.fixture(scope="session")
def alg5():
    return ExtendedAlgebra(ScalarContext(5))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
