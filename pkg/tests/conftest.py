import pytest

from klminimax import densities, saddle


@pytest.fixture(scope="session")
def gauss():
    return densities.gaussian_pair(1.0)


@pytest.fixture(scope="session")
def laplace():
    return densities.asymmetric_laplace_pair(2.0, 4.0)


@pytest.fixture(scope="session")
def gen_gauss():
    return densities.generalized_gaussian_pair(1.5, 1.0)


@pytest.fixture(scope="session")
def families(gauss, laplace, gen_gauss):
    return {"gaussian": gauss, "asym-laplace": laplace, "gen-gaussian": gen_gauss}


@pytest.fixture(scope="session")
def gauss_sp(gauss):
    return saddle.solve(gauss, 0.1)


@pytest.fixture(scope="session")
def laplace_sp(laplace):
    return saddle.solve(laplace, 0.1)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, report_lines

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in report_lines():
            terminalreporter.write_line(line)
