import re

import pytest

from genfil import BernoulliParams, GridTime, MarketParams, make_drop_filtration, make_full_filtration

# Benchmark scenario used throughout: N=2, mu=0.1, sigma=0.2, r=0.02,
# s0=100, p=1/2.  Up factor 1.125, down factor 0.925, growth 1.005.
SCEN_A = dict(mu=0.1, sigma=0.2, r=0.02, s0=100.0, N=2)


@pytest.fixture
def scen_a_market():
    return MarketParams(**SCEN_A)


@pytest.fixture
def scen_a_bernoulli():
    return BernoulliParams(2, 0.5)


@pytest.fixture
def scen_a_full(scen_a_bernoulli):
    return make_full_filtration(scen_a_bernoulli)


@pytest.fixture
def scen_a_drop(scen_a_bernoulli):
    return make_drop_filtration(scen_a_bernoulli, GridTime(1, 2), GridTime(1, 2))


_acceptance = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    m = re.search(r"test_acceptance\.py::test_c(\d+)", report.nodeid)
    if m:
        _acceptance[int(m.group(1))] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(_acceptance):
        outcome = "PASS" if _acceptance[number] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {outcome}")
