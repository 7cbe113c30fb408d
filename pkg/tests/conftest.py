import pytest

from kitaev_fcs import ChainSpec, FrequencyGrid, ReservoirSpec


@pytest.fixture(scope="session")
def fig_res():
    """Reservoirs shared by the figure parameter sets."""
    return ReservoirSpec(0.3, 0.3, mu_l=0.05, mu_r=-0.05, beta=10.0)


@pytest.fixture(scope="session")
def trivial10():
    return ChainSpec(10, mu=1.0, eta=1.0, delta=0.0)


@pytest.fixture(scope="session")
def majorana10():
    return ChainSpec(10, mu=0.0, eta=1.0, delta=1.0)


@pytest.fixture(scope="session")
def general10():
    return ChainSpec(10, mu=1.0, eta=1.0, delta=1.0)


def auto_grid(chain, res, d_omega=0.01):
    return FrequencyGrid.auto(chain, res, d_omega)


_VERDICTS = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def verdicts(request):
    """Criterion number -> (passed, detail); echoed in the terminal summary."""
    return request.config.stash.setdefault(_VERDICTS, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = config.stash.get(_VERDICTS, {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(table):
        ok, detail = table[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
