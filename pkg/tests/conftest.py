import numpy as np
import pytest

import isde

# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    def _record(line: str):
        ACCEPTANCE_LINES.append(line)

    return _record


@pytest.fixture(scope="session")
def fouve():
    """Canonical benchmark schedule: scalar fOUVE, sigma 0.001..0.1, gamma0 2."""
    return isde.make_sde(isde.SdeParams(kind="fOUVE", sigma_min=0.001,
                                        sigma_max=0.1, gamma0=2.0))


@pytest.fixture(scope="session")
def ouve():
    return isde.make_sde(isde.SdeParams(kind="OUVE", sigma_min=0.001,
                                        sigma_max=0.1, gamma0=2.0))


@pytest.fixture(scope="session")
def all_sdes():
    """One representative bundle per schedule family."""
    return {
        "fOUVE": isde.make_sde(isde.SdeParams(kind="fOUVE", sigma_min=0.001,
                                              sigma_max=0.1, gamma0=2.0)),
        "OUVE": isde.make_sde(isde.SdeParams(kind="OUVE", sigma_min=0.001,
                                             sigma_max=0.1, gamma0=2.0)),
        "BBED": isde.make_sde(isde.SdeParams(kind="BBED", c=0.3, r=4.0)),
        "OT": isde.make_sde(isde.SdeParams(kind="OT", sigma_max=0.1)),
        "BrownianBridge": isde.make_sde(isde.SdeParams(kind="BrownianBridge")),
    }


@pytest.fixture(scope="session")
def gaussian_prior():
    return isde.GaussianPrior(m0=0.5, s0=0.2)


@pytest.fixture(scope="session")
def delta_prior():
    return isde.DeltaPrior(x0=0.5)


@pytest.fixture(scope="session")
def canonical_config_dict():
    """Benchmark fixture as a plain config mapping (copy before mutating)."""
    return {
        "sde": {"kind": "fOUVE", "sigma_min": 0.001, "sigma_max": 0.1, "gamma0": 2.0},
        "prior": {"kind": "gaussian", "m0": 0.5, "s0": 0.2},
        "y": 1.0,
        "seed": 1234,
        "n_trajectories": 256,
    }
