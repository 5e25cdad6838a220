import numpy as np
import pytest

from sgc_chi import SystemParams

_acceptance_key = pytest.StashKey[list]()


@pytest.fixture
def ref_point():
    """Reference operating point without SGC; use ``.with_`` to vary it."""
    return SystemParams(gamma2=1.0, gamma3=1.0, p=0.0, omega_c0=4.0, omega_p0=0.1, delta_p=2.0)


@pytest.fixture
def sgc_point(ref_point):
    return ref_point.with_(p=0.99)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(request):
    """Record one acceptance line; printed in the terminal summary."""
    log = request.config.stash.setdefault(_acceptance_key, [])

    def record(number, title, passed, detail=""):
        log.append((number, title, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_acceptance_key, [])
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(log, key=lambda x: x[0]):
        flag = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{flag}] AC{number}: {title}  {detail}")
