import math

import numpy as np
import pytest

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion, reported in the summary")
    config.addinivalue_line("markers", "slow: Monte-Carlo ensembles taking several seconds")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _ACCEPTANCE.append((marker.args[0], rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in sorted(_ACCEPTANCE, key=lambda t: int(t[0].split(".")[0])):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {label}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def full_grid():
    from fringesynth.model import PhaseGrid

    return PhaseGrid.uniform(6000)


def random_coefficients(rng, N):
    from fringesynth.fourier import CoefficientVector

    return CoefficientVector(N, rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1))


def rect_amplitude(phi):
    """Rect(phi, pi/2): 0 for |phi| <= pi/2 (mod 2pi), 1 elsewhere."""
    phi = np.mod(np.asarray(phi, dtype=float) + math.pi, 2 * math.pi) - math.pi
    return np.where(np.abs(phi) <= math.pi / 2, 0.0, 1.0)
