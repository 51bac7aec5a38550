import numpy as np
import pytest

from quasitopo.lattice import build_hamiltonian, paper_params
from quasitopo.spectral import diagonalize

_acceptance = []


@pytest.fixture(scope="session", autouse=True)
def warm_jit():
    # compile (or load the cached) QL kernel before anything is timed
    diagonalize(build_hamiltonian(paper_params(4)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance.append((marker.args[0], item.name, report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for label, name, outcome, duration in sorted(_acceptance, key=lambda r: int(r[0])):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {label:>2}: {name} ({duration:.2f}s)")
