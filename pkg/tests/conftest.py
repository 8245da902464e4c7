import time

import numpy as np
import pytest

ACCEPTANCE_RESULTS = []
SUITE_BUDGET_S = 60.0
_session = {}


def random_hermitian(rng, d, scale=1.0):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (x + x.conj().T) / 2


def random_density(rng, d, rank=None):
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = g @ g.conj().T
    return m / np.trace(m).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_sessionstart(session):
    _session["start"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    elapsed = time.perf_counter() - _session["start"]
    ok = elapsed < SUITE_BUDGET_S
    terminalreporter.write_line(
        f"{'PASS' if ok else 'FAIL'}  suite runtime: {elapsed:.1f} s for this session (budget {SUITE_BUDGET_S:.0f} s)"
    )


@pytest.fixture(scope="session")
def preset_runs(tmp_path_factory):
    """Every shipped preset, run once per session: name -> (summary, output dir)."""
    from qthermo import scenarios

    out = tmp_path_factory.mktemp("presets")
    return {
        name: (scenarios.run_scenario(scenarios.preset_path(name), out), out)
        for name in scenarios.preset_names()
    }
