import numpy as np
import pytest
from hypothesis import settings

from lrkit.bounds import certify
from lrkit.dynamics import diagonalize
from lrkit.geometry import DecayFunction, MetricGraph
from lrkit.model import build_hamiltonian, heisenberg_interaction, heisenberg_onsite

settings.register_profile("lrkit", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("lrkit")


def heisenberg_engine(L, J=1.0, h=0.0):
    g = MetricGraph.chain(L)
    phi = heisenberg_interaction(g, J)
    return g, phi, diagonalize(build_hamiltonian(g, heisenberg_onsite(g, h), phi))


@pytest.fixture(scope="session")
def chain8():
    """L = 8 Heisenberg chain, J = 1, h = 0.5, with its a = 1 certificate."""
    g, phi, e = heisenberg_engine(8, 1.0, 0.5)
    f = DecayFunction(1.0, 1.0, 1)
    return g, phi, e, f, certify(phi, f, g)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# --- acceptance reporting -------------------------------------------------------

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def acceptance():
    def record(name: str, ok: bool, detail: str = ""):
        _ACCEPTANCE.append((name, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
