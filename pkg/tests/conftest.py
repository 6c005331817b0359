import numpy as np
import pytest
from hypothesis import settings

from qutritghz.qudit import DensityMatrix, StateVector

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


def random_density(dims, rng, rank=None):
    """Random density matrix from a Ginibre factor; full rank unless ``rank`` is given."""
    D = int(np.prod(dims))
    r = D if rank is None else rank
    g = rng.normal(size=(D, r)) + 1j * rng.normal(size=(D, r))
    rho = g @ g.conj().T
    return DensityMatrix(dims, rho / np.trace(rho).real)


def random_pure(dims, rng):
    D = int(np.prod(dims))
    return StateVector(dims, rng.normal(size=D) + 1j * rng.normal(size=D), normalize=True)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Store a one-line acceptance verdict; the lines are printed at the end of the run."""

    def _record(number, ok, detail):
        ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
