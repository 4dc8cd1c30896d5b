import os
from pathlib import Path

import numpy as np
import pytest

from tnqpde.hamiltonian import hubbard_1d
from tnqpde.mpo import MatrixProductOperator, trotterized_reference

CACHE = Path(os.environ.get("TNQPDE_TEST_CACHE", Path(__file__).resolve().parent.parent / ".test_cache"))


def cached_reference(n_s: int, dt: float = 0.1) -> MatrixProductOperator:
    """Default-settings reference MPO for the n_s-site Hubbard chain, built once per checkout."""
    CACHE.mkdir(parents=True, exist_ok=True)
    path = CACHE / f"uref_hubbard{n_s}_dt{dt}.mpo"
    if path.exists():
        return MatrixProductOperator.load(path)
    u = trotterized_reference(hubbard_1d(n_s), dt)
    u.save(path)
    return u


@pytest.fixture(scope="session")
def uref8():
    return cached_reference(4)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_unitary(dim, rng):
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


# acceptance verdicts, one line per criterion, echoed in the terminal summary
VERDICTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[k])
