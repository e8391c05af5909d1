import pathlib

import numpy as np
import pytest

from nbmlgd.code import ParityCheckMatrix, generate_regular
from nbmlgd.field import GF2m

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def gf4():
    return GF2m(2)


@pytest.fixture(scope="session")
def gf8():
    return GF2m(3)


@pytest.fixture(scope="session")
def small_code(gf4):
    """(N=8, gamma=2, rho=4) code over GF(4)."""
    return generate_regular(8, 2, 4, gf4, seed=1)


def random_sparse(rng, field, M, N, density=0.5):
    """Random matrix with at least two entries per row and one per column."""
    while True:
        mask = rng.random((M, N)) < density
        if mask.sum(axis=1).min() >= 2 and mask.sum(axis=0).min() >= 1:
            break
    vals = rng.integers(1, field.order, size=(M, N))
    return ParityCheckMatrix.from_dense(field, np.where(mask, vals, 0))


_CRITERIA = {}


@pytest.fixture
def report():
    """Record a one-line verdict for an acceptance criterion."""

    def _report(cid, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {cid}: {detail}"
        _CRITERIA[cid] = line
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for cid in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[cid])
