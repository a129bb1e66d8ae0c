import os
import stat
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from neurosudoku.engine import EXTERNAL_SOLVER_ENV, generate_solved, mask_puzzle

STUB_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                         "stub_external_solver.py")


@pytest.fixture
def solved_grid():
    return generate_solved(11)


@pytest.fixture
def instance_03():
    """A fixed difficulty-0.3 instance used across loss and training tests."""
    return mask_puzzle(generate_solved(0), 0.3, 0)


@pytest.fixture
def uniform_tensor():
    return np.full((9, 9, 9), 1.0 / 9.0)


def one_hot_tensor(grid):
    tensor = np.zeros((9, 9, 9))
    for i in range(9):
        for j in range(9):
            tensor[i, j, int(grid[i, j]) - 1] = 1.0
    return tensor


@pytest.fixture
def external_stub(monkeypatch):
    """Point the bridge at the stub solver executable."""
    mode = os.stat(STUB_PATH).st_mode
    os.chmod(STUB_PATH, mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    monkeypatch.setenv(EXTERNAL_SOLVER_ENV, STUB_PATH)
    return STUB_PATH


@pytest.fixture
def no_external_solver(monkeypatch):
    monkeypatch.delenv(EXTERNAL_SOLVER_ENV, raising=False)
