"""Board representation, Sudoku validity predicates, and accuracy metrics.

A grid is a 9x9 integer matrix (numpy array, row-major) with 0 marking an
empty cell and 1..9 a placed digit.  All functions here are pure and safe
to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GRID_SIZE = 9
BOX_SIZE = 3
N_CELLS = GRID_SIZE * GRID_SIZE

SCOPE_ALL = "all-cells"
SCOPE_EMPTY = "empty-cells"


def as_grid(cells) -> np.ndarray:
    """Coerce to a validated 9x9 integer grid (values 0..9)."""
    grid = np.asarray(cells, dtype=np.int64)
    if grid.shape == (N_CELLS,):
        grid = grid.reshape(GRID_SIZE, GRID_SIZE)
    if grid.shape != (GRID_SIZE, GRID_SIZE):
        raise ValueError(f"grid must be 9x9, got shape {grid.shape}")
    if grid.min() < 0 or grid.max() > 9:
        bad = grid[(grid < 0) | (grid > 9)].flat[0]
        raise ValueError(f"cell values must be in 0..9, found {bad}")
    return grid


def subgrid_index(row: int, col: int) -> int:
    """Index (0..8) of the 3x3 box containing (row, col).

    Cells with equal index form one box; boxes are numbered row-major,
    top-left box = 0, center = 4, bottom-right = 8.
    """
    if not (0 <= row < GRID_SIZE and 0 <= col < GRID_SIZE):
        raise ValueError(f"cell index out of range: ({row}, {col})")
    return (row // BOX_SIZE) * BOX_SIZE + col // BOX_SIZE


def _units(grid: np.ndarray):
    """Yield the 27 units (9 rows, 9 columns, 9 boxes) as 9-element arrays."""
    for i in range(GRID_SIZE):
        yield grid[i, :]
    for j in range(GRID_SIZE):
        yield grid[:, j]
    boxes = grid.reshape(BOX_SIZE, BOX_SIZE, BOX_SIZE, BOX_SIZE)
    for bi in range(BOX_SIZE):
        for bj in range(BOX_SIZE):
            yield boxes[bi, :, bj, :].reshape(-1)


def is_valid_complete(grid) -> bool:
    """True iff the grid has no empties and every unit is a permutation of 1..9."""
    grid = as_grid(grid)
    if (grid == 0).any():
        return False
    full = frozenset(range(1, 10))
    return all(set(unit.tolist()) == full for unit in _units(grid))


def is_consistent_partial(grid) -> bool:
    """True iff no unit contains a duplicate among its nonzero cells."""
    grid = as_grid(grid)
    for unit in _units(grid):
        placed = unit[unit != 0]
        if len(np.unique(placed)) != len(placed):
            return False
    return True


def cell_accuracy(predicted, truth, mask, scope: str = SCOPE_ALL) -> float:
    """Fraction of correctly predicted cells.

    scope="all-cells" counts all 81 cells; scope="empty-cells" counts only
    cells that were empty in the puzzle (mask true).  An empty-cell scope
    with no masked cells scores 1.0 by convention.  The prediction must be
    fully decoded (no zeros).
    """
    predicted = as_grid(predicted)
    truth = as_grid(truth)
    mask = np.asarray(mask, dtype=bool).reshape(GRID_SIZE, GRID_SIZE)
    if (predicted == 0).any():
        raise ValueError("predicted grid contains empty cells; decode it first")
    matches = predicted == truth
    if scope == SCOPE_ALL:
        return float(matches.mean())
    if scope == SCOPE_EMPTY:
        n_masked = int(mask.sum())
        if n_masked == 0:
            return 1.0
        return float(matches[mask].sum() / n_masked)
    raise ValueError(f"unknown accuracy scope: {scope!r}")


def masked_cell_count(difficulty: float) -> int:
    """Number of cells emptied at a difficulty: round-half-up of 81*difficulty."""
    return int(math.floor(N_CELLS * difficulty + 0.5))


@dataclass(frozen=True)
class PuzzleInstance:
    """One dataset unit: masked puzzle, reference solution, mask, provenance.

    Invariants (see ``validate``): the puzzle is the solution with exactly
    round(81*difficulty) cells zeroed, and ``mask`` is true exactly on the
    zeroed cells.
    """

    puzzle: np.ndarray
    solution: np.ndarray
    mask: np.ndarray
    difficulty: float
    seed: int

    def validate(self) -> "PuzzleInstance":
        puzzle = as_grid(self.puzzle)
        solution = as_grid(self.solution)
        mask = np.asarray(self.mask, dtype=bool).reshape(GRID_SIZE, GRID_SIZE)
        if not is_valid_complete(solution):
            raise ValueError("stored solution is not a valid complete grid")
        if not ((puzzle == 0) == mask).all():
            raise ValueError("mask does not match the puzzle's empty cells")
        givens = ~mask
        if not (puzzle[givens] == solution[givens]).all():
            raise ValueError("puzzle givens disagree with the solution")
        if int(mask.sum()) != masked_cell_count(self.difficulty):
            raise ValueError(
                f"mask count {int(mask.sum())} != expected "
                f"{masked_cell_count(self.difficulty)} at difficulty {self.difficulty}"
            )
        return self


def parse_grid(text: str) -> np.ndarray:
    """Parse the 81-character line format: digits 1-9, '.' or '0' for empty.

    Raises ValueError naming the position of the first bad character.
    """
    text = text.strip()
    if len(text) != N_CELLS:
        raise ValueError(f"expected 81 characters, got {len(text)}")
    cells = np.zeros(N_CELLS, dtype=np.int64)
    for pos, ch in enumerate(text):
        if ch in ".0":
            continue
        if ch.isdigit():
            cells[pos] = int(ch)
        else:
            raise ValueError(f"invalid character {ch!r} at position {pos}")
    return cells.reshape(GRID_SIZE, GRID_SIZE)


def format_grid(grid, empty: str = ".") -> str:
    """Render a grid as its 81-character row-major line."""
    grid = as_grid(grid)
    return "".join(
        empty if v == 0 else str(v) for v in grid.reshape(-1).tolist()
    )
