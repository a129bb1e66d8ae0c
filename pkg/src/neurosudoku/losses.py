"""Training losses over the 9x9x9 prediction tensor.

Three components, each differentiable in the predicted probabilities:

* standard: mean per-cell cross-entropy against the true solution.
* constraints: for every digit and every unit (row/column/box), the squared
  gap between a target count and the predicted probability mass that the
  puzzle's *empty* cells put on that digit in that unit.  The hard
  "cell equals digit" indicator is relaxed to the predicted probability, so
  the penalty agrees with the exact counting rule whenever the prediction
  is one-hot.
* expert: per-cell expected digit value (sum of digit * probability), then
  the absolute gap between predicted and true unit sums for all 27 units.
  Every unit of a valid solution sums to 45.

Constraint target modes:

* "fixed-target": the target count is always 1 (one occurrence of each
  digit per unit, charged entirely to the empty cells).
* "solution-consistent": the target is reduced by digits already given in
  the unit (floored at 0), so the true solution scores exactly zero.

The combined loss is the weighted sum alpha*standard + beta*constraints +
gamma*expert; zero-weight components are skipped and reported as 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GRID_SIZE, N_CELLS, PuzzleInstance, as_grid

PROB_CLAMP = 1e-12

MODE_FIXED_TARGET = "fixed-target"
MODE_SOLUTION_CONSISTENT = "solution-consistent"
CONSTRAINT_MODES = (MODE_FIXED_TARGET, MODE_SOLUTION_CONSISTENT)

ABLATION_WEIGHTS = {
    "standard-only": (1.0, 0.0, 0.0),
    "standard+expert": (1.0, 0.0, 1.0),
    "standard+constraints": (1.0, 1.0, 0.0),
    "all-combined": (1.0, 1.0, 1.0),
}
ABLATIONS = tuple(ABLATION_WEIGHTS)

# box index of each cell, row-major boxes
_BOX_OF = np.array(
    [[(i // 3) * 3 + j // 3 for j in range(GRID_SIZE)] for i in range(GRID_SIZE)]
)
_DIGITS = np.arange(1, GRID_SIZE + 1, dtype=np.float64)


@dataclass(frozen=True)
class LossWeights:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("loss weights must be nonnegative")
        if self.alpha == self.beta == self.gamma == 0:
            raise ValueError("at least one loss weight must be positive")


@dataclass(frozen=True)
class LossConfig:
    weights: LossWeights
    constraint_mode: str = MODE_SOLUTION_CONSISTENT
    ablation: str | None = None

    def __post_init__(self):
        if self.constraint_mode not in CONSTRAINT_MODES:
            raise ValueError(f"unknown constraint mode: {self.constraint_mode!r}")
        if self.ablation is not None:
            expected = ABLATION_WEIGHTS.get(self.ablation)
            if expected is None:
                raise ValueError(f"unknown ablation label: {self.ablation!r}")
            actual = (self.weights.alpha, self.weights.beta, self.weights.gamma)
            inconsistent = any(
                (e == 0) != (a == 0) for e, a in zip(expected, actual)
            )
            if inconsistent:
                raise ValueError(
                    f"weights {actual} inconsistent with ablation {self.ablation!r}"
                )

    def to_dict(self) -> dict:
        return {
            "alpha": self.weights.alpha,
            "beta": self.weights.beta,
            "gamma": self.weights.gamma,
            "constraint_mode": self.constraint_mode,
            "ablation": self.ablation,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LossConfig":
        if "alpha" in data or "beta" in data or "gamma" in data:
            weights = LossWeights(
                alpha=float(data.get("alpha", 1.0)),
                beta=float(data.get("beta", 0.0)),
                gamma=float(data.get("gamma", 0.0)),
            )
            return cls(
                weights=weights,
                constraint_mode=data.get("constraint_mode", MODE_SOLUTION_CONSISTENT),
                ablation=data.get("ablation"),
            )
        return ablation_config(
            data.get("ablation", "standard-only"),
            constraint_mode=data.get("constraint_mode", MODE_SOLUTION_CONSISTENT),
        )


@dataclass(frozen=True)
class LossBreakdown:
    standard: float
    constraints: float
    expert: float
    combined: float


def ablation_config(label: str, constraint_mode: str = MODE_SOLUTION_CONSISTENT) -> LossConfig:
    """LossConfig for one ablation column: weights are 0/1 per the label."""
    try:
        alpha, beta, gamma = ABLATION_WEIGHTS[label]
    except KeyError:
        raise ValueError(
            f"unknown ablation label: {label!r} (choose from {', '.join(ABLATIONS)})"
        ) from None
    return LossConfig(
        weights=LossWeights(alpha, beta, gamma),
        constraint_mode=constraint_mode,
        ablation=label,
    )


def _true_cell_probs(pred: np.ndarray, target: np.ndarray):
    rows = np.arange(GRID_SIZE)[:, None]
    cols = np.arange(GRID_SIZE)[None, :]
    return rows, cols, pred[rows, cols, target - 1]


def standard_loss(pred: np.ndarray, target) -> float:
    """Mean over the 81 cells of -log(probability of the true digit)."""
    target = as_grid(target)
    _, _, p_true = _true_cell_probs(pred, target)
    return float(-np.log(np.maximum(p_true, PROB_CLAMP)).sum() / N_CELLS)


def standard_loss_grad(pred: np.ndarray, target):
    target = as_grid(target)
    rows, cols, p_true = _true_cell_probs(pred, target)
    clamped = np.maximum(p_true, PROB_CLAMP)
    loss = float(-np.log(clamped).sum() / N_CELLS)
    d_true = np.where(p_true >= PROB_CLAMP, -1.0 / (N_CELLS * clamped), 0.0)
    d_pred = np.zeros_like(pred)
    d_pred[rows, cols, target - 1] = d_true
    return loss, d_pred


def _unit_sums(arr3d: np.ndarray):
    """Sum a (9,9,k) array over each row, column, and box: three (9,k) arrays."""
    by_row = arr3d.sum(axis=1)
    by_col = arr3d.sum(axis=0)
    k = arr3d.shape[2]
    by_box = arr3d.reshape(3, 3, 3, 3, k).sum(axis=(1, 3)).reshape(GRID_SIZE, k)
    return by_row, by_col, by_box


def constraint_targets(givens, mode: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-(unit, digit) target counts for the constraint penalty."""
    if mode == MODE_FIXED_TARGET:
        ones = np.ones((GRID_SIZE, GRID_SIZE))
        return ones, ones.copy(), ones.copy()
    if mode == MODE_SOLUTION_CONSISTENT:
        givens = as_grid(givens)
        onehot = (givens[:, :, None] == np.arange(1, 10)).astype(np.float64)
        g_row, g_col, g_box = _unit_sums(onehot)
        return (
            np.maximum(0.0, 1.0 - g_row),
            np.maximum(0.0, 1.0 - g_col),
            np.maximum(0.0, 1.0 - g_box),
        )
    raise ValueError(f"unknown constraint mode: {mode!r}")


def constraints_loss(pred: np.ndarray, mask, givens, mode: str = MODE_SOLUTION_CONSISTENT) -> float:
    """Squared target-count gaps of per-unit digit mass over empty cells."""
    mask = np.asarray(mask, dtype=bool).reshape(GRID_SIZE, GRID_SIZE)
    masked_pred = pred * mask[:, :, None]
    s_row, s_col, s_box = _unit_sums(masked_pred)
    t_row, t_col, t_box = constraint_targets(givens, mode)
    return float(
        ((t_row - s_row) ** 2).sum()
        + ((t_col - s_col) ** 2).sum()
        + ((t_box - s_box) ** 2).sum()
    )


def constraints_loss_grad(pred: np.ndarray, mask, givens, mode: str = MODE_SOLUTION_CONSISTENT):
    mask = np.asarray(mask, dtype=bool).reshape(GRID_SIZE, GRID_SIZE)
    m = mask.astype(np.float64)
    masked_pred = pred * m[:, :, None]
    s_row, s_col, s_box = _unit_sums(masked_pred)
    t_row, t_col, t_box = constraint_targets(givens, mode)
    r_row = t_row - s_row
    r_col = t_col - s_col
    r_box = t_box - s_box
    loss = float((r_row ** 2).sum() + (r_col ** 2).sum() + (r_box ** 2).sum())
    residual_at_cell = (
        r_row[:, None, :] + r_col[None, :, :] + r_box[_BOX_OF, :]
    )
    d_pred = -2.0 * residual_at_cell * m[:, :, None]
    return loss, d_pred


def expert_loss(pred: np.ndarray, target) -> float:
    """Absolute gaps between predicted and true unit sums of cell values."""
    target = as_grid(target).astype(np.float64)
    expected = pred @ _DIGITS
    e_row, e_col, e_box = _unit_sums(expected[:, :, None])
    t_row, t_col, t_box = _unit_sums(target[:, :, None])
    return float(
        np.abs(e_row - t_row).sum()
        + np.abs(e_col - t_col).sum()
        + np.abs(e_box - t_box).sum()
    )


def expert_loss_grad(pred: np.ndarray, target):
    target = as_grid(target).astype(np.float64)
    expected = pred @ _DIGITS  # (9,9) expected digit value per cell
    e_row, e_col, e_box = (u.reshape(GRID_SIZE) for u in _unit_sums(expected[:, :, None]))
    t_row, t_col, t_box = (u.reshape(GRID_SIZE) for u in _unit_sums(target[:, :, None]))
    d_row = e_row - t_row
    d_col = e_col - t_col
    d_box = e_box - t_box
    loss = float(np.abs(d_row).sum() + np.abs(d_col).sum() + np.abs(d_box).sum())
    sign_at_cell = (
        np.sign(d_row)[:, None] + np.sign(d_col)[None, :] + np.sign(d_box)[_BOX_OF]
    )
    d_pred = sign_at_cell[:, :, None] * _DIGITS[None, None, :]
    return loss, d_pred


def combined_loss(pred: np.ndarray, instance: PuzzleInstance, config: LossConfig) -> LossBreakdown:
    """Weighted sum of the active components; zero-weight ones report 0."""
    w = config.weights
    std = cons = exp_ = 0.0
    if w.alpha != 0.0:
        std = standard_loss(pred, instance.solution)
    if w.beta != 0.0:
        cons = constraints_loss(
            pred, instance.mask, instance.puzzle, config.constraint_mode
        )
    if w.gamma != 0.0:
        exp_ = expert_loss(pred, instance.solution)
    combined = w.alpha * std + w.beta * cons + w.gamma * exp_
    return LossBreakdown(std, cons, exp_, combined)


def combined_loss_grad(pred: np.ndarray, instance: PuzzleInstance, config: LossConfig):
    """Weighted sum of the active components and its tensor gradient.

    Components with zero weight are skipped entirely and reported as 0.
    """
    w = config.weights
    std = cons = exp_ = 0.0
    d_pred = np.zeros_like(pred)
    if w.alpha != 0.0:
        std, d_std = standard_loss_grad(pred, instance.solution)
        d_pred += w.alpha * d_std
    if w.beta != 0.0:
        cons, d_cons = constraints_loss_grad(
            pred, instance.mask, instance.puzzle, config.constraint_mode
        )
        d_pred += w.beta * d_cons
    if w.gamma != 0.0:
        exp_, d_exp = expert_loss_grad(pred, instance.solution)
        d_pred += w.gamma * d_exp
    combined = w.alpha * std + w.beta * cons + w.gamma * exp_
    return LossBreakdown(std, cons, exp_, combined), d_pred
