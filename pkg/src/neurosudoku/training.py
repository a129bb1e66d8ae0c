"""End-to-end training: dataset construction through the logic engine,
per-puzzle gradient updates on the combined loss, K-fold cross-validation,
and model-based puzzle solving with rule-aware post-processing.

The training loop mirrors the per-puzzle structure: each epoch visits every
puzzle (in a seeded shuffle), computes the combined loss of the network's
prediction against that puzzle's solution and mask, and applies one Adam
update per puzzle (batch size 1).  A mean-batch mode (one update per epoch
on averaged gradients) exists but is off by default.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .engine import generate_solved, mask_puzzle, solve
from .grids import (
    GRID_SIZE,
    PuzzleInstance,
    SCOPE_ALL,
    SCOPE_EMPTY,
    as_grid,
    cell_accuracy,
    format_grid,
    is_valid_complete,
    parse_grid,
)
from .losses import LossBreakdown, LossConfig, ablation_config, combined_loss, combined_loss_grad
from .network import (
    PARAM_FIELDS,
    ModelParams,
    adam_step,
    backward,
    decode_prediction,
    encode_input,
    forward,
    init_adam,
    init_params,
    zeros_params,
)

MODE_ARGMAX = "argmax"
MODE_GREEDY = "greedy-constrained"
MODE_HYBRID = "hybrid-complete"
POSTPROCESS_MODES = (MODE_ARGMAX, MODE_GREEDY, MODE_HYBRID)


class DatasetConsistencyError(RuntimeError):
    """A built instance failed re-verification by the logic engine (a bug)."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    folds: int = 3
    seed: int = 0
    loss: LossConfig = field(default_factory=lambda: ablation_config("all-combined"))
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    shuffle_each_epoch: bool = True
    postprocess_mode: str = MODE_ARGMAX
    mean_batch: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.postprocess_mode not in POSTPROCESS_MODES:
            raise ValueError(f"unknown postprocess mode: {self.postprocess_mode!r}")

    def to_dict(self) -> dict:
        d = {
            "epochs": self.epochs,
            "folds": self.folds,
            "seed": self.seed,
            "lr": self.lr,
            "shuffle_each_epoch": self.shuffle_each_epoch,
            "postprocess_mode": self.postprocess_mode,
            "mean_batch": self.mean_batch,
        }
        d.update(self.loss.to_dict())
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {}
        for key in ("epochs", "folds", "seed"):
            if key in data:
                known[key] = int(data[key])
        for key in ("lr", "beta1", "beta2", "epsilon"):
            if key in data:
                known[key] = float(data[key])
        for key in ("shuffle_each_epoch", "mean_batch"):
            if key in data:
                known[key] = bool(data[key])
        if "postprocess_mode" in data:
            known["postprocess_mode"] = data["postprocess_mode"]
        return cls(loss=LossConfig.from_dict(data), **known)


@dataclass
class FoldResult:
    fold: int
    accuracy_all: float
    accuracy_empty: float
    val_loss: LossBreakdown
    history: list


@dataclass
class ExperimentResult:
    folds: list
    mean_all: float
    std_all: float
    mean_empty: float
    std_empty: float
    config: TrainConfig
    fingerprint: str


def dataset_fingerprint(dataset) -> str:
    """Order-independent hash of the dataset's puzzle and solution texts."""
    lines = sorted(
        f"{format_grid(inst.puzzle)}:{format_grid(inst.solution)}" for inst in dataset
    )
    return hashlib.sha256("\n".join(lines).encode("ascii")).hexdigest()


def build_dataset(n_puzzles: int, difficulty: float, seed: int):
    """Generate, mask, and re-verify ``n_puzzles`` instances.

    Instance k derives from seed+k for both generation and masking, so the
    dataset is a pure function of (n_puzzles, difficulty, seed).  Every
    instance is re-checked against the logic engine before inclusion; a
    failure indicates an internal bug and aborts.
    """
    if n_puzzles < 1:
        raise ValueError("n_puzzles must be >= 1")
    dataset = []
    for k in range(n_puzzles):
        solved = generate_solved(seed + k)
        inst = mask_puzzle(solved, difficulty, seed + k)
        outcome = solve(inst.puzzle, 1)
        if not outcome.solutions:
            raise DatasetConsistencyError(
                f"internal consistency failure: instance {k} (seed {seed + k}) "
                "has no completion"
            )
        if not is_valid_complete(inst.solution):
            raise DatasetConsistencyError(
                f"internal consistency failure: instance {k} (seed {seed + k}) "
                "stored an invalid solution"
            )
        dataset.append(inst)
    return dataset


def save_dataset(dataset, path) -> None:
    """Write instances as JSON lines: puzzle/solution text, difficulty, seed."""
    with open(path, "w", encoding="utf-8") as fh:
        for inst in dataset:
            fh.write(json.dumps({
                "puzzle": format_grid(inst.puzzle),
                "solution": format_grid(inst.solution),
                "difficulty": inst.difficulty,
                "seed": inst.seed,
            }) + "\n")


def load_dataset(path):
    instances = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                puzzle = parse_grid(rec["puzzle"])
                solution = parse_grid(rec["solution"])
                inst = PuzzleInstance(
                    puzzle=puzzle,
                    solution=solution,
                    mask=puzzle == 0,
                    difficulty=float(rec["difficulty"]),
                    seed=int(rec["seed"]),
                ).validate()
            except (KeyError, ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{line_no}: bad dataset record: {exc}") from exc
            instances.append(inst)
    return instances


def train(dataset, config: TrainConfig, init_seed: int):
    """Train a fresh model on the dataset.

    Returns (final params, per-epoch mean combined loss).  Deterministic:
    parameter init comes from ``init_seed`` and the per-epoch shuffle from
    (init_seed, epoch).
    """
    if not dataset:
        raise ValueError("dataset must be nonempty")
    params = init_params(init_seed)
    state = init_adam(config.lr, config.beta1, config.beta2, config.epsilon)
    inputs = [encode_input(inst.puzzle) for inst in dataset]
    n = len(dataset)
    history = []
    for epoch in range(config.epochs):
        if config.shuffle_each_epoch:
            order = np.random.default_rng((init_seed, epoch)).permutation(n)
        else:
            order = np.arange(n)
        epoch_losses = []
        if config.mean_batch:
            acc = zeros_params()
            for i in order:
                tensor, cache = forward(params, inputs[i])
                breakdown, d_tensor = combined_loss_grad(tensor, dataset[i], config.loss)
                grads = backward(params, cache, d_tensor)
                for f in PARAM_FIELDS:
                    acc_field = getattr(acc, f)
                    acc_field += getattr(grads, f) / n
                epoch_losses.append(breakdown.combined)
            params, state = adam_step(params, acc, state)
        else:
            for i in order:
                tensor, cache = forward(params, inputs[i])
                breakdown, d_tensor = combined_loss_grad(tensor, dataset[i], config.loss)
                grads = backward(params, cache, d_tensor)
                params, state = adam_step(params, grads, state)
                epoch_losses.append(breakdown.combined)
        history.append(float(np.mean(epoch_losses)))
    return params, history


def _feasible(grid: np.ndarray, row: int, col: int, digit: int) -> bool:
    if digit in grid[row, :] or digit in grid[:, col]:
        return False
    br, bc = 3 * (row // 3), 3 * (col // 3)
    return digit not in grid[br:br + 3, bc:bc + 3]


def solve_with_model(params: ModelParams, puzzle, mode: str = MODE_ARGMAX) -> np.ndarray:
    """Predict a completion of the puzzle; given cells always pass through.

    argmax: per-cell most probable digit, givens overwritten last.
    greedy-constrained: empty cells filled in descending order of peak
    probability, each taking its most probable digit that does not clash
    with already-placed digits; unfillable cells stay 0.
    hybrid-complete: greedy, then the logic engine completes any leftover
    empties from the placed digits (first solution).  If the greedy
    placements blocked every completion, the engine solves again from the
    original givens alone, so a solvable puzzle always yields a fully
    valid grid; only an unsolvable puzzle returns the degraded greedy
    output.  Never raises.
    """
    puzzle = as_grid(puzzle)
    if mode not in POSTPROCESS_MODES:
        raise ValueError(f"unknown postprocess mode: {mode!r}")
    tensor, _ = forward(params, encode_input(puzzle))
    if mode == MODE_ARGMAX:
        grid = decode_prediction(tensor)
        given = puzzle != 0
        grid[given] = puzzle[given]
        return grid
    grid = puzzle.copy()
    empties = [(i, j) for i in range(GRID_SIZE) for j in range(GRID_SIZE) if puzzle[i, j] == 0]
    empties.sort(key=lambda ij: (-tensor[ij[0], ij[1]].max(), ij[0], ij[1]))
    for i, j in empties:
        by_prob = sorted(range(1, 10), key=lambda d: (-tensor[i, j, d - 1], d))
        for digit in by_prob:
            if _feasible(grid, i, j, digit):
                grid[i, j] = digit
                break
    if mode == MODE_HYBRID and (grid == 0).any():
        outcome = solve(grid, 1)
        if outcome.solutions:
            return outcome.solutions[0]
        outcome = solve(puzzle, 1)  # greedy blocked all completions
        if outcome.solutions:
            return outcome.solutions[0]
    return grid


def _canonical_key(inst: PuzzleInstance):
    return (format_grid(inst.puzzle), format_grid(inst.solution), inst.seed)


def kfold_evaluate(dataset, config: TrainConfig, train_fn=None, predict_fn=None) -> ExperimentResult:
    """K-fold cross-validation with a fresh model per fold.

    The dataset is put in canonical order and then shuffled by the config
    seed, so results do not depend on input order.  Each fold trains on the
    other folds only (init seed = config.seed + fold index) and validates
    on its own block; accuracies are reported in both scopes.

    ``train_fn``/``predict_fn`` are injection points for tests: they default
    to ``train`` and ``solve_with_model`` with the configured post-processing.
    """
    n = len(dataset)
    if config.folds > n:
        raise ValueError(f"folds={config.folds} exceeds dataset size {n}")
    if train_fn is None:
        train_fn = train
    if predict_fn is None:
        def predict_fn(params, inst):
            return solve_with_model(params, inst.puzzle, config.postprocess_mode)

    canon = sorted(dataset, key=_canonical_key)
    perm = np.random.default_rng(config.seed).permutation(n)
    blocks = np.array_split(perm, config.folds)
    fold_results = []
    for fold_idx in range(config.folds):
        val_idx = blocks[fold_idx]
        train_idx = [i for j, b in enumerate(blocks) if j != fold_idx for i in b]
        train_set = [canon[i] for i in train_idx]
        val_set = [canon[i] for i in val_idx]
        params, history = train_fn(train_set, config, config.seed + fold_idx)
        acc_all, acc_empty, parts = [], [], []
        for inst in val_set:
            predicted = predict_fn(params, inst)
            acc_all.append(cell_accuracy(predicted, inst.solution, inst.mask, SCOPE_ALL))
            acc_empty.append(cell_accuracy(predicted, inst.solution, inst.mask, SCOPE_EMPTY))
            tensor, _ = forward(params, encode_input(inst.puzzle))
            parts.append(combined_loss(tensor, inst, config.loss))
        val_loss = LossBreakdown(
            standard=float(np.mean([p.standard for p in parts])),
            constraints=float(np.mean([p.constraints for p in parts])),
            expert=float(np.mean([p.expert for p in parts])),
            combined=float(np.mean([p.combined for p in parts])),
        )
        fold_results.append(FoldResult(
            fold=fold_idx,
            accuracy_all=float(np.mean(acc_all)),
            accuracy_empty=float(np.mean(acc_empty)),
            val_loss=val_loss,
            history=history,
        ))
    alls = [fr.accuracy_all for fr in fold_results]
    empties = [fr.accuracy_empty for fr in fold_results]
    return ExperimentResult(
        folds=fold_results,
        mean_all=float(np.mean(alls)),
        std_all=float(np.std(alls)),
        mean_empty=float(np.mean(empties)),
        std_empty=float(np.std(empties)),
        config=config,
        fingerprint=dataset_fingerprint(dataset),
    )


CSV_COLUMNS = [
    "n_puzzles",
    "difficulty",
    "ablation",
    "fold",
    "acc_all",
    "acc_empty",
    "loss_standard",
    "loss_constraints",
    "loss_expert",
    "loss_combined",
    "epochs",
    "seed",
]


def result_rows(result: ExperimentResult, n_puzzles: int, difficulty: float):
    """Flatten an ExperimentResult into one CSV row dict per fold."""
    label = result.config.loss.ablation or "custom"
    rows = []
    for fr in result.folds:
        rows.append({
            "n_puzzles": n_puzzles,
            "difficulty": difficulty,
            "ablation": label,
            "fold": fr.fold,
            "acc_all": f"{fr.accuracy_all:.6f}",
            "acc_empty": f"{fr.accuracy_empty:.6f}",
            "loss_standard": f"{fr.val_loss.standard:.6f}",
            "loss_constraints": f"{fr.val_loss.constraints:.6f}",
            "loss_expert": f"{fr.val_loss.expert:.6f}",
            "loss_combined": f"{fr.val_loss.combined:.6f}",
            "epochs": result.config.epochs,
            "seed": result.config.seed,
        })
    return rows


def failed_row(n_puzzles: int, difficulty: float, ablation: str, seed: int, epochs: int):
    """Placeholder row for a grid cell whose run raised; fold=-1, metrics nan."""
    return {
        "n_puzzles": n_puzzles,
        "difficulty": difficulty,
        "ablation": ablation,
        "fold": -1,
        "acc_all": "nan",
        "acc_empty": "nan",
        "loss_standard": "nan",
        "loss_constraints": "nan",
        "loss_expert": "nan",
        "loss_combined": "nan",
        "epochs": epochs,
        "seed": seed,
    }


def write_results_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
