"""Shallow prediction network and its optimizer.

Architecture: 81 inputs -> dense(64, relu) -> dense(729) -> reshape to a
9x9x9 tensor with a per-cell softmax over the digit axis.  Cell (r, c) owns
the contiguous logit block ``9*(9r+c) .. 9*(9r+c)+8``, which is exactly the
row-major reshape, so ``logits.reshape(9, 9, 9)[r, c]`` are that cell's
digit scores.  All arithmetic is double precision.

Gradients are exact reverse-mode: the loss modules provide dLoss/dTensor
and ``backward`` chains it through softmax, the dense layers, and relu.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .grids import GRID_SIZE, N_CELLS, as_grid

HIDDEN_UNITS = 64
N_LOGITS = N_CELLS * GRID_SIZE  # 729

CHECKPOINT_FORMAT = "neurosudoku-checkpoint"
CHECKPOINT_VERSION = 1

PARAM_FIELDS = ("W1", "b1", "W2", "b2")


class NumericOverflowError(ArithmeticError):
    """A forward pass or update produced a non-finite value."""


class CheckpointError(ValueError):
    """A checkpoint file has the wrong format or version."""


@dataclass
class ModelParams:
    """Weights and biases of the two dense layers.

    The same container is reused for anything parameter-shaped: gradients
    and Adam moment accumulators.
    """

    W1: np.ndarray  # (64, 81)
    b1: np.ndarray  # (64,)
    W2: np.ndarray  # (729, 64)
    b2: np.ndarray  # (729,)

    def copy(self) -> "ModelParams":
        return ModelParams(*(getattr(self, f).copy() for f in PARAM_FIELDS))

    def all_finite(self) -> bool:
        return all(np.isfinite(getattr(self, f)).all() for f in PARAM_FIELDS)


def zeros_params() -> ModelParams:
    return ModelParams(
        W1=np.zeros((HIDDEN_UNITS, N_CELLS)),
        b1=np.zeros(HIDDEN_UNITS),
        W2=np.zeros((N_LOGITS, HIDDEN_UNITS)),
        b2=np.zeros(N_LOGITS),
    )


def init_params(seed: int) -> ModelParams:
    """Glorot-uniform weights, zero biases, deterministic per seed."""
    rng = np.random.default_rng(seed)
    lim1 = math.sqrt(6.0 / (N_CELLS + HIDDEN_UNITS))
    lim2 = math.sqrt(6.0 / (HIDDEN_UNITS + N_LOGITS))
    return ModelParams(
        W1=rng.uniform(-lim1, lim1, size=(HIDDEN_UNITS, N_CELLS)),
        b1=np.zeros(HIDDEN_UNITS),
        W2=rng.uniform(-lim2, lim2, size=(N_LOGITS, HIDDEN_UNITS)),
        b2=np.zeros(N_LOGITS),
    )


def encode_input(grid) -> np.ndarray:
    """Flatten a grid to 81 reals in [0, 1]: digit/9, empty cells 0."""
    return as_grid(grid).reshape(-1).astype(np.float64) / 9.0


@dataclass
class ForwardCache:
    """Intermediates kept for the backward pass."""

    x: np.ndarray
    pre_hidden: np.ndarray
    hidden: np.ndarray
    logits: np.ndarray


def _softmax_cells(logits: np.ndarray) -> np.ndarray:
    """Per-cell softmax over the 9 digit logits, max-subtracted for stability."""
    z = logits.reshape(N_CELLS, GRID_SIZE)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(params: ModelParams, x: np.ndarray):
    """Run the network.  Returns (prediction tensor (9,9,9), cache)."""
    with np.errstate(over="ignore", invalid="ignore"):
        pre_hidden = params.W1 @ x + params.b1
        if not np.isfinite(pre_hidden).all():
            raise NumericOverflowError("numeric overflow in the hidden layer")
        hidden = np.maximum(pre_hidden, 0.0)
        logits = params.W2 @ hidden + params.b2
        if not np.isfinite(logits).all():
            raise NumericOverflowError("numeric overflow in the output layer")
    tensor = _softmax_cells(logits).reshape(GRID_SIZE, GRID_SIZE, GRID_SIZE)
    return tensor, ForwardCache(x=x.copy(), pre_hidden=pre_hidden, hidden=hidden, logits=logits)


def backward(params: ModelParams, cache: ForwardCache, d_tensor: np.ndarray) -> ModelParams:
    """Chain dLoss/dTensor back to parameter gradients."""
    probs = _softmax_cells(cache.logits)
    dp = d_tensor.reshape(N_CELLS, GRID_SIZE)
    # softmax Jacobian per cell: dz = p * (dp - <dp, p>)
    dz = (probs * (dp - (dp * probs).sum(axis=1, keepdims=True))).reshape(-1)
    dW2 = np.outer(dz, cache.hidden)
    db2 = dz
    dh = params.W2.T @ dz
    dpre = dh * (cache.pre_hidden > 0.0)
    dW1 = np.outer(dpre, cache.x)
    db1 = dpre
    return ModelParams(W1=dW1, b1=db1, W2=dW2, b2=db2)


def decode_prediction(tensor: np.ndarray) -> np.ndarray:
    """Most probable digit per cell; ties resolve to the smallest digit."""
    return np.argmax(tensor, axis=2).astype(np.int64) + 1


@dataclass
class AdamState:
    """Adam moment accumulators plus hyperparameters."""

    m: ModelParams
    v: ModelParams
    timestep: int = 0
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def init_adam(lr: float = 0.001, beta1: float = 0.9, beta2: float = 0.999,
              epsilon: float = 1e-8) -> AdamState:
    return AdamState(m=zeros_params(), v=zeros_params(), timestep=0,
                     lr=lr, beta1=beta1, beta2=beta2, epsilon=epsilon)


def adam_step(params: ModelParams, grads: ModelParams, state: AdamState):
    """One bias-corrected Adam update.  Returns (new params, new state)."""
    if not grads.all_finite():
        raise NumericOverflowError("numeric overflow: non-finite gradient")
    t = state.timestep + 1
    b1, b2 = state.beta1, state.beta2
    new_p, new_m, new_v = {}, {}, {}
    for f in PARAM_FIELDS:
        g = getattr(grads, f)
        m = b1 * getattr(state.m, f) + (1.0 - b1) * g
        v = b2 * getattr(state.v, f) + (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        new_p[f] = getattr(params, f) - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
        new_m[f] = m
        new_v[f] = v
    return (
        ModelParams(**new_p),
        replace(state, m=ModelParams(**new_m), v=ModelParams(**new_v), timestep=t),
    )


def save_params(params: ModelParams, path, seed: int = 0) -> None:
    """Write a versioned JSON checkpoint (weights as nested lists)."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "seed": int(seed),
    }
    for f in PARAM_FIELDS:
        payload[f] = getattr(params, f).tolist()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_params(path):
    """Read a checkpoint.  Returns (params, seed)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CheckpointError(f"checkpoint {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(
            f"checkpoint {path} has format {payload.get('format')!r}, "
            f"expected {CHECKPOINT_FORMAT!r}"
        )
    if payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint {path} has version {payload.get('version')!r}, "
            f"expected {CHECKPOINT_VERSION}"
        )
    shapes = {
        "W1": (HIDDEN_UNITS, N_CELLS),
        "b1": (HIDDEN_UNITS,),
        "W2": (N_LOGITS, HIDDEN_UNITS),
        "b2": (N_LOGITS,),
    }
    arrays = {}
    for f in PARAM_FIELDS:
        arr = np.asarray(payload[f], dtype=np.float64)
        if arr.shape != shapes[f]:
            raise CheckpointError(
                f"checkpoint {path}: field {f} has shape {arr.shape}, "
                f"expected {shapes[f]}"
            )
        arrays[f] = arr
    return ModelParams(**arrays), int(payload.get("seed", 0))
