"""Discounted-Normal-Predictor, plain and with conservative updating.

The predictor keeps a discounted deviation ``x`` of past bits and predicts
``g(x)``. In conservative mode a bit is ignored whenever the prediction is
saturated (``x < 0`` or ``x > U``) and already agrees with the bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .special import ConfidenceParams, g

PLAIN = "plain"
CONSERVATIVE = "conservative"
MODES = (PLAIN, CONSERVATIVE)


@dataclass(frozen=True)
class PredictorState:
    x: float
    rho: float
    params: ConfidenceParams
    U: float
    mode: str = CONSERVATIVE
    round: int = 0

    @classmethod
    def fresh(cls, params: ConfidenceParams, mode: str = CONSERVATIVE) -> "PredictorState":
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        return cls(x=0.0, rho=params.rho, params=params, U=params.U, mode=mode)


def predict(state: PredictorState) -> float:
    return g(float(state.x), state.params, state.U)


def accepts(x: float, b: float, U: float, mode: str = CONSERVATIVE) -> bool:
    """Whether the bit enters the deviation (the ``x <- rho x + b`` branch)."""
    if mode == PLAIN:
        return True
    return (0.0 <= x <= U) or (x < 0.0 and b > 0.0) or (x > U and b < 0.0)


def update(state: PredictorState, b: float) -> PredictorState:
    if not abs(b) <= 1.0:
        raise ValueError(f"bit {b} outside [-1, 1]")
    x = state.x
    if accepts(x, b, state.U, state.mode):
        x_new = state.rho * x + b
    else:
        x_new = state.rho * x
    return PredictorState(x_new, state.rho, state.params, state.U, state.mode, state.round + 1)


@dataclass
class SequenceRun:
    predictions: np.ndarray
    deviations: np.ndarray
    accepted: np.ndarray

    def transformed_bits(self, bits) -> np.ndarray:
        """Bits with the ignored ones replaced by 0."""
        return np.where(self.accepted, np.asarray(bits, dtype=float), 0.0)


def run_sequence(params: ConfidenceParams, mode: str, bits: Iterable[float]) -> SequenceRun:
    """Replay a bit sequence; ``deviations[t]`` is the state before bit ``t``."""
    state = PredictorState.fresh(params, mode)
    bits = [float(b) for b in bits]
    preds = np.empty(len(bits))
    devs = np.empty(len(bits) + 1)
    acc = np.empty(len(bits), dtype=bool)
    devs[0] = state.x
    for t, b in enumerate(bits):
        preds[t] = predict(state)
        acc[t] = accepts(state.x, b, state.U, mode)
        state = update(state, b)
        devs[t + 1] = state.x
    return SequenceRun(preds, devs, acc)


def run_adaptive(
    params: ConfidenceParams,
    mode: str,
    T: int,
    bit_fn: Callable[[int, float, float], float],
) -> tuple[SequenceRun, np.ndarray]:
    """Like :func:`run_sequence` but bit ``t`` is ``bit_fn(t, x_t, g(x_t))``."""
    state = PredictorState.fresh(params, mode)
    bits = np.empty(T)
    preds = np.empty(T)
    devs = np.empty(T + 1)
    acc = np.empty(T, dtype=bool)
    devs[0] = 0.0
    for t in range(T):
        c = predict(state)
        b = float(bit_fn(t, state.x, c))
        preds[t], bits[t] = c, b
        acc[t] = accepts(state.x, b, state.U, mode)
        state = update(state, b)
        devs[t + 1] = state.x
    return SequenceRun(preds, devs, acc), bits


def step_batch(x: np.ndarray, b: np.ndarray, rho: float, U: float, mode: str) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`update` over independent predictors sharing parameters."""
    if np.any(np.abs(b) > 1.0):
        raise ValueError("bit outside [-1, 1]")
    if mode == PLAIN:
        acc = np.ones(x.shape, dtype=bool)
    else:
        acc = ((x >= 0.0) & (x <= U)) | ((x < 0.0) & (b > 0.0)) | ((x > U) & (b < 0.0))
    return np.where(acc, rho * x + b, rho * x), acc


def discounted_payoff(predictions, bits, discount: float) -> float:
    """``sum_t discount^(T-t) * predictions[t] * bits[t]`` by Horner's rule."""
    c = np.asarray(predictions, dtype=float)
    b = np.asarray(bits, dtype=float)
    if c.shape != b.shape:
        raise ValueError(f"length mismatch: {c.shape} vs {b.shape}")
    if not 0 < discount <= 1:
        raise ValueError(f"discount must lie in (0, 1], got {discount}")
    acc = 0.0
    for v in c * b:
        acc = discount * acc + v
    return float(acc)


def write_trace(path, run: SequenceRun, bits) -> None:
    """One CSV row per round: t, x_t, g(x_t), b_t, branch."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "g", "b", "branch"])
        for t, (x, c, b, a) in enumerate(zip(run.deviations[:-1], run.predictions, bits, run.accepted), 1):
            w.writerow([t, repr(float(x)), repr(float(c)), repr(float(b)), "accept" if a else "ignore"])
