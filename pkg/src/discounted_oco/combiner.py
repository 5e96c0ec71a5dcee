"""Two-stream combiner driven by one conservative DNP instance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dnp
from .core import ProblemBounds
from .special import ConfidenceParams

VALUE_SLACK = 1e-9


@dataclass(frozen=True)
class CombinerState:
    predictor: dnp.PredictorState
    omega: float
    bounds: ProblemBounds
    last_bit: float = 0.0

    @classmethod
    def fresh(cls, rho: float, Z: float, bounds: ProblemBounds) -> "CombinerState":
        pred = dnp.PredictorState.fresh(ConfidenceParams.from_rho(rho, Z), dnp.CONSERVATIVE)
        return cls(pred, dnp.predict(pred), bounds)


def combine(state: CombinerState, w1, w2) -> np.ndarray:
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    if w1.shape != w2.shape:
        raise ValueError(f"dimension mismatch: {w1.shape} vs {w2.shape}")
    return (1.0 - state.omega) * w1 + state.omega * w2


def loss_bit(f_at_w1: float, f_at_w2: float, bounds: ProblemBounds) -> float:
    GD = bounds.GD
    for v in (f_at_w1, f_at_w2):
        if not -VALUE_SLACK <= v <= GD + VALUE_SLACK:
            raise ValueError(f"loss value {v} outside [0, GD={GD}]")
    ell = (f_at_w1 - f_at_w2) / GD
    # rounding slack only; anything larger was rejected above
    return min(1.0, max(-1.0, ell))


def feed_losses(state: CombinerState, f_at_w1: float, f_at_w2: float) -> CombinerState:
    ell = loss_bit(f_at_w1, f_at_w2, state.bounds)
    pred = dnp.update(state.predictor, ell)
    return CombinerState(pred, dnp.predict(pred), state.bounds, ell)


def run_combiner(rho: float, Z: float, losses, stream1, stream2):
    """Combine two fixed decision streams over ``losses``.

    Returns ``(combined, omegas, bits)`` where ``omegas[t]`` is the weight used
    at round ``t`` and ``bits[t]`` the normalized loss difference fed after it.
    """
    s1 = np.asarray(stream1, dtype=float)
    s2 = np.asarray(stream2, dtype=float)
    T = s1.shape[0]
    state = CombinerState.fresh(rho, Z, losses.bounds)
    out = np.empty_like(s1)
    omegas = np.empty(T)
    bits = np.empty(T)
    for t in range(1, T + 1):
        omegas[t - 1] = state.omega
        out[t - 1] = combine(state, s1[t - 1], s2[t - 1])
        losses.observe(t, out[t - 1])
        state = feed_losses(state, losses.value(t, s1[t - 1]), losses.value(t, s2[t - 1]))
        bits[t - 1] = state.last_bit
    return out, omegas, bits
