"""Projected online gradient descent with a constant step size."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import GRAD_RTOL, Domain, LossSequence, ProblemBounds, project


def step_size_for(lam: float, bounds: ProblemBounds) -> float:
    """Step size ``D sqrt(2(1 - lam)) / G`` tuned to discount ``lam``."""
    if not 0 < lam < 1:
        raise ValueError(f"discount factor must lie in (0, 1), got {lam}")
    return bounds.D * math.sqrt(2.0 * (1.0 - lam)) / bounds.G


@dataclass(frozen=True)
class OgdState:
    w: np.ndarray
    eta: float
    domain: Domain
    bounds: ProblemBounds

    @classmethod
    def for_discount(cls, lam: float, domain: Domain, bounds: ProblemBounds, w_init=None) -> "OgdState":
        w = domain.center.copy() if w_init is None else np.asarray(w_init, dtype=float)
        if not domain.contains(w):
            raise ValueError("initial point outside the domain")
        return cls(w, step_size_for(lam, bounds), domain, bounds)


def ogd_step(state: OgdState, gradient) -> OgdState:
    grad = np.asarray(gradient, dtype=float)
    norm = float(np.sqrt(grad @ grad))
    if norm > state.bounds.G * (1 + GRAD_RTOL):
        raise ValueError(f"gradient norm {norm} exceeds G={state.bounds.G}")
    return OgdState(project(state.domain, state.w - state.eta * grad), state.eta, state.domain, state.bounds)


def run_ogd(lam: float, losses: LossSequence, w_init=None) -> np.ndarray:
    """Decisions ``w_1..w_T``; each is played before its loss is revealed."""
    state = OgdState.for_discount(lam, losses.domain, losses.bounds, w_init)
    out = np.empty((losses.T, losses.domain.dim))
    for t in range(1, losses.T + 1):
        out[t - 1] = state.w
        losses.observe(t, state.w)
        state = ogd_step(state, losses.gradient(t, state.w))
    return out
