"""Smoothed OGD: OGD experts on a geometric discount grid, chained by combiners.

Expert ``i`` (1-indexed) targets ``lambda_i = 1 - 2^(i-1)/T`` with step size
``(D/G) sqrt(2^i / T)``; combiner ``i`` mixes the output of combiner ``i-1``
with expert ``i`` using a DNP-cu instance with discount ``lambda_i``. The
chain runs in descending order of discount.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import combiner as comb
from .core import LossSequence, ProblemBounds
from .ogd import OgdState, ogd_step

log = logging.getLogger(__name__)


class RegimeWarning(UserWarning):
    """Parameters fall outside the regime where the regret bounds are proven."""


@dataclass(frozen=True)
class DiscountGrid:
    T: int
    tau: int
    N: int
    lambdas: tuple[float, ...]

    @property
    def windows(self) -> tuple[float, ...]:
        return tuple(self.T / 2 ** (i - 1) for i in range(1, self.N + 2))


def ceil_log2_ratio(T: int, tau: int) -> int:
    """``ceil(log2(T / tau))`` in integer arithmetic."""
    q = -(-T // tau)
    return (q - 1).bit_length()


def build_grid(T: int, tau: int) -> DiscountGrid:
    if not (isinstance(T, int) and isinstance(tau, int)):
        raise TypeError("T and tau must be integers")
    if not 1 <= tau <= T:
        raise ValueError(f"need 1 <= tau <= T, got tau={tau}, T={T}")
    N = ceil_log2_ratio(T, tau)
    lambdas = tuple(1.0 - 2 ** (i - 1) / T for i in range(1, N + 2))
    if lambdas[-1] <= 0.0:
        raise ValueError(f"tau={tau} too small for T={T}: smallest grid discount {lambdas[-1]} <= 0")
    return DiscountGrid(T, tau, N, lambdas)


def regime_ok(tau: float, Z: float) -> bool:
    return tau >= max(16 * math.e, 32 * math.log(1 / Z))


def expert_step_size(i: int, T: int, bounds: ProblemBounds) -> float:
    return bounds.D / bounds.G * math.sqrt(2 ** i / T)


@dataclass
class ExpertStack:
    grid: DiscountGrid
    Z: float
    baseline: np.ndarray
    experts: list[OgdState]
    combiners: list[comb.CombinerState]

    @classmethod
    def build(cls, grid: DiscountGrid, Z: float, losses: LossSequence, baseline=None) -> "ExpertStack":
        domain, bounds = losses.domain, losses.bounds
        base = domain.center.copy() if baseline is None else np.asarray(baseline, dtype=float)
        experts = []
        combiners = []
        for i, lam in enumerate(grid.lambdas, 1):
            experts.append(OgdState(domain.center.copy(), expert_step_size(i, grid.T, bounds), domain, bounds))
            combiners.append(comb.CombinerState.fresh(lam, Z, bounds))
        return cls(grid, Z, base, experts, combiners)


@dataclass
class RoundInfo:
    levels: np.ndarray  # v_{t,0..N+1}
    iterates: np.ndarray  # w_{t,1..N+1}
    omegas: np.ndarray
    deviations: np.ndarray


def sogd_round(stack: ExpertStack, t: int, losses: LossSequence) -> tuple[np.ndarray, RoundInfo]:
    """Play round ``t`` and update every expert and combiner in place."""
    K = len(stack.experts)
    d = stack.baseline.shape[0]
    levels = np.empty((K + 1, d))
    iterates = np.empty((K, d))
    omegas = np.empty(K)
    devs = np.empty(K)
    levels[0] = stack.baseline
    for i in range(K):
        iterates[i] = stack.experts[i].w
        omegas[i] = stack.combiners[i].omega
        devs[i] = stack.combiners[i].predictor.x
        levels[i + 1] = comb.combine(stack.combiners[i], levels[i], iterates[i])
    w_t = levels[K]
    losses.observe(t, w_t)
    level_vals = [losses.value(t, v) for v in levels[:K]]
    for i in range(K):
        stack.experts[i] = ogd_step(stack.experts[i], losses.gradient(t, iterates[i]))
        stack.combiners[i] = comb.feed_losses(stack.combiners[i], level_vals[i], losses.value(t, iterates[i]))
    return w_t, RoundInfo(levels, iterates, omegas, devs)


@dataclass
class SogdRun:
    grid: DiscountGrid
    Z: float
    decisions: np.ndarray
    omegas: np.ndarray
    deviations: np.ndarray
    iterates: np.ndarray
    levels: np.ndarray
    regime_ok: bool = field(default=True)


def run_sogd(T: int, tau: int, Z: float | None, losses: LossSequence, baseline=None) -> SogdRun:
    if losses.T != T:
        raise ValueError(f"loss sequence horizon {losses.T} != T={T}")
    Z = 1.0 / T if Z is None else Z
    grid = build_grid(T, tau)
    ok = regime_ok(tau, Z)
    if not ok:
        warnings.warn(
            f"tau={tau} < max(16e, 32 log(1/Z))={max(16 * math.e, 32 * math.log(1 / Z)):.4g}; "
            "regret bounds are not guaranteed",
            RegimeWarning,
            stacklevel=2,
        )
    stack = ExpertStack.build(grid, Z, losses, baseline)
    K = grid.N + 1
    d = losses.domain.dim
    decisions = np.empty((T, d))
    omegas = np.empty((T, K))
    devs = np.empty((T, K))
    iterates = np.empty((T, K, d))
    levels = np.empty((T, K + 1, d))
    for t in range(1, T + 1):
        w_t, info = sogd_round(stack, t, losses)
        decisions[t - 1] = w_t
        omegas[t - 1] = info.omegas
        devs[t - 1] = info.deviations
        iterates[t - 1] = info.iterates
        levels[t - 1] = info.levels
    log.debug("sogd finished: T=%d N=%d", T, grid.N)
    return SogdRun(grid, Z, decisions, omegas, devs, iterates, levels, ok)
