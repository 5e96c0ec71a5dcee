"""Discounted regret, hindsight comparators and bound checks.

Comparator values come with an error bound: zero for the closed forms, and a
convexity (duality-gap) certificate for the iterative ones, so a reported
comparator value never overstates how well the best fixed point did by more
than the stated amount.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from .core import LossSequence

CHECK_SLACK = 1e-6
FORMULAS = ("thm1", "eq29-grid", "thm3-uniform", "combiner-vs-e1", "combiner-vs-e2")
REPORT_COLUMNS = ("lambda", "regret", "bound", "slack", "pass", "horizon", "seed", "generator", "check")


def discounted_prefix_sums(values, lam: float) -> np.ndarray:
    """``P[h-1] = sum_{t<=h} lam^(h-t) values[t]`` for every horizon ``h``."""
    return lfilter([1.0], [1.0, -lam], np.asarray(values, dtype=float))


def discount_weights(lam: float, horizon: int) -> np.ndarray:
    """``lam^(horizon - t)`` for ``t = 1..horizon``."""
    return lam ** np.arange(horizon - 1, -1, -1, dtype=float)


def discounted_loss(decisions, losses: LossSequence, lam: float, horizon: int | None = None) -> float:
    W = np.asarray(decisions, dtype=float).reshape(-1, losses.domain.dim)
    h = W.shape[0] if horizon is None else horizon
    if not 1 <= h <= W.shape[0]:
        raise ValueError(f"horizon {h} outside 1..{W.shape[0]}")
    vals = losses.values_along(W[:h])
    acc = 0.0
    for v in vals:
        acc = lam * acc + v
    return float(acc)


@dataclass(frozen=True)
class Comparator:
    w: np.ndarray
    value: float
    error_bound: float
    method: str


def _objective(losses: LossSequence, weights: np.ndarray, w) -> float:
    return float(weights @ losses.values_at(w, len(weights)))


def _certificate(losses: LossSequence, weights: np.ndarray, w, grad=None) -> float:
    """Upper bound on ``F(w) - min_ball F`` from a subgradient of ``F`` at ``w``."""
    dom = losses.domain
    if grad is None:
        grad = weights @ losses.gradients_at(w, len(weights))
    gap = float(grad @ (np.asarray(w) - dom.center)) + dom.radius * float(np.linalg.norm(grad))
    return max(gap, 0.0)


def _linear_comparator(losses, weights):
    dom = losses.domain
    s = weights @ losses.grads[: len(weights)]
    norm = float(np.linalg.norm(s))
    w = dom.center.copy() if norm == 0.0 else dom.center - dom.radius * s / norm
    return Comparator(w, _objective(losses, weights, w), 0.0, "closed-form-linear")


def weighted_median(points, weights) -> float:
    """Smallest minimizer of ``sum_k weights[k] * |x - points[k]|``."""
    order = np.argsort(points, kind="stable")
    pts = np.asarray(points, dtype=float)[order]
    cw = np.cumsum(np.asarray(weights, dtype=float)[order])
    k = int(np.searchsorted(cw, 0.5 * cw[-1], side="left"))
    return float(pts[min(k, len(pts) - 1)])


def _grouped_thetas(losses: LossSequence, weights):
    h = len(weights)
    pts, inv = np.unique(losses.thetas[:h], axis=0, return_inverse=True)
    agg = np.bincount(inv.ravel(), weights=weights, minlength=len(pts))
    return pts, agg


def _absolute_1d_comparator(losses, weights):
    pts, agg = _grouped_thetas(losses, weights)
    w = np.array([weighted_median(pts[:, 0], agg)]) if len(pts) else losses.domain.center.copy()
    return Comparator(w, _objective(losses, weights, w), 0.0, "weighted-median")


def _kink_certificate(losses, pts, agg, w) -> float:
    """Certificate for ``G sum_k agg_k ||w - pts_k||`` choosing the best subgradient at a kink."""
    G = losses.bounds.G
    diff = w - pts
    dist = np.linalg.norm(diff, axis=1)
    at = dist <= 1e-14
    s = (G * agg[~at, None] * diff[~at] / dist[~at, None]).sum(axis=0)
    kink = G * float(agg[at].sum())
    if kink > 0:
        norm = float(np.linalg.norm(s))
        s = s * (1.0 - min(1.0, kink / norm)) if norm > 0 else s
    dom = losses.domain
    return max(float(s @ (w - dom.center)) + dom.radius * float(np.linalg.norm(s)), 0.0)


def _geometric_median_comparator(losses, weights, iters: int = 2000, tol: float = 1e-13):
    pts, agg = _grouped_thetas(losses, weights)
    G = losses.bounds.G
    F = lambda w: G * float(agg @ np.linalg.norm(w - pts, axis=1))  # noqa: E731
    w = (agg @ pts) / agg.sum()
    for _ in range(iters):
        dist = np.maximum(np.linalg.norm(w - pts, axis=1), 1e-15)
        coef = agg / dist
        w_new = (coef @ pts) / coef.sum()
        if np.linalg.norm(w_new - w) <= tol:
            w = w_new
            break
        w = w_new
    # Weiszfeld can stall next to a heavy data point; the optimum may sit on one
    candidates = [w] + [p for p in pts]
    best = min(candidates, key=F)
    # minimizer lies in the convex hull of the thetas, hence in the ball
    gap = _kink_certificate(losses, pts, agg, best)
    return Comparator(best, _objective(losses, weights, best), gap, "weiszfeld")


def grid_comparator(losses: LossSequence, lam: float, horizon: int | None = None, M: int = 41,
                    max_points: int = 200_000) -> Comparator:
    """Brute-force fallback: grid over the ball, then constrained local refinement."""
    h = losses.T if horizon is None else horizon
    weights = discount_weights(lam, h)
    dom = losses.domain
    d, c, r = dom.dim, dom.center, dom.radius
    best = c.copy()
    best_val = _objective(losses, weights, best)
    if M ** d <= max_points:
        axis = np.linspace(-r, r, M)
        for offs in itertools.product(axis, repeat=d):
            off = np.asarray(offs)
            if off @ off <= r * r:
                v = _objective(losses, weights, c + off)
                if v < best_val:
                    best, best_val = c + off, v
    res = minimize(
        lambda w: _objective(losses, weights, w),
        best,
        jac=lambda w: weights @ losses.gradients_at(w, h),
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": lambda w: r * r - (w - c) @ (w - c),
                      "jac": lambda w: -2.0 * (w - c)}],
        options={"maxiter": 500, "ftol": 1e-14},
    )
    w = res.x
    if np.linalg.norm(w - c) > r:
        w = c + r * (w - c) / np.linalg.norm(w - c)
    if _objective(losses, weights, w) > best_val:
        w = best
    return Comparator(w, _objective(losses, weights, w), _certificate(losses, weights, w), "grid+slsqp")


def best_comparator(losses: LossSequence, lam: float, horizon: int | None = None) -> Comparator:
    """Best fixed decision for the ``lam``-discounted loss up to ``horizon``."""
    h = losses.T if horizon is None else horizon
    weights = discount_weights(lam, h)
    if losses.family == "linear":
        return _linear_comparator(losses, weights)
    if losses.domain.dim == 1:
        return _absolute_1d_comparator(losses, weights)
    return _geometric_median_comparator(losses, weights)


# -- smoothed averages -------------------------------------------------------

def smoothed_average(s, lam: float, horizon: int | None = None) -> float:
    """``(1 - lam) sum_{t<=horizon} lam^(horizon-t) s_t``."""
    s = np.asarray(s, dtype=float)
    h = len(s) if horizon is None else horizon
    return (1.0 - lam) * float(discounted_prefix_sums(s[:h], lam)[-1]) if h else 0.0


@dataclass
class Decomposition:
    coefficients: np.ndarray  # coefficients[j] multiplies the lam2-average at horizon T - j
    components: np.ndarray
    reconstructed: float
    truncation_mass: float


def smoothed_average_decompose(s, lam1: float, lam2: float) -> Decomposition:
    """Write the ``lam1``-smoothed average at ``T`` as a mix of ``lam2`` ones.

    ``coefficients[0] = (1-lam1)/(1-lam2)`` and, for ``j >= 1``,
    ``coefficients[j] = (1-lam1)(lam1-lam2) lam1^(j-1) / (1-lam2)``, each
    weighting the ``lam2``-smoothed average at horizon ``T - j``. The missing
    mass ``(lam1-lam2) lam1^(T-1) / (1-lam2)`` belongs to the empty prefix.
    """
    if not 0 < lam2 < lam1 < 1:
        raise ValueError(f"need 0 < lam2 < lam1 < 1, got lam1={lam1}, lam2={lam2}")
    s = np.asarray(s, dtype=float)
    T = len(s)
    coef = np.empty(T)
    coef[0] = (1 - lam1) / (1 - lam2)
    coef[1:] = (1 - lam1) * (lam1 - lam2) * lam1 ** np.arange(T - 1) / (1 - lam2)
    prefix = (1 - lam2) * discounted_prefix_sums(s, lam2)  # prefix[k-1] is the average at horizon k
    components = prefix[::-1].copy()  # components[j] is the average at horizon T - j
    truncation = (lam1 - lam2) * lam1 ** (T - 1) / (1 - lam2)
    return Decomposition(coef, components, float(coef @ components), float(truncation))


# -- bound formulas ----------------------------------------------------------

def bound_value(formula: str, *, G: float, D: float, lam: float, Z: float | None = None,
                N: int | None = None, U: float | None = None) -> float:
    GD = G * D
    if formula == "thm1":
        return math.sqrt(2.0) * GD / math.sqrt(1.0 - lam)
    if formula in ("eq29-grid", "thm3-uniform"):
        core = GD / math.sqrt(1.0 - lam) * (4.0 * math.sqrt(math.log(1.0 / Z)) + math.sqrt(2.0))
        tail = GD * (N + 1) * Z / (2.0 * (1.0 - lam)) + GD
        return core + tail if formula == "eq29-grid" else 2.0 * (core + tail)
    if formula == "combiner-vs-e1":
        return GD * Z / (2.0 * (1.0 - lam))
    if formula == "combiner-vs-e2":
        return GD * (Z / (2.0 * (1.0 - lam)) + U + 1.0)
    raise ValueError(f"unknown bound formula {formula!r}; expected one of {FORMULAS}")


@dataclass
class RegretReport:
    lam: float
    learner_loss: float
    comparator_loss: float
    regret: float
    bound: float
    slack: float
    passed: bool
    horizon: int
    formula: str = ""
    seed: int | None = None
    generator: str = ""

    def row(self) -> dict[str, str]:
        return {
            "lambda": repr(self.lam),
            "regret": repr(self.regret),
            "bound": repr(self.bound),
            "slack": repr(self.slack),
            "pass": "true" if self.passed else "false",
            "horizon": str(self.horizon),
            "seed": "" if self.seed is None else str(self.seed),
            "generator": self.generator,
            "check": self.formula,
        }


def check_bound(formula: str, *, learner_loss: float, comparator_loss: float, lam: float, G: float,
                D: float, horizon: int, comparator_error: float = 0.0, Z: float | None = None,
                N: int | None = None, U: float | None = None, seed: int | None = None,
                generator: str = "") -> RegretReport:
    bound = bound_value(formula, G=G, D=D, lam=lam, Z=Z, N=N, U=U)
    regret = learner_loss - comparator_loss
    slack = comparator_error + CHECK_SLACK
    return RegretReport(lam, learner_loss, comparator_loss, regret, bound, slack,
                        bool(regret <= bound + slack), horizon, formula, seed, generator)


def regret_report(decisions, losses: LossSequence, lam: float, formula: str, horizon: int | None = None,
                  **params) -> RegretReport:
    """Regret of ``decisions`` against the best fixed point, checked against ``formula``."""
    h = len(decisions) if horizon is None else horizon
    comp = best_comparator(losses, lam, h)
    return check_bound(
        formula,
        learner_loss=discounted_loss(decisions, losses, lam, h),
        comparator_loss=comp.value,
        comparator_error=comp.error_bound,
        lam=lam, G=losses.bounds.G, D=losses.bounds.D, horizon=h,
        seed=losses.seed, generator=losses.kind, **params,
    )


def write_reports(fh, reports) -> None:
    w = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.row())


def report_dict(r: RegretReport) -> dict:
    return asdict(r)
