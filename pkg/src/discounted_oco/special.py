"""Confidence function of the Discounted-Normal-Predictor and its helpers.

``log`` is the natural logarithm throughout.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import bisect
from scipy.special import erf as _erf_std

SQRT_HALF_PI = math.sqrt(math.pi / 2.0)
U_XTOL = 1e-10


@dataclass(frozen=True)
class ConfidenceParams:
    """Effective window ``n = 1/(1 - rho)`` and scale ``Z`` in ``(0, 1/e]``."""

    n: float
    Z: float

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0 < self.Z <= 1 / math.e:
            raise ValueError(f"Z must lie in (0, 1/e], got {self.Z}")

    @classmethod
    def from_rho(cls, rho: float, Z: float) -> "ConfidenceParams":
        if not 0 < rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {rho}")
        return cls(1.0 / (1.0 - rho), Z)

    @property
    def rho(self) -> float:
        return 1.0 - 1.0 / self.n

    @property
    def proven_regime(self) -> bool:
        """Whether ``n >= max{8e, 16 log(1/Z)}`` holds."""
        return self.n >= max(8 * math.e, 16 * math.log(1 / self.Z))

    @cached_property
    def U(self) -> float:
        return threshold_U(self)


def erf_halfgauss(x):
    """``int_0^x exp(-s^2/2) ds``; odd, tends to ``sqrt(pi/2)``."""
    return SQRT_HALF_PI * _erf_std(np.asarray(x, dtype=float) / math.sqrt(2.0))[()]


def g_tilde(x, p: ConfidenceParams):
    """Unclipped confidence ``sqrt(n/8) Z erf(x/sqrt(8n)) exp(x^2/(16n))``.

    Overflows to ``inf`` (with a ``RuntimeWarning``) once ``|x|`` is far past
    ``sqrt(n)``; callers clip with :func:`g` instead.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        expo = np.exp(x * x / (16.0 * p.n))
        out = math.sqrt(p.n / 8.0) * p.Z * erf_halfgauss(x / math.sqrt(8.0 * p.n)) * expo
    if np.any(np.isinf(out)):
        warnings.warn("g_tilde overflowed; saturating to +/-inf", RuntimeWarning, stacklevel=2)
    return out[()]


def _g_scalar(x: float, n: float, Z: float, U: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= U:
        return 1.0
    val = math.sqrt(n / 8.0) * Z * SQRT_HALF_PI * math.erf(x / (4.0 * math.sqrt(n))) * math.exp(x * x / (16.0 * n))
    return min(val, 1.0)


def g(x, p: ConfidenceParams, U: float | None = None):
    """Confidence clipped to ``[0, 1]``; exactly 0 for ``x <= 0`` and 1 for ``x >= U``."""
    if U is None:
        U = p.U
    if isinstance(x, (float, int)):
        return _g_scalar(float(x), p.n, p.Z, U)
    x = np.asarray(x, dtype=float)
    inner = np.clip(x, 0.0, U)
    val = np.clip(g_tilde(inner, p), 0.0, 1.0)
    return np.where(x <= 0.0, 0.0, np.where(x >= U, 1.0, val))[()]


def threshold_U(p: ConfidenceParams) -> float:
    """The unique ``u >= 0`` with ``g_tilde(u) = 1``, found by bisection."""
    cap = math.sqrt(16.0 * p.n * math.log(1.0 / p.Z))
    hi = cap + 1.0
    if g_tilde(hi, p) < 1.0:
        raise ValueError(
            f"g_tilde stays below 1 on [0, {hi:.6g}] for n={p.n}, Z={p.Z}; parameters inconsistent"
        )
    u = bisect(lambda x: g_tilde(x, p) - 1.0, 0.0, hi, xtol=U_XTOL * 1e-2, rtol=4 * np.finfo(float).eps,
               maxiter=500)
    return float(u)


def u_upper_bound(p: ConfidenceParams) -> float:
    return math.sqrt(16.0 * p.n * math.log(1.0 / p.Z))


# -- potential Phi(x) = int_0^x g(s) ds --------------------------------------

def _adaptive_simpson(f, a: float, b: float, tol: float, depth: int = 50) -> float:
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (recurse(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(m, b, fm, frm, fb, right, tol / 2.0, depth - 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)


def potential_phi(x: float, p: ConfidenceParams, tol: float = 1e-10) -> float:
    """``int_0^x g(s) ds`` by adaptive Simpson below ``U`` and exactly above it."""
    x = float(x)
    if x <= 0.0:
        return 0.0
    U = p.U
    gt = lambda s: float(g_tilde(s, p))  # noqa: E731
    body = _adaptive_simpson(gt, 0.0, min(x, U), tol)
    return body + max(x - U, 0.0)


class PotentialTable:
    """Vectorized ``Phi`` from a cumulative Gauss-Legendre table.

    The interval ``[0, U]`` is split into panels of width ~``panel``; each
    panel's integral uses a 20-point rule, and partial panels are integrated
    with the same rule mapped onto the remainder.
    """

    def __init__(self, p: ConfidenceParams, panel: float = 0.5, order: int = 20):
        self.p = p
        self.U = p.U
        m = max(1, int(math.ceil(self.U / panel)))
        self.edges = np.linspace(0.0, self.U, m + 1)
        self.nodes, self.weights = leggauss(order)
        lo, hi = self.edges[:-1], self.edges[1:]
        self.cum = np.concatenate([[0.0], np.cumsum(self._integrate(lo, hi))])
        self.total = float(self.cum[-1])

    def _integrate(self, a, b):
        a = np.asarray(a, dtype=float)[..., None]
        b = np.asarray(b, dtype=float)[..., None]
        s = 0.5 * (b - a) * self.nodes + 0.5 * (a + b)
        return (0.5 * (b - a)[..., 0]) * (g_tilde(s, self.p) @ self.weights)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.clip(x, 0.0, self.U)
        k = np.clip(np.searchsorted(self.edges, inside, side="right") - 1, 0, len(self.edges) - 2)
        body = self.cum[k] + self._integrate(self.edges[k], inside)
        out = np.where(x <= 0.0, 0.0, body + np.maximum(x - self.U, 0.0))
        return out[()]
