"""Invariant corpus for the bit predictor.

Runs many bit sequences through DNP / DNP-cu at once (vectorized over
sequences) and records, for every (family, n, Z, eta) cell, the smallest
margin of each payoff inequality over all sequences *and all prefixes*.
A margin is ``lhs - rhs``; an inequality holds when the margin is >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dnp
from .special import ConfidenceParams, PotentialTable, g

BIT_FAMILIES = (
    "rademacher",
    "biased-0.3",
    "biased-0.7",
    "anti-predictor",
    "teaser",
    "sawtooth",
)
PAYOFF_TOL = 1e-9
POTENTIAL_TOL = 1e-6


@dataclass(frozen=True)
class CellResult:
    family: str
    n: float
    Z: float
    eta: float
    check: str
    min_margin: float
    tolerance: float
    sequences: int
    T: int
    in_hypothesis: bool

    @property
    def passed(self) -> bool:
        return self.min_margin >= -self.tolerance


class BitSource:
    """Vectorized bit generator for one family; adaptive families look at ``x`` and ``g(x)``."""

    def __init__(self, family: str, size: int, rng: np.random.Generator, U: float):
        if family not in BIT_FAMILIES:
            raise ValueError(f"unknown bit family {family!r}; expected one of {BIT_FAMILIES}")
        self.family = family
        self.size = size
        self.rng = rng
        self.U = U
        self._up = np.ones(size, dtype=bool)

    def __call__(self, x: np.ndarray, conf: np.ndarray) -> np.ndarray:
        fam = self.family
        if fam == "rademacher":
            return np.where(self.rng.random(self.size) < 0.5, 1.0, -1.0)
        if fam.startswith("biased-"):
            p = float(fam.split("-", 1)[1])
            return np.where(self.rng.random(self.size) < p, 1.0, -1.0)
        if fam == "anti-predictor":
            # -sign(g) when g != 0, else -1; g >= 0 so the bit always opposes the prediction
            return np.where(conf != 0.0, -np.sign(conf), -1.0)
        if fam == "teaser":
            return np.where(conf > 0.0, -1.0, 1.0)
        # sawtooth: climb past U, then sell against full confidence until it halves
        self._up = np.where(x > self.U, False, np.where(conf < 0.5, True, self._up))
        return np.where(self._up, 1.0, -1.0)


def _family_rng(seed: int, family: str, n: float, Z: float) -> np.random.Generator:
    key = [seed, BIT_FAMILIES.index(family), int(round(n)), int(round(1 / Z))]
    return np.random.default_rng(key)


def payoff_corpus(
    params: ConfidenceParams,
    etas,
    families=BIT_FAMILIES,
    sequences: int = 250,
    T: int = 10_000,
    seed: int = 0,
) -> list[CellResult]:
    """Lower-bound margins of DNP-cu's discounted payoff.

    For each ``eta``: ``sum eta^(T-t) g(x_t) b_t + Z / (2(1-eta))`` (must be
    >= 0). For the tracking bound with ``rho``:
    ``sum rho^(T-t) g b - sum rho^(T-t) b + Z/(2(1-rho)) + U + 1`` (must be >= 0).
    Deviation range ``[-1, U+1]`` and step size ``<= 2`` margins are reported too.
    """
    if not families:
        raise ValueError("empty corpus: no bit families given")
    etas = [float(e) for e in etas]
    rho, U, n, Z = params.rho, params.U, params.n, params.Z
    regime = params.proven_regime and Z <= 1 / math.e and U >= 22
    out: list[CellResult] = []
    for fam in families:
        src = BitSource(fam, sequences, _family_rng(seed, fam, n, Z), U)
        x = np.zeros(sequences)
        pay = np.zeros((len(etas), sequences))
        pay_rho = np.zeros(sequences)
        bits_rho = np.zeros(sequences)
        m_eta = np.full(len(etas), np.inf)
        m_track = np.inf
        m_low, m_high, m_step = np.inf, np.inf, np.inf
        consts = np.array([Z / (2 * (1 - e)) for e in etas])
        track_const = Z / (2 * (1 - rho)) + U + 1
        for _ in range(T):
            conf = g(x, params, U)
            b = src(x, conf)
            gb = conf * b
            for k, e in enumerate(etas):
                pay[k] = e * pay[k] + gb
            pay_rho = rho * pay_rho + gb
            bits_rho = rho * bits_rho + b
            m_eta = np.minimum(m_eta, (pay + consts[:, None]).min(axis=1))
            m_track = min(m_track, float((pay_rho - bits_rho + track_const).min()))
            x_new, _ = dnp.step_batch(x, b, rho, U, dnp.CONSERVATIVE)
            m_low = min(m_low, float((x_new + 1).min()))
            m_high = min(m_high, float((U + 1 - x_new).min()))
            m_step = min(m_step, float((2 - np.abs(x_new - x)).min()))
            x = x_new
        for k, e in enumerate(etas):
            out.append(CellResult(fam, n, Z, e, "payoff-lower", float(m_eta[k]), PAYOFF_TOL, sequences, T,
                                  regime and e >= rho))
        out.append(CellResult(fam, n, Z, rho, "payoff-tracking", m_track, PAYOFF_TOL, sequences, T, regime))
        out.append(CellResult(fam, n, Z, rho, "deviation-range", min(m_low, m_high), PAYOFF_TOL, sequences, T, True))
        out.append(CellResult(fam, n, Z, rho, "deviation-step", m_step, PAYOFF_TOL, sequences, T, True))
    return out


def potential_corpus(
    params: ConfidenceParams,
    etas,
    families=BIT_FAMILIES,
    sequences: int = 20,
    T: int = 2000,
    seed: int = 0,
) -> list[CellResult]:
    """Potential-augmented payoff bounds of plain DNP.

    With ``Phi_t = int_0^{x_t} g`` and ``A_eta = sum eta^(T-t)/n (x_t g(x_t)/2 - Phi_t)``:
    ``sum eta^(T-t) g b - A_eta + Z/(2(1-eta)) >= 0`` for every ``eta >= rho``, and
    ``sum rho^(T-t) g b - sum rho^(T-t) b - A_rho + Z/(2(1-rho)) + x_{T+1} >= 0``.
    """
    if not families:
        raise ValueError("empty corpus: no bit families given")
    etas = [float(e) for e in etas]
    rho, U, n, Z = params.rho, params.U, params.n, params.Z
    phi = PotentialTable(params)
    regime = params.proven_regime and Z <= 1 / math.e
    out: list[CellResult] = []
    for fam in families:
        src = BitSource(fam, sequences, _family_rng(seed + 7919, fam, n, Z), U)
        x = np.zeros(sequences)
        pay = np.zeros((len(etas), sequences))
        aug = np.zeros((len(etas), sequences))
        pay_rho = np.zeros(sequences)
        aug_rho = np.zeros(sequences)
        bits_rho = np.zeros(sequences)
        m_eta = np.full(len(etas), np.inf)
        m_track = np.inf
        consts = np.array([Z / (2 * (1 - e)) for e in etas])
        for _ in range(T):
            conf = g(x, params, U)
            b = src(x, conf)
            gb = conf * b
            a = (x * conf / 2 - phi(x)) / n
            for k, e in enumerate(etas):
                pay[k] = e * pay[k] + gb
                aug[k] = e * aug[k] + a
            pay_rho = rho * pay_rho + gb
            aug_rho = rho * aug_rho + a
            bits_rho = rho * bits_rho + b
            x, _ = dnp.step_batch(x, b, rho, U, dnp.PLAIN)
            m_eta = np.minimum(m_eta, (pay - aug + consts[:, None]).min(axis=1))
            m_track = min(m_track, float((pay_rho - bits_rho - aug_rho + Z / (2 * (1 - rho)) + x).min()))
        for k, e in enumerate(etas):
            out.append(CellResult(fam, n, Z, e, "potential-lower", float(m_eta[k]), POTENTIAL_TOL, sequences, T,
                                  regime and e >= rho))
        out.append(CellResult(fam, n, Z, rho, "potential-tracking", m_track, POTENTIAL_TOL, sequences, T, regime))
    return out


def potential_gap_grid(params: ConfidenceParams, points: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    """``x g(x)/2 - Phi(x)`` on an even grid over ``[-1, U+1]``."""
    xs = np.linspace(-1.0, params.U + 1.0, points)
    phi = PotentialTable(params)
    return xs, xs * g(xs, params) / 2 - phi(xs)


def geometric_margin(params: ConfidenceParams) -> float:
    """``c - U g(c)`` at ``c = U - 8``."""
    U = params.U
    c = U - 8.0
    return c - U * float(g(c, params))
