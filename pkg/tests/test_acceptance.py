"""Acceptance criteria 1-6, one test each, at the contract tolerances.

Each test appends a one-line verdict that the terminal summary prints under
"acceptance criteria".
"""

import math
import time

import numpy as np
import pytest

import conftest
from discounted_oco import dnp
from discounted_oco.cli import SUBCOMMANDS, main, sampled_lambdas
from discounted_oco.core import KINDS, Domain, ProblemBounds, make_loss_sequence
from discounted_oco.ogd import run_ogd
from discounted_oco.regret import regret_report, smoothed_average, smoothed_average_decompose
from discounted_oco.sogd import build_grid, regime_ok, run_sogd
from discounted_oco.special import ConfidenceParams, erf_halfgauss, g, g_tilde, u_upper_bound
from discounted_oco.verification import (
    BIT_FAMILIES,
    BitSource,
    geometric_margin,
    payoff_corpus,
    potential_gap_grid,
)

from oracles import simpson_halfgauss

pytestmark = pytest.mark.slow

BOUNDS = ProblemBounds(1.0, 1.0)
CELLS = [(256, 1 / 1024), (1024, 1 / 8192)]


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_ogd_discounted_regret():
    start = time.perf_counter()
    runs = failures = 0
    worst = -math.inf
    for kind in KINDS:
        for d in (1, 5):
            dom = Domain.ball(np.zeros(d), 0.5)
            for lam in (0.9, 0.99, 0.999):
                for seed in range(50):
                    L = make_loss_sequence(kind, 2000, dom, BOUNDS, seed)
                    r = regret_report(run_ogd(lam, L), L, lam, "thm1")
                    runs += 1
                    failures += not r.passed
                    worst = max(worst, r.regret / r.bound)
    cells = len(KINDS) * 2 * 3
    per_cell = (time.perf_counter() - start) / cells
    record(1, "OGD discounted regret <= sqrt(2) GD / sqrt(1-lam)", failures == 0,
           f"{runs - failures}/{runs} runs, worst regret/bound {worst:.3f}, {per_cell:.2f}s per cell")


def test_criterion_2_payoff_bounds():
    results = []
    for n, Z in CELLS:
        p = ConfidenceParams(n, Z)
        rho = p.rho
        # 250 per family over the four named families is 10^3; two extra adversaries ride along
        results += payoff_corpus(p, [rho, (1 + rho) / 2, 0.999], BIT_FAMILIES, sequences=250, T=10_000, seed=0)
    payoff = [r for r in results if r.check in ("payoff-lower", "payoff-tracking")]
    bad = [r for r in payoff if r.min_margin < -1e-9]
    lower = min(r.min_margin for r in payoff if r.check == "payoff-lower")
    track = min(r.min_margin for r in payoff if r.check == "payoff-tracking")
    outside = sum(not r.in_hypothesis for r in payoff)
    record(2, "DNP-cu discounted payoff lower bounds", not bad,
           f"{len(payoff) - len(bad)}/{len(payoff)} cells, min margins {lower:.3g} / {track:.3g}, "
           f"{outside} cells with eta < rho included")


def test_criterion_3_sogd_uniform_regret():
    T, tau, Z = 8192, 512, 1 / 8192
    grid = build_grid(T, tau)
    assert grid.N == 4 and regime_ok(tau, Z)
    assert 16 * math.e <= 32 * math.log(T) <= tau
    start = time.perf_counter()
    checks = failures = 0
    worst = -math.inf
    dom = Domain.ball(np.zeros(2), 0.5)
    for kind in KINDS:
        for seed in range(20):
            L = make_loss_sequence(kind, T, dom, BOUNDS, seed)
            run = run_sogd(T, tau, Z, L)
            lams = list(grid.lambdas) + [float(x) for x in sampled_lambdas(T, tau, 20, seed)]
            assert all(1 - 1 / tau <= lam <= 1 - 1 / T for lam in lams)
            for lam in lams:
                r = regret_report(run.decisions, L, lam, "thm3-uniform", Z=Z, N=grid.N)
                checks += 1
                failures += not r.passed
                worst = max(worst, r.regret / r.bound)
    elapsed = time.perf_counter() - start
    record(3, "SOGD uniform discounted regret, T=8192 tau=512", failures == 0,
           f"{checks - failures}/{checks} checks over {len(KINDS)} kinds x 20 seeds, "
           f"worst regret/bound {worst:.4f}, {elapsed:.0f}s")


def _adversarial_rounds(p, family, sequences, T, seed):
    """Vectorized DNP-cu run; returns the min margins of the range and step bounds."""
    src = BitSource(family, sequences, np.random.default_rng([seed, BIT_FAMILIES.index(family)]), p.U)
    x = np.zeros(sequences)
    lo = hi = step = math.inf
    for _ in range(T):
        conf = g(x, p, p.U)
        x_new, _ = dnp.step_batch(x, src(x, conf), p.rho, p.U, dnp.CONSERVATIVE)
        lo = min(lo, float((x_new + 1).min()))
        hi = min(hi, float((p.U + 1 - x_new).min()))
        step = min(step, float((2 - np.abs(x_new - x)).min()))
        x = x_new
    return lo, hi, step


def _adaptive_bits(p, family, T, seed):
    src = BitSource(family, 1, np.random.default_rng([seed, 99, BIT_FAMILIES.index(family)]), p.U)
    return dnp.run_adaptive(p, dnp.CONSERVATIVE, T,
                            lambda t, x, c: float(src(np.array([x]), np.array([c]))[0]))


def test_criterion_4_invariant_suite():
    parts = {}
    # (a) deviation range and step on 10^5 adversarial rounds per (cell, family)
    adversaries = ("anti-predictor", "teaser", "sawtooth")
    margins = [_adversarial_rounds(ConfidenceParams(n, Z), fam, 10, 10_000, 1)
               for n, Z in CELLS for fam in adversaries]
    parts["a"] = min(min(m) for m in margins) >= 0
    # (b) potential below the half-line on 10^4-point grids
    halfline_cells = [(64, 1 / 1024), (256, 1 / 4096), (1024, 1 / 8192)]
    gaps = [float(potential_gap_grid(ConfidenceParams(n, Z), 10_000)[1].min()) for n, Z in halfline_cells]
    parts["b"] = min(gaps) >= -1e-8
    # (c, d) replaying the transformed sequence is bit-identical, and ignored bits only help
    identical = helps = True
    for n, Z in CELLS:
        p = ConfidenceParams(n, Z)
        for fam in BIT_FAMILIES:
            for seed in range(2):
                run, bits = _adaptive_bits(p, fam, 5000, seed)
                tilde = run.transformed_bits(bits)
                replay = dnp.run_sequence(p, dnp.PLAIN, tilde)
                identical &= np.array_equal(replay.deviations, run.deviations)
                identical &= np.array_equal(replay.predictions, run.predictions)
                diff = bits - tilde
                m = diff != 0
                helps &= bool(np.all(run.predictions[m] * diff[m] >= 0))
                helps &= bool(np.all(run.predictions[m] * diff[m] >= diff[m]))
    parts["c"], parts["d"] = identical, helps
    # (e) smoothed-average decomposition on 10^3 random triples
    rng = np.random.default_rng(2024)
    worst_e = 0.0
    for _ in range(1000):
        T = int(rng.integers(1, 500))
        lam2 = float(rng.uniform(0.01, 0.999))
        lam1 = float(rng.uniform(lam2, 1.0))
        s = rng.uniform(-1, 1, T)
        dec = smoothed_average_decompose(s, lam1, lam2)
        worst_e = max(worst_e, abs(dec.reconstructed - smoothed_average(s, lam1)))
        assert abs(dec.coefficients.sum() + dec.truncation_mass - 1) <= 1e-12
    parts["e"] = worst_e <= 1e-10
    # (f) geometric check on cells with Z = 1/T, 32 <= n <= T
    qualifying = [(n, T) for T in (32, 64, 512, 1024, 8192) for n in (32, 64, 256, 512, 1024) if n <= T]
    geo = min(geometric_margin(ConfidenceParams(n, 1 / T)) for n, T in qualifying)
    parts["f"] = geo >= 1
    failed = [k for k, ok in parts.items() if not ok]
    record(4, "invariant suite (a)-(f)", not failed,
           f"failed parts: {','.join(failed) or 'none'}; potential gap {min(gaps):.2e}, "
           f"decomposition error {worst_e:.1e}, geometric margin {geo:.2f}")


def test_criterion_5_special_functions():
    xs = np.linspace(-10, 10, 2001)
    erf_err = float(np.max(np.abs(erf_halfgauss(xs) - np.array([simpson_halfgauss(x) for x in xs]))))
    cells = [(n, Z) for n in (32, 64, 256, 1024, 8192) for Z in (1 / 1024, 1 / 8192)] + [(100, 1 / math.e)]
    worst_fix = max(abs(g_tilde(ConfidenceParams(n, Z).U, ConfidenceParams(n, Z)) - 1) for n, Z in cells)
    upper_ok = all(ConfidenceParams(n, Z).U <= u_upper_bound(ConfidenceParams(n, Z)) for n, Z in cells)
    lower_cells = [(n, T) for T in (32, 64, 256, 1024, 8192) for n in (32, 64, 128, 256, 1024, 8192) if n <= T]
    lower_ok = all(ConfidenceParams(n, 1 / T).U >= 4 * math.sqrt(n) for n, T in lower_cells)
    ok = erf_err <= 1e-10 and worst_fix <= 1e-9 and upper_ok and lower_ok
    record(5, "special-function accuracy", ok,
           f"erf error {erf_err:.1e}, |g(U)-1| {worst_fix:.1e}, upper bound {upper_ok}, U >= 4 sqrt(n) {lower_ok}")


def test_criterion_6_cli_determinism(tmp_path):
    identical = []
    for sub in SUBCOMMANDS:
        texts = []
        for k in range(2):
            out = tmp_path / f"{sub}.{k}.csv"
            assert main([sub, "--out", str(out)]) == 0
            texts.append(out.read_bytes())
        identical.append(texts[0] == texts[1])
    record(6, "CLI byte determinism", all(identical),
           f"{sum(identical)}/{len(identical)} subcommands byte-identical on default configs")
