import numpy as np
import pytest

from discounted_oco import combiner as comb
from discounted_oco.core import KINDS, Domain, ProblemBounds, make_loss_sequence
from discounted_oco.ogd import run_ogd
from discounted_oco.regret import bound_value, discount_weights
from discounted_oco.special import ConfidenceParams, g

B = ProblemBounds(1.0, 1.0)


def with_omega(omega):
    s = comb.CombinerState.fresh(0.99, 1 / 1024, B)
    return comb.CombinerState(s.predictor, omega, B)


def test_combine_examples():
    w1, w2 = np.array([0.1, 0.2]), np.array([-0.3, 0.4])
    assert np.array_equal(comb.combine(with_omega(0.0), w1, w2), w1)
    assert np.array_equal(comb.combine(with_omega(1.0), w1, w2), w2)
    for om in (0.0, 0.37, 1.0):
        np.testing.assert_allclose(comb.combine(with_omega(om), w1, w1), w1, atol=1e-16)
    with pytest.raises(ValueError):
        comb.combine(with_omega(0.5), w1, np.zeros(3))


def test_fresh_combiner_follows_first_stream():
    s = comb.CombinerState.fresh(1 - 1 / 256, 1 / 1024, B)
    assert s.omega == 0.0
    assert s.omega == comb.dnp.predict(s.predictor)


def test_feed_losses_bits():
    s = comb.CombinerState.fresh(1 - 1 / 256, 1 / 1024, B)
    s1 = comb.feed_losses(s, 0.4, 0.4)
    assert s1.last_bit == 0.0 and s1.predictor.x == 0.0
    s2 = comb.feed_losses(s, B.GD, 0.0)
    assert s2.last_bit == 1.0
    with pytest.raises(ValueError):
        comb.feed_losses(s, 1.5, 0.0)
    with pytest.raises(ValueError):
        comb.feed_losses(s, -0.1, 0.0)


def test_weight_moves_to_better_stream():
    s = comb.CombinerState.fresh(1 - 1 / 256, 1 / 1024, B)
    omegas = []
    for _ in range(500):
        s = comb.feed_losses(s, 0.8, 0.1)
        assert s.omega == comb.dnp.predict(s.predictor)
        omegas.append(s.omega)
    omegas = np.array(omegas)
    first = int(np.argmax(omegas == 1.0))
    assert first > 0
    assert np.all(np.diff(omegas[: first + 1]) > 0)
    # afterwards the deviation hovers in [rho U, U + 1]
    assert omegas[first:].min() >= g(s.predictor.rho * s.predictor.U, s.predictor.params)


def _expert_pair(kind, seed, T, lam1, lam2):
    dom = Domain.ball(np.zeros(2), 0.5)
    L = make_loss_sequence(kind, T, dom, B, seed)
    # an adversarial sequence is fixed by the first expert; everyone after sees a replay
    e1 = run_ogd(lam1, L)
    e2 = run_ogd(lam2, L)
    return L, e1, e2


def test_two_expert_guarantee_mixed_discounts():
    lam1, lam2, Z = 1 - 1 / 1024, 1 - 1 / 256, 1 / 1024
    U = ConfidenceParams.from_rho(lam2, Z).U
    T = 1200
    w1 = discount_weights(lam1, T)
    w2 = discount_weights(lam2, T)
    for seed in range(102):
        kind = KINDS[seed % 3]
        L, e1, e2 = _expert_pair(kind, seed, T, lam1, lam2)
        out, omegas, bits = comb.run_combiner(lam2, Z, L, e1, e2)
        assert all(L.domain.contains(w) for w in out)
        f_out = L.values_along(out)
        f1, f2 = L.values_along(e1), L.values_along(e2)
        vs1 = w1 @ (f_out - f1)
        vs2 = w2 @ (f_out - f2)
        # convexity surrogate
        assert vs1 <= -B.GD * (w1 @ (omegas * bits)) + 1e-9
        assert vs1 <= bound_value("combiner-vs-e1", G=1, D=1, lam=lam1, Z=Z) + 1e-9
        assert vs2 <= bound_value("combiner-vs-e2", G=1, D=1, lam=lam2, Z=Z, U=U) + 1e-9
