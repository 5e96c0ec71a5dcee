import math

import numpy as np
import pytest

from discounted_oco.core import KINDS, Domain, LossSequence, ProblemBounds, make_loss_sequence
from discounted_oco.ogd import OgdState, ogd_step, run_ogd, step_size_for
from discounted_oco.regret import regret_report


def test_step_size_examples():
    with pytest.raises(ValueError):
        step_size_for(1 - 2 / 2, ProblemBounds(1, 1))
    with pytest.raises(ValueError):
        step_size_for(1.0, ProblemBounds(1, 1))
    assert step_size_for(0.5, ProblemBounds(4, 2)) == 0.5


@pytest.mark.parametrize("T", [64, 1000, 8192])
def test_step_sizes_on_grid(T):
    b = ProblemBounds(3.0, 0.7)
    for i in range(1, 6):
        lam = 1 - 2 ** (i - 1) / T
        assert step_size_for(lam, b) == pytest.approx(b.D / b.G * math.sqrt(2 ** i / T), rel=1e-12)


def one_d():
    dom = Domain.ball([0.0], 1.0)
    return dom, ProblemBounds(1.0, 2.0)


def test_ogd_step_examples():
    dom, b = one_d()
    s = OgdState(np.array([0.5]), 0.1, dom, b)
    assert ogd_step(s, [0.0]).w.tolist() == [0.5]
    with pytest.raises(ValueError):
        ogd_step(s, [10.0])
    s = OgdState(np.array([0.9]), 0.5, dom, b)
    assert ogd_step(s, [-1.0]).w.tolist() == [1.0]


def test_zero_gradients_keep_initial_point():
    dom, b = one_d()
    L = LossSequence("drifting-linear", 50, dom, b, 0, grads=np.zeros((50, 1)))
    dec = run_ogd(0.9, L, w_init=[0.3])
    assert np.all(dec == 0.3)


def test_replay_deterministic():
    dom, b = one_d()
    a = run_ogd(0.99, make_loss_sequence("adversarial-worst-case", 500, dom, b, 2))
    c = run_ogd(0.99, make_loss_sequence("adversarial-worst-case", 500, dom, b, 2))
    assert np.array_equal(a, c)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("lam", [0.9, 0.99, 0.999])
def test_discounted_regret_bound(kind, lam):
    dom = Domain.ball(np.zeros(2), 0.5)
    b = ProblemBounds(1.0, 1.0)
    L = make_loss_sequence(kind, 2000, dom, b, 17)
    dec = run_ogd(lam, L)
    assert all(dom.contains(w) for w in dec)
    r = regret_report(dec, L, lam, "thm1")
    assert r.bound == pytest.approx(math.sqrt(2) / math.sqrt(1 - lam))
    assert r.passed, r


@pytest.mark.parametrize("T", [500, 2000, 8000])
def test_bound_constant_independent_of_horizon(T):
    dom = Domain.ball([0.0], 0.5)
    b = ProblemBounds(1.0, 1.0)
    for kind in KINDS:
        L = make_loss_sequence(kind, T, dom, b, 1)
        dec = run_ogd(0.99, L)
        assert regret_report(dec, L, 0.99, "thm1").passed


def test_initial_point_must_be_feasible():
    dom, b = one_d()
    with pytest.raises(ValueError):
        OgdState.for_discount(0.9, dom, b, w_init=[2.0])
