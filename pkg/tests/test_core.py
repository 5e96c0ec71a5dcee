import numpy as np
import pytest
from hypothesis import given, strategies as st

from discounted_oco.core import (
    KINDS,
    Domain,
    ProblemBounds,
    default_segment_boundaries,
    format_keyvalue,
    loss_sequence_from_descriptor,
    make_loss_sequence,
    parse_keyvalue,
    project,
)
from discounted_oco.ogd import run_ogd


def ball(center, r):
    return Domain.ball(np.asarray(center, dtype=float), r)


@pytest.mark.parametrize(
    "center, r, point, expected",
    [
        ([0, 0], 1, [0.5, 0], [0.5, 0]),
        ([0, 0], 1, [3, 4], [0.6, 0.8]),
        ([1, 1], 2, [1, 1], [1, 1]),
    ],
)
def test_project_examples(center, r, point, expected):
    np.testing.assert_allclose(project(ball(center, r), point), expected, atol=1e-15)


def test_project_dimension_mismatch():
    with pytest.raises(ValueError):
        project(ball([0, 0], 1), [1, 2, 3])


def test_domain_validation():
    with pytest.raises(ValueError):
        ball([0], 0.0)
    assert ball([0, 0, 0], 1.5).diameter == 3.0


def test_projection_nonexpansive_random_pairs():
    rng = np.random.default_rng(0)
    dom = ball(rng.normal(size=3), 0.7)
    X = rng.normal(scale=2.0, size=(10_000, 3))
    Y = rng.normal(scale=2.0, size=(10_000, 3))
    for x, y in zip(X, Y):
        px, py = project(dom, x), project(dom, y)
        assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12
        assert dom.contains(px) and dom.contains(py)


vec = st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3)


@given(vec, st.floats(0.01, 10.0))
def test_projection_idempotent_and_inside(p, r):
    dom = ball([0.3, -0.2, 1.0], r)
    q = project(dom, p)
    assert dom.contains(q, atol=1e-9 * max(1.0, r))
    np.testing.assert_allclose(project(dom, q), q, atol=1e-12 * max(1.0, np.abs(q).max()))


def test_piecewise_jump_at_51():
    L = make_loss_sequence("piecewise-stationary-absolute", 100, ball([0, 0], 1), ProblemBounds(1, 2), 7)
    jumps = [t + 1 for t in range(1, 100) if not np.array_equal(L.thetas[t], L.thetas[t - 1])]
    assert jumps == [51]
    assert default_segment_boundaries(100) == (51,)


def test_drifting_values_in_range():
    dom = ball([0, 0, 0], 0.5)
    b = ProblemBounds(2.0, 1.0)
    L = make_loss_sequence("drifting-linear", 300, dom, b, 1)
    rng = np.random.default_rng(1)
    for _ in range(50):
        w = project(dom, rng.normal(size=3))
        v = L.values_at(w)
        assert v.min() >= -1e-12 and v.max() <= b.GD + 1e-12


@pytest.mark.parametrize("kind", KINDS)
def test_same_seed_identical(kind):
    dom = ball([0, 0], 1)
    b = ProblemBounds(1, 2)
    A = make_loss_sequence(kind, 200, dom, b, 11)
    B = make_loss_sequence(kind, 200, dom, b, 11)
    run_ogd(0.9, A)
    run_ogd(0.9, B)
    rng = np.random.default_rng(3)
    for _ in range(20):
        w = project(dom, rng.normal(size=2))
        assert np.array_equal(A.values_at(w), B.values_at(w))


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("d", [1, 4])
def test_sampled_loss_audit(kind, d):
    """Range, gradient norm and convexity on random query points."""
    dom = ball(np.linspace(-0.2, 0.3, d), 0.8)
    b = ProblemBounds(1.5, dom.diameter)
    L = make_loss_sequence(kind, 400, dom, b, 5)
    run_ogd(0.95, L)  # fixes the adaptive gradients
    rng = np.random.default_rng(9)

    def sample():
        u = rng.normal(size=d)
        return dom.center + dom.radius * rng.uniform() ** (1 / d) * u / np.linalg.norm(u)

    for t in range(1, 401, 13):
        pts = [sample() for _ in range(100)]
        for w in pts:
            v, gr = L.oracle(t, w)
            assert -1e-12 <= v <= b.GD + 1e-12
            assert np.linalg.norm(gr) <= b.G * (1 + 1e-12)
        for _ in range(20):
            x, y = sample(), sample()
            a = rng.uniform()
            assert L.value(t, a * x + (1 - a) * y) <= a * L.value(t, x) + (1 - a) * L.value(t, y) + 1e-10


def test_absolute_kink_subgradient_is_zero():
    L = make_loss_sequence("piecewise-stationary-absolute", 10, ball([0], 1), ProblemBounds(1, 2), 0)
    theta = L.thetas[0]
    assert np.array_equal(L.gradient(1, theta), np.zeros(1))


def test_generator_errors():
    dom, b = ball([0], 1), ProblemBounds(1, 2)
    with pytest.raises(ValueError):
        make_loss_sequence("sinusoid", 10, dom, b, 0)
    with pytest.raises(ValueError):
        make_loss_sequence("drifting-linear", 0, dom, b, 0)


def test_adversarial_requires_observation_in_order():
    L = make_loss_sequence("adversarial-worst-case", 5, ball([0], 1), ProblemBounds(1, 2), 0)
    with pytest.raises(RuntimeError):
        L.value(1, [0.0])
    L.observe(1, [0.0])
    with pytest.raises(ValueError):
        L.observe(3, [0.0])
    L.observe(2, [0.5])
    # learner moved up, so the loss now increases upward
    assert L.gradient(2, [0.0])[0] == pytest.approx(1.0)


def test_descriptor_roundtrip():
    L = make_loss_sequence("piecewise-stationary-absolute", 120, ball([0, 0], 0.5), ProblemBounds(1.0, 1.0), 4)
    text = format_keyvalue(L.descriptor())
    back = loss_sequence_from_descriptor(parse_keyvalue(text))
    assert np.array_equal(back.thetas, L.thetas)
    assert back.segment_boundaries == L.segment_boundaries


def test_parse_keyvalue_errors_carry_line():
    with pytest.raises(ValueError, match="cfg:2"):
        parse_keyvalue("T=3\nnot a pair\n", "cfg")
    assert parse_keyvalue("# c\n a = 1 # trailing\n\n") == {"a": "1"}
