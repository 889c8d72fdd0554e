import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from savcd import dist

# Frozen from 30-digit mpmath evaluations.
E_OVER_1_PLUS_E = 0.731058578630004879
SIGMOID_M1 = 0.268941421369995121
SIGMOID_M2 = 0.119202922022117556

finite_logits = arrays(
    np.float64,
    st.integers(2, 64),
    elements=st.floats(-50, 50, allow_nan=False, allow_infinity=False),
)


def test_softmax_examples():
    np.testing.assert_array_equal(dist.softmax([0.0, 0.0]), [0.5, 0.5])
    np.testing.assert_array_equal(dist.softmax([0.0, -np.inf]), [1.0, 0.0])
    np.testing.assert_allclose(dist.softmax([1.0, 0.0]), [E_OVER_1_PLUS_E, 1 - E_OVER_1_PLUS_E], atol=1e-5)


@pytest.mark.parametrize("bad", [[-np.inf, -np.inf], [np.nan, 0.0], [np.inf, 0.0], []])
def test_softmax_rejects(bad):
    with pytest.raises(ValueError):
        dist.softmax(bad)


def test_entropy_examples():
    assert dist.entropy_bits([1, 0, 0, 0]) == 0.0
    assert dist.entropy_bits([0.25] * 4) == pytest.approx(2.0, abs=1e-12)
    assert dist.entropy_bits([0.5, 0.25, 0.25]) == pytest.approx(1.5, abs=1e-12)


def test_entropy_rejects_unnormalized():
    with pytest.raises(ValueError):
        dist.entropy_bits([0.5, 0.6])


def test_h_decay_examples():
    assert dist.h_decay([1, 0, 0, 0], -0.5) == 0.5
    assert dist.h_decay([0.25] * 4, -0.5) == pytest.approx(SIGMOID_M1, abs=1e-5)
    assert dist.h_decay([1 / 16] * 16, -0.5) == pytest.approx(SIGMOID_M2, abs=1e-5)


@pytest.mark.parametrize("gamma", [0.0, 0.5])
def test_h_decay_rejects_nonnegative_gamma(gamma):
    with pytest.raises(ValueError):
        dist.h_decay([0.5, 0.5], gamma)


def test_h_ns_examples():
    assert dist.h_ns([0.25] * 4, -0.5) == 1.0
    assert dist.h_ns([0.25] * 4, 2.0) == 1.0
    assert dist.h_ns([1, 0, 0, 0], -0.5) == 1.0
    assert dist.h_ns([0.5, 0.5, 0, 0], -0.5) == 1.0
    # Positive gamma: (1/2) ** 2
    assert dist.h_ns([0.5, 0.5, 0, 0], 0.5) == pytest.approx(0.25)
    assert dist.h_ns([1, 0, 0, 0], 0.5) == dist.HNS_FLOOR
    with pytest.raises(ValueError):
        dist.h_ns([0.5, 0.5], 0.0)


def test_argmax_examples():
    assert dist.argmax([1, 3, 2]) == 1
    assert dist.argmax([2, 2]) == 0
    assert dist.argmax([-np.inf, 0]) == 1
    with pytest.raises(ValueError):
        dist.argmax([-np.inf, -np.inf])


@given(finite_logits, st.floats(-100, 100))
def test_softmax_normalized_and_shift_invariant(l, c):
    p = dist.softmax(l)
    assert abs(p.sum() - 1) <= 1e-9
    np.testing.assert_allclose(dist.softmax(l + c), p, atol=1e-9)
    assert abs(dist.entropy_bits(dist.softmax(l + c)) - dist.entropy_bits(p)) <= 1e-9


@given(finite_logits)
def test_argmax_matches_softmax_argmax(l):
    # Logits closer than float resolution tie after exp, so compare attained maxima.
    p = dist.softmax(l)
    assert p[dist.argmax(l)] == p.max()
    gaps = np.sort(l)[-1] - np.sort(l)[-2]
    if gaps > 1e-6:
        assert dist.argmax(l) == int(np.argmax(p))


@given(finite_logits, st.data())
def test_masked_entries_are_zero(l, data):
    idx = data.draw(st.integers(0, l.size - 1))
    keep = int(np.argmax(l))
    if idx != keep:
        l = l.copy()
        l[idx] = -np.inf
        assert dist.softmax(l)[idx] == 0.0


def test_h_decay_range_random(rng):
    for _ in range(10_000):
        v = int(rng.integers(2, 65537))
        k = int(rng.integers(1, min(v, 64) + 1))
        p = np.zeros(v)
        p[rng.choice(v, k, replace=False)] = rng.dirichlet(np.full(k, 0.5))
        b = dist.h_decay(p, -0.5)
        assert 0.0 < b <= 0.5


@settings(max_examples=300)
@given(finite_logits, finite_logits, st.floats(-5, -0.01))
def test_h_decay_monotone(a, b, gamma):
    pa, pb = dist.softmax(a), dist.softmax(b)
    ha, hb = dist.entropy_bits(pa), dist.entropy_bits(pb)
    if hb - ha > 1e-6:
        assert dist.h_decay(pa, gamma) > dist.h_decay(pb, gamma)


def test_sigmoid_tails():
    assert dist.sigmoid(-800) == 0.0
    assert dist.sigmoid(800) == 1.0
    assert dist.sigmoid(-1) == pytest.approx(1 / (1 + math.e))
