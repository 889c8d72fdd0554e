import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import brute_force_filter, sat_threshold_ref, softmax_ref
from savcd import dist
from savcd.backend import BackendError, SyntheticBackend, SyntheticScript, VocabMismatchError
from savcd.engine import (
    DecodingParams,
    Sampling,
    StopReason,
    ThresholdMode,
    apc_candidates,
    contrast,
    decode,
    greedy_decode,
    mask_to_candidates,
    sample,
    sat_candidates,
    top_k,
)

P = [0.7, 0.2, 0.06, 0.04]
vectors = arrays(np.float64, st.integers(2, 64), elements=st.floats(-30, 30, allow_nan=False))


def test_defaults():
    p = DecodingParams()
    assert (p.alpha, p.beta, p.gamma) == (1.0, 0.1, -0.5)
    assert p.threshold_mode is ThresholdMode.SAT


@pytest.mark.parametrize("kw", [{"alpha": -1}, {"beta": 1.5}, {"gamma": 0.1}, {"max_tokens": 0}, {"seed": -1},
                                {"threshold_mode": "bogus"}])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        DecodingParams(**kw)


def test_apc_examples():
    cs = apc_candidates(P, 0.1)
    assert cs.members == {0, 1} and cs.threshold_used == 0.1
    assert apc_candidates(P, 0.0).members == {0, 1, 2, 3}
    assert apc_candidates(P, 1.0).members == {0}


def test_sat_examples():
    cs = sat_candidates([50.0, 0, 0, 0], -0.5)
    assert cs.threshold_used == pytest.approx(0.5) and cs.members == {0}
    cs = sat_candidates([0.0] * 4, -0.5)
    assert cs.threshold_used == pytest.approx(0.268941421369995, abs=1e-5)
    assert cs.members == {0, 1, 2, 3}
    cs = sat_candidates(np.log([0.97, 0.01, 0.01, 0.01]), -0.5)
    assert cs.threshold_used == pytest.approx(0.469794234913887, abs=1e-5)
    assert cs.members == {0}


def test_candidate_sets_match_brute_force(rng):
    for _ in range(1000):
        v = int(rng.integers(1, 65))
        l = rng.normal(0, rng.uniform(0.1, 5), v)
        beta = float(rng.choice([0.0, 1.0, rng.uniform()]))
        gamma = -float(rng.uniform(0.01, 3))
        p_ref = softmax_ref(list(l))
        assert apc_candidates(dist.softmax(l), beta).members == brute_force_filter(p_ref, beta)
        assert sat_candidates(l, gamma).members == brute_force_filter(p_ref, sat_threshold_ref(list(l), gamma))


@given(vectors, st.floats(-0.99, -0.01) | st.floats(-10, -1))
def test_expert_argmax_always_survives(l, gamma):
    cs = sat_candidates(l, gamma)
    assert dist.argmax(l) in cs
    assert cs.threshold_used <= 0.5


def test_contrast_examples():
    np.testing.assert_array_equal(contrast([2, 1, 0], [1, 2, 0], 1.0), [3, 0, 0])
    np.testing.assert_array_equal(contrast([1, 0], [0, 1], 0.0), [1, 0])
    with pytest.raises(VocabMismatchError):
        contrast([1, 2], [1, 2, 3], 1.0)
    with pytest.raises(ValueError):
        contrast([1, -np.inf], [1, 2], 1.0)


@given(vectors, st.floats(0, 100))
def test_contrast_identity(l, alpha):
    np.testing.assert_array_equal(contrast(l, l, alpha), l)


@given(vectors, st.floats(-30, 30), st.floats(0, 100))
def test_constant_amateur_keeps_argmax(l, c, alpha):
    out = contrast(l, np.full_like(l, c), alpha)
    # Rounding is monotone, so the expert's top token still attains the max;
    # near-ties below float resolution may merge and then resolve to the lower index.
    assert out[dist.argmax(l)] == out.max()
    top2 = np.sort(l)[-2:]
    if top2[1] - top2[0] > 1e-9 * (1 + abs(c) + np.abs(l).max()) * (1 + alpha):
        assert dist.argmax(out) == dist.argmax(l)


def test_mask_examples():
    from savcd.engine import CandidateSet

    np.testing.assert_array_equal(mask_to_candidates([3, 0, -1], CandidateSet(frozenset({0, 1}), 0.1)), [3, 0, -np.inf])
    np.testing.assert_array_equal(mask_to_candidates([3, 0, -1], CandidateSet(frozenset({0, 1, 2}), 0.0)), [3, 0, -1])
    masked = mask_to_candidates([1, 5, 2], CandidateSet(frozenset({1}), 0.5))
    np.testing.assert_array_equal(masked, [-np.inf, 5, -np.inf])
    np.testing.assert_array_equal(dist.softmax(masked), [0, 1, 0])


def test_sample_examples():
    rng = np.random.Generator(np.random.PCG64(0))
    for mode in Sampling:
        assert sample([0.0, -np.inf], mode, rng) == 0
    assert sample([1, 3, 2], Sampling.GREEDY, rng) == 1
    with pytest.raises(ValueError):
        sample([-np.inf, -np.inf], Sampling.MULTINOMIAL, rng)


def test_sample_consumes_one_draw_per_call():
    a = np.random.Generator(np.random.PCG64(99))
    b = np.random.Generator(np.random.PCG64(99))
    for _ in range(10):
        sample([0.0, 1.0, 2.0], Sampling.MULTINOMIAL, a)
    b.random(10)
    assert a.random() == b.random()


def test_multinomial_frequencies():
    rng = np.random.Generator(np.random.PCG64(7))
    draws = np.array([sample([0.0, 0.0], Sampling.MULTINOMIAL, rng) for _ in range(100_000)])
    assert 0.494 <= (draws == 0).mean() <= 0.506
    counts = np.bincount(
        [sample([0.0, -np.inf, 1.0, -np.inf], Sampling.MULTINOMIAL, rng) for _ in range(20_000)], minlength=4
    )
    assert counts[1] == counts[3] == 0
    # p = [1, e] / (1 + e)
    assert counts[0] / counts.sum() == pytest.approx(1 - 0.731058578630005, abs=0.015)


def test_top_k_orders_by_value_then_index():
    assert top_k(np.array([1.0, 3.0, 3.0, -np.inf, 0.5]), 3) == [[1, 3.0], [2, 3.0], [0, 1.0]]
    assert top_k(np.array([0.0, -np.inf]), 5) == [[0, 0.0]]


# -- decode loop -------------------------------------------------------------------

CLEAN = np.zeros((4, 4, 3), np.uint8)
AUG = np.full((4, 4, 3), 255, np.uint8)


def backend_for(expert_rows, amateur_rows=None, **kw):
    return SyntheticBackend(SyntheticScript.from_rows(expert_rows, amateur_rows, clean_image=CLEAN, **kw))


def test_identical_views_reduce_to_greedy(rng):
    rows = [list(rng.normal(0, 2, 6)) for _ in range(8)]
    b = backend_for(rows)
    expected = greedy_decode(b, CLEAN, [0], 8)
    for alpha in (0.0, 1.0, 3.5):
        params = DecodingParams(alpha=alpha, sampling="greedy", threshold_mode="sat", max_tokens=8)
        assert decode(b, CLEAN, AUG, [0], params).tokens == expected


def test_hallucination_penalty_pattern():
    # token 0 = A, token 1 = B, token 2 = end
    b = backend_for([[2.0, 1.9, -5.0]], [[3.0, 0.0, -5.0]], end_token=2)
    r = decode(b, CLEAN, AUG, [0], DecodingParams(alpha=1.0, sampling="greedy", threshold_mode="none", max_tokens=1))
    np.testing.assert_allclose(r.traces[0].contrasted_logits[:2], [1.0, 3.8])
    assert r.tokens == [1]


def test_sat_never_exceeds_untruncated(rng):
    rows = [list(rng.normal(0, 3, 10)) for _ in range(12)]
    arows = [list(np.array(r) + rng.normal(0, 1, 10)) for r in rows]
    runs = {}
    for mode in ("none", "sat"):
        params = DecodingParams(threshold_mode=mode, sampling="multinomial", seed=3, max_tokens=12)
        runs[mode] = decode(backend_for(rows, arows), CLEAN, AUG, [0], params)
    assert all(s.candidate_count == 10 for s in runs["none"].traces)
    assert all(s.candidate_count <= 10 for s in runs["sat"].traces)


def test_chosen_token_in_candidates_and_deterministic(rng):
    rows = [list(rng.normal(0, 3, 12)) for _ in range(30)]
    arows = [list(rng.normal(0, 3, 12)) for _ in range(30)]
    for mode in ThresholdMode:
        params = DecodingParams(threshold_mode=mode, sampling="multinomial", seed=11, max_tokens=30, gamma=-0.7)
        r1 = decode(backend_for(rows, arows), CLEAN, AUG, [0], params)
        r2 = decode(backend_for(rows, arows), CLEAN, AUG, [0], params)
        assert r1.tokens == r2.tokens
        for s1, s2 in zip(r1.traces, r2.traces):
            assert s1.chosen_token in s1.candidates
            assert s1.beta_t == s2.beta_t and s1.candidates == s2.candidates
            np.testing.assert_array_equal(s1.contrasted_logits, s2.contrasted_logits)
            if mode is not ThresholdMode.NONE:
                assert 0 < s1.beta_t <= 1


def test_stops_on_end_token():
    b = backend_for([[5.0, 0.0, 0.0], [0.0, 0.0, 9.0], [9.0, 0.0, 0.0]], end_token=2)
    r = decode(b, CLEAN, AUG, [0], DecodingParams(sampling="greedy", max_tokens=10))
    assert r.tokens == [0, 2] and r.stop_reason is StopReason.END_TOKEN
    r = decode(b, CLEAN, AUG, [0], DecodingParams(sampling="greedy", max_tokens=1))
    assert r.stop_reason is StopReason.MAX_TOKENS and len(r.tokens) == len(r.traces) == 1


def test_apc_mode_records_constant_beta():
    b = backend_for([[1.0, 0.5, 0.0]] * 3, end_token=2)
    r = decode(b, CLEAN, AUG, [0], DecodingParams(threshold_mode="apc", beta=0.3, sampling="greedy", max_tokens=3))
    assert [s.beta_t for s in r.traces] == [0.3] * 3


def test_backend_failure_carries_step():
    script = SyntheticScript.from_rows([[1.0, 0.0, -1.0]], clean_image=CLEAN, end_token=2, strict=True)
    with pytest.raises(BackendError) as info:
        decode(SyntheticBackend(script), CLEAN, AUG, [0], DecodingParams(sampling="greedy", max_tokens=5))
    assert info.value.step == 1
    assert "step 1" in str(info.value)


def test_vocab_mismatch_aborts():
    class Liar(SyntheticBackend):
        def next_logits(self, session, tokens):
            return np.zeros(session.vocab_size + 1)

    b = Liar(SyntheticScript.from_rows([[0.0, 1.0]], clean_image=CLEAN))
    with pytest.raises(VocabMismatchError):
        decode(b, CLEAN, AUG, [0])


def test_image_shape_mismatch():
    with pytest.raises(ValueError):
        decode(backend_for([[0.0, 1.0]]), CLEAN, np.zeros((5, 4, 3), np.uint8), [0])
