import itertools
import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lapcfl.pvq import (
    GainShapeCode,
    QuantParams,
    cos_theta,
    dequantize,
    householder_normal,
    predicted_dequantize,
    predicted_quantize,
    pvq_normalize,
    pvq_search,
    quantize_unpredicted,
    reflect,
    round_half_away,
    scalar_quantize,
)


@lru_cache(maxsize=None)
def codebook(n, k):
    # Every integer vector with L1 norm k, by brute force.
    out = []
    for y in itertools.product(range(-k, k + 1), repeat=n):
        if sum(abs(v) for v in y) == k:
            out.append(np.array(y))
    return out


def oracle_search(x, k):
    best, best_score = None, -np.inf
    for y in codebook(x.size, k):
        score = (x @ y) / np.linalg.norm(y)
        if score > best_score + 1e-12:
            best, best_score = y, score
    return best, best_score


vectors = st.integers(0, 2**32 - 1)


def test_scalar_quantize_examples():
    assert scalar_quantize(0.0, 3.0) == (0, 0.0)
    assert scalar_quantize(10.0, 4.0) == (3, 12.0)
    assert scalar_quantize(-10.0, 4.0) == (-3, -12.0)
    assert round_half_away(2.5) == 3 and round_half_away(-2.5) == -3
    with pytest.raises(ValueError):
        scalar_quantize(1.0, 0.0)


@given(st.floats(-1e4, 1e4), st.floats(1e-3, 100))
def test_scalar_quantize_error_bound(c, q):
    _, recon = scalar_quantize(c, q)
    assert abs(c - recon) <= q / 2 + 1e-9 * max(1.0, abs(c))


def test_search_examples():
    np.testing.assert_array_equal(pvq_search([0.9, 0.1, 0.0], 1), [1, 0, 0])
    np.testing.assert_array_equal(pvq_search([-0.9, 0.1, 0.0], 1), [-1, 0, 0])
    with pytest.raises(ValueError):
        pvq_search([0.0, 0.0], 2)
    with pytest.raises(ValueError):
        pvq_search([1.0, 0.0], 0)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.integers(1, 4), vectors)
def test_search_matches_exhaustive_oracle(n, k, seed):
    x = np.random.default_rng(seed).normal(size=n)
    y = pvq_search(x, k)
    assert np.abs(y).sum() == k
    _, best = oracle_search(x, k)
    assert (x @ y) / np.linalg.norm(y) == pytest.approx(best, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 16), st.integers(21, 80), vectors)
def test_large_budget_search_is_near_optimal(n, k, seed):
    x = np.random.default_rng(seed).normal(size=n)
    y = pvq_search(x, k)
    assert np.abs(y).sum() == k
    assert np.all(y * x >= 0)
    assert cos_theta(x, y) > 0.97


def test_normalize():
    np.testing.assert_allclose(pvq_normalize([1, 0, 0]), [1, 0, 0])
    np.testing.assert_allclose(pvq_normalize([1, 1, 0]), [1 / math.sqrt(2), 1 / math.sqrt(2), 0])
    y = np.random.default_rng(0).integers(-5, 6, size=20)
    assert np.linalg.norm(pvq_normalize(y)) == pytest.approx(1, abs=1e-9)


def test_householder_examples():
    v, m, s = householder_normal([3.0, 4.0])
    assert (m, s) == (1, 1)
    np.testing.assert_allclose(v, [0.6, 1.8])
    v, m, s = householder_normal([1.0, 0.0, 0.0])
    np.testing.assert_allclose(v, [2, 0, 0])
    v, m, s = householder_normal([-5.0, 0.0])
    assert (m, s) == (0, -1)
    np.testing.assert_allclose(v, [-2, 0])
    with pytest.raises(ValueError):
        householder_normal([0.0, 0.0])


def test_householder_ties_pick_lowest_index():
    _, m, s = householder_normal([2.0, -2.0, 1.0])
    assert (m, s) == (0, 1)


def test_reflect_examples():
    v = np.array([1.0, 2.0, 0.0])
    x = np.array([2.0, -1.0, 5.0])
    np.testing.assert_allclose(reflect(x, v), x)
    np.testing.assert_allclose(reflect(v, v), -v)
    with pytest.raises(ValueError):
        reflect(x, np.zeros(3))


@given(st.integers(1, 32), vectors)
def test_reflection_isometry_involution_alignment(n, seed):
    rng = np.random.default_rng(seed)
    x, r = rng.normal(size=n), rng.normal(size=n)
    v, m, s = householder_normal(r)
    z = reflect(x, v)
    assert np.linalg.norm(z) == pytest.approx(np.linalg.norm(x), abs=1e-9)
    np.testing.assert_allclose(reflect(z, v), x, atol=1e-9)
    aligned = reflect(r, v)
    want = np.zeros(n)
    want[m] = -s * np.linalg.norm(r)
    np.testing.assert_allclose(aligned, want, atol=1e-9)
    # The angle to r is read off the reflected axis component.
    assert cos_theta(x, r) == pytest.approx(-s * z[m] / np.linalg.norm(z), abs=1e-9)


def test_scaled_predictor_needs_no_shape():
    r = np.array([3.0, -1.0, 2.0, 0.5])
    qp = QuantParams(1e-3)
    code = predicted_quantize(2.5 * r, r, qp)
    assert not code.noref and code.theta_index == 0 and code.pulses is None
    xhat = predicted_dequantize(code, r, qp)
    np.testing.assert_allclose(xhat / np.linalg.norm(xhat), r / np.linalg.norm(r), atol=1e-12)
    np.testing.assert_allclose(xhat, 2.5 * r, atol=1e-3)


def test_opposite_predictor_sets_noref():
    r = np.array([1.0, 2.0, -3.0])
    code = predicted_quantize(-r, r, QuantParams(0.1))
    assert code.noref and code.theta_index is None


def test_zero_input_sets_noref():
    code = predicted_quantize(np.zeros(4), np.ones(4), QuantParams(1.0))
    assert code.noref and code.gain_index == 0


def test_zero_predictor_raises():
    with pytest.raises(ValueError):
        predicted_quantize(np.ones(3), np.zeros(3), QuantParams(1.0))


def test_fine_quantization_reconstructs_closely(rng):
    qp = QuantParams(1e-3)
    for _ in range(200):
        x, r = rng.normal(size=8), rng.normal(size=8)
        code = predicted_quantize(x, r, qp)
        xhat = dequantize(code, 8, qp, r)
        assert np.linalg.norm(xhat - x) / np.linalg.norm(x) < 0.05


@given(vectors)
def test_encoder_and_decoder_agree(seed):
    rng = np.random.default_rng(seed)
    x, r = rng.normal(size=15) * 40, rng.normal(size=15) * 40
    qp = QuantParams(float(rng.uniform(0.5, 30)))
    code = predicted_quantize(x, r, qp)
    rebuilt = GainShapeCode(code.gain_index, None if code.pulses is None else code.pulses.copy(),
                            code.noref, code.theta_index, gain_predicted=code.gain_predicted)
    np.testing.assert_array_equal(dequantize(code, 15, qp, r), dequantize(rebuilt, 15, qp, r))


def test_refinement_is_monotone(rng):
    xs, rs = rng.normal(size=(50, 12)) * 20, rng.normal(size=(50, 12)) * 20
    errors = []
    for q in (8.0, 4.0, 2.0, 1.0, 0.25, 0.05):
        qp = QuantParams(q)
        errors.append(sum(np.sum((dequantize(predicted_quantize(x, r, qp), 12, qp, r) - x) ** 2)
                          for x, r in zip(xs, rs)))
    assert all(b <= a for a, b in zip(errors, errors[1:]))


def test_unpredicted_round_trip(rng):
    qp = QuantParams(0.01)
    x = rng.normal(size=16) * 10
    code = quantize_unpredicted(x, qp)
    assert code.noref and code.k >= 1
    assert np.linalg.norm(dequantize(code, 16, qp) - x) / np.linalg.norm(x) < 0.01


def test_quant_params():
    qp = QuantParams(2.0, max_pulses_per_dim=3)
    assert qp.theta_steps(0.0) == 1
    assert qp.theta_steps(10.0) == round_half_away(math.pi / 2 * 5)
    assert qp.pulse_budget(0.0, 4) == 0
    assert qp.pulse_budget(0.1, 4) == 1
    assert qp.pulse_budget(1000.0, 4) == 12
    with pytest.raises(ValueError):
        QuantParams(0.0)
    with pytest.raises(ValueError):
        QuantParams(1.0, 0)
