import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ccresm_sim.messages import (
    add_update,
    chk_update,
    contradictory,
    hard_decision,
    is_normalized,
    leave_one_out_product,
    normalize,
    var_update,
)

probs = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def pair(p):
    return np.array([1 - p, p])


@pytest.mark.parametrize("P, M, expected", [
    ((1, 0, 0), (1, 0), (1, 0)),
    ((0, 1, 0), (1, 0), (0, 1)),
    ((0.25, 0.5, 0.25), (0.5, 0.5), (0.5, 0.5)),
])
def test_add_update_examples(P, M, expected):
    np.testing.assert_allclose(add_update(P, M), expected, atol=1e-12)


def test_add_update_prenormalization_value():
    # (0.25*0.5 + 0.5*0.5, 0.5*0.5 + 0.25*0.5)
    P, M = np.array([0.25, 0.5, 0.25]), np.array([0.5, 0.5])
    raw = (P[0] * M[0] + P[1] * M[1], P[1] * M[0] + P[2] * M[1])
    assert raw == pytest.approx((0.375, 0.375))


@pytest.mark.parametrize("m1, m2, expected", [
    ((1, 0), (1, 0), (1, 0)),
    ((1, 0), (0, 1), (0, 1)),
    ((0.8, 0.2), (0.6, 0.4), (0.56, 0.44)),
])
def test_chk_update_examples(m1, m2, expected):
    np.testing.assert_allclose(chk_update(m1, m2), expected, atol=1e-12)


@pytest.mark.parametrize("inputs, expected", [
    ([(1, 0), (1, 0), (1, 0)], (1, 0)),
    ([(0.5, 0.5), (0.5, 0.5)], (0.5, 0.5)),
    ([(0.9, 0.1), (0.8, 0.2), (0.5, 0.5)], (0.36 / 0.37, 0.01 / 0.37)),
])
def test_var_update_examples(inputs, expected):
    np.testing.assert_allclose(var_update(*inputs), expected, atol=1e-12)


def test_var_update_single_input_passes_through():
    np.testing.assert_allclose(var_update([(0.3, 0.7)]), (0.3, 0.7))


def test_var_update_conflicting_certainties_become_uniform_and_flagged():
    np.testing.assert_allclose(var_update((1.0, 0.0), (0.0, 1.0)), (0.5, 0.5))
    assert contradictory((1.0, 0.0), (0.0, 1.0))
    assert not contradictory((0.9, 0.1), (0.2, 0.8))


def test_hard_decision_ties_go_to_zero():
    assert hard_decision(np.array([0.5, 0.5])) == 0
    assert hard_decision(np.array([0.4, 0.6])) == 1


@given(probs, probs, probs, probs)
def test_chk_is_xor_probability(a, b, c, d):
    out = chk_update(pair(a), pair(b))
    assert out[1] == pytest.approx(a * (1 - b) + b * (1 - a), abs=1e-11)
    assert is_normalized(out)


@given(arrays(np.float64, (4, 3), elements=st.floats(0.0, 1.0)), probs)
def test_add_update_output_normalized(P, p):
    assert is_normalized(add_update(P, pair(p)))


@given(arrays(np.float64, (5, 3, 2), elements=st.floats(0.0, 1.0)))
def test_var_update_output_normalized(ms):
    assert is_normalized(var_update(*ms))


@given(arrays(np.float64, (3, 4, 2), elements=st.floats(1e-6, 1.0)))
def test_leave_one_out_matches_direct_product(m):
    loo = leave_one_out_product(m, axis=1)
    for j in range(m.shape[1]):
        others = np.delete(m, j, axis=1)
        np.testing.assert_allclose(loo[:, j], np.prod(others, axis=1), rtol=1e-12)


@settings(max_examples=50)
@given(arrays(np.float64, (6, 2), elements=st.floats(0.0, 10.0)))
def test_normalize_clamps_and_sums_to_one(m):
    out = normalize(m)
    assert is_normalized(out)
    # 1 - (1 - EPS) rounds slightly below EPS
    assert np.all(out >= 0.999e-12)
