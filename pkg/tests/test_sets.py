import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from upcap.bounds import beta_exponent, content_lower_bound
from upcap.errors import DomainError
from upcap.sets import (
    CompactSet, cantor_middle_third, hausdorff_content_upper, nested_ball_cantor, up_parameter_estimate,
    up_parameter_scan,
)


def test_cantor_sample_structure():
    E = cantor_middle_third(5)
    assert len(E) == 64
    assert E.resolution == pytest.approx(3.0**-5)
    x = E.points[:, 0]
    assert x.min() == 0.0 and x.max() == pytest.approx(1.0)
    # no point falls in the first removed third
    assert not np.any((x > 1 / 3 + 1e-12) & (x < 2 / 3 - 1e-12))


def test_compact_set_validation():
    with pytest.raises(DomainError):
        CompactSet(np.array([[0.0, 0.0]]), 0.1)
    with pytest.raises(DomainError):
        CompactSet(np.zeros((3, 2)), 0.1)
    with pytest.raises(DomainError):
        CompactSet(np.eye(2), 0.0)


def test_compact_set_json_roundtrip():
    E = cantor_middle_third(3)
    F = CompactSet.from_json(json.dumps(E.to_json()))
    assert np.array_equal(E.points, F.points) and F.resolution == E.resolution
    with pytest.raises(DomainError):
        CompactSet.from_json({"points": [[0, 0], [1, 0]]})


def test_restrict_closed_ball():
    E = cantor_middle_third(2)
    inside = E.restrict((0.0, 0.0), 1 / 3)
    assert set(inside[:, 0].round(12)) == {0.0, round(1 / 9, 12), round(2 / 9, 12), round(1 / 3, 12)}


def test_cantor_estimate_is_two_fifths():
    est = up_parameter_estimate(cantor_middle_third(10))
    assert est.c_hat == pytest.approx(0.4, abs=1e-9)
    c_hat, (a, r) = est
    assert r > est.r_lo and r <= est.r_hi


@pytest.mark.parametrize("depth", [4, 6, 8])
def test_two_implementations_agree_on_cantor(depth):
    E = cantor_middle_third(depth)
    assert up_parameter_estimate(E).c_hat == pytest.approx(up_parameter_scan(E), abs=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_two_implementations_agree_random(seed):
    rng = np.random.default_rng(seed)
    E = CompactSet(rng.uniform(size=(300, 2)), 1e-4)
    assert up_parameter_estimate(E).c_hat == pytest.approx(up_parameter_scan(E), abs=1e-12)


def test_two_point_set_is_zero():
    E = CompactSet(np.array([[0.0, 0.0], [1.0, 0.0]]), 1e-3)
    assert up_parameter_estimate(E).c_hat == 0.0
    assert up_parameter_scan(E) == 0.0


def test_circle_sample():
    t = np.linspace(0, 2 * np.pi, 1000, endpoint=False)
    E = CompactSet(np.c_[np.cos(t), np.sin(t)], np.pi / 1000)
    c = up_parameter_estimate(E).c_hat
    # a smooth curve is uniformly perfect with a large constant; the finite
    # sample only sees radii above the safety window
    assert 0.75 <= c < 1


@settings(max_examples=25)
@given(st.floats(0.01, 100.0), st.floats(-10, 10), st.floats(-10, 10), st.integers(0, 10))
def test_similarity_invariance(scale, sx, sy, seed):
    rng = np.random.default_rng(seed)
    E = CompactSet(rng.uniform(size=(80, 2)), 1e-4)
    F = E.transformed(scale, (sx, sy))
    assert up_parameter_estimate(F).c_hat == pytest.approx(up_parameter_estimate(E).c_hat, rel=1e-9)


def test_safety_window_too_large():
    with pytest.raises(DomainError):
        up_parameter_estimate(cantor_middle_third(2), safety=100)


def test_nested_family_valid():
    fam, E = nested_ball_cantor(depth=7, seed=3)
    assert fam.check() == []
    assert len(E) == 2**7
    assert E.resolution == pytest.approx(1.0 * (0.4 / 3) ** 7)


def test_nested_general_mode():
    fam, E = nested_ball_cantor(p=3, c=0.2, depth=4, seed=1)
    assert fam.check() == [] and len(E) == 81
    with pytest.raises(DomainError):
        nested_ball_cantor(p=6, c=0.45, depth=2)


def test_nested_depth_zero():
    _, E = nested_ball_cantor(depth=0, r=2.0, center=(1.0, 1.0))
    assert len(E) == 3 and E.diameter == pytest.approx(4.0)


def test_nested_deterministic():
    a = nested_ball_cantor(depth=5, seed=11)[1].points
    b = nested_ball_cantor(depth=5, seed=11)[1].points
    assert np.array_equal(a, b)


def test_content_of_segment():
    # the unit segment has 1-content about 1/2 (radius-sum convention)
    x = np.linspace(0, 1, 4097)
    pts = np.c_[x, np.zeros_like(x)]
    val = hausdorff_content_upper(pts, 1.0, max_level=12)
    assert 0.5 <= val <= 0.5 * math.sqrt(2) * 1.01


def test_content_dominates_lower_bound_on_cantor():
    E = cantor_middle_third(10)
    beta = beta_exponent(0.4)
    for a in E.points[::97]:
        for r in (0.05, 0.2, 0.45):
            sub = E.restrict(a, r)
            assert hausdorff_content_upper(sub, beta, 12) >= content_lower_bound(2, 0.4, r)


def test_content_empty_and_bad_beta():
    assert hausdorff_content_upper(np.zeros((0, 2)), 0.5) == 0.0
    with pytest.raises(DomainError):
        hausdorff_content_upper(np.zeros((3, 2)), 0.0)
