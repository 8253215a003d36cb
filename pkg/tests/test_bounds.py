import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from upcap import bounds as B
from upcap.errors import DomainError
from upcap.geom import Annulus
from upcap.specfun import tau_lower_bound


def test_beta_exponent_values():
    assert B.beta_exponent(0.4) == pytest.approx(0.34401, abs=1e-5)
    assert B.beta_exponent(1 - 1e-12) == pytest.approx(math.log(2) / math.log(3), abs=1e-5)
    assert B.beta_exponent(1 - 1e-12) == pytest.approx(0.63093, abs=1e-5)
    with pytest.raises(DomainError):
        B.beta_exponent(1.0)


@given(st.floats(1e-6, 1 - 1e-6), st.floats(1e-6, 1 - 1e-6))
def test_beta_monotone(c1, c2):
    if c1 < c2:
        assert B.beta_exponent(c1) <= B.beta_exponent(c2)


def test_content_and_capacity_bounds():
    beta = B.beta_exponent(0.4)
    assert B.content_lower_bound(2, 0.4, 1.0) == pytest.approx(1 / 18)
    assert B.content_lower_bound(2, 0.4, 0.5) == pytest.approx(0.5**beta / 18)
    expected = beta**2 / (18 * 28 * 2**beta)
    assert B.capacity_lower_bound(2, 0.4) == pytest.approx(expected, rel=1e-12)


def test_up_from_capacity():
    rep = B.up_from_capacity(2, 2 * math.pi)
    assert rep.value == pytest.approx(2 * math.exp(-1))
    assert "vacuous" not in rep.flags
    assert "vacuous" in B.up_from_capacity(2, 1e3).flags
    with pytest.raises(DomainError):
        B.up_from_capacity(2, 0.0)


def test_lambda_variants():
    omega = 2 * math.pi
    assert B.lambda_basic(2, 1.0) == pytest.approx(math.exp(2 * omega) / 2)
    assert B.lambda_basic(2, 1e6) == 2.0
    assert B.lambda_basic(2, 4.0, "ring") == pytest.approx(math.exp(omega))
    with pytest.raises(DomainError):
        B.lambda_basic(2, 1.0, "other")


def test_comparison_constant_hand_evaluation():
    # b/a = 2, t = 1: A = 2 pi / log 2, m = 2, s = 4m^2 + 4m = 24
    rep = B.comparison_constant_v(2, 2.0, 1.0, tau="lower")
    A = 2 * math.pi / math.log(2)
    v1 = tau_lower_bound(2, 24.0) / 2
    assert rep.value == pytest.approx(min(1.0, v1 / A) / 9)
    assert "conservative" in rep.flags
    numeric = B.comparison_constant_v(2, 2.0, 1.0)
    assert numeric.value > rep.value and numeric.flags == []


def test_mu_n_orderings():
    assert B.mu_n(2, tau="lower").value < B.mu_n(2).value
    assert "conservative" in B.mu_n(3).flags
    assert B.mu_n(3).value > 0


def test_separating_annuli_example():
    sep = B.separating_annuli(70.0, 1.0, 4.0)
    assert sep.p == 3
    assert sep.p_lower == pytest.approx(math.log(71) / (2 * math.log(4)))
    assert sep.p_lower < sep.p
    assert B.separating_annuli(6.0, 1.0, 4.0).p == 0


def test_separating_annuli_disjoint():
    sep = B.separating_annuli(1e4, 1.0, 3.0)
    radii = [(a.inner, a.outer) for a in sep.annuli]
    for (i1, o1), (i2, o2) in zip(radii, radii[1:]):
        assert o1 <= i2
    assert all(isinstance(a, Annulus) for a in sep.annuli)


@given(st.floats(1.01, 20.0), st.floats(1.0, 1e8))
def test_p_lower_below_p_under_hypothesis(lam, u):
    sep = B.separating_annuli(u, 1.0, lam)
    if sep.p >= 1 and B.separating_hypothesis(u, sep.p, lam):
        assert sep.p_lower < sep.p


def test_quad_threshold_example():
    t0 = B.quad_threshold(2.0, 1, 2.0)
    assert t0 == pytest.approx(6 + 2 * math.sqrt(3))
    t = 9.5
    assert t - 2 >= 2 * math.sqrt(1 + t)


@given(st.floats(1e-3, 1e3), st.integers(1, 6), st.floats(1.001, 10.0), st.floats(0, 1e3))
def test_quad_threshold_holds_above(a, p, lam, extra):
    t = B.quad_threshold(a, p, lam) + extra
    assert t - a >= lam**p * math.sqrt(1 + t) * (1 - 1e-12)


def test_marsarbd_factor():
    assert B.marsarbd_factor(1, 2, 4) == pytest.approx(0.5)
    assert B.marsarbd_factor(1, 3, 3) == 1.0
    with pytest.raises(DomainError):
        B.marsarbd_factor(2, 1, 4)


def test_cap_GE_lower_case_A():
    rep = B.cap_GE_lower(2, 0.5, 1.0, 4.0)
    assert rep.inputs["regime"] == "A"
    assert rep.value == pytest.approx(B.mu_n(2).value * 0.5 * math.log(1.25))


def test_cap_GE_lower_regimes_and_uniform():
    big = B.cap_GE_lower(2, 0.5, 1e300, 1.0)
    assert big.inputs["regime"] == "B"
    mid = B.cap_GE_lower(2, 0.5, 10.0, 1.0)
    assert mid.inputs["regime"] == "C" and "proof-traced, conservative" in mid.flags
    uni = B.cap_GE_lower(2, 0.5, 1.0, 4.0, uniform=True)
    ins = uni.inputs
    assert ins["s_uniform"] == min(ins["c_A"], ins["c_B"], ins["c_C"])
    assert uni.value <= B.cap_GE_lower(2, 0.5, 1.0, 4.0).value


def test_cap_GE_lower_grows_like_log():
    v1 = B.cap_GE_lower(2, 0.5, 1e6, 1.0, uniform=True).value
    v2 = B.cap_GE_lower(2, 0.5, 1e12, 1.0, uniform=True).value
    assert v2 / v1 == pytest.approx(2.0, rel=1e-5)


def test_bounds_positive_and_continuous():
    cs = np.linspace(0.05, 0.95, 200)
    vals = np.array([B.capacity_lower_bound(2, c) for c in cs])
    assert np.all(vals > 0)
    assert np.max(np.abs(np.diff(vals))) < 0.05 * vals.max()
    ts = np.linspace(0.1, 5, 100)
    v = np.array([B.comparison_constant_v(2, 3.0, t).value for t in ts])
    assert np.all(v > 0) and np.max(np.abs(np.diff(v))) < 0.05 * v.max()


def test_report_serialization():
    rep = B.comparison_constant_v(2, 2.0, 1.0)
    data = json.loads(rep.dumps())
    assert data["name"] == "comparison_constant_v" and data["value"] == rep.value
    assert float(rep) == rep.value


def test_report_rejects_nan():
    with pytest.raises(DomainError):
        B.BoundReport("x", math.nan, {}, "")
    assert "vacuous" in B.BoundReport("x", 0.0, {}, "").flags
