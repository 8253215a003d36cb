import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from upcap.errors import DomainError
from upcap.specfun import (
    M1, DimensionConstants, agm, ball_volume, beta_function, c_n, complete_elliptic_K, grisha_K,
    grotzsch_mu, kissing_table, sphere_area, sug_g, sug_log_ratio_lower, tau_lower_bound, tau_n,
    teichmuller_tau2,
)


def test_low_dimensional_constants():
    assert sphere_area(2) == pytest.approx(2 * math.pi, rel=1e-15)
    assert sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-15)
    assert ball_volume(2) == pytest.approx(math.pi, rel=1e-15)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=1e-15)
    # K_2 = 2^-2 (2 pi)^2 / pi = pi
    assert grisha_K(2) == pytest.approx(math.pi, rel=1e-14)


@pytest.mark.parametrize("n", range(2, 11))
def test_sphere_area_is_n_times_volume(n):
    assert sphere_area(n) == pytest.approx(n * ball_volume(n), rel=1e-12)


@pytest.mark.parametrize("n", range(2, 9))
def test_grisha_K_matches_definition(n):
    direct = 2.0**-n * sphere_area(n) ** n * ball_volume(n) ** (1 - n)
    assert grisha_K(n) == pytest.approx(direct, rel=1e-12)


def test_gamma_route_against_scipy():
    for n in range(1, 12):
        ref = 2 * np.pi ** (n / 2) / special.gamma(n / 2)
        assert sphere_area(n) == pytest.approx(ref, rel=1e-13)
    for a, b in [(0.25, 0.5), (1, 1), (3.5, 0.5), (0.1, 7)]:
        assert beta_function(a, b) == pytest.approx(special.beta(a, b), rel=1e-12)


def test_kissing_table():
    assert kissing_table(2) == (6, 7)
    assert kissing_table(3) == (12, 13)
    assert kissing_table(4) == (24, 25)
    assert kissing_table(8, kissing=240) == (240, 241)
    with pytest.raises(DomainError):
        kissing_table(8)
    assert DimensionConstants.of(5).N_star is None
    assert DimensionConstants.of(2).N_star == 7


@given(st.floats(min_value=1e-3, max_value=2.0))
def test_M1_planar_closed_form(beta):
    assert M1(2, beta) == pytest.approx(28 * 2**beta / beta**2, rel=1e-12)


def test_M1_preconditions():
    with pytest.raises(DomainError):
        M1(2, 0.0)
    with pytest.raises(DomainError):
        M1(2, 2.5)
    with pytest.raises(DomainError):
        M1(5, 1.0)


def test_c2_is_two_over_pi():
    assert c_n(2) == pytest.approx(2 / math.pi, rel=1e-15)


def test_tau_lower_bound_value():
    assert tau_lower_bound(2, 80) == pytest.approx(2 / math.pi * math.log(1.25), rel=1e-14)
    assert tau_lower_bound(2, 80) == pytest.approx(0.14205, abs=1e-5)


def test_tau_lower_bound_decreasing_to_zero():
    s = np.geomspace(1e-2, 1e8, 60)
    vals = [tau_lower_bound(2, x) for x in s]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-3


def test_weak_bound_is_weaker():
    for s in np.geomspace(0.01, 1e4, 40):
        assert tau_lower_bound(3, s, weak=True) <= tau_lower_bound(3, s) * (1 + 1e-12)


def test_elliptic_K_against_scipy():
    assert complete_elliptic_K(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    for k in [0.1, 0.5, 0.9, 0.999, 1 - 1e-9]:
        # scipy's ellipkm1 takes the complementary parameter 1 - k^2, exact near k = 1
        assert complete_elliptic_K(k) == pytest.approx(special.ellipkm1((1 - k) * (1 + k)), rel=1e-12)
    with pytest.raises(DomainError):
        complete_elliptic_K(1.0)


def test_agm_symmetric_and_between_means():
    a, b = 1.0, 0.3
    m = agm(a, b)
    assert agm(b, a) == pytest.approx(m, rel=1e-15)
    assert math.sqrt(a * b) <= m <= (a + b) / 2


def test_grotzsch_modulus_against_elliptic_ratio():
    for r in [0.05, 0.3, 0.7, 0.95]:
        rp = math.sqrt(1 - r * r)
        ref = math.pi / 2 * special.ellipk(rp**2) / special.ellipk(r**2)
        assert grotzsch_mu(r) == pytest.approx(ref, rel=1e-12)
    # self-dual point: mu(1/sqrt 2) = pi/2
    assert grotzsch_mu(1 / math.sqrt(2)) == pytest.approx(math.pi / 2, rel=1e-14)


def test_tau2_known_values():
    # s = 1: the ring is self-dual, so tau_2(1) = pi / mu(1/sqrt2) = 2
    assert teichmuller_tau2(1.0) == pytest.approx(2.0, rel=1e-13)
    assert teichmuller_tau2(80.0) >= 0.14205


def test_tau2_decreasing_and_above_lower_bound():
    s = np.geomspace(1e-3, 1e9, 200)
    vals = np.array([teichmuller_tau2(x) for x in s])
    assert np.all(np.diff(vals) < 0)
    low = np.array([tau_lower_bound(2, x) for x in s])
    assert np.all(vals >= low)


@pytest.mark.parametrize("s", [1, 5, 24, 80])
def test_tau2_against_grid_solver(s):
    from upcap.capacity2d import teichmuller_ring_capacity

    grid = teichmuller_ring_capacity(s, n_theta=128)
    assert grid == pytest.approx(teichmuller_tau2(s), rel=0.05)


def test_tau_n_flags():
    assert tau_n(2, 3.0) == (teichmuller_tau2(3.0), False)
    val, conservative = tau_n(3, 3.0)
    assert conservative and val == tau_lower_bound(3, 3.0)


def test_sug_example():
    assert sug_log_ratio_lower(2, 2, 0.5) == pytest.approx(0.5 * math.e * math.log(1.5), rel=1e-14)
    assert sug_log_ratio_lower(2, 2, 0.5) == pytest.approx(0.5511, abs=1e-4)
    assert sug_log_ratio_lower(2, 2, 0.5) <= 1 / math.log(4)


@given(st.floats(1.0001, 100.0), st.integers(2, 6), st.floats(1e-9, 0.999999))
def test_sug_lower_never_exceeds(K, n, x):
    assert sug_log_ratio_lower(K, n, x) <= math.log(K / x) ** (1 - n) * (1 + 1e-12)


def test_sug_g_bound_on_grid():
    for K in np.linspace(1.01, 50, 25):
        for n in (2, 3, 4):
            x = np.linspace(1e-6, 1 - 1e-6, 400)
            g = np.array([sug_g(K, n, t) for t in x])
            assert g.max() <= K * ((n - 1) / math.e) ** (n - 1) * (1 + 1e-12)


def test_sug_preconditions():
    with pytest.raises(DomainError):
        sug_log_ratio_lower(1.0, 2, 0.5)
    with pytest.raises(DomainError):
        sug_log_ratio_lower(2.0, 2, 1.0)
