import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from upcap import capacity2d as C
from upcap.bounds import marsarbd_factor
from upcap.errors import DegenerateCondenserError, DomainError, NonConvergenceError
from upcap.sets import cantor_middle_third
from upcap.specfun import teichmuller_tau2

NEU = ("neumann", "neumann")
PER = ("periodic", "periodic")


@given(arrays(bool, st.tuples(st.integers(1, 12), st.integers(1, 12))))
def test_rle_roundtrip(mask):
    runs = C.rle_encode(mask)
    assert np.array_equal(C.rle_decode(runs, mask.shape), mask)
    assert sum(runs) == mask.size


def _chain(length, spacing=(1.0, 1.0)):
    a = np.ones((length, 1), bool)
    c = np.zeros_like(a)
    c[0] = True
    return C.GridCondenser(a, c, spacing=spacing, bc=(("neumann", "dirichlet"), NEU))


def test_chain_is_series_resistor():
    # n unit conductances in series have total conductance 1/n
    assert C.solve_capacity(_chain(3), method="direct").capacity == pytest.approx(1 / 3, rel=1e-12)
    # weight h1/h0 on every edge of axis 0
    assert C.solve_capacity(_chain(3, (2.0, 1.0)), method="direct").capacity == pytest.approx(1 / 6, rel=1e-12)


@pytest.mark.parametrize("nx,ny", [(8, 5), (20, 3), (5, 40)])
def test_parallel_plate_is_exact(nx, ny):
    # plate column at x = 0, zero ghost beyond the last column, periodic in y:
    # the discrete potential is linear and the capacity is ny / nx
    a = np.ones((nx, ny), bool)
    c = np.zeros_like(a)
    c[0] = True
    cond = C.GridCondenser(a, c, bc=(("neumann", "dirichlet"), PER))
    assert C.solve_capacity(cond, tol=1e-12).capacity == pytest.approx(ny / (nx - 1 + 1), rel=1e-9)


def test_energy_is_minimal():
    cond = C.annulus_condenser(1.0, 3.0, 24)
    u, rep = C.solve_potential(cond, tol=1e-12)
    assert C.dirichlet_energy(cond, u) == pytest.approx(rep.capacity, rel=1e-9)
    rng = np.random.default_rng(0)
    free = cond.a_mask & ~cond.c_mask
    for _ in range(5):
        v = u.copy()
        v[free] += 1e-3 * rng.normal(size=free.sum())
        assert C.dirichlet_energy(cond, v) > rep.capacity


@pytest.mark.parametrize("method,precond", [("cg", "amg"), ("cg", "jacobi"), ("cg", "none"), ("direct", "amg")])
def test_solvers_agree(method, precond):
    cond = C.annulus_condenser(1.0, 2.0, 40)
    ref = C.solve_capacity(cond, method="direct").capacity
    assert C.solve_capacity(cond, tol=1e-10, method=method, precond=precond).capacity == pytest.approx(ref, rel=1e-7)


def test_scale_invariance():
    cond = C.annulus_condenser(1.0, 2.5, 40)
    assert C.solve_capacity(cond.scaled(7.5)).capacity == pytest.approx(C.solve_capacity(cond).capacity, rel=1e-10)


@pytest.mark.parametrize("ratio", [1.5, 2.0, math.e, 4.0, 8.0])
def test_annulus_against_exact(ratio):
    exact = C.ring_modulus_exact(2, 1.0, ratio)
    assert exact == pytest.approx(2 * math.pi / math.log(ratio))
    cap = C.solve_capacity(C.annulus_condenser(1.0, ratio, 128)).capacity
    assert cap == pytest.approx(exact, rel=0.03)


def test_ring_modulus_higher_dimension():
    assert C.ring_modulus_exact(3, 1.0, math.e) == pytest.approx(4 * math.pi)


def test_logpolar_annulus_is_exact():
    # rows of the log-polar grid sit exactly on both circles
    cond = C.logpolar_condenser((0, 0), lambda p: np.hypot(*p.T) < 2, lambda p: np.hypot(*p.T) <= 0.5 + 1e-12,
                                r_min=0.5, r_max=4.0, n_theta=64, anchors=(2.0,), inner_bc="neumann")
    assert C.solve_capacity(cond).capacity == pytest.approx(2 * math.pi / math.log(4), rel=1e-6)


def test_refinement_reports_estimates():
    rep = C.solve_capacity(C.annulus_condenser(1.0, 2.0, 32), refine=True)
    (h0, v0), (h1, v1) = rep.refinement_estimates
    assert h1 == h0 / 2
    assert rep.extrapolated == pytest.approx(2 * v1 - v0)


def test_json_roundtrip():
    cond = C.annulus_condenser(1.0, 2.0, 16)
    back = C.GridCondenser.from_json(json.loads(json.dumps(cond.to_json())))
    assert np.array_equal(back.a_mask, cond.a_mask) and np.array_equal(back.c_mask, cond.c_mask)
    assert back.spacing == cond.spacing and back.bc == cond.bc
    rep = C.solve_capacity(back)
    assert json.loads(json.dumps(rep.to_json()))["capacity"] == rep.capacity


def test_validation_errors():
    a = np.ones((4, 4), bool)
    with pytest.raises(DomainError):
        C.GridCondenser(a, np.zeros_like(a))
    with pytest.raises(DomainError):
        C.GridCondenser(a, a)
    c = np.zeros_like(a)
    c[1, 1] = True
    with pytest.raises(DomainError):
        C.GridCondenser(np.zeros_like(a) | c, c | np.eye(4, dtype=bool))
    with pytest.raises(DomainError):
        C.GridCondenser(a, c, bc=(("periodic", "dirichlet"), NEU))


def test_degenerate_plate():
    a = np.ones((4, 4), bool)
    c = np.zeros_like(a)
    c[0, 1] = True  # touches the zero ghost layer
    with pytest.raises(DegenerateCondenserError):
        C.solve_capacity(C.GridCondenser(a, c))


def test_nonconvergence():
    with pytest.raises(NonConvergenceError):
        C.solve_capacity(C.annulus_condenser(1.0, 2.0, 64), maxiter=2, precond="none")


def test_marsarbd_sandwich_numerically():
    # plate: a segment of length r; outer disks of radius 2r and 4r
    r = 1.0
    h = 8 * r / 512
    n = 520
    lo = (-n / 2 * h, -n / 2 * h)

    def seg(p):
        return (np.abs(p[:, 1]) <= h / 2) & (np.abs(p[:, 0]) <= r / 2)

    caps = []
    for R in (2 * r, 4 * r):
        cond = C.cartesian_condenser(lambda p, R=R: np.hypot(*p.T) < R, seg, lo, (n, n), h)
        caps.append(C.solve_capacity(cond).capacity)
    cap2, cap4 = caps
    assert cap4 <= cap2
    assert cap4 >= marsarbd_factor(r, 2 * r, 4 * r) * cap2


def test_cap_xEr_positive_and_monotone_in_r():
    E = cantor_middle_third(6)
    x = E.points[5]
    c1 = C.cap_xEr(x, E, 0.1, grid_level=7)
    c2 = C.cap_xEr(x, E, 0.3, grid_level=7)
    assert c1 > 0 and c2 > 0
    with pytest.raises(DomainError):
        C.cap_xEr(np.array([5.0, 5.0]), E, 0.1)


def test_ringcap_lower_value():
    assert C.ringcap_lower(1.0) == pytest.approx(teichmuller_tau2(8.0))
    assert C.ringcap_lower(1.0, in_ball=True) == pytest.approx(teichmuller_tau2(8.0) / 2)


@settings(max_examples=5, deadline=None)
@given(st.sampled_from([0.5, 2.0, 10.0]))
def test_teichmuller_grid(s):
    assert C.teichmuller_ring_capacity(s, n_theta=64) == pytest.approx(teichmuller_tau2(s), rel=0.05)


def test_segments_converge_to_teichmuller():
    # [-1, 0] and [2, 1000]: the truncation lowers the modulus a little, the
    # one-cell-thick plates raise it; the second effect fades with resolution
    exact = teichmuller_tau2(2.0)
    vals = [C.solve_capacity(C.segments_condenser((-1.0, 0.0), (2.0, 1e3), n_theta=n)).capacity
            for n in (64, 128, 256)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] == pytest.approx(exact, rel=0.01)


def test_upsample_refuses_cut_cells():
    cond = C.logpolar_condenser((0, 0), lambda p: np.hypot(*p.T) < 2, lambda p: np.hypot(*p.T) <= 0.7,
                                r_min=0.5, r_max=4.0, n_theta=32)
    assert cond.edge_frac is not None
    with pytest.raises(DomainError):
        cond.upsample(2)
