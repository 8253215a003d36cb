import math

import numpy as np
import pytest

from upcap.capacity2d import ring_modulus_exact
from upcap.domain import DomainMask, punctured_square, unit_square
from upcap.errors import DomainError
from upcap.testfn import (
    Disk, cube_capacity, harnack_params, harnack_transfer, inf_scan, moduli_sandwich_factor, u_alpha,
    up_param_from_inf_u, whitney_constants, whitney_cube_test,
)
from upcap.whitney import decompose

DISK = Disk((0.0, 0.0), 1.0)


def test_u_half_at_disk_centre():
    val = u_alpha(DISK, (0.0, 0.0), 0.5).value
    assert val == pytest.approx(2 * math.pi / math.log(2), rel=0.03)


def test_u_off_centre_in_disk():
    # B(z, alpha d) with d = 1 - |z|; Moebius invariance gives the ring with radii
    # alpha d and 1 seen from z: exact value 2 pi / log(1 / rho) with the
    # pseudo-hyperbolic radius rho of the disk
    z = np.array([0.4, 0.0])
    alpha, d = 0.5, 0.6
    r = alpha * d
    # image of the disk B(z, r) under the automorphism sending z to 0 is a disk
    # centred at 0 only if z = 0, so compare against the two concentric bounds
    lo = ring_modulus_exact(2, r, 1 + 0.4)
    hi = ring_modulus_exact(2, r, d)
    val = u_alpha(DISK, z, alpha).value
    assert lo <= val <= hi


def test_u_monotone_in_alpha():
    G = unit_square(6)
    z = (0.3, 0.4)
    vals = [u_alpha(G, z, a, n_theta=64).value for a in (0.2, 0.35, 0.5, 0.7)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_u_rejects_outside():
    with pytest.raises(DomainError):
        u_alpha(unit_square(5), (1.5, 0.5))
    with pytest.raises(DomainError):
        u_alpha(DISK, (0.0, 0.0), 1.0)


def test_punctured_square_below_baseline():
    P = punctured_square(7)
    S = unit_square(7)
    near_puncture = u_alpha(P, (0.5, 0.55), 0.5, n_theta=64).value
    near_side = u_alpha(S, (0.05, 0.5), 0.5, n_theta=64).value
    assert near_puncture < near_side


def test_similarity_invariance():
    G = unit_square(6)
    H = DomainMask(G.inside, G.level - 1, G.offset)  # the same raster, twice as large
    a = u_alpha(G, (0.25, 0.375), 0.5, n_theta=64).value
    b = u_alpha(H, (0.5, 0.75), 0.5, n_theta=64).value
    assert b == pytest.approx(a, rel=1e-6)


def test_moduli_sandwich_examples():
    assert moduli_sandwich_factor(0.25, 0.5) == pytest.approx(2.0)
    assert moduli_sandwich_factor(0.5, 0.5 + 1e-9) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(DomainError):
        moduli_sandwich_factor(0.5, 0.25)
    u4 = ring_modulus_exact(2, 0.25, 1.0)
    u2 = ring_modulus_exact(2, 0.5, 1.0)
    assert u2 / u4 == pytest.approx(2.0)
    assert u4 <= u2 <= moduli_sandwich_factor(0.25, 0.5) * u4 * (1 + 1e-12)


def test_harnack_params():
    rho = math.log(0.65) / math.log(0.5)
    assert harnack_params(0.5, 0.1) == pytest.approx(1 / rho)
    assert harnack_params(0.5, 0.1) == pytest.approx(1.609, abs=1e-3)
    assert harnack_params(0.5, 1e-9) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(DomainError):
        harnack_params(0.5, 0.4)


def test_harnack_transfer_grows_with_distance():
    f = [harnack_transfer(0.5, k)[0] for k in (0.0, 0.5, 1.0, 2.0)]
    assert f[0] >= 1 and all(a < b for a, b in zip(f, f[1:]))


def test_up_param_from_inf_u():
    assert up_param_from_inf_u(2, 2 * math.pi) == pytest.approx(math.exp(-4))
    assert up_param_from_inf_u(2, 1e9) > 0.999
    assert up_param_from_inf_u(2, 1e-3) < 1e-100
    with pytest.raises(DomainError):
        up_param_from_inf_u(2, 0.0)


def test_whitney_constants():
    c = whitney_constants(2)
    assert c["gamma"] == pytest.approx(1 / (9 * math.sqrt(2)))
    assert c["gamma"] == pytest.approx(0.07857, abs=1e-5)
    assert c["d1"] == pytest.approx(9 * math.sqrt(2) / (1 + 2 * math.sqrt(2)))
    assert c["d1"] == pytest.approx(3.325, abs=1e-3)
    assert c["d2"] == pytest.approx(c["d1"] * c["d3"])


def test_cube_capacity_between_rings():
    side = 0.2
    cap = cube_capacity(DISK, (-side / 2, -side / 2), side, n_theta=64)
    assert ring_modulus_exact(2, side / 2, 1.0) <= cap <= ring_modulus_exact(2, side / math.sqrt(2), 1.0)


@pytest.fixture(scope="module")
def small_cube_report():
    G = unit_square(6)
    D = decompose(G, 0, 4)
    return G, D, whitney_cube_test(G, D, n_theta=48)


def test_cube_test_sandwich(small_cube_report):
    _, D, rep = small_cube_report
    assert len(rep.cap) == len(D)
    assert rep.sandwich_ok.all()
    assert rep.min_cap() > 0


def test_cube_test_symmetry_shortcut(small_cube_report):
    G, D, rep = small_cube_report
    full = whitney_cube_test(G, D, n_theta=48, symmetry=False)
    assert full.solves > rep.solves
    assert np.allclose(full.cap, rep.cap, rtol=1e-6)


def test_cube_report_csv(small_cube_report):
    _, D, rep = small_cube_report
    lines = rep.to_csv().strip().splitlines()
    assert lines[0].startswith("k,corner_x") and len(lines) == len(D) + 1
    assert rep.summary()["sandwich_violations"] == 0


def test_inf_scan_points():
    G = unit_square(6)
    pts = np.array([[0.5, 0.5], [0.1, 0.5], [0.2, 0.2]])
    scan = inf_scan(G, 0.5, points=pts, n_theta=48)
    assert scan.inf_estimate == pytest.approx(scan.values.min())
    assert 0 < scan.lower_bound() < scan.inf_estimate
    with pytest.raises(DomainError):
        inf_scan(G, 0.5, points=np.zeros((0, 2)))
