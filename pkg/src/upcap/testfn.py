"""The capacity test function ``u_alpha`` and the Whitney-square capacity test.

``u_alpha(z) = cap(G, closed B(z, alpha d(z, ∂G)))``.  It is evaluated on a
log-polar grid centred at ``z`` whose first row is the circle of radius
``alpha d(z, ∂G)`` and on which ``d(z, ∂G)`` is also a row, so that for a disk
centred at ``z`` the discrete value equals the exact ring capacity.

Isolated boundary points have zero capacity, so the condensers ignore
punctures; punctures do enter through ``d(z, ∂G)``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .capacity2d import SolveReport, logpolar_condenser, solve_capacity
from .domain import DomainMask
from .errors import DomainError
from .metrics import harnack_chain_bound
from .specfun import sphere_area
from .whitney import WhitneyDecomposition, cube_boundary_distance, decompose

SOLVER_SLACK = 0.03


@dataclass(frozen=True)
class Disk:
    """Open disk with the same distance interface as :class:`DomainMask`."""

    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    def distance(self, xy) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(xy, dtype=float))
        return np.maximum(0.0, self.radius - np.linalg.norm(pts - np.asarray(self.center), axis=1))

    def member(self, xy, eps: float = 0.0) -> np.ndarray:
        return self.distance(xy) > eps * self.radius

    def bbox(self):
        c = np.asarray(self.center, dtype=float)
        return c - self.radius, c + self.radius


def _member(G, pts: np.ndarray, scale: float) -> np.ndarray:
    # points within rounding error of the boundary count as outside
    if isinstance(G, DomainMask):
        f = pts / G.h - np.asarray(G.offset)
        n0, n1 = G.shape
        out = np.ones(len(pts), dtype=bool)
        for e0 in (-1e-9, 1e-9):
            for e1 in (-1e-9, 1e-9):
                i = np.floor(f[:, 0] + e0).astype(np.int64)
                j = np.floor(f[:, 1] + e1).astype(np.int64)
                ok = (i >= 0) & (i < n0) & (j >= 0) & (j < n1)
                hit = np.zeros(len(pts), dtype=bool)
                hit[ok] = G.inside[i[ok], j[ok]]
                out &= hit
        return out
    return G.distance(pts) > 1e-9 * scale


def _bbox(G):
    if isinstance(G, DomainMask):
        lo = np.asarray(G.offset, dtype=float) * G.h
        return lo, lo + np.asarray(G.shape) * G.h
    return G.bbox()


def _far_radius(G, z) -> float:
    lo, hi = _bbox(G)
    corners = np.array([[lo[0], lo[1]], [lo[0], hi[1]], [hi[0], lo[1]], [hi[0], hi[1]]])
    return float(np.linalg.norm(corners - z, axis=1).max()) * 1.05


@dataclass
class TestFnSample:
    z: tuple
    alpha: float
    value: float
    dist: float
    report: SolveReport | None = None

    __test__ = False


def u_alpha(G, z, alpha: float = 0.5, n_theta: int = 128, tol: float = 1e-8,
            method: str = "direct", precond: str = "amg") -> TestFnSample:
    """``cap(G, closed B(z, alpha d(z, ∂G)))`` on a log-polar grid centred at ``z``."""
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    z = np.asarray(z, dtype=float)
    d = float(G.distance(z[None, :])[0])
    if d <= 0:
        raise DomainError(f"z = {tuple(z)} is not in the domain")
    r0 = alpha * d
    cond = logpolar_condenser(
        z, lambda p: _member(G, p, d), lambda p: np.linalg.norm(p - z, axis=1) <= r0 * (1 + 1e-9),
        r_min=r0, r_max=_far_radius(G, z), n_theta=n_theta, anchors=(d,), inner_bc="neumann")
    rep = solve_capacity(cond, tol=tol, method=method, precond=precond)
    return TestFnSample(tuple(z.tolist()), alpha, rep.capacity, d, rep)


def cube_capacity(G, lo, side: float, n_theta: int = 128, tol: float = 1e-8, method: str = "direct") -> float:
    """``cap(G, Q)`` for the closed square ``Q = lo + [0, side]^2``.

    For a bounded domain containing ``Q`` this equals ``cap(R^2 \\ Q, ∂G)``:
    every curve joining ``Q`` to ``∂G`` has a subarc in ``G`` doing the same.
    """
    lo = np.asarray(lo, dtype=float)
    m = lo + side / 2
    half = side / 2 * (1 + 1e-9)

    def in_q(p):
        return np.all(np.abs(p - m) <= half, axis=1)

    cond = logpolar_condenser(m, lambda p: _member(G, p, side), in_q, r_min=side / 4,
                              r_max=_far_radius(G, m), n_theta=n_theta, anchors=(side / 2,),
                              inner_bc="neumann")
    return solve_capacity(cond, tol=tol, method=method).capacity


def moduli_sandwich_factor(alpha: float, beta: float, n: int = 2) -> float:
    """``kappa = max{a^(n-1), a^(1-n)}``, ``a = log beta / log alpha``: ``u_alpha <= u_beta <= kappa u_alpha``."""
    if not 0 < alpha < beta < 1:
        raise DomainError("need 0 < alpha < beta < 1")
    a = math.log(beta) / math.log(alpha)
    return max(a ** (n - 1), a ** (1 - n))


def harnack_params(alpha: float, s: float, n: int = 2) -> float:
    """Harnack constant of ``u_alpha`` on balls ``B(z, s d(z, ∂G))``.

    ``rho = log((1+s) alpha + s) / log(alpha)``; the constant is
    ``max{rho^(n-1), rho^(1-n)} >= 1``.
    """
    if not (0 < alpha < 1 and s > 0):
        raise DomainError("need alpha in (0, 1) and s > 0")
    t = (1 + s) * alpha + s
    if not t < 1:
        raise DomainError("need (1 + s) alpha + s < 1")
    rho = math.log(t) / math.log(alpha)
    return max(rho ** (n - 1), rho ** (1 - n))


def harnack_transfer(alpha: float, k: float, n: int = 2, grid: int = 400) -> tuple[float, float]:
    """Best factor ``F`` with ``u(x) <= F u(y)`` when ``k_G(x, y) <= k``; returns ``(F, s)``.

    Minimizes the chain bound ``C(s)^(1 + k / (2 log(1+s)))`` over admissible ``s``.
    """
    s_max = (1 - alpha) / (1 + alpha)
    best = (math.inf, 0.0)
    for s in np.linspace(s_max / grid, s_max * (1 - 1.0 / grid), grid):
        f = harnack_chain_bound(harnack_params(alpha, float(s), n), float(s), k)
        if f < best[0]:
            best = (f, float(s))
    return best


def up_param_from_inf_u(n: int, gamma: float) -> float:
    """``exp(-(2^n omega / gamma)^(1/(n-1)))``: UP parameter implied by ``inf u_(1/2) >= gamma``."""
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    return math.exp(-((2**n * sphere_area(n) / gamma) ** (1 / (n - 1))))


# --- scans over Whitney squares ------------------------------------------------------------


def _dihedral(G: DomainMask):
    """Symmetries of a square mask about its centre, as maps on (k, i, j); ``None`` if not symmetric."""
    ins = G.inside
    n0, n1 = ins.shape
    if n0 != n1:
        return None
    if not (np.array_equal(ins, ins[::-1]) and np.array_equal(ins, ins[:, ::-1]) and np.array_equal(ins, ins.T)):
        return None
    punct = set(G.punctures)
    for a, b in list(punct):
        if {(2 * n0 - a, b), (a, 2 * n1 - b), (b, a)} - punct:
            return None
    L = G.level
    two_c = 2 * G.offset[0] + n0  # twice the centre, in raster-cell units

    def images(k, i, j):
        if k > L:
            return [(i, j)]
        m = two_c // 2 ** (L - k) if two_c % 2 ** (L - k) == 0 else None
        if m is None:
            return [(i, j)]
        out = []
        for a, b in ((i, j), (j, i)):
            for fa in (False, True):
                for fb in (False, True):
                    out.append((m - 1 - a if fa else a, m - 1 - b if fb else b))
        return out

    if G.offset[0] != G.offset[1]:
        return None
    return images


def _solve_cube(args):
    G, lo, side, center, gamma, n_theta = args
    cap = cube_capacity(G, lo, side, n_theta=n_theta)
    ug = u_alpha(G, center, gamma, n_theta=n_theta).value
    return cap, ug


@dataclass
class CubeTestReport:
    k: np.ndarray
    corner: np.ndarray
    cap: np.ndarray
    u_gamma: np.ndarray
    puncture_adjacent: np.ndarray
    gamma: float
    d1: float
    d1_kappa: float
    d2: float
    slack: float = SOLVER_SLACK
    solves: int = 0

    @property
    def sandwich_ok(self) -> np.ndarray:
        lo_ok = self.u_gamma <= self.cap * (1 + self.slack)
        hi_ok = self.cap <= self.d1 * self.u_gamma * (1 + self.slack)
        return lo_ok & hi_ok

    def min_cap(self, k_max: int | None = None, puncture_adjacent: bool | None = None) -> float:
        sel = np.ones(len(self.k), dtype=bool)
        if k_max is not None:
            sel &= self.k <= k_max
        if puncture_adjacent is not None:
            sel &= self.puncture_adjacent == puncture_adjacent
        return float(self.cap[sel].min()) if sel.any() else math.nan

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["k", "corner_x", "corner_y", "cap", "u_gamma", "sandwich_ok", "puncture_adjacent"])
        for row in zip(self.k, self.corner, self.cap, self.u_gamma, self.sandwich_ok, self.puncture_adjacent):
            k, c, cap, ug, ok, pa = row
            w.writerow([int(k), int(c[0]), int(c[1]), f"{cap:.8g}", f"{ug:.8g}", bool(ok), bool(pa)])
        return buf.getvalue()

    def summary(self) -> dict:
        out = {"cubes": int(len(self.k)), "solves": self.solves, "gamma": self.gamma, "d1": self.d1,
               "d1_kappa": self.d1_kappa, "d2": self.d2, "min_cap": self.min_cap(),
               "sandwich_violations": int(np.sum(~self.sandwich_ok))}
        if self.puncture_adjacent.any():
            out["min_cap_puncture_adjacent"] = self.min_cap(puncture_adjacent=True)
            out["min_cap_other"] = self.min_cap(puncture_adjacent=False)
        return out


def whitney_constants(n: int = 2) -> dict:
    gamma = 1 / (9 * math.sqrt(n))
    eta = math.sqrt(n) / (1 + 2 * math.sqrt(n))
    d1 = (9 * math.sqrt(n) / (1 + 2 * math.sqrt(n))) ** (n - 1)
    d1_kappa = moduli_sandwich_factor(gamma, eta, n)
    # a point of Q is within quasihyperbolic distance 1/2 of the centre:
    # |z - m| <= d(Q)/2 along a segment that stays d(Q) away from the boundary
    d3, _ = harnack_transfer(gamma, 0.5, n)
    return {"gamma": gamma, "eta": eta, "d1": d1, "d1_kappa": d1_kappa, "d3": d3, "d2": d1 * d3}


def whitney_cube_test(G: DomainMask, D: WhitneyDecomposition, n_theta: int = 128, jobs: int = 1,
                      symmetry: bool = True) -> CubeTestReport:
    """Compare ``cap(R^2 \\ Q, ∂G)`` with ``u_gamma`` at the centre of every Whitney square."""
    const = whitney_constants(2)
    gamma = const["gamma"]
    images = _dihedral(G) if symmetry else None
    keys = []
    for k, c in zip(D.k, D.corner):
        k, i, j = int(k), int(c[0]), int(c[1])
        keys.append((k, min(images(k, i, j))) if images else (k, (i, j)))
    unique = sorted(set(keys))
    tasks = []
    for k, (i, j) in unique:
        side = 2.0**-k
        lo = np.array([i, j], dtype=float) * side
        tasks.append((G, lo, side, lo + side / 2, gamma, n_theta))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_solve_cube, tasks, chunksize=8))
    else:
        results = [_solve_cube(t) for t in tasks]
    table = dict(zip(unique, results))
    cap = np.array([table[key][0] for key in keys])
    ug = np.array([table[key][1] for key in keys])

    adj = np.zeros(len(D), dtype=bool)
    punct = G.puncture_points()
    if len(punct):
        dq = cube_boundary_distance(D, G)
        lo = D.lo
        side = D.side[:, None]
        dp = np.full(len(D), np.inf)
        for p in punct:
            gap = np.maximum(0.0, np.maximum(lo - p, p - (lo + side)))
            dp = np.minimum(dp, np.sqrt((gap**2).sum(axis=1)))
        adj = dp <= dq * (1 + 1e-12)
    return CubeTestReport(D.k.copy(), D.corner.copy(), cap, ug, adj, gamma, const["d1"], const["d1_kappa"],
                          const["d2"], solves=2 * len(unique))


def harnack_correction(alpha: float, n: int = 2) -> tuple[float, float]:
    """Factor ``a`` with ``u_alpha(x) >= a u_alpha(m)`` for ``x`` in the Whitney square centred at ``m``."""
    f, s = harnack_transfer(alpha, 0.5, n)
    return 1.0 / f, s


@dataclass
class InfScan:
    inf_estimate: float
    argmin: tuple
    values: np.ndarray
    points: np.ndarray
    correction: float
    s: float
    alpha: float

    def lower_bound(self) -> float:
        """Lower bound for ``inf u_alpha`` over all of ``G`` implied by the scan."""
        return self.correction * self.inf_estimate


def inf_scan(G: DomainMask, alpha: float = 0.5, D: WhitneyDecomposition | None = None, k_max: int = 6,
             points=None, n_theta: int = 128, jobs: int = 1) -> InfScan:
    """Minimum of ``u_alpha`` over Whitney-square centres (or over given ``points``)."""
    if points is None:
        if D is None:
            D = decompose(G, 0, min(k_max, G.level))
        points = D.centers
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) == 0:
        raise DomainError("no sample points")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            vals = list(ex.map(_u_value, [(G, p, alpha, n_theta) for p in pts], chunksize=8))
    else:
        vals = [_u_value((G, p, alpha, n_theta)) for p in pts]
    vals = np.asarray(vals)
    i = int(np.argmin(vals))
    a, s = harnack_correction(alpha)
    return InfScan(float(vals[i]), tuple(pts[i].tolist()), vals, pts, a, s, alpha)


def _u_value(args):
    G, p, alpha, n_theta = args
    return u_alpha(G, p, alpha, n_theta=n_theta).value
