"""Numerical conformal capacity of planar condensers.

A condenser ``(A, C)`` is rasterized onto a rectangular array of cells.  Cells of
the plate ``C`` carry the value 1, cells outside ``A`` carry 0 and the remaining
cells are unknowns of the 5-point discrete Laplace equation.  The capacity is
the discrete Dirichlet energy

    sum over edges  w_e * (u_i - u_j)**2,

where ``w_e = h_other / h_axis`` (``w_e = 1`` on a square grid).  In the plane
the continuous Dirichlet integral is conformally invariant, so the same energy
computed on a uniform grid in the log-polar coordinates ``log|z - z0|, arg(z - z0)``
is a valid discretization; that is how condensers with features on very
different scales are handled.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components

from .errors import DegenerateCondenserError, DomainError, NonConvergenceError
from .specfun import sphere_area

Predicate = Callable[[np.ndarray], np.ndarray]

_BC_VALUES = ("dirichlet", "neumann", "periodic")
MIN_ANCHOR_STEPS = 4


def rle_encode(mask: np.ndarray) -> list[int]:
    """Run lengths of a flattened boolean mask, starting with a run of False."""
    flat = np.asarray(mask, dtype=bool).ravel()
    if flat.size == 0:
        return []
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return [int(r) for r in runs]


def rle_decode(runs: Sequence[int], shape: Sequence[int]) -> np.ndarray:
    values = np.zeros(len(runs), dtype=bool)
    values[1::2] = True
    flat = np.repeat(values, np.asarray(runs, dtype=np.int64))
    size = int(np.prod(shape))
    if flat.size != size:
        raise DomainError(f"run-length data covers {flat.size} cells, expected {size}")
    return flat.reshape(tuple(shape))


@dataclass
class GridCondenser:
    """Raster condenser: open set ``A`` and plate ``C`` as boolean cell masks.

    ``bc`` gives, per array axis, what lies beyond the first and last layer of
    cells: ``"dirichlet"`` (value 0), ``"neumann"`` (nothing, natural boundary)
    or ``"periodic"`` (the axis wraps around).
    """

    a_mask: np.ndarray
    c_mask: np.ndarray
    spacing: tuple[float, float] = (1.0, 1.0)
    origin: tuple[float, float] = (0.0, 0.0)
    bc: tuple[tuple[str, str], tuple[str, str]] = (("dirichlet", "dirichlet"), ("dirichlet", "dirichlet"))
    kind: str = "cartesian"
    meta: dict = field(default_factory=dict)
    # edge_frac[axis][i, j]: position of the A/C interface on the edge from cell
    # (i, j) to the next cell along ``axis``, as a fraction of the edge measured
    # from the free cell (1 = at the fixed cell's centre, the staircase default)
    edge_frac: tuple | None = None

    def __post_init__(self):
        self.a_mask = np.asarray(self.a_mask, dtype=bool)
        self.c_mask = np.asarray(self.c_mask, dtype=bool)
        if self.a_mask.ndim != 2 or self.a_mask.shape != self.c_mask.shape:
            raise DomainError("A and C masks must be 2-D arrays of equal shape")
        self.spacing = tuple(float(h) for h in self.spacing)
        if min(self.spacing) <= 0:
            raise DomainError("grid spacing must be positive")
        self.origin = tuple(float(o) for o in self.origin)
        self.bc = tuple((str(lo), str(hi)) for lo, hi in self.bc)
        for lo, hi in self.bc:
            if lo not in _BC_VALUES or hi not in _BC_VALUES:
                raise DomainError(f"unknown boundary condition {lo!r}/{hi!r}")
            if (lo == "periodic") != (hi == "periodic"):
                raise DomainError("a periodic axis must be periodic at both ends")
        if (self.c_mask & ~self.a_mask).any():
            raise DomainError("plate C must be contained in the open set A")
        if not self.c_mask.any():
            raise DomainError("plate C is empty")
        if not (self.a_mask & ~self.c_mask).any():
            raise DomainError("A minus C is empty")
        if self.edge_frac is not None:
            fr = tuple(np.asarray(f, dtype=float) for f in self.edge_frac)
            if len(fr) != 2 or any(f.shape != self.a_mask.shape for f in fr):
                raise DomainError("edge fractions must be two arrays shaped like the masks")
            if any(((f <= 0) | (f > 1)).any() for f in fr):
                raise DomainError("edge fractions must lie in (0, 1]")
            self.edge_frac = fr

    @property
    def shape(self) -> tuple[int, int]:
        return self.a_mask.shape

    @property
    def h(self) -> float:
        return self.spacing[0]

    def upsample(self, factor: int = 2) -> "GridCondenser":
        """Same staircase geometry on a grid ``factor`` times finer."""
        rep = lambda m: np.repeat(np.repeat(m, factor, axis=0), factor, axis=1)
        if self.edge_frac is not None:
            raise DomainError("upsampling is only defined for staircase condensers")
        return GridCondenser(
            rep(self.a_mask), rep(self.c_mask),
            spacing=(self.spacing[0] / factor, self.spacing[1] / factor),
            origin=self.origin, bc=self.bc, kind=self.kind, meta=dict(self.meta),
        )

    def scaled(self, factor: float) -> "GridCondenser":
        return GridCondenser(
            self.a_mask, self.c_mask,
            spacing=(self.spacing[0] * factor, self.spacing[1] * factor),
            origin=(self.origin[0] * factor, self.origin[1] * factor),
            bc=self.bc, kind=self.kind, meta=dict(self.meta), edge_frac=self.edge_frac,
        )

    def to_json(self) -> dict:
        extra = {} if self.edge_frac is None else {"edge_frac": [f.tolist() for f in self.edge_frac]}
        return extra | {
            "shape": list(self.shape),
            "spacing": list(self.spacing),
            "origin": list(self.origin),
            "bc": [list(b) for b in self.bc],
            "kind": self.kind,
            "A_rle": rle_encode(self.a_mask),
            "C_rle": rle_encode(self.c_mask),
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, data: dict) -> "GridCondenser":
        try:
            shape = data["shape"]
            a = rle_decode(data["A_rle"], shape)
            c = rle_decode(data["C_rle"], shape)
        except KeyError as exc:
            raise DomainError(f"condenser JSON lacks field {exc.args[0]!r}") from None
        bc = data.get("bc", [["dirichlet", "dirichlet"], ["dirichlet", "dirichlet"]])
        return cls(a, c, spacing=tuple(data.get("spacing", (1.0, 1.0))),
                   origin=tuple(data.get("origin", (0.0, 0.0))),
                   bc=tuple(tuple(b) for b in bc), kind=data.get("kind", "cartesian"),
                   meta=data.get("meta", {}), edge_frac=data.get("edge_frac"))


@dataclass
class SolveReport:
    capacity: float
    iterations: int
    residual: float
    unknowns: int
    method: str
    refinement_estimates: list | None = None
    extrapolated: float | None = None

    def to_json(self) -> dict:
        return asdict(self)


def _edges(cond: GridCondenser):
    """Interior edges (p, q, w) and boundary ghost edges (p, w) as flat index arrays."""
    n0, n1 = cond.shape
    idx = np.arange(n0 * n1).reshape(n0, n1)
    h0, h1 = cond.spacing
    pairs_p, pairs_q, pairs_w = [], [], []
    ghost_p, ghost_w = [], []
    for axis, w in ((0, h1 / h0), (1, h0 / h1)):
        lo_bc, hi_bc = cond.bc[axis]
        frac = None if cond.edge_frac is None else cond.edge_frac[axis].ravel()
        first = np.take(idx, np.arange(idx.shape[axis] - 1), axis=axis).ravel()
        second = np.take(idx, np.arange(1, idx.shape[axis]), axis=axis).ravel()
        pairs_p.append(first)
        pairs_q.append(second)
        pairs_w.append(np.full(first.size, w) if frac is None else w / frac[first])
        if lo_bc == "periodic":
            if idx.shape[axis] > 2:
                last = np.take(idx, idx.shape[axis] - 1, axis=axis).ravel()
                head = np.take(idx, 0, axis=axis).ravel()
                pairs_p.append(last)
                pairs_q.append(head)
                pairs_w.append(np.full(last.size, w) if frac is None else w / frac[last])
            continue
        if lo_bc == "dirichlet":
            cells = np.take(idx, 0, axis=axis).ravel()
            ghost_p.append(cells)
            ghost_w.append(np.full(cells.size, w))
        if hi_bc == "dirichlet":
            cells = np.take(idx, idx.shape[axis] - 1, axis=axis).ravel()
            ghost_p.append(cells)
            ghost_w.append(np.full(cells.size, w))
    p = np.concatenate(pairs_p)
    q = np.concatenate(pairs_q)
    w = np.concatenate(pairs_w)
    gp = np.concatenate(ghost_p) if ghost_p else np.zeros(0, dtype=np.int64)
    gw = np.concatenate(ghost_w) if ghost_w else np.zeros(0)
    return p, q, w, gp, gw


def dirichlet_energy(cond: GridCondenser, u: np.ndarray) -> float:
    """Discrete Dirichlet energy of the cell values ``u`` (ghost cells count as 0)."""
    p, q, w, gp, gw = _edges(cond)
    flat = np.asarray(u, dtype=float).ravel()
    return float(np.sum(w * (flat[p] - flat[q]) ** 2) + np.sum(gw * flat[gp] ** 2))


def _preconditioner(matrix, name: str):
    if name == "jacobi":
        return sp.diags(1.0 / matrix.diagonal())
    if name == "amg":
        import pyamg

        ml = pyamg.smoothed_aggregation_solver(matrix, symmetry="symmetric", max_coarse=500)
        return ml.aspreconditioner(cycle="V")
    if name == "none":
        return None
    raise DomainError(f"unknown preconditioner {name!r}")


def solve_potential(cond: GridCondenser, tol: float = 1e-8, maxiter: int = 100_000,
                    method: str = "cg", precond: str = "amg"):
    """Discrete harmonic potential of ``cond``; returns ``(u, SolveReport)``."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    a = cond.a_mask.ravel()
    c = cond.c_mask.ravel()
    free = a & ~c
    value = c.astype(float)

    p, q, w, gp, gw = _edges(cond)
    # plate next to a zero-valued cell or a Dirichlet ghost
    touch = (c[p] & ~a[q]) | (c[q] & ~a[p])
    if touch.any() or c[gp].any():
        raise DegenerateCondenserError("plate C touches the boundary of A")

    nf = int(free.sum())
    fid = np.full(a.size, -1, dtype=np.int64)
    fid[free] = np.arange(nf)

    diag = np.zeros(nf)
    rhs = np.zeros(nf)
    np.add.at(diag, fid[gp[free[gp]]], gw[free[gp]])

    both = free[p] & free[q]
    np.add.at(diag, fid[p[both]], w[both])
    np.add.at(diag, fid[q[both]], w[both])
    for s, t in ((p, q), (q, p)):
        sel = free[s] & ~free[t]
        np.add.at(diag, fid[s[sel]], w[sel])
        np.add.at(rhs, fid[s[sel]], w[sel] * value[t[sel]])

    rows = fid[p[both]]
    cols = fid[q[both]]
    off = sp.coo_matrix((-w[both], (rows, cols)), shape=(nf, nf))
    matrix = (off + off.T + sp.diags(diag)).tocsr()

    # components of free cells with no path to a fixed value carry no energy
    anchored = np.zeros(nf, dtype=bool)
    anchored[fid[gp[free[gp]]]] = True
    for s, t in ((p, q), (q, p)):
        sel = free[s] & ~free[t]
        anchored[fid[s[sel]]] = True
    ncomp, labels = connected_components(matrix, directed=False)
    comp_ok = np.zeros(ncomp, dtype=bool)
    comp_ok[labels[anchored]] = True
    keep = comp_ok[labels]
    if not keep.all():
        matrix = matrix[keep][:, keep]
        rhs = rhs[keep]

    x = np.zeros(rhs.size)
    iterations = 0
    if rhs.size and np.any(rhs):
        if method == "direct":
            x = spla.spsolve(matrix.tocsc(), rhs)
            used = "direct"
        elif method == "cg":
            counter = {"n": 0}

            def _count(_xk):
                counter["n"] += 1

            m = _preconditioner(matrix, precond)
            x, info = spla.cg(matrix, rhs, rtol=tol, atol=0.0, maxiter=maxiter, M=m, callback=_count)
            iterations = counter["n"]
            used = f"cg+{precond}"
            if info != 0:
                res = float(np.linalg.norm(rhs - matrix @ x) / np.linalg.norm(rhs))
                raise NonConvergenceError(
                    f"CG stopped after {iterations} iterations with relative residual {res:.3e} > {tol:.1e}")
        else:
            raise DomainError(f"unknown method {method!r}")
        residual = float(np.linalg.norm(rhs - matrix @ x) / np.linalg.norm(rhs))
        if method == "cg" and residual > tol * 10:
            raise NonConvergenceError(f"relative residual {residual:.3e} exceeds tolerance {tol:.1e}")
    else:
        residual = 0.0
        used = method

    u_free = np.zeros(nf)
    u_free[keep] = x
    u = value.copy()
    u[free] = u_free
    u = u.reshape(cond.shape)
    energy = dirichlet_energy(cond, u)
    return u, SolveReport(capacity=energy, iterations=iterations, residual=residual,
                          unknowns=int(keep.sum()), method=used)


def solve_capacity(cond: GridCondenser, tol: float = 1e-8, refine: bool = False,
                   maxiter: int = 100_000, method: str = "cg", precond: str = "amg") -> SolveReport:
    """Capacity of a raster condenser.

    With ``refine`` the same staircase geometry is also solved on a grid twice as
    fine, and the first-order Richardson value ``2*v(h/2) - v(h)`` is reported.
    """
    _, report = solve_potential(cond, tol=tol, maxiter=maxiter, method=method, precond=precond)
    if refine:
        _, fine = solve_potential(cond.upsample(2), tol=tol, maxiter=maxiter, method=method, precond=precond)
        report.refinement_estimates = [(cond.h, report.capacity), (cond.h / 2, fine.capacity)]
        report.extrapolated = 2.0 * fine.capacity - report.capacity
    return report


# --- rasterizers ---------------------------------------------------------------------


def _sample_cells(pred: Predicate, lo, n_cells, h: float) -> np.ndarray:
    n0, n1 = (int(n) for n in n_cells)
    xs = lo[0] + (np.arange(n0) + 0.5) * h
    ys = lo[1] + (np.arange(n1) + 0.5) * h
    pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    return np.asarray(pred(pts), dtype=bool).reshape(n0, n1)


def cartesian_condenser(in_a: Predicate, in_c: Predicate, lo: Sequence[float], n_cells: Sequence[int],
                        h: float, bc: str = "dirichlet", **meta) -> GridCondenser:
    """Sample membership predicates at the centres of an ``n0 x n1`` grid of spacing ``h``."""
    a = _sample_cells(in_a, lo, n_cells, h)
    c = _sample_cells(in_c, lo, n_cells, h) & a
    return GridCondenser(a, c, spacing=(h, h), origin=(float(lo[0]), float(lo[1])),
                         bc=((bc, bc), (bc, bc)), kind="cartesian", meta=meta)


def logpolar_grid(center, r_min: float, r_max: float, n_theta: int = 256, anchors: Sequence[float] = ()):
    """Radii and angles of log-polar cell centres.

    ``r_min`` is the innermost cell centre.  When ``anchors`` are given, the radial
    step is adjusted (away from ``2*pi/n_theta``) so that the first anchor radius
    falls exactly on a cell centre, with at least ``MIN_ANCHOR_STEPS`` rows from
    ``r_min`` to it.
    """
    if not 0 < r_min < r_max:
        raise DomainError("log-polar grid needs 0 < r_min < r_max")
    if n_theta < 8:
        raise DomainError("n_theta must be at least 8")
    dtheta = 2 * math.pi / n_theta
    drho = dtheta
    for anchor in anchors:
        span = math.log(anchor / r_min)
        if span > 0:
            steps = max(MIN_ANCHOR_STEPS, round(span / dtheta))
            drho = span / steps
            break
    n_rho = int(math.ceil(math.log(r_max / r_min) / drho)) + 1
    rho = math.log(r_min) + drho * np.arange(n_rho)
    theta = dtheta * np.arange(n_theta)
    return np.exp(rho), theta, drho, dtheta


def cut_fractions(to_xy, a: np.ndarray, c: np.ndarray, in_a: Predicate, in_c: Predicate,
                  periodic: tuple[bool, bool], iterations: int = 40, floor: float = 1e-3) -> tuple:
    """Interface positions on edges between free and fixed cells, found by bisection.

    ``to_xy`` maps fractional array indices ``(m, 2)`` to physical points.  The
    returned arrays hold, for every edge from a cell to its successor along an
    axis, the fraction of the edge (from the free end) at which the fixed
    region begins; all other edges get 1.
    """
    free = a & ~c
    fixed_zero = ~a
    out = []
    for axis in (0, 1):
        frac = np.ones(a.shape)
        n = a.shape[axis]
        nxt = np.roll(np.arange(n), -1)
        if not periodic[axis]:
            nxt = nxt[:-1]
        src = np.arange(len(nxt))
        take = lambda m, ix: np.take(m, ix, axis=axis)
        f0, f1 = take(free, src), take(free, nxt)
        for start_free, other in ((f0, take(c, nxt) | take(fixed_zero, nxt)), (f1, take(c, src) | take(fixed_zero, src))):
            edge = start_free & other
            if not edge.any():
                continue
            ii, jj = np.nonzero(edge)
            # cell indices of the free end and the fixed end
            base = np.stack([ii, jj], axis=1).astype(float)
            k_src = src[ii] if axis == 0 else src[jj]
            k_nxt = nxt[ii] if axis == 0 else nxt[jj]
            forward = start_free is f0
            p_free = base.copy()
            p_fix = base.copy()
            p_free[:, axis] = k_src if forward else k_nxt
            p_fix[:, axis] = k_nxt if forward else k_src
            step = p_fix[:, axis] - p_free[:, axis]
            step = np.where(np.abs(step) > 1, -np.sign(step), step)  # periodic wrap
            fi, fj = p_fix[:, 0].astype(int), p_fix[:, 1].astype(int)
            plate = c[fi, fj]
            lo = np.zeros(len(ii))
            hi = np.ones(len(ii))
            for _ in range(iterations):
                mid = 0.5 * (lo + hi)
                q = p_free.copy()
                q[:, axis] += mid * step
                xy = to_xy(q)
                hit = np.where(plate, np.asarray(in_c(xy), bool), ~np.asarray(in_a(xy), bool))
                hi = np.where(hit, mid, hi)
                lo = np.where(hit, lo, mid)
            edge_ix = np.stack([ii, jj], axis=1)
            edge_ix[:, axis] = k_src
            val = np.maximum(hi, floor)
            # an edge can touch the fixed set from both ends only in degenerate
            # configurations; keep the nearer interface
            cur = frac[edge_ix[:, 0], edge_ix[:, 1]]
            frac[edge_ix[:, 0], edge_ix[:, 1]] = np.minimum(cur, val)
        out.append(frac)
    return tuple(out)


def logpolar_condenser(center, in_a: Predicate, in_c: Predicate, r_min: float, r_max: float,
                       n_theta: int = 256, anchors: Sequence[float] = (), inner_bc: str = "dirichlet",
                       outer_bc: str = "dirichlet", cut_cells: bool = True, **meta) -> GridCondenser:
    """Rasterize a condenser on a log-polar grid centred at ``center``.

    Axis 0 is ``log r`` and axis 1 is the (periodic) angle.  Everything inside the
    innermost radius or outside the outermost one is governed by ``inner_bc`` and
    ``outer_bc``.  With ``cut_cells`` the edges crossing the boundary of ``A``
    or ``C`` are weighted by the located interface position instead of the
    staircase rule.
    """
    center = np.asarray(center, dtype=float)
    radii, theta, drho, dtheta = logpolar_grid(center, r_min, r_max, n_theta, anchors)
    rr, tt = np.meshgrid(radii, theta, indexing="ij")
    pts = np.stack([center[0] + rr * np.cos(tt), center[1] + rr * np.sin(tt)], axis=-1).reshape(-1, 2)
    shape = rr.shape
    a = np.asarray(in_a(pts), dtype=bool).reshape(shape)
    c = np.asarray(in_c(pts), dtype=bool).reshape(shape) & a
    frac = None
    if cut_cells:
        rho0 = math.log(radii[0])

        def to_xy(q):
            r = np.exp(rho0 + q[:, 0] * drho)
            t = q[:, 1] * dtheta
            return np.stack([center[0] + r * np.cos(t), center[1] + r * np.sin(t)], axis=1)

        frac = cut_fractions(to_xy, a, c, in_a, in_c, (False, True))
    meta.update(center=center.tolist(), r_min=float(radii[0]), r_max=float(radii[-1]), n_theta=n_theta)
    return GridCondenser(a, c, spacing=(drho, dtheta), origin=(math.log(radii[0]), 0.0),
                         bc=((inner_bc, outer_bc), ("periodic", "periodic")), kind="logpolar", meta=meta,
                         edge_frac=frac)


def _disk(center, radius, closed=True):
    center = np.asarray(center, dtype=float)
    slack = 1e-12 * radius

    def pred(pts):
        d = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])
        return d <= radius + slack if closed else d < radius - slack

    return pred


# --- closed forms and ring helpers -----------------------------------------------------


def ring_modulus_exact(n: int, a: float, b: float) -> float:
    """Modulus of the curves joining the boundary spheres of the annulus ``a < |x| < b``."""
    if not 0 < a < b:
        raise DomainError("ring modulus needs 0 < a < b")
    return sphere_area(n) * math.log(b / a) ** (1 - n)


def annulus_condenser(a: float, b: float, cells_outer: int = 512) -> GridCondenser:
    """Cartesian raster of the condenser ``(B(0, b), closed B(0, a))``."""
    if not 0 < a < b:
        raise DomainError("annulus needs 0 < a < b")
    h = b / cells_outer
    n = 2 * cells_outer + 4
    lo = (-(cells_outer + 2) * h, -(cells_outer + 2) * h)
    return cartesian_condenser(_disk((0, 0), b, closed=False), _disk((0, 0), a), lo, (n, n), h,
                               a=a, b=b, cells_outer=cells_outer)


def fattened_plate(points: np.ndarray, radius: float, lo, n_cells, h) -> np.ndarray:
    """Cells of a Cartesian grid that meet the closed ``radius``-neighbourhood of ``points``."""
    n0, n1 = n_cells
    mask = np.zeros((n0, n1), dtype=bool)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        return mask
    rel = (pts - np.asarray(lo, dtype=float)) / h
    rad = radius / h
    base = np.floor(rel).astype(np.int64)
    reach = int(math.ceil(rad)) + 1
    for di in range(-reach, reach + 1):
        for dj in range(-reach, reach + 1):
            ci = base[:, 0] + di
            cj = base[:, 1] + dj
            gx = np.maximum(0.0, np.maximum(ci - rel[:, 0], rel[:, 0] - (ci + 1)))
            gy = np.maximum(0.0, np.maximum(cj - rel[:, 1], rel[:, 1] - (cj + 1)))
            hit = (gx * gx + gy * gy <= rad * rad) & (ci >= 0) & (ci < n0) & (cj >= 0) & (cj < n1)
            mask[ci[hit], cj[hit]] = True
    return mask


def cap_xEr(x, E, r: float, grid_level: int = 9, tol: float = 1e-8, return_report: bool = False, **solver):
    """Capacity of the condenser ``(B(x, 2r), E ∩ closed B(x, r))`` for a sampled set ``E``.

    Plate cells are the cells meeting the sample fattened by ``E.resolution``;
    the grid has ``2**grid_level`` cells across the outer ball.
    """
    if r <= 0:
        raise DomainError("cap(x, E, r) needs r > 0")
    x = np.asarray(x, dtype=float)
    pts = np.asarray(E.points, dtype=float)
    if pts.shape[1] != 2 or x.shape != (2,):
        raise DomainError("cap(x, E, r) is computed in the plane only")
    near = pts[np.linalg.norm(pts - x, axis=1) <= r * (1 + 1e-12)]
    if near.shape[0] == 0:
        raise DomainError("E does not meet the closed ball B(x, r)")
    cells = 2 ** grid_level
    h = 4 * r / cells
    n = cells + 4
    lo = x - (cells / 2 + 2) * h
    plate = fattened_plate(near, E.resolution, lo, (n, n), h)
    a_mask = _sample_cells(_disk(x, 2 * r, closed=False), lo, (n, n), h)
    cond = GridCondenser(a_mask, plate & a_mask, spacing=(h, h), origin=(float(lo[0]), float(lo[1])),
                         meta={"x": x.tolist(), "r": r, "fattening": E.resolution})
    report = solve_capacity(cond, tol=tol, **solver)
    return report if return_report else report.capacity


def ringcap_lower(m: float, in_ball: bool = False) -> float:
    """Lower bound ``tau_2(4m^2 + 4m)`` for continua at relative distance ``m`` (halved inside the unit disk)."""
    from .specfun import teichmuller_tau2

    if m <= 0:
        raise DomainError("relative distance m must be positive")
    value = teichmuller_tau2(4 * m * m + 4 * m)
    return value / 2 if in_ball else value


def teichmuller_ring_condenser(s: float, n_theta: int = 256, r_min: float = 1e-4,
                               far: float = 1e6) -> GridCondenser:
    """Log-polar raster of the Teichmüller ring with plates ``[-1, 0]`` and ``[s, inf)``.

    The grid is centred at 0, so both plates lie on the rays ``arg z = pi`` and
    ``arg z = 0``.  The ray is truncated at ``far * max(s, 1)`` with a natural
    boundary beyond, which slightly underestimates the modulus.
    """
    if s <= 0:
        raise DomainError("Teichmüller parameter s must be positive")
    if n_theta % 2:
        raise DomainError("n_theta must be even so that both rays are grid rows")
    dtheta = 2 * math.pi / n_theta
    # put both r = 1 and r = s on cell centres
    drho = dtheta
    if abs(math.log(s)) > 0:
        drho = abs(math.log(s)) / max(1, round(abs(math.log(s)) / dtheta))
    steps_in = int(math.ceil(math.log(1 / r_min) / drho))
    r0 = math.exp(-steps_in * drho)
    r_max = far * max(s, 1.0)
    half = n_theta // 2

    radii, theta, drho_used, _ = logpolar_grid((0, 0), r0, r_max, n_theta, anchors=(1.0,))
    rr, tt = np.meshgrid(radii, np.arange(n_theta), indexing="ij")
    tol = 1e-9
    c_mask = ((tt == half) & (rr <= 1 + tol)) | (np.arange(len(radii))[:, None] == 0)
    zero = (tt == 0) & (rr >= s * (1 - tol))
    a_mask = ~zero
    return GridCondenser(a_mask, c_mask & a_mask, spacing=(drho_used, dtheta),
                         origin=(math.log(radii[0]), 0.0),
                         bc=(("neumann", "neumann"), ("periodic", "periodic")), kind="logpolar",
                         meta={"s": s, "n_theta": n_theta, "r_min": r0, "r_max": float(radii[-1])})


def teichmuller_ring_capacity(s: float, n_theta: int = 256, tol: float = 1e-8, **solver) -> float:
    return solve_capacity(teichmuller_ring_condenser(s, n_theta=n_theta), tol=tol, **solver).capacity


def segments_condenser(seg1, seg2, n_theta: int = 256, far: float = 1e5, **meta) -> GridCondenser:
    """Two collinear segments on the real axis, ``seg1`` at potential 1 and ``seg2`` at 0.

    The grid is centred at the midpoint of the gap so that both segments lie on
    grid rows; a natural boundary is used at the small inner circle and far away.
    Each plate fills one row of cells, which thickens it by about half a cell, so
    the value approaches the modulus from above as ``n_theta`` grows (about 0.5%
    high at ``n_theta = 256`` for the Teichmüller-type pair ``[-1, 0], [2, 1000]``).
    """
    (a1, b1), (a2, b2) = sorted([tuple(sorted(seg1)), tuple(sorted(seg2))])
    if not b1 < a2:
        raise DomainError("segments must be disjoint")
    flip = tuple(sorted(seg1)) != (a1, b1)
    mid = 0.5 * (b1 + a2)
    gap = 0.5 * (a2 - b1)
    extent = max(b2 - mid, mid - a1)
    if n_theta % 2:
        raise DomainError("n_theta must be even")
    radii, theta, drho, dtheta = logpolar_grid((mid, 0), gap * 1e-3, far * extent, n_theta, anchors=(gap,))
    rr, tt = np.meshgrid(radii, np.arange(n_theta), indexing="ij")
    tol = 1e-9
    half = n_theta // 2
    left = (tt == half) & (rr >= (mid - b1) * (1 - tol)) & (rr <= (mid - a1) * (1 + tol))
    right = (tt == 0) & (rr >= (a2 - mid) * (1 - tol)) & (rr <= (b2 - mid) * (1 + tol))
    one, zero = (right, left) if flip else (left, right)
    return GridCondenser(~zero, one, spacing=(drho, dtheta), origin=(math.log(radii[0]), 0.0),
                         bc=(("neumann", "neumann"), ("periodic", "periodic")), kind="logpolar",
                         meta=dict(meta, center=[mid, 0.0]))
