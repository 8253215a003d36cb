"""Sampled compact sets, Cantor-type generators and the uniform-perfectness estimator."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import DomainError
from .geom import set_diameter

UP_SAFETY = 8.0


@dataclass
class CompactSet:
    """Finite sample of a compact set; every point of the set is within ``resolution`` of the sample."""

    points: np.ndarray
    resolution: float
    n: int = 2

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] < 2:
            raise DomainError("a compact set sample needs at least two points")
        if pts.shape[1] != self.n:
            raise DomainError(f"points have dimension {pts.shape[1]}, expected {self.n}")
        if not self.resolution > 0:
            raise DomainError("resolution must be positive")
        self.points = pts
        if self.diameter == 0:
            raise DomainError("sample has zero diameter")

    @property
    def diameter(self) -> float:
        return set_diameter(self.points)

    def __len__(self):
        return self.points.shape[0]

    def transformed(self, scale: float = 1.0, shift=None) -> "CompactSet":
        shift = np.zeros(self.n) if shift is None else np.asarray(shift, dtype=float)
        return CompactSet(self.points * scale + shift, self.resolution * abs(scale), self.n)

    def restrict(self, center, radius: float) -> np.ndarray:
        """Sample points in the closed ball ``B(center, radius)``."""
        d = np.linalg.norm(self.points - np.asarray(center, dtype=float), axis=1)
        return self.points[d <= radius * (1 + 1e-12)]

    def to_json(self) -> dict:
        return {"n": self.n, "resolution": self.resolution, "points": self.points.tolist()}

    @classmethod
    def from_json(cls, data) -> "CompactSet":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls(np.asarray(data["points"], dtype=float), float(data["resolution"]), int(data["n"]))
        except KeyError as exc:
            raise DomainError(f"compact set JSON lacks field {exc.args[0]!r}") from None


def cantor_middle_third(depth: int) -> CompactSet:
    """Endpoints of the ``2^depth`` intervals of the middle-third construction, on the x-axis."""
    if depth < 0:
        raise DomainError("depth must be non-negative")
    # left endpoints in units of 3^-depth: base-3 numbers with digits 0 and 2
    left = np.zeros(1, dtype=np.int64)
    for _ in range(depth):
        left = np.concatenate([3 * left, 3 * left + 2])
    scale = 3.0 ** -depth
    xs = np.sort(np.concatenate([left, left + 1])) * scale
    pts = np.column_stack([xs, np.zeros_like(xs)])
    return CompactSet(pts, scale, 2)


@dataclass
class NestedBallFamily:
    p: int
    c: float
    root_radius: float
    generations: int
    centers: list = field(default_factory=list)
    radii: list = field(default_factory=list)
    parents: list = field(default_factory=list)
    mode: str = "hdim"

    def check(self) -> list[str]:
        """Violations of sibling disjointness or child-in-parent nesting (empty when valid)."""
        problems = []
        for k in range(1, len(self.centers)):
            cen, rad, par = self.centers[k], self.radii[k], self.parents[k]
            pc = self.centers[k - 1][par]
            pr = self.radii[k - 1]
            slack = 1e-12 * pr
            outside = np.linalg.norm(cen - pc, axis=1) + rad > pr + slack
            for idx in np.flatnonzero(outside):
                problems.append(f"generation {k}: ball {idx} not inside its parent")
            for parent in np.unique(par):
                sib = cen[par == parent]
                if len(sib) > 1:
                    gaps = pdist(sib)
                    if gaps.min() <= 2 * rad + slack:
                        problems.append(f"generation {k}: children of ball {parent} overlap")
        return problems


def nested_ball_cantor(p: int = 2, c: float = 0.4, r: float = 1.0, depth: int = 6, seed: int = 0,
                       center=(0.0, 0.0), mode: str | None = None):
    """Random nested-ball Cantor family and the sample formed by its leaf centres.

    ``mode="hdim"`` (p = 2): radii shrink by ``c/3``; one child keeps the parent
    centre and the other sits at a distance in ``(2 c R/3, 2 R/3)`` in a random
    direction.  ``mode="general"``: ``p`` children of radius ``c R`` placed
    evenly (with random rotation) on the circle of radius ``(1 - c) R``.
    """
    if not 0 < c < 1:
        raise DomainError("c must lie in (0, 1)")
    if r <= 0 or depth < 0:
        raise DomainError("need r > 0 and depth >= 0")
    if mode is None:
        mode = "hdim" if p == 2 else "general"
    if mode == "hdim" and p != 2:
        raise DomainError("the c/3 construction uses exactly two children")
    if mode == "general":
        if p < 2:
            raise DomainError("need p >= 2 children")
        if (1 - c) * math.sin(math.pi / p) <= c:
            raise DomainError(f"{p} disjoint children of relative radius {c} do not fit in the parent")
    elif mode != "hdim":
        raise DomainError(f"unknown mode {mode!r}")

    rng = np.random.default_rng(seed)
    center = np.asarray(center, dtype=float)
    fam = NestedBallFamily(p, c, r, depth, [center[None, :]], [r], [np.zeros(1, dtype=np.int64)], mode)
    for _ in range(depth):
        parent_c = fam.centers[-1]
        parent_r = fam.radii[-1]
        m = len(parent_c)
        if mode == "hdim":
            dist = rng.uniform(2 * c * parent_r / 3, 2 * parent_r / 3, size=m)
            # keep strictly inside the open band
            dist = np.clip(dist, 2 * c * parent_r / 3 * (1 + 1e-9), 2 * parent_r / 3 * (1 - 1e-9))
            ang = rng.uniform(0, 2 * math.pi, size=m)
            moved = parent_c + dist[:, None] * np.column_stack([np.cos(ang), np.sin(ang)])
            kids = np.empty((2 * m, 2))
            kids[0::2] = parent_c
            kids[1::2] = moved
            parents = np.repeat(np.arange(m), 2)
            radius = c * parent_r / 3
        else:
            rot = rng.uniform(0, 2 * math.pi, size=m)
            ang = rot[:, None] + 2 * math.pi * np.arange(p)[None, :] / p
            ring = (1 - c) * parent_r
            offs = np.stack([np.cos(ang), np.sin(ang)], axis=-1) * ring
            kids = (parent_c[:, None, :] + offs).reshape(-1, 2)
            parents = np.repeat(np.arange(m), p)
            radius = c * parent_r
        fam.centers.append(kids)
        fam.radii.append(radius)
        fam.parents.append(parents)
    problems = fam.check()
    if problems:
        raise DomainError("nested-ball construction failed: " + "; ".join(problems[:3]))
    leaves = fam.centers[-1]
    if depth == 0:
        e1 = np.array([r, 0.0])
        leaves = np.vstack([center, center + e1, center - e1])
    return fam, CompactSet(leaves, fam.radii[-1], 2)


@dataclass
class UPEstimate:
    c_hat: float
    center: np.ndarray
    radius: float
    r_lo: float
    r_hi: float

    def __iter__(self):
        yield self.c_hat
        yield (self.center, self.radius)


def _radius_window(E: CompactSet, safety: float):
    r_lo = safety * E.resolution
    r_hi = E.diameter / 2
    if not r_lo < r_hi:
        raise DomainError(
            f"no admissible radius: {safety:g} x resolution = {r_lo:g} is not below d(E)/2 = {r_hi:g}")
    return r_lo, r_hi


def up_parameter_estimate(E: CompactSet, safety: float = UP_SAFETY) -> UPEstimate:
    """Smallest gap ratio ``D_a(r)/r`` over centres ``a`` in the sample and radii in the admissible window.

    ``D_a(r)`` is the largest distance ``|x - a| < r`` with ``x`` in the sample;
    radii run over ``(safety * resolution, d(E)/2)``.  For radii between two
    consecutive sorted distances ``d_i < r <= d_{i+1}`` the ratio is ``d_i / r``,
    so only the right ends of these gaps (clipped to ``d(E)/2``) matter.
    """
    r_lo, r_hi = _radius_window(E, safety)
    pts = E.points
    best = (math.inf, 0, r_hi)
    block = max(1, 4_000_000 // len(pts))
    for start in range(0, len(pts), block):
        d = np.sort(cdist(pts[start:start + block], pts), axis=1)
        lower = d[:, :-1]
        upper = np.minimum(d[:, 1:], r_hi)
        ok = (d[:, 1:] > r_lo) & (lower < r_hi)
        ratio = np.where(ok, lower / np.where(ok, upper, 1.0), np.inf)
        flat = int(np.argmin(ratio))
        i, j = divmod(flat, ratio.shape[1])
        if ratio[i, j] < best[0]:
            best = (float(ratio[i, j]), start + i, float(upper[i, j]))
    if not math.isfinite(best[0]):
        raise DomainError("no admissible gap found")
    return UPEstimate(best[0], pts[best[1]].copy(), best[2], r_lo, r_hi)


def up_parameter_scan(E: CompactSet, safety: float = UP_SAFETY) -> float:
    """Second, loop-based evaluation of the same estimator (kept as an oracle).

    For each centre the ratio ``D_a(r)/r`` is evaluated at every candidate radius
    (each sample distance inside the window, plus the upper end of the window),
    with ``D_a`` found by binary search.
    """
    r_lo, r_hi = _radius_window(E, safety)
    best = math.inf
    for a in E.points:
        dist = np.sort(np.sqrt(((E.points - a) ** 2).sum(axis=1)))
        cand = dist[(dist > r_lo) & (dist <= r_hi)]
        cand = np.append(cand, r_hi)
        below = np.searchsorted(dist, cand, side="left") - 1
        ratio = dist[below] / cand
        best = min(best, float(ratio.min()))
    return best


def hausdorff_content_upper(E, beta: float, max_level: int = 12, min_level: int | None = None) -> float:
    """Dyadic cover estimate of the ``r^beta`` Hausdorff content.

    At each level the sample is covered by the dyadic cells of side ``2^-level``
    that contain a sample point; each cell counts ``(half its diameter)^beta``.
    The smallest total over levels ``min_level .. max_level`` is returned.
    """
    if not beta > 0:
        raise DomainError("beta must be positive")
    pts = np.atleast_2d(np.asarray(getattr(E, "points", E), dtype=float))
    if pts.size == 0:
        return 0.0
    n = pts.shape[1]
    if min_level is None:
        span = float(np.ptp(pts, axis=0).max())
        min_level = -int(math.ceil(math.log2(span))) - 1 if span > 0 else max_level
        min_level = min(min_level, max_level)
    best = math.inf
    for level in range(min_level, max_level + 1):
        side = 2.0 ** -level
        cells = np.floor(pts / side).astype(np.int64)
        count = len(np.unique(cells, axis=0))
        best = min(best, count * (math.sqrt(n) * side / 2) ** beta)
    return best
