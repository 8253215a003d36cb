"""Points, balls, annuli and a few distance functions in R^n."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


class _Infinity:
    """The point at infinity of the one-point compactification."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INFINITY"


INFINITY = _Infinity()


def _as_point(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DomainError("a point must be a 1-D coordinate vector")
    return arr


def chordal_distance(x, y) -> float:
    """Chordal (spherical) distance q(x, y); either argument may be ``INFINITY``."""
    x_inf = x is INFINITY
    y_inf = y is INFINITY
    if x_inf and y_inf:
        return 0.0
    if x_inf or y_inf:
        p = _as_point(y if x_inf else x)
        return 1.0 / math.sqrt(1.0 + float(p @ p))
    p, q = _as_point(x), _as_point(y)
    if p.shape != q.shape:
        raise DomainError(f"dimension mismatch: {p.shape[0]} vs {q.shape[0]}")
    diff = p - q
    return float(math.sqrt(diff @ diff) / (math.sqrt(1.0 + p @ p) * math.sqrt(1.0 + q @ q)))


def _cloud(points) -> np.ndarray:
    pts = getattr(points, "points", points)
    arr = np.atleast_2d(np.asarray(pts, dtype=float))
    if arr.size == 0:
        raise DomainError("empty set")
    return arr


def set_distance(J, K) -> float:
    """Euclidean distance between two finite point sets (or CompactSet objects)."""
    from scipy.spatial import cKDTree

    a, b = _cloud(J), _cloud(K)
    if a.shape[1] != b.shape[1]:
        raise DomainError("dimension mismatch between sets")
    dist, _ = cKDTree(b).query(a)
    return float(dist.min())


def set_diameter(J) -> float:
    """Diameter of a finite point set; uses the convex hull when it is large."""
    pts = _cloud(J)
    if len(pts) > 2000:
        from scipy.spatial import ConvexHull
        from scipy.spatial import QhullError

        try:
            pts = pts[ConvexHull(pts).vertices]
        except (QhullError, ValueError):
            pass  # degenerate (e.g. collinear) cloud: fall back to the full set
        if len(pts) > 2000 and pts.shape[1] == 2 and np.ptp(pts[:, 1]) == 0:
            return float(np.ptp(pts[:, 0]))
    from scipy.spatial.distance import pdist

    if len(pts) < 2:
        return 0.0
    return float(pdist(pts).max())


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float
    closed: bool = False

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("ball radius must be positive")

    def contains(self, points) -> np.ndarray:
        d = np.linalg.norm(np.atleast_2d(points) - np.asarray(self.center, dtype=float), axis=1)
        return d <= self.radius if self.closed else d < self.radius


@dataclass(frozen=True)
class Annulus:
    """Closed annulus ``{u : inner <= |u - center| <= outer}``."""

    center: tuple
    inner: float
    outer: float

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise DomainError("annulus needs 0 < inner < outer")

    def contains(self, points, rtol: float = 1e-12) -> np.ndarray:
        d = np.linalg.norm(np.atleast_2d(points) - np.asarray(self.center, dtype=float), axis=1)
        return (d >= self.inner * (1 - rtol)) & (d <= self.outer * (1 + rtol))

    @property
    def ratio(self) -> float:
        return self.outer / self.inner

    def sample(self, count: int, rng=None) -> np.ndarray:
        """Points uniformly spread over the annulus (radius uniform in log scale)."""
        rng = np.random.default_rng(rng)
        n = len(self.center)
        direction = rng.normal(size=(count, n))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = np.exp(rng.uniform(math.log(self.inner), math.log(self.outer), size=count))
        radius[0:1] = self.inner
        radius[1:2] = self.outer
        return np.asarray(self.center, dtype=float) + direction * radius[:, None]


def superannulus(x1, x2, a: float, b: float, tau: float = 2.0) -> Annulus:
    """One annulus ``R(w, tau^2 b, a / tau^2)`` containing ``R(x_j, tau b, a / tau)`` for both centres."""
    p, q = _as_point(x1), _as_point(x2)
    if p.shape != q.shape:
        raise DomainError("dimension mismatch")
    if not 0 < a < b:
        raise DomainError("superannulus needs 0 < a < b")
    if tau < 2:
        raise DomainError("superannulus needs tau >= 2")
    sep = float(np.linalg.norm(p - q))
    if sep >= a / tau**2:
        raise DomainError(f"centres too far apart: |x1 - x2| = {sep:g} >= a / tau^2 = {a / tau**2:g}")
    w = 0.5 * (p + q)
    return Annulus(tuple(w.tolist()), a / tau**2, tau**2 * b)


def radial_dilatation(alpha: float, beta: float, n: int = 2) -> tuple[float, float]:
    """Exponent ``a`` of the radial map sending radius ``alpha`` to ``beta`` and its dilatation ``K``."""
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise DomainError("radial_dilatation needs alpha, beta in (0, 1)")
    if n < 2:
        raise DomainError("n must be at least 2")
    a = math.log(beta) / math.log(alpha)
    return a, max(a ** (n - 1), a ** (1 - n))
