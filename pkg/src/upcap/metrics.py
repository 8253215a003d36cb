"""Distance-ratio metric, a graph approximation of the quasihyperbolic metric, Harnack chains."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .domain import DomainMask
from .errors import DomainError

# A shortest path on the 8-neighbour lattice is at most this factor longer than
# the straight segment it replaces (worst direction: 22.5 degrees off an axis).
CHORD_FACTOR = 1.0 / math.cos(math.pi / 8)


def j_metric(dx: float, dy: float, dist_xy: float) -> float:
    """``log(1 + |x - y| / min(d(x), d(y)))``."""
    if not (dx > 0 and dy > 0):
        raise DomainError("boundary distances must be positive")
    if dist_xy < 0:
        raise DomainError("distance must be non-negative")
    return math.log1p(dist_xy / min(dx, dy))


def harnack_chain_bound(C: float, s: float, k: float) -> float:
    """``C^(1 + k / (2 log(1+s)))``: Harnack factor across quasihyperbolic distance ``k``."""
    if not C >= 1:
        raise DomainError("Harnack constant must be at least 1")
    if not 0 < s < 1:
        raise DomainError("s must lie in (0, 1)")
    if k < 0:
        raise DomainError("k must be non-negative")
    return C ** (1 + k / (2 * math.log1p(s)))


@dataclass
class DomainGraph:
    """Weighted graph whose shortest paths approximate the quasihyperbolic metric."""

    nodes: np.ndarray          # (m, 2) node positions
    matrix: sp.csr_matrix      # symmetric edge weights
    locate: object             # point -> node index
    mask: DomainMask

    @classmethod
    def from_mask(cls, G: DomainMask) -> "DomainGraph":
        """Inside cells with 8-neighbour edges weighted by ``step / d(midpoint)``.

        Edge midpoints are edge midpoints or corners of raster cells, where the
        boundary distance is exact.
        """
        n0, n1 = G.shape
        node_id = np.full(G.shape, -1, dtype=np.int64)
        cells = np.argwhere(G.inside)
        node_id[cells[:, 0], cells[:, 1]] = np.arange(len(cells))
        fd = G.fine_dist
        h = G.h
        rows, cols, vals = [], [], []
        for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
            a = cells
            b = cells + (di, dj)
            ok = (b[:, 0] >= 0) & (b[:, 0] < n0) & (b[:, 1] >= 0) & (b[:, 1] < n1)
            a, b = a[ok], b[ok]
            ok = G.inside[b[:, 0], b[:, 1]]
            a, b = a[ok], b[ok]
            mid = a + b + 1  # fine coordinates of the midpoint of the two centres
            d = fd[mid[:, 0], mid[:, 1]]
            ok = d > 0
            step = h * math.hypot(di, dj)
            rows.append(node_id[a[ok, 0], a[ok, 1]])
            cols.append(node_id[b[ok, 0], b[ok, 1]])
            vals.append(step / d[ok])
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        v = np.concatenate(vals)
        m = len(cells)
        mat = sp.coo_matrix((np.concatenate([v, v]), (np.concatenate([r, c]), np.concatenate([c, r]))),
                            shape=(m, m)).tocsr()
        centers = (np.asarray(G.offset) + cells + 0.5) * h

        def locate(p):
            cell = np.floor(np.asarray(p, dtype=float) / h - np.asarray(G.offset)).astype(np.int64)
            if not (0 <= cell[0] < n0 and 0 <= cell[1] < n1):
                return -1
            return int(node_id[cell[0], cell[1]])

        return cls(centers, mat, locate, G)

    @classmethod
    def from_whitney(cls, D, G: DomainMask) -> "DomainGraph":
        """Whitney-square centres joined across shared edges."""
        pairs = D.adjacency(G)
        centers = D.centers
        mids = 0.5 * (centers[pairs[:, 0]] + centers[pairs[:, 1]])
        d = G.distance(mids)
        step = np.linalg.norm(centers[pairs[:, 0]] - centers[pairs[:, 1]], axis=1)
        ok = d > 0
        w = step[ok] / d[ok]
        r, c = pairs[ok, 0], pairs[ok, 1]
        m = len(D)
        mat = sp.coo_matrix((np.concatenate([w, w]), (np.concatenate([r, c]), np.concatenate([c, r]))),
                            shape=(m, m)).tocsr()
        lo, side = D.lo, D.side

        def locate(p):
            p = np.asarray(p, dtype=float)
            hit = np.flatnonzero(np.all((lo <= p) & (p <= lo + side[:, None]), axis=1))
            return int(hit[0]) if len(hit) else -1

        return cls(centers, mat, locate, G)

    def _attach(self, p) -> tuple[int, float]:
        p = np.asarray(p, dtype=float)
        if self.mask.distance(p[None, :])[0] <= 0:
            raise DomainError(f"point {tuple(p)} is not in the domain")
        node = self.locate(p)
        if node < 0:
            raise DomainError(f"point {tuple(p)} is not covered by the graph")
        mid = 0.5 * (p + self.nodes[node])
        d = self.mask.distance(mid[None, :])[0]
        return node, float(np.linalg.norm(p - self.nodes[node]) / d)

    def distances_from(self, p) -> tuple[np.ndarray, float]:
        node, w = self._attach(p)
        return dijkstra(self.matrix, indices=node), w

    def distance(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.array_equal(x, y):
            self._attach(x)
            return 0.0
        nx, wx = self._attach(x)
        ny, wy = self._attach(y)
        if nx == ny:
            # straight segment inside one cell, midpoint rule
            d = self.mask.distance((0.5 * (x + y))[None, :])[0]
            return float(np.linalg.norm(x - y) / d)
        dist = dijkstra(self.matrix, indices=nx)[ny]
        if not math.isfinite(dist):
            raise DomainError("points lie in different components of the domain")
        return float(dist + wx + wy)

    def pairwise(self, points) -> np.ndarray:
        """Approximate quasihyperbolic distances between all pairs of ``points``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        att = [self._attach(p) for p in pts]
        nodes = np.array([a[0] for a in att])
        extra = np.array([a[1] for a in att])
        table = dijkstra(self.matrix, indices=np.unique(nodes))
        row = {n: i for i, n in enumerate(np.unique(nodes))}
        out = np.zeros((len(pts), len(pts)))
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if nodes[i] == nodes[j]:
                    d = self.mask.distance((0.5 * (pts[i] + pts[j]))[None, :])[0]
                    v = np.linalg.norm(pts[i] - pts[j]) / d
                else:
                    v = table[row[nodes[i]], nodes[j]] + extra[i] + extra[j]
                out[i, j] = out[j, i] = v
        return out


def quasihyperbolic_approx(G, x, y, graph: DomainGraph | None = None) -> float:
    """Graph approximation of ``k_G(x, y)`` (8-neighbour raster graph unless ``graph`` is given)."""
    if graph is None:
        graph = DomainGraph.from_mask(G)
    return graph.distance(x, y)


def qh_tolerance(G: DomainMask, x, y, k_value: float) -> float:
    """Additive slack separating ``k_approx`` from the exact metric.

    The lattice path can be longer by the chord factor, and each endpoint is
    snapped to a cell centre at most ``h/sqrt(2)`` away.
    """
    d = G.distance(np.array([x, y], dtype=float))
    snap = 2 * (G.h / math.sqrt(2)) / max(min(d), G.h)
    return (CHORD_FACTOR - 1) * k_value + snap


def is_phi_uniform_pair(G: DomainMask, x, y, phi, k_value: float) -> bool:
    """Check ``k(x, y) <= phi(|x - y| / min(d(x), d(y)))`` with the graph tolerance."""
    d = G.distance(np.array([x, y], dtype=float))
    t = float(np.linalg.norm(np.asarray(x) - np.asarray(y)) / min(d))
    return k_value <= CHORD_FACTOR * phi(t) + qh_tolerance(G, x, y, 0.0)
