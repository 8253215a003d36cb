"""Whitney decomposition of raster domains into dyadic squares.

A dyadic square ``Q`` of level ``k`` has side ``2^-k`` and diameter
``d(Q) = sqrt(2) 2^-k``; it is a Whitney square of ``G`` when

    d(Q) <= d(Q, ∂G) < 4 d(Q).

Squares are found top-down: a square inside ``G`` that is at least ``d(Q)`` away
from the boundary is kept, anything closer (or not inside ``G``) is split.  The
children of a split square automatically satisfy the upper inequality, so only
squares of the starting level can ever be "too far" from the boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .domain import DomainMask
from .errors import DomainError


@dataclass(frozen=True)
class WhitneyCube:
    k: int
    corner: tuple[int, int]

    @property
    def side(self) -> float:
        return 2.0 ** -self.k

    @property
    def diameter(self) -> float:
        return math.sqrt(2) * self.side

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.corner, dtype=float) * self.side

    @property
    def center(self) -> np.ndarray:
        return self.lo + self.side / 2


@dataclass
class WhitneyDecomposition:
    k: np.ndarray
    corner: np.ndarray
    k_min: int
    k_max: int
    raster_level: int
    remainder: list = field(default_factory=list)
    too_far: list = field(default_factory=list)

    def __len__(self):
        return len(self.k)

    @property
    def cubes(self) -> list[WhitneyCube]:
        return [WhitneyCube(int(k), (int(c[0]), int(c[1]))) for k, c in zip(self.k, self.corner)]

    @property
    def side(self) -> np.ndarray:
        return 2.0 ** -self.k.astype(float)

    @property
    def lo(self) -> np.ndarray:
        return self.corner * self.side[:, None]

    @property
    def centers(self) -> np.ndarray:
        return self.lo + self.side[:, None] / 2

    def level_counts(self) -> dict[int, int]:
        levels, counts = np.unique(self.k, return_counts=True)
        return {int(a): int(b) for a, b in zip(levels, counts)}

    def covered_area(self) -> float:
        return float(np.sum(self.side**2))

    def to_json(self) -> dict:
        return {
            "cubes": [{"k": int(k), "corner": [int(c[0]), int(c[1])]} for k, c in zip(self.k, self.corner)],
            "Nk": {str(k): v for k, v in self.level_counts().items()},
            "k_min": self.k_min, "k_max": self.k_max, "raster_level": self.raster_level,
            "remainder": [{"k": k, "corner": list(c)} for k, c in self.remainder],
            "too_far": [{"k": k, "corner": list(c)} for k, c in self.too_far],
        }

    @classmethod
    def from_json(cls, data) -> "WhitneyDecomposition":
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        cubes = data["cubes"]
        k = np.array([c["k"] for c in cubes], dtype=np.int64)
        corner = np.array([c["corner"] for c in cubes], dtype=np.int64).reshape(-1, 2)
        ks = k.tolist() or [0]
        return cls(k, corner, int(data.get("k_min", min(ks))), int(data.get("k_max", max(ks))),
                   int(data.get("raster_level", max(ks))),
                   [(r["k"], tuple(r["corner"])) for r in data.get("remainder", [])],
                   [(r["k"], tuple(r["corner"])) for r in data.get("too_far", [])])

    def export(self, fmt: str = "svg") -> bytes:
        if fmt == "json":
            return json.dumps(self.to_json()).encode()
        if fmt == "svg":
            return _svg(self).encode()
        raise DomainError(f"unsupported export format {fmt!r}")

    def adjacency(self, G: DomainMask) -> np.ndarray:
        """Pairs ``(i, j)``, ``i < j``, of squares sharing a segment of an edge."""
        ids = paint(self, G, ids=True)
        pairs = []
        for a, b in ((ids[:-1, :], ids[1:, :]), (ids[:, :-1], ids[:, 1:])):
            sel = (a >= 0) & (b >= 0) & (a != b)
            p = np.stack([np.minimum(a[sel], b[sel]), np.maximum(a[sel], b[sel])], axis=1)
            pairs.append(p)
        allp = np.concatenate(pairs) if pairs else np.zeros((0, 2), dtype=np.int64)
        return np.unique(allp, axis=0)


def _cells_of(k: int, corner: np.ndarray, G: DomainMask):
    """Raster-relative cell range of squares of level ``k``."""
    s = 2 ** (G.level - k)
    a = corner[:, 0] * s - G.offset[0]
    b = corner[:, 1] * s - G.offset[1]
    return a, b, s


def decompose(G: DomainMask, k_min: int = 0, k_max: int | None = None) -> WhitneyDecomposition:
    """Top-down Whitney decomposition of ``G`` using squares of levels ``k_min .. k_max``."""
    L = G.level
    if k_max is None:
        k_max = L - 2
    if not k_min <= k_max <= L:
        raise DomainError(f"need k_min <= k_max <= raster level ({k_min}, {k_max}, {L})")
    n0, n1 = G.shape
    csum = np.zeros((n0 + 1, n1 + 1), dtype=np.int64)
    csum[1:, 1:] = np.cumsum(np.cumsum(G.inside, axis=0), axis=1)
    sq = G.fine_sqdist
    punct = np.asarray(G.punctures, dtype=np.int64).reshape(-1, 2)

    s0 = 2 ** (L - k_min)
    i_lo = math.floor(G.offset[0] / s0)
    i_hi = math.ceil((G.offset[0] + n0) / s0)
    j_lo = math.floor(G.offset[1] / s0)
    j_hi = math.ceil((G.offset[1] + n1) / s0)
    ii, jj = np.meshgrid(np.arange(i_lo, i_hi), np.arange(j_lo, j_hi), indexing="ij")
    cand = np.stack([ii.ravel(), jj.ravel()], axis=1).astype(np.int64)

    out_k, out_c, remainder, too_far = [], [], [], []
    for k in range(k_min, k_max + 1):
        if len(cand) == 0:
            break
        a, b, s = _cells_of(k, cand, G)
        # inside-cell count of the part of each square that lies on the raster
        a0, a1 = np.clip(a, 0, n0), np.clip(a + s, 0, n0)
        b0, b1 = np.clip(b, 0, n1), np.clip(b + s, 0, n1)
        count = csum[a1, b1] - csum[a0, b1] - csum[a1, b0] + csum[a0, b0]
        on_raster = (a >= 0) & (a + s <= n0) & (b >= 0) & (b + s <= n1)
        in_g = on_raster & (count == s * s)
        for pa, pb in punct:
            in_g &= ~((2 * a < pa) & (pa < 2 * (a + s)) & (2 * b < pb) & (pb < 2 * (b + s)))
        any_in = count > 0

        sf = 2 * s
        dsq = np.full(len(cand), -1, dtype=np.int64)
        idx = np.flatnonzero(in_g)
        if len(idx):
            t = np.arange(sf + 1)
            chunk = max(1, 2_000_000 // (sf + 1))
            for st in range(0, len(idx), chunk):
                sel = idx[st:st + chunk]
                A = 2 * a[sel][:, None]
                B = 2 * b[sel][:, None]
                m = np.minimum.reduce([sq[A + t, B], sq[A + t, B + sf], sq[A, B + t], sq[A + sf, B + t]])
                dsq[sel] = m.min(axis=1)
        lower = dsq >= 2 * sf * sf
        upper = dsq < 32 * sf * sf
        keep = in_g & lower & upper
        far = in_g & lower & ~upper
        split = any_in & ~(in_g & lower)

        out_k.append(np.full(int(keep.sum()), k, dtype=np.int64))
        out_c.append(cand[keep])
        too_far.extend((k, (int(c[0]), int(c[1]))) for c in cand[far])
        if k == k_max:
            remainder.extend((k, (int(c[0]), int(c[1]))) for c in cand[split])
            break
        parents = cand[split]
        kids = np.repeat(2 * parents, 4, axis=0)
        kids += np.tile(np.array([[0, 0], [0, 1], [1, 0], [1, 1]]), (len(parents), 1))
        cand = kids

    k_arr = np.concatenate(out_k) if out_k else np.zeros(0, dtype=np.int64)
    c_arr = np.concatenate(out_c) if out_c else np.zeros((0, 2), dtype=np.int64)
    return WhitneyDecomposition(k_arr, c_arr.reshape(-1, 2), k_min, k_max, L, remainder, too_far)


def paint(D: WhitneyDecomposition, G: DomainMask, ids: bool = False) -> np.ndarray:
    """Raster of cover counts (or of square ids, -1 where uncovered)."""
    out = np.full(G.shape, -1 if ids else 0, dtype=np.int64)
    for idx, (k, c) in enumerate(zip(D.k, D.corner)):
        a, b, s = _cells_of(int(k), c[None, :], G)
        a, b = int(a[0]), int(b[0])
        if ids:
            out[a:a + s, b:b + s] = idx
        else:
            out[max(a, 0):a + s, max(b, 0):b + s] += 1
    return out


def cube_boundary_distance(D: WhitneyDecomposition, G: DomainMask) -> np.ndarray:
    """``d(Q, K)`` for every square, from exact square-to-square distances to the outside cells.

    This deliberately avoids the distance transform used by :func:`decompose`.
    """
    cell_lo, tree = G._boundary_cells
    h = G.h
    lo = D.lo
    side = D.side
    centers = lo + side[:, None] / 2
    punct = G.puncture_points()
    result = np.empty(len(D))
    for q in range(len(D)):
        # any point of Q bounds d(Q, K) from above
        u = float(G.distance(centers[q][None, :])[0])
        members = tree.query_ball_point(centers[q], u + (side[q] + h) / math.sqrt(2) + 1e-12)
        cl = cell_lo[members]
        gap = np.maximum(0.0, np.maximum(cl - (lo[q] + side[q]), lo[q] - (cl + h)))
        best = float(np.sqrt((gap**2).sum(axis=1)).min()) if len(members) else u
        if len(punct):
            g = np.maximum(0.0, np.maximum(lo[q] - punct, punct - (lo[q] + side[q])))
            best = min(best, float(np.sqrt((g**2).sum(axis=1)).min()))
        result[q] = best
    return result


@dataclass
class VerifyReport:
    cubes: int
    dyadic_violations: int
    lower_violations: int
    upper_violations: int
    containment_violations: int
    overlap_cells: int
    uncovered_fraction: float
    coverage_deficit: float
    remainder: int
    too_far: int
    counts: dict

    @property
    def violations(self) -> int:
        return (self.dyadic_violations + self.lower_violations + self.upper_violations
                + self.containment_violations + self.overlap_cells)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["violations"] = self.violations
        return d


def guaranteed_region(G: DomainMask, k_max: int) -> np.ndarray:
    """Cells whose distance to ``∂G`` is at least ``2 sqrt(2) 2^-k_max``.

    Every such cell lies in a Whitney square of level at most ``k_max``, so a
    decomposition truncated at ``k_max`` must cover it.
    """
    sq = G.fine_sqdist
    n0, n1 = G.shape
    # distance from a closed cell = min over its corners and edge midpoints
    parts = [sq[di:di + 2 * n0:2, dj:dj + 2 * n1:2] for di in range(3) for dj in range(3) if (di, dj) != (1, 1)]
    cell_sq = np.minimum.reduce(parts)
    # threshold 2 sqrt(2) 2^-k  ->  squared, in units of (h/2)^2: 8 * (2^(L+1-k))^2
    thr = 8 * (2 ** (G.level + 1 - k_max)) ** 2
    return G.inside & (cell_sq >= thr)


def verify(D: WhitneyDecomposition, G: DomainMask) -> VerifyReport:
    """Check dyadic alignment, disjointness, property (3) and coverage of a decomposition."""
    dyadic = int(np.sum((D.k < 0) | (D.k > G.level)))
    dist = cube_boundary_distance(D, G)
    diam = np.sqrt(2) * D.side
    # squares of dyadic rationals are exact in double precision
    lower = int(np.sum(dist**2 < diam**2))
    upper = int(np.sum(dist**2 >= 16 * diam**2))
    contained = G.contains(D.centers)
    containment = int(np.sum(~contained | (dist <= 0)))
    counts = paint(D, G)
    overlap = int(np.sum(counts > 1))
    covered = counts > 0
    uncovered = 1.0 - D.covered_area() / G.area()
    region = guaranteed_region(G, D.k_max)
    deficit = float(np.sum(region & ~covered) / max(1, region.sum()))
    return VerifyReport(len(D), dyadic, lower, upper, containment, overlap, float(uncovered), deficit,
                        len(D.remainder), len(D.too_far), D.level_counts())


def _svg(D: WhitneyDecomposition, px: float = 512.0) -> str:
    if len(D) == 0:
        return '<svg xmlns="http://www.w3.org/2000/svg" width="10" height="10"/>'
    lo = D.lo
    hi = lo + D.side[:, None]
    x0, y0 = lo.min(axis=0)
    x1, y1 = hi.max(axis=0)
    scale = px / max(x1 - x0, y1 - y0)
    kmin, kmax = int(D.k.min()), int(D.k.max())
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0 * scale:.3f} {-y1 * scale:.3f} '
             f'{(x1 - x0) * scale:.3f} {(y1 - y0) * scale:.3f}">']
    for (bx, by), s, k in zip(lo, D.side, D.k):
        hue = 240 * (k - kmin) / max(1, kmax - kmin)
        lines.append(
            f'<rect x="{bx * scale:.3f}" y="{-(by + s) * scale:.3f}" width="{s * scale:.3f}" '
            f'height="{s * scale:.3f}" fill="hsl({hue:.0f},70%,75%)" stroke="black" '
            f'stroke-width="{max(0.2, 1.5 - 0.15 * (k - kmin)):.2f}" data-k="{k}"/>')
    lines.append("</svg>")
    return "\n".join(lines)
