"""Raster domains on a dyadic lattice and exact distances to their boundary.

A :class:`DomainMask` describes the open set

    G = interior(union of closed "inside" cells) minus a finite set of punctures,

with cells of side ``h = 2**-level``.  Its complement ``K`` is the union of the
closed outside cells and the punctures, so ``d(x, ∂G) = d(x, K)`` for ``x`` in G.

Distances are computed on the *fine* vertex lattice of spacing ``h/2`` (cell
corners, edge midpoints and cell centres).  For a point of that lattice the
nearest point of ``K`` can always be taken on the lattice as well (it is the
coordinate-wise clamp onto a closed square), so the Euclidean distance
transform of the fine lattice is exact there, and squared distances are exact
integers in units of ``(h/2)**2``.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .capacity2d import rle_decode, rle_encode
from .errors import DomainError


@dataclass
class DomainMask:
    inside: np.ndarray
    level: int
    offset: tuple[int, int] = (0, 0)
    punctures: list = field(default_factory=list)

    def __post_init__(self):
        self.inside = np.asarray(self.inside, dtype=bool)
        if self.inside.ndim != 2:
            raise DomainError("only planar masks are supported")
        if not self.inside.any():
            raise DomainError("domain mask is empty")
        if self.inside[0].any() or self.inside[-1].any() or self.inside[:, 0].any() or self.inside[:, -1].any():
            raise DomainError("the outermost ring of cells must lie outside the domain")
        self.offset = tuple(int(o) for o in self.offset)
        self.punctures = [tuple(int(v) for v in p) for p in self.punctures]
        n0, n1 = self.inside.shape
        for a, b in self.punctures:
            if not (0 <= a <= 2 * n0 and 0 <= b <= 2 * n1):
                raise DomainError(f"puncture {(a, b)} lies outside the raster")

    n = 2

    @property
    def h(self) -> float:
        return 2.0 ** -self.level

    @property
    def shape(self) -> tuple[int, int]:
        return self.inside.shape

    def fine_to_xy(self, fine) -> np.ndarray:
        """Physical coordinates of fine-lattice vertices (units of ``h/2`` from the raster corner)."""
        fine = np.asarray(fine, dtype=float)
        return (np.asarray(self.offset, dtype=float) + fine / 2) * self.h

    def xy_to_fine(self, xy) -> np.ndarray:
        return (np.asarray(xy, dtype=float) / self.h - np.asarray(self.offset, dtype=float)) * 2

    def puncture_points(self) -> np.ndarray:
        if not self.punctures:
            return np.zeros((0, 2))
        return self.fine_to_xy(np.asarray(self.punctures))

    @cached_property
    def fine_outside(self) -> np.ndarray:
        """Fine-lattice vertices that belong to the complement ``K``."""
        n0, n1 = self.shape
        out = ~self.inside
        fine = np.zeros((2 * n0 + 1, 2 * n1 + 1), dtype=bool)
        for di in range(3):
            for dj in range(3):
                fine[di:di + 2 * n0:2, dj:dj + 2 * n1:2] |= out
        for a, b in self.punctures:
            fine[a, b] = True
        return fine

    @cached_property
    def fine_sqdist(self) -> np.ndarray:
        """Exact squared distance to ``K`` at every fine vertex, in units of ``(h/2)**2`` (int64)."""
        _, ind = ndimage.distance_transform_edt(~self.fine_outside, return_indices=True)
        grid = np.indices(self.fine_outside.shape)
        diff = (grid - ind).astype(np.int64)
        return diff[0] ** 2 + diff[1] ** 2

    @cached_property
    def fine_dist(self) -> np.ndarray:
        return np.sqrt(self.fine_sqdist) * (self.h / 2)

    def cell_boundary_distance(self) -> np.ndarray:
        """``d(cell centre, ∂G)`` for every cell (0 outside G)."""
        return self.fine_dist[1::2, 1::2] * self.inside

    @cached_property
    def _boundary_cells(self):
        out = ~self.inside
        near = ndimage.binary_dilation(self.inside, structure=np.ones((3, 3), bool)) & out
        idx = np.argwhere(near)
        lo = (np.asarray(self.offset) + idx) * self.h
        return lo, cKDTree(lo + self.h / 2)

    def contains(self, xy) -> np.ndarray:
        """Membership in the open set G."""
        pts = np.atleast_2d(np.asarray(xy, dtype=float))
        return self.distance(pts) > 0

    def distance(self, xy) -> np.ndarray:
        """Exact Euclidean distance from arbitrary points to ``K`` (0 for points of K)."""
        pts = np.atleast_2d(np.asarray(xy, dtype=float))
        lo, tree = self._boundary_cells
        h = self.h
        _, i0 = tree.query(pts)
        best = _point_square_distance(pts, lo[i0], h)
        groups = tree.query_ball_point(pts, best + h / math.sqrt(2) + 1e-15)
        for k, members in enumerate(groups):
            if len(members) > 1:
                best[k] = min(best[k], _point_square_distance(pts[k][None, :], lo[members], h).min())
        punct = self.puncture_points()
        if len(punct):
            dp = np.linalg.norm(pts[:, None, :] - punct[None, :, :], axis=2).min(axis=1)
            best = np.minimum(best, dp)
        # a point whose (floor) cell is an outside cell lies in that closed cell, hence in K
        cell = np.floor(self.xy_to_fine(pts) / 2).astype(np.int64)
        n0, n1 = self.shape
        off_grid = (cell[:, 0] < 0) | (cell[:, 0] >= n0) | (cell[:, 1] < 0) | (cell[:, 1] >= n1)
        ci = np.clip(cell[:, 0], 0, n0 - 1)
        cj = np.clip(cell[:, 1], 0, n1 - 1)
        best[off_grid | ~self.inside[ci, cj]] = 0.0
        return best

    def area(self) -> float:
        return float(self.inside.sum()) * self.h**2

    # --- serialization ---------------------------------------------------------------

    def to_json(self) -> dict:
        return {"level": self.level, "offset": list(self.offset), "shape": list(self.shape),
                "rle": rle_encode(self.inside), "punctures": [list(p) for p in self.punctures]}

    @classmethod
    def from_json(cls, data) -> "DomainMask":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            inside = rle_decode(data["rle"], data["shape"]) if "rle" in data else \
                np.array([[ch == "1" for ch in row] for row in data["rows"]], dtype=bool)
            return cls(inside, int(data["level"]), tuple(data.get("offset", (0, 0))),
                       [tuple(p) for p in data.get("punctures", [])])
        except KeyError as exc:
            raise DomainError(f"mask JSON lacks field {exc.args[0]!r}") from None

    def to_png(self) -> bytes:
        """One pixel per cell; level, offset and punctures go into PNG text chunks."""
        from PIL import Image
        from PIL.PngImagePlugin import PngInfo

        # image rows run top to bottom, so flip the y axis
        img = Image.fromarray((self.inside.T[::-1] * 255).astype(np.uint8))
        info = PngInfo()
        info.add_text("level", str(self.level))
        info.add_text("offset", json.dumps(list(self.offset)))
        info.add_text("punctures", json.dumps([list(p) for p in self.punctures]))
        buf = io.BytesIO()
        img.save(buf, format="PNG", pnginfo=info)
        return buf.getvalue()

    @classmethod
    def from_png(cls, data: bytes | str, level: int | None = None, offset=None,
                 threshold: int = 128) -> "DomainMask":
        """Bitmap mask: light pixels are inside; one pixel per cell, image x to the right, y up.

        ``level`` and ``offset`` default to the values stored by :meth:`to_png`.
        """
        from PIL import Image

        src = io.BytesIO(data) if isinstance(data, (bytes, bytearray)) else data
        img = Image.open(src)
        meta = getattr(img, "text", {}) or {}
        if level is None:
            if "level" not in meta:
                raise DomainError("the PNG carries no raster level; pass one explicitly")
            level = int(meta["level"])
        if offset is None:
            offset = tuple(json.loads(meta["offset"])) if "offset" in meta else (0, 0)
        punctures = [tuple(p) for p in json.loads(meta["punctures"])] if "punctures" in meta else []
        arr = np.asarray(img.convert("L"))
        inside = (arr[::-1].T >= threshold)
        return cls(inside, level, offset, punctures)


def _point_square_distance(pts: np.ndarray, lo: np.ndarray, h: float) -> np.ndarray:
    gap = np.maximum(0.0, np.maximum(lo - pts, pts - (lo + h)))
    return np.sqrt((gap**2).sum(axis=-1))


# --- stock domains --------------------------------------------------------------------------


def from_predicate(pred, lo, hi, level: int, punctures_xy=()) -> DomainMask:
    """Cells whose centres satisfy ``pred`` inside the box ``[lo, hi]`` (snapped to the lattice)."""
    h = 2.0 ** -level
    i0 = int(math.floor(lo[0] / h)) - 1
    j0 = int(math.floor(lo[1] / h)) - 1
    i1 = int(math.ceil(hi[0] / h)) + 1
    j1 = int(math.ceil(hi[1] / h)) + 1
    xs = (np.arange(i0, i1) + 0.5) * h
    ys = (np.arange(j0, j1) + 0.5) * h
    pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    inside = np.asarray(pred(pts), dtype=bool).reshape(len(xs), len(ys))
    inside[0] = inside[-1] = False
    inside[:, 0] = inside[:, -1] = False
    punct = []
    for p in punctures_xy:
        fine = (np.asarray(p, dtype=float) / h - np.array([i0, j0])) * 2
        if not np.allclose(fine, np.round(fine), atol=1e-9):
            raise DomainError(f"puncture {tuple(p)} is not a lattice point at level {level + 1}")
        punct.append(tuple(int(v) for v in np.round(fine)))
    return DomainMask(inside, level, (i0, j0), punct)


def unit_square(level: int) -> DomainMask:
    return from_predicate(lambda p: np.all((p > 0) & (p < 1), axis=1), (0, 0), (1, 1), level)


def punctured_square(level: int, puncture=(0.5, 0.5)) -> DomainMask:
    return from_predicate(lambda p: np.all((p > 0) & (p < 1), axis=1), (0, 0), (1, 1), level, [puncture])


def l_shape(level: int) -> DomainMask:
    """Unit square with the upper-right quarter ``[1/2, 1] x [1/2, 1]`` removed."""
    def pred(p):
        sq = np.all((p > 0) & (p < 1), axis=1)
        return sq & ~((p[:, 0] > 0.5) & (p[:, 1] > 0.5))

    return from_predicate(pred, (0, 0), (1, 1), level)


def unit_disk(level: int) -> DomainMask:
    return from_predicate(lambda p: np.hypot(p[:, 0], p[:, 1]) < 1, (-1, -1), (1, 1), level)


def strip(level: int, width: float = 1.0, length: float = 8.0) -> DomainMask:
    """Horizontal strip ``(-length/2, length/2) x (0, width)``."""
    return from_predicate(lambda p: (np.abs(p[:, 0]) < length / 2) & (p[:, 1] > 0) & (p[:, 1] < width),
                          (-length / 2, 0), (length / 2, width), level)


STOCK = {"square": unit_square, "punctured-square": punctured_square, "l-shape": l_shape, "disk": unit_disk}
