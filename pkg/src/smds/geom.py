"""Exact 2-D geometry for the continuous world.

Wall segments, ray casting against segments, and swept-path collision
tests. Everything here is a pure function over immutable inputs, so the
module is safe to call from concurrent rollouts.

Conventions:
- The world is an axis-aligned rectangle with its lower-left corner at
  the origin; the four boundary segments are always part of the wall
  list.
- Touching a wall (endpoint contact, grazing) counts as a collision.
- A ray collinear with a wall hits at the nearest overlapping point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Tolerance for parallel/collinear classification and touch detection.
# Coordinates live in a ~40x40 box, so this is far below any physical scale.
_EPS = 1e-9


class OutsideWorldError(ValueError):
    """Raised when an operation requires a point strictly inside bounds."""


@dataclass(frozen=True)
class Segment:
    """A wall segment between two distinct points."""

    ax: float
    ay: float
    bx: float
    by: float

    def __post_init__(self) -> None:
        if self.ax == self.bx and self.ay == self.by:
            raise ValueError(f"zero-length segment at ({self.ax}, {self.ay})")

    @property
    def a(self) -> tuple[float, float]:
        return (self.ax, self.ay)

    @property
    def b(self) -> tuple[float, float]:
        return (self.bx, self.by)


@dataclass(frozen=True)
class Ray:
    """Half-line with a finite sensing range."""

    ox: float
    oy: float
    dx: float
    dy: float
    max_range: float

    def __post_init__(self) -> None:
        norm = math.hypot(self.dx, self.dy)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"ray direction must be unit length, got |d|={norm}")
        if self.max_range <= 0:
            raise ValueError("max_range must be positive")


class WorldGeometry:
    """Rectangular world with boundary and internal wall segments.

    The four boundary segments are added automatically and are always
    present in ``walls``. Internal walls must lie within the bounds.
    Wall coordinates are also kept packed in float arrays so that ray
    casting and collision tests can be vectorized over all walls.
    """

    def __init__(self, width: float, height: float, internal_walls: list[Segment] | None = None):
        if width <= 0 or height <= 0:
            raise ValueError("world bounds must be positive")
        self.width = float(width)
        self.height = float(height)
        boundary = [
            Segment(0.0, 0.0, self.width, 0.0),
            Segment(self.width, 0.0, self.width, self.height),
            Segment(self.width, self.height, 0.0, self.height),
            Segment(0.0, self.height, 0.0, 0.0),
        ]
        internal = list(internal_walls or [])
        for seg in internal:
            for x, y in (seg.a, seg.b):
                if not (0.0 <= x <= self.width and 0.0 <= y <= self.height):
                    raise ValueError(f"wall endpoint ({x}, {y}) outside bounds")
        self.walls: list[Segment] = boundary + internal
        self.internal_walls: list[Segment] = internal
        # Packed copies for vectorized queries: (M, 2) endpoint arrays.
        self._wa = np.array([s.a for s in self.walls], dtype=float)
        self._wb = np.array([s.b for s in self.walls], dtype=float)
        self._we = self._wb - self._wa  # edge vectors

    def contains_interior(self, x: float, y: float) -> bool:
        """True iff (x, y) is strictly inside the bounds rectangle."""
        return 0.0 < x < self.width and 0.0 < y < self.height

    def __repr__(self) -> str:
        return (
            f"WorldGeometry({self.width}x{self.height}, "
            f"{len(self.internal_walls)} internal walls)"
        )


def ray_cast(ray: Ray, world: WorldGeometry) -> float:
    """Distance along ``ray`` to the nearest wall, clamped to its range.

    Returns ``ray.max_range`` when no wall is hit within range. The ray
    origin must be strictly inside the world bounds.
    """
    if not world.contains_interior(ray.ox, ray.oy):
        raise OutsideWorldError(f"ray origin ({ray.ox}, {ray.oy}) not inside world bounds")

    o = np.array([ray.ox, ray.oy])
    d = np.array([ray.dx, ray.dy])
    ao = world._wa - o  # origin -> wall start, (M, 2)
    e = world._we

    denom = d[0] * e[:, 1] - d[1] * e[:, 0]  # cross(d, e)
    cross_ao_e = ao[:, 0] * e[:, 1] - ao[:, 1] * e[:, 0]  # cross(a-o, e)
    cross_ao_d = ao[:, 0] * d[1] - ao[:, 1] * d[0]  # cross(a-o, d)

    best = ray.max_range

    nonpar = np.abs(denom) > _EPS
    if np.any(nonpar):
        t = cross_ao_e[nonpar] / denom[nonpar]
        u = cross_ao_d[nonpar] / denom[nonpar]
        hit = (t >= 0.0) & (u >= -_EPS) & (u <= 1.0 + _EPS)
        if np.any(hit):
            best = min(best, float(t[hit].min()))

    # Collinear walls: |perpendicular distance of the wall line| ~ 0.
    # The nearest overlapping point counts as the hit.
    collin = (~nonpar) & (np.abs(cross_ao_d) <= _EPS)
    if np.any(collin):
        ta = ao[collin] @ d  # ray parameter of wall start
        tb = (world._wb[collin] - o) @ d
        lo = np.minimum(ta, tb)
        hi = np.maximum(ta, tb)
        overlap = hi >= 0.0
        if np.any(overlap):
            nearest = np.maximum(lo[overlap], 0.0)
            best = min(best, float(nearest.min()))

    return float(min(max(best, 0.0), ray.max_range))


def _on_segment_bbox(px: np.ndarray, py: np.ndarray, ax, ay, bx, by) -> np.ndarray:
    """Bounding-box containment used for collinear touch cases."""
    return (
        (px >= np.minimum(ax, bx) - _EPS)
        & (px <= np.maximum(ax, bx) + _EPS)
        & (py >= np.minimum(ay, by) - _EPS)
        & (py <= np.maximum(ay, by) + _EPS)
    )


def path_collides(p0: tuple[float, float], p1: tuple[float, float], world: WorldGeometry) -> bool:
    """True iff moving from ``p0`` to ``p1`` touches or crosses any wall.

    Both proper and improper (touching) intersections count, as does an
    endpoint outside the bounds. ``p0`` must be strictly inside bounds.
    """
    x0, y0 = p0
    x1, y1 = p1
    if not world.contains_interior(x0, y0):
        raise OutsideWorldError(f"path start ({x0}, {y0}) not inside world bounds")
    if not world.contains_interior(x1, y1):
        return True

    wa, wb = world._wa, world._wb
    e = world._we

    if x0 == x1 and y0 == y1:
        # Degenerate path: collides only if the point sits on a wall.
        cross = e[:, 0] * (y0 - wa[:, 1]) - e[:, 1] * (x0 - wa[:, 0])
        on_line = np.abs(cross) <= _EPS * np.maximum(1.0, np.abs(e).max(axis=1))
        inside = _on_segment_bbox(
            np.full(len(wa), x0), np.full(len(wa), y0), wa[:, 0], wa[:, 1], wb[:, 0], wb[:, 1]
        )
        return bool(np.any(on_line & inside))

    # Orientation of each wall endpoint relative to the path, and of each
    # path endpoint relative to the wall.
    pdx, pdy = x1 - x0, y1 - y0
    d1 = e[:, 0] * (y0 - wa[:, 1]) - e[:, 1] * (x0 - wa[:, 0])  # p0 vs wall line
    d2 = e[:, 0] * (y1 - wa[:, 1]) - e[:, 1] * (x1 - wa[:, 0])  # p1 vs wall line
    d3 = pdx * (wa[:, 1] - y0) - pdy * (wa[:, 0] - x0)  # wall a vs path line
    d4 = pdx * (wb[:, 1] - y0) - pdy * (wb[:, 0] - x0)  # wall b vs path line

    proper = (
        (((d1 > _EPS) & (d2 < -_EPS)) | ((d1 < -_EPS) & (d2 > _EPS)))
        & (((d3 > _EPS) & (d4 < -_EPS)) | ((d3 < -_EPS) & (d4 > _EPS)))
    )
    if np.any(proper):
        return True

    # Touch cases: a collinear endpoint that lands on the other segment.
    wall_scale = np.maximum(1.0, np.abs(e).max(axis=1))
    for dv, px, py, sa, sb in (
        (d1, x0, y0, wa, wb),  # path start on wall
        (d2, x1, y1, wa, wb),  # path end on wall
    ):
        mask = np.abs(dv) <= _EPS * wall_scale
        if np.any(mask):
            on = _on_segment_bbox(
                np.full(mask.sum(), px),
                np.full(mask.sum(), py),
                sa[mask, 0],
                sa[mask, 1],
                sb[mask, 0],
                sb[mask, 1],
            )
            if np.any(on):
                return True
    scale = max(1.0, abs(pdx), abs(pdy))
    for dv, pts in ((d3, wa), (d4, wb)):  # wall endpoint on path
        mask = np.abs(dv) <= _EPS * scale
        if np.any(mask):
            on = _on_segment_bbox(
                pts[mask, 0],
                pts[mask, 1],
                np.full(mask.sum(), x0),
                np.full(mask.sum(), y0),
                np.full(mask.sum(), x1),
                np.full(mask.sum(), y1),
            )
            if np.any(on):
                return True
    return False


def load_world(text: str) -> WorldGeometry:
    """Parse the world file format.

    One header line ``bounds W H`` followed by one ``wall x1 y1 x2 y2``
    line per internal wall. Blank lines and ``#`` comments are ignored.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or not lines[0].startswith("bounds"):
        raise ValueError("world file must start with a 'bounds W H' line")
    parts = lines[0].split()
    if len(parts) != 3:
        raise ValueError(f"malformed bounds line: {lines[0]!r}")
    width, height = float(parts[1]), float(parts[2])
    walls = []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] != "wall" or len(parts) != 5:
            raise ValueError(f"malformed wall line: {ln!r}")
        x1, y1, x2, y2 = (float(v) for v in parts[1:])
        walls.append(Segment(x1, y1, x2, y2))
    return WorldGeometry(width, height, walls)


def load_world_file(path) -> WorldGeometry:
    with open(path, "r", encoding="utf-8") as fh:
        return load_world(fh.read())


def dump_world(world: WorldGeometry) -> str:
    """Serialize a world back to the text format (internal walls only)."""
    lines = [f"bounds {world.width:g} {world.height:g}"]
    for s in world.internal_walls:
        lines.append(f"wall {s.ax:g} {s.ay:g} {s.bx:g} {s.by:g}")
    return "\n".join(lines) + "\n"
