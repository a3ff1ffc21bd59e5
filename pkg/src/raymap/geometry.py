"""2.5D urban building-vector environments.

Buildings are flat-roofed vertical prisms: a simple CCW footprint polygon
extruded from z = 0 to z = height. Environments are immutable after load and
carry a uniform-grid spatial index over facades so ray queries stay cheap.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

GEOM_EPS = 1e-9


class EnvironmentError_(ValueError):
    """Malformed or inconsistent environment data."""


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite coordinate: {(self.x, self.y, self.z)}")

    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)

    def distance_to(self, other: "Point3") -> float:
        return math.dist((self.x, self.y, self.z), (other.x, other.y, other.z))


@dataclass(frozen=True)
class BuildingFootprint:
    id: int
    vertices: tuple[tuple[float, float], ...]  # CCW after normalization
    height: float


@dataclass(frozen=True)
class Facade:
    id: int  # index into Environment.facades, stable for a given environment
    building_id: int
    p0: tuple[float, float]
    p1: tuple[float, float]
    height: float
    outward_normal: tuple[float, float]

    @property
    def length(self) -> float:
        return math.dist(self.p0, self.p1)


def _signed_area(vertices: Sequence[tuple[float, float]]) -> float:
    a = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        a += x0 * y1 - x1 * y0
    return 0.5 * a


def _segments_properly_intersect(a0, a1, b0, b1) -> bool:
    # Shared-endpoint contact between adjacent edges is not self-intersection.
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    d1 = orient(b0, b1, a0)
    d2 = orient(b0, b1, a1)
    d3 = orient(a0, a1, b0)
    d4 = orient(a0, a1, b1)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    return False


def _validate_footprint(bid: int, vertices: list[tuple[float, float]], height: float):
    if len(vertices) < 3:
        raise EnvironmentError_(f"building {bid}: needs >= 3 vertices")
    if height <= 0:
        raise EnvironmentError_(f"building {bid}: height must be > 0, got {height}")
    for v in vertices:
        if not (math.isfinite(v[0]) and math.isfinite(v[1])):
            raise EnvironmentError_(f"building {bid}: non-finite vertex {v}")
    n = len(vertices)
    if abs(_signed_area(vertices)) < GEOM_EPS:
        raise EnvironmentError_(f"building {bid}: degenerate (zero-area) footprint")
    for i in range(n):
        a0, a1 = vertices[i], vertices[(i + 1) % n]
        if math.dist(a0, a1) < GEOM_EPS:
            raise EnvironmentError_(f"building {bid}: zero-length edge at vertex {i}")
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # adjacent edges share a vertex by construction
            b0, b1 = vertices[j], vertices[(j + 1) % n]
            if _segments_properly_intersect(a0, a1, b0, b1):
                raise EnvironmentError_(
                    f"building {bid}: self-intersecting footprint (edges {i} and {j})"
                )


def _point_in_polygon(px: float, py: float, vertices) -> bool:
    """Even-odd ray cast; points on an edge count as inside."""
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        # on-segment check (boundary convention: inside)
        cross = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)
        if abs(cross) < GEOM_EPS * max(1.0, abs(x1 - x0) + abs(y1 - y0)):
            dot = (px - x0) * (x1 - x0) + (py - y0) * (y1 - y0)
            seg2 = (x1 - x0) ** 2 + (y1 - y0) ** 2
            if -GEOM_EPS <= dot <= seg2 + GEOM_EPS:
                return True
    inside = False
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        if (y0 > py) != (y1 > py):
            xca = x0 + (py - y0) / (y1 - y0) * (x1 - x0)
            if px < xca:
                inside = not inside
    return inside


class Environment:
    """Validated building set with bounds and a uniform-grid facade index.

    Immutable after construction; safe for concurrent reads.
    """

    def __init__(
        self,
        name: str,
        buildings: Sequence[BuildingFootprint],
        bounds: tuple[tuple[float, float], tuple[float, float]],
        cell_size: float = 25.0,
    ):
        (xmin, ymin), (xmax, ymax) = bounds
        if not (xmax > xmin and ymax > ymin):
            raise EnvironmentError_(f"bounds must span a nonempty rectangle: {bounds}")
        for b in buildings:
            for vx, vy in b.vertices:
                if not (xmin - GEOM_EPS <= vx <= xmax + GEOM_EPS and ymin - GEOM_EPS <= vy <= ymax + GEOM_EPS):
                    raise EnvironmentError_(
                        f"building {b.id}: vertex ({vx}, {vy}) outside bounds {bounds}"
                    )
        ids = [b.id for b in buildings]
        if len(set(ids)) != len(ids):
            raise EnvironmentError_("duplicate building ids")

        self.name = name
        self.buildings = tuple(buildings)
        self.bounds = ((float(xmin), float(ymin)), (float(xmax), float(ymax)))
        self.cell_size = float(cell_size)
        self._by_id = {b.id: b for b in self.buildings}

        self.facades: tuple[Facade, ...] = tuple(self._build_facades())
        self._build_arrays()
        self._build_index()

    # -- construction ------------------------------------------------------

    def _build_facades(self) -> Iterable[Facade]:
        k = 0
        for b in self.buildings:
            n = len(b.vertices)
            for i in range(n):
                p0 = b.vertices[i]
                p1 = b.vertices[(i + 1) % n]
                ex, ey = p1[0] - p0[0], p1[1] - p0[1]
                ln = math.hypot(ex, ey)
                # CCW polygon: outward normal is the right-hand perpendicular
                yield Facade(
                    id=k,
                    building_id=b.id,
                    p0=p0,
                    p1=p1,
                    height=b.height,
                    outward_normal=(ey / ln, -ex / ln),
                )
                k += 1

    def _build_arrays(self):
        f = self.facades
        self.facade_p0 = np.array([fa.p0 for fa in f], dtype=float).reshape(-1, 2)
        self.facade_p1 = np.array([fa.p1 for fa in f], dtype=float).reshape(-1, 2)
        self.facade_normal = np.array([fa.outward_normal for fa in f], dtype=float).reshape(-1, 2)
        self.facade_height = np.array([fa.height for fa in f], dtype=float)
        self.facade_building = np.array([fa.building_id for fa in f], dtype=int)
        self.building_heights = {b.id: b.height for b in self.buildings}
        if self.buildings:
            self.building_bbox = {
                b.id: (
                    min(v[0] for v in b.vertices),
                    min(v[1] for v in b.vertices),
                    max(v[0] for v in b.vertices),
                    max(v[1] for v in b.vertices),
                )
                for b in self.buildings
            }
        else:
            self.building_bbox = {}

    def _cell_of(self, x: float, y: float) -> tuple[int, int]:
        (xmin, ymin), _ = self.bounds
        return (int((x - xmin) // self.cell_size), int((y - ymin) // self.cell_size))

    def _build_index(self):
        self._index: dict[tuple[int, int], list[int]] = {}
        for k, fa in enumerate(self.facades):
            xlo = min(fa.p0[0], fa.p1[0])
            xhi = max(fa.p0[0], fa.p1[0])
            ylo = min(fa.p0[1], fa.p1[1])
            yhi = max(fa.p0[1], fa.p1[1])
            c0 = self._cell_of(xlo, ylo)
            c1 = self._cell_of(xhi, yhi)
            for cx in range(c0[0], c1[0] + 1):
                for cy in range(c0[1], c1[1] + 1):
                    self._index.setdefault((cx, cy), []).append(k)

    # -- queries -----------------------------------------------------------

    def building_by_id(self, bid: int) -> BuildingFootprint:
        return self._by_id[bid]

    def point_in_building(self, p: tuple[float, float]) -> int | None:
        """Id of the first footprint containing p (boundary counts as inside)."""
        px, py = p
        for b in self.buildings:
            bb = self.building_bbox[b.id]
            if not (bb[0] - GEOM_EPS <= px <= bb[2] + GEOM_EPS and bb[1] - GEOM_EPS <= py <= bb[3] + GEOM_EPS):
                continue
            if _point_in_polygon(px, py, b.vertices):
                return b.id
        return None

    def point_strictly_in_building(self, p: tuple[float, float], eps: float = GEOM_EPS) -> int | None:
        """Like point_in_building, but excludes points within eps of the boundary."""
        bid = self.point_in_building(p)
        if bid is None:
            return None
        b = self._by_id[bid]
        px, py = p
        n = len(b.vertices)
        for i in range(n):
            x0, y0 = b.vertices[i]
            x1, y1 = b.vertices[(i + 1) % n]
            ex, ey = x1 - x0, y1 - y0
            seg2 = ex * ex + ey * ey
            t = ((px - x0) * ex + (py - y0) * ey) / seg2
            t = min(1.0, max(0.0, t))
            if math.hypot(px - (x0 + t * ex), py - (y0 + t * ey)) <= eps:
                return None
        return bid

    def _cells_on_segment(self, p0, p1) -> set[tuple[int, int]]:
        """Grid cells traversed by a segment, padded by one ring for robustness."""
        x0, y0 = p0
        x1, y1 = p1
        length = math.hypot(x1 - x0, y1 - y0)
        steps = max(1, int(length / self.cell_size) * 2 + 1)
        cells: set[tuple[int, int]] = set()
        for i in range(steps + 1):
            t = i / steps
            cx, cy = self._cell_of(x0 + t * (x1 - x0), y0 + t * (y1 - y0))
            cells.add((cx, cy))
        padded: set[tuple[int, int]] = set()
        for cx, cy in cells:
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    padded.add((cx + dx, cy + dy))
        return padded

    def candidate_facades_for_segment(self, p0, p1) -> np.ndarray:
        """Indices into self.facades possibly crossing segment p0-p1 (superset)."""
        out: set[int] = set()
        for cell in self._cells_on_segment(p0, p1):
            hit = self._index.get(cell)
            if hit:
                out.update(hit)
        return np.fromiter(out, dtype=int) if out else np.empty(0, dtype=int)

    def facades_near(self, p0, p1=None) -> list[Facade]:
        """Facades near a segment (or a point if p1 is omitted). Superset of the
        facades that geometrically intersect the query; may include extras."""
        if p1 is None:
            p1 = p0
        idx = self.candidate_facades_for_segment(tuple(p0), tuple(p1))
        return [self.facades[int(k)] for k in sorted(idx)]

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "bounds": [list(self.bounds[0]), list(self.bounds[1])],
            "buildings": [
                {"id": b.id, "height": b.height, "vertices": [list(v) for v in b.vertices]}
                for b in self.buildings
            ],
        }


def point_in_building(env: Environment, p: tuple[float, float]) -> int | None:
    return env.point_in_building(p)


def facades_near(env: Environment, p0, p1=None) -> list[Facade]:
    return env.facades_near(p0, p1)


def environment_from_dict(doc: dict, cell_size: float = 25.0) -> Environment:
    try:
        name = doc["name"]
        bounds_raw = doc["bounds"]
        buildings_raw = doc["buildings"]
    except (KeyError, TypeError) as exc:
        raise EnvironmentError_(f"missing required field: {exc}") from exc
    bounds = ((float(bounds_raw[0][0]), float(bounds_raw[0][1])),
              (float(bounds_raw[1][0]), float(bounds_raw[1][1])))
    buildings = []
    for raw in buildings_raw:
        bid = int(raw["id"])
        height = float(raw["height"])
        vertices = [(float(v[0]), float(v[1])) for v in raw["vertices"]]
        _validate_footprint(bid, vertices, height)
        if _signed_area(vertices) < 0:
            vertices = list(reversed(vertices))
        buildings.append(BuildingFootprint(id=bid, vertices=tuple(vertices), height=height))
    return Environment(name=name, buildings=buildings, bounds=bounds, cell_size=cell_size)


def load_environment(path: str | Path, cell_size: float = 25.0) -> Environment:
    """Load and validate an environment JSON file; polygons normalized to CCW."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise EnvironmentError_(f"{path}: not valid JSON: {exc}") from exc
    return environment_from_dict(doc, cell_size=cell_size)


def save_environment(env: Environment, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(env.to_dict(), indent=2) + "\n")
    return path


@dataclass
class GridSpec:
    """Manhattan-grid generator spec: rows x cols rectangular blocks separated
    by streets, with per-building heights drawn uniformly from height_range."""

    rows: int = 5
    cols: int = 5
    block_size: float = 40.0
    street_width: float = 15.0
    height_range: tuple[float, float] = (10.0, 30.0)
    seed: int = 0
    name: str = "synthetic"

    def validate(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be >= 1")
        if self.block_size <= 0 or self.street_width <= 0:
            raise ValueError("block_size and street_width must be > 0")
        lo, hi = self.height_range
        if not (0 < lo <= hi):
            raise ValueError("height_range must satisfy 0 < lo <= hi")


def gen_environment(spec: GridSpec, path: str | Path | None = None) -> Environment:
    """Generate a deterministic Manhattan-grid environment; optionally write it."""
    spec.validate()
    rng = random.Random(spec.seed)
    span_x = spec.cols * spec.block_size + (spec.cols + 1) * spec.street_width
    span_y = spec.rows * spec.block_size + (spec.rows + 1) * spec.street_width
    buildings = []
    bid = 1
    for r in range(spec.rows):
        for c in range(spec.cols):
            x0 = spec.street_width + c * (spec.block_size + spec.street_width)
            y0 = spec.street_width + r * (spec.block_size + spec.street_width)
            x1 = x0 + spec.block_size
            y1 = y0 + spec.block_size
            h = rng.uniform(*spec.height_range)
            buildings.append(
                BuildingFootprint(
                    id=bid,
                    vertices=((x0, y0), (x1, y0), (x1, y1), (x0, y1)),
                    height=round(h, 3),
                )
            )
            bid += 1
    env = Environment(
        name=spec.name,
        buildings=buildings,
        bounds=((0.0, 0.0), (span_x, span_y)),
    )
    if path is not None:
        save_environment(env, path)
    return env
