"""Deterministic geometric propagation paths over a 2.5D environment.

Three mechanisms: direct line-of-sight occlusion, first-order image-method
wall reflections, and a two-ray ground bounce. All functions are pure and
read-only over the Environment, so per-receiver evaluation parallelizes
trivially.

Conventions shared by every query here:
  - grazing contact within GRAZING_EPS meters of a facade edge, endpoint, or
    roof line does not occlude;
  - a segment at z >= building height passes clear over the roof;
  - an endpoint strictly inside a footprint below roof height blocks the
    segment (wall penetration), matching a dense point-in-prism sampling of
    the segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import Environment, Point3

GRAZING_EPS = 1e-9
# relative cutoff below which two segments are treated as parallel
_PARALLEL_EPS = 1e-12


@dataclass(frozen=True)
class RayPath:
    kind: str  # direct | wall_reflection | ground_reflection
    vertices: tuple[Point3, ...]
    total_length: float
    incidence_angle: Optional[float] = None  # radians from surface normal
    facade_id: Optional[int] = None


def _segment_length(vertices: tuple[Point3, ...]) -> float:
    return sum(a.distance_to(b) for a, b in zip(vertices, vertices[1:]))


def los_blocked(env: Environment, tx: Point3, rx: Point3,
                ignore_facade: int | None = None) -> bool:
    """True iff the open segment tx-rx passes through any building prism.

    Equal endpoints are unblocked by convention. ignore_facade drops one
    facade from the crossing test (used for reflection sub-segments whose
    endpoint lies on that facade).
    """
    if tx.x == rx.x and tx.y == rx.y and tx.z == rx.z:
        return False

    # Wall-penetration rule: an endpoint buried inside a prism blocks.
    for e in (tx, rx):
        bid = env.point_strictly_in_building((e.x, e.y), GRAZING_EPS)
        if bid is not None and e.z < env.building_heights[bid] - GRAZING_EPS:
            return True

    cand = env.candidate_facades_for_segment((tx.x, tx.y), (rx.x, rx.y))
    if ignore_facade is not None and cand.size:
        cand = cand[cand != ignore_facade]
    if cand.size == 0:
        return False

    p0 = env.facade_p0[cand]
    p1 = env.facade_p1[cand]
    heights = env.facade_height[cand]

    dx, dy = rx.x - tx.x, rx.y - tx.y
    seg2d = math.hypot(dx, dy)
    if seg2d < GRAZING_EPS:
        # vertical segment: 2D projection degenerate, endpoint rule above
        # already decided prism membership
        return False
    ex = p1[:, 0] - p0[:, 0]
    ey = p1[:, 1] - p0[:, 1]
    qx = p0[:, 0] - tx.x
    qy = p0[:, 1] - tx.y

    denom = dx * ey - dy * ex
    fac_len = np.hypot(ex, ey)
    parallel = np.abs(denom) <= _PARALLEL_EPS * seg2d * fac_len

    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qx * ey - qy * ex) / denom
        u = (qx * dy - qy * dx) / denom

    t_eps = GRAZING_EPS / seg2d
    u_eps = GRAZING_EPS / fac_len
    crossing = (~parallel) & (t > t_eps) & (t < 1.0 - t_eps) \
        & (u > u_eps) & (u < 1.0 - u_eps)
    if not crossing.any():
        return False
    zc = tx.z + t[crossing] * (rx.z - tx.z)
    return bool(np.any(zc < heights[crossing] - GRAZING_EPS))


def direct_path(env: Environment, tx: Point3, rx: Point3) -> Optional[RayPath]:
    """The unobstructed direct ray, or None when occluded."""
    if los_blocked(env, tx, rx):
        return None
    return RayPath(kind="direct", vertices=(tx, rx),
                   total_length=tx.distance_to(rx))


def wall_reflections(env: Environment, tx: Point3, rx: Point3) -> list[RayPath]:
    """All valid first-order specular wall reflections, ordered by facade id.

    A facade is valid when tx and rx both face its outward side, the image
    point of tx maps the reflection onto the facade within its horizontal
    extent and height, and both sub-segments are unobstructed.
    """
    if len(env.facades) == 0:
        return []
    tx2 = np.array([tx.x, tx.y])
    rx2 = np.array([rx.x, rx.y])

    n = env.facade_normal
    p0 = env.facade_p0
    s_tx = (tx2[0] - p0[:, 0]) * n[:, 0] + (tx2[1] - p0[:, 1]) * n[:, 1]
    s_rx = (rx2[0] - p0[:, 0]) * n[:, 0] + (rx2[1] - p0[:, 1]) * n[:, 1]
    facing = (s_tx > GRAZING_EPS) & (s_rx > GRAZING_EPS)
    if not facing.any():
        return []

    out: list[RayPath] = []
    for k in np.nonzero(facing)[0]:
        k = int(k)
        st, sr = float(s_tx[k]), float(s_rx[k])
        t = st / (st + sr)
        nx, ny = env.facade_normal[k]
        # image of tx across the facade's vertical plane (z unchanged)
        ix, iy = tx.x - 2.0 * st * nx, tx.y - 2.0 * st * ny
        px = ix + t * (rx.x - ix)
        py = iy + t * (rx.y - iy)
        pz = tx.z + t * (rx.z - tx.z)

        q0x, q0y = env.facade_p0[k]
        q1x, q1y = env.facade_p1[k]
        ex, ey = q1x - q0x, q1y - q0y
        seg2 = ex * ex + ey * ey
        fac_len = math.sqrt(seg2)
        # u is the unnormalized along-facade coordinate (scale: meters * fac_len)
        u = (px - q0x) * ex + (py - q0y) * ey
        h = float(env.facade_height[k])
        if not (-GRAZING_EPS * fac_len <= u <= seg2 + GRAZING_EPS * fac_len):
            continue
        if not (-GRAZING_EPS <= pz <= h + GRAZING_EPS):
            continue

        p = Point3(px, py, pz)
        if los_blocked(env, tx, p, ignore_facade=k):
            continue
        if los_blocked(env, p, rx, ignore_facade=k):
            continue

        vin = np.array([px - tx.x, py - tx.y, pz - tx.z])
        cos_inc = abs(vin[0] * nx + vin[1] * ny) / np.linalg.norm(vin)
        angle = math.acos(min(1.0, max(-1.0, cos_inc)))
        out.append(RayPath(
            kind="wall_reflection",
            vertices=(tx, p, rx),
            total_length=tx.distance_to(p) + p.distance_to(rx),
            incidence_angle=angle,
            facade_id=k,
        ))
    return out


def ground_reflection(env: Environment, tx: Point3, rx: Point3) -> Optional[RayPath]:
    """Two-ray ground bounce, or None when the bounce point is covered by a
    building or either sub-segment is occluded. Requires both endpoints above
    ground."""
    if tx.z <= 0.0 or rx.z <= 0.0:
        return None
    dx, dy = rx.x - tx.x, rx.y - tx.y
    d2 = math.hypot(dx, dy)
    frac = tx.z / (tx.z + rx.z)
    if d2 > 0.0:
        gx = tx.x + frac * dx
        gy = tx.y + frac * dy
    else:
        gx, gy = tx.x, tx.y
    if env.point_in_building((gx, gy)) is not None:
        return None
    g = Point3(gx, gy, 0.0)
    if los_blocked(env, tx, g) or los_blocked(env, g, rx):
        return None
    len1 = tx.distance_to(g)
    cos_inc = tx.z / len1
    angle = math.acos(min(1.0, max(-1.0, cos_inc)))
    return RayPath(
        kind="ground_reflection",
        vertices=(tx, g, rx),
        total_length=len1 + g.distance_to(rx),
        incidence_angle=angle,
    )
