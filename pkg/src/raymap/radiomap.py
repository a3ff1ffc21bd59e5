"""Grid simulation orchestrator.

Takes a transmitter and a named environment, sweeps an nx-by-ny lattice of
receiver cells spanning the environment bounds, and produces co-registered
feature grids plus the pathloss map. Outdoor cells combine the enabled
geometric mechanisms (direct ray, wall reflections, ground bounce) by
non-coherent power sum; where no geometric path exists the empirical NLOS
model fills in when enabled. Indoor cells (center inside a footprint, below
roof height) are never ray-traced: they take the NLOS value plus building
entry loss.

The feature masks (los, ref, building) always record geometric truth, even
for mechanisms the run has disabled, so datasets stay comparable across flag
combinations.
"""

from __future__ import annotations

import json
import math
import uuid
import warnings
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .catalog import resolve_location
from .geometry import Environment, Point3
from .propagation import (
    PathContribution,
    RadioConfig,
    bel_p2109,
    combine_contributions,
    fresnel_reflection_loss,
    fspl,
    nlos_3gpp,
)
from .raytrace import direct_path, ground_reflection, los_blocked, wall_reflections

# sentinel for cells no enabled mechanism covers; outside any physical dB range
UNCOVERED = -1.0

DATASET_COLUMNS = ["rx_x", "rx_y", "rx_z", "los", "phi", "d3d", "ref", "bld",
                   "height", "pathloss_db"]


@dataclass(frozen=True)
class SimulationParams:
    tx: Point3
    location: str
    nx: int = 50
    ny: int = 50
    los: bool = True
    ref: bool = True
    gref: bool = True
    nlos: bool = True
    bel: bool = True
    radio: RadioConfig = field(default_factory=RadioConfig)
    rx_height: Optional[float] = None  # None = radio.rx_height_default

    def effective_rx_height(self) -> float:
        return self.radio.rx_height_default if self.rx_height is None else self.rx_height

    def validate(self, env: Environment):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.nx}x{self.ny}")
        (xmin, ymin), (xmax, ymax) = env.bounds
        if not (xmin <= self.tx.x <= xmax and ymin <= self.tx.y <= ymax):
            raise ValueError(
                f"tx ({self.tx.x}, {self.tx.y}) outside environment bounds {env.bounds}")
        if self.effective_rx_height() <= 0:
            raise ValueError("rx_height must be > 0")

    def to_dict(self) -> dict:
        return {
            "tx": [self.tx.x, self.tx.y, self.tx.z],
            "location": self.location,
            "nx": self.nx,
            "ny": self.ny,
            "los": self.los,
            "ref": self.ref,
            "gref": self.gref,
            "nlos": self.nlos,
            "bel": self.bel,
            "rx_height": self.rx_height,
            "radio": {
                "frequency": self.radio.frequency,
                "tx_power_dbm": self.radio.tx_power_dbm,
                "wall_permittivity": self.radio.wall_permittivity,
                "rx_height_default": self.radio.rx_height_default,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SimulationParams":
        radio_doc = doc.get("radio", {})
        radio = RadioConfig(
            frequency=float(radio_doc.get("frequency", 3.5)),
            tx_power_dbm=float(radio_doc.get("tx_power_dbm", 30.0)),
            wall_permittivity=float(radio_doc.get("wall_permittivity", 5.31)),
            rx_height_default=float(radio_doc.get("rx_height_default", 1.5)),
        )
        tx = doc["tx"]
        return cls(
            tx=Point3(float(tx[0]), float(tx[1]), float(tx[2])),
            location=str(doc["location"]),
            nx=int(doc.get("nx", 50)),
            ny=int(doc.get("ny", 50)),
            los=bool(doc.get("los", True)),
            ref=bool(doc.get("ref", True)),
            gref=bool(doc.get("gref", True)),
            nlos=bool(doc.get("nlos", True)),
            bel=bool(doc.get("bel", True)),
            radio=radio,
            rx_height=(None if doc.get("rx_height") is None
                       else float(doc["rx_height"])),
        )


@dataclass
class RadioMapResult:
    params: SimulationParams
    bounds: tuple[tuple[float, float], tuple[float, float]]
    pathloss_db: np.ndarray  # ny x nx, UNCOVERED sentinel where nothing applies
    los_mask: np.ndarray  # 0/1
    phi: np.ndarray  # radians, azimuth from tx
    d3d: np.ndarray  # meters
    ref_mask: np.ndarray  # 0/1
    building_mask: np.ndarray  # 0/1
    height_map: np.ndarray  # meters
    run_id: str
    created_at: str

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        (xmin, ymin), (xmax, ymax) = self.bounds
        dx = (xmax - xmin) / self.params.nx
        dy = (ymax - ymin) / self.params.ny
        xs = xmin + (np.arange(self.params.nx) + 0.5) * dx
        ys = ymin + (np.arange(self.params.ny) + 0.5) * dy
        return xs, ys

    @property
    def covered_mask(self) -> np.ndarray:
        return self.pathloss_db != UNCOVERED

    def grids(self) -> dict[str, np.ndarray]:
        return {
            "pathloss_db": self.pathloss_db,
            "los_mask": self.los_mask,
            "phi": self.phi,
            "d3d": self.d3d,
            "ref_mask": self.ref_mask,
            "building_mask": self.building_mask,
            "height_map": self.height_map,
        }


def simulate_radio_environment(params: SimulationParams,
                               env: Environment | None = None) -> RadioMapResult:
    """Run a full grid simulation; the environment is resolved from
    params.location unless one is passed directly."""
    if env is None:
        env = resolve_location(params.location)
    params.validate(env)
    if not any((params.los, params.ref, params.gref, params.nlos, params.bel)):
        warnings.warn("all mechanisms disabled: the map will be fully uncovered",
                      stacklevel=2)

    nx, ny = params.nx, params.ny
    rxh = params.effective_rx_height()
    f = params.radio.frequency
    eps_r = params.radio.wall_permittivity
    tx = params.tx

    (xmin, ymin), (xmax, ymax) = env.bounds
    dx = (xmax - xmin) / nx
    dy = (ymax - ymin) / ny
    xs = xmin + (np.arange(nx) + 0.5) * dx
    ys = ymin + (np.arange(ny) + 0.5) * dy

    pathloss = np.full((ny, nx), UNCOVERED, dtype=float)
    los_mask = np.zeros((ny, nx), dtype=np.int8)
    ref_mask = np.zeros((ny, nx), dtype=np.int8)
    building_mask = np.zeros((ny, nx), dtype=np.int8)
    height_map = np.full((ny, nx), rxh, dtype=float)

    gx, gy = np.meshgrid(xs, ys)
    phi = np.arctan2(gy - tx.y, gx - tx.x)
    d3d = np.sqrt((gx - tx.x) ** 2 + (gy - tx.y) ** 2 + (rxh - tx.z) ** 2)

    for j in range(ny):
        for i in range(nx):
            cx, cy = float(xs[i]), float(ys[j])
            bid = env.point_in_building((cx, cy))
            bld_height = env.building_heights[bid] if bid is not None else None
            indoor = bid is not None and rxh < bld_height
            if bid is not None:
                building_mask[j, i] = 1
                height_map[j, i] = bld_height

            if indoor:
                # masks stay 0; no rays terminate indoors
                if params.nlos:
                    loss = nlos_3gpp(float(d3d[j, i]), f, rxh)
                    if params.bel:
                        horiz = math.hypot(cx - tx.x, cy - tx.y)
                        elev = math.degrees(math.atan2(tx.z - rxh, horiz))
                        loss += bel_p2109(f, elev, 0.5)
                    pathloss[j, i] = loss
                continue

            rx = Point3(cx, cy, rxh)
            direct = direct_path(env, tx, rx)
            reflections = wall_reflections(env, tx, rx)
            ground = ground_reflection(env, tx, rx)

            los_mask[j, i] = 1 if direct is not None else 0
            ref_mask[j, i] = 1 if reflections else 0

            contribs: list[PathContribution] = []
            if params.los and direct is not None:
                contribs.append(PathContribution(
                    direct, fspl(direct.total_length, f)))
            if params.ref:
                for p in reflections:
                    contribs.append(PathContribution(
                        p, fspl(p.total_length, f)
                        + fresnel_reflection_loss(p.incidence_angle, eps_r)))
            if params.gref and ground is not None:
                contribs.append(PathContribution(
                    ground, fspl(ground.total_length, f)
                    + fresnel_reflection_loss(ground.incidence_angle, eps_r)))

            combined = combine_contributions(contribs)
            if combined is None and params.nlos:
                combined = nlos_3gpp(float(d3d[j, i]), f, rxh)
            if combined is not None:
                pathloss[j, i] = combined

    return RadioMapResult(
        params=params,
        bounds=env.bounds,
        pathloss_db=pathloss,
        los_mask=los_mask,
        phi=phi,
        d3d=d3d,
        ref_mask=ref_mask,
        building_mask=building_mask,
        height_map=height_map,
        run_id=uuid.uuid4().hex,
        created_at=datetime.now(timezone.utc).isoformat(),
    )


def _fmt(v: float) -> str:
    # repr of a Python float is the shortest string that round-trips exactly
    return repr(float(v))


def export_dataset(result: RadioMapResult, path: str | Path) -> Path:
    """Write the per-cell feature table plus a JSON metadata sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rxh = result.params.effective_rx_height()
    xs, ys = result.cell_centers()
    lines = [" ".join(DATASET_COLUMNS)]
    for j in range(result.params.ny):
        for i in range(result.params.nx):
            lines.append(" ".join((
                _fmt(xs[i]), _fmt(ys[j]), _fmt(rxh),
                str(int(result.los_mask[j, i])),
                _fmt(result.phi[j, i]), _fmt(result.d3d[j, i]),
                str(int(result.ref_mask[j, i])),
                str(int(result.building_mask[j, i])),
                _fmt(result.height_map[j, i]),
                _fmt(result.pathloss_db[j, i]),
            )))
    path.write_text("\n".join(lines) + "\n")

    meta = {
        "run_id": result.run_id,
        "created_at": result.created_at,
        "exported_at": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
        "params": result.params.to_dict(),
        "bounds": [list(result.bounds[0]), list(result.bounds[1])],
        "columns": DATASET_COLUMNS,
        "rows": result.params.nx * result.params.ny,
        "uncovered_sentinel": UNCOVERED,
    }
    sidecar_for(path).write_text(json.dumps(meta, indent=2) + "\n")
    return path


def sidecar_for(dataset_path: str | Path) -> Path:
    p = Path(dataset_path)
    return p.with_suffix(p.suffix + ".meta.json") if p.suffix != ".json" \
        else p.with_name(p.name + ".meta.json")


def parse_dataset(path: str | Path) -> dict:
    """Read a dataset file back into grids keyed like RadioMapResult.grids().

    Shape comes from the metadata sidecar when present, otherwise from the
    distinct coordinate counts in the table itself.
    """
    path = Path(path)
    lines = path.read_text().strip().split("\n")
    header = lines[0].split()
    if header != DATASET_COLUMNS:
        raise ValueError(f"unexpected dataset columns: {header}")
    rows = np.array([[float(tok) for tok in ln.split()] for ln in lines[1:]])

    meta_path = sidecar_for(path)
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        nx, ny = int(meta["params"]["nx"]), int(meta["params"]["ny"])
    else:
        meta = None
        nx = len(np.unique(rows[:, 0]))
        ny = len(np.unique(rows[:, 1]))
    if rows.shape[0] != nx * ny:
        raise ValueError(f"row count {rows.shape[0]} does not match {nx}x{ny}")

    def grid(col):
        return rows[:, DATASET_COLUMNS.index(col)].reshape(ny, nx)

    return {
        "pathloss_db": grid("pathloss_db"),
        "los_mask": grid("los").astype(np.int8),
        "phi": grid("phi"),
        "d3d": grid("d3d"),
        "ref_mask": grid("ref").astype(np.int8),
        "building_mask": grid("bld").astype(np.int8),
        "height_map": grid("height"),
        "rx_x": rows[:, 0].reshape(ny, nx),
        "rx_y": rows[:, 1].reshape(ny, nx),
        "rx_z": rows[:, 2].reshape(ny, nx),
        "meta": meta,
    }


# heatmap layout constants, all in device pixels
_MARGIN_LEFT = 70
_MARGIN_RIGHT = 120
_MARGIN_BOTTOM = 56
_MARGIN_TOP = 44
_TARGET_MAP_PX = 600


def render_heatmap(result: RadioMapResult, path: str | Path,
                   color_range: Optional[tuple[float, float]] = None) -> Path:
    """Render the pathloss grid to a PNG.

    Low pathloss (strong signal) maps to the hot end of the colormap,
    building cells are overlaid in neutral gray, uncovered cells stay
    transparent. The map area is the grid scaled by an exact integer pixel
    factor; a colorbar and the tx position are drawn alongside.
    """
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    from matplotlib import cm, colors

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    nx, ny = result.params.nx, result.params.ny
    covered = result.covered_mask
    finite = result.pathloss_db[covered]

    if color_range is not None:
        lo, hi = float(color_range[0]), float(color_range[1])
    elif finite.size:
        lo, hi = np.percentile(finite, 1.0), np.percentile(finite, 99.0)
    else:
        lo, hi = 0.0, 1.0
    if hi <= lo:
        hi = lo + 1.0

    # reversed magma: low dB (strong signal) lands on the bright hot end
    cmap = matplotlib.colormaps["magma"]
    norm = colors.Normalize(vmin=lo, vmax=hi)
    rgba = cmap(1.0 - norm(np.clip(result.pathloss_db, lo, hi)))
    rgba[~covered] = (0.0, 0.0, 0.0, 0.0)
    rgba[result.building_mask == 1] = (0.55, 0.55, 0.55, 1.0)

    k = max(1, _TARGET_MAP_PX // max(nx, ny))
    map_w, map_h = nx * k, ny * k
    fig_w = _MARGIN_LEFT + map_w + _MARGIN_RIGHT
    fig_h = _MARGIN_BOTTOM + map_h + _MARGIN_TOP
    dpi = 100.0
    fig = plt.figure(figsize=(fig_w / dpi, fig_h / dpi), dpi=dpi)
    ax = fig.add_axes([_MARGIN_LEFT / fig_w, _MARGIN_BOTTOM / fig_h,
                       map_w / fig_w, map_h / fig_h])

    (xmin, ymin), (xmax, ymax) = result.bounds
    ax.imshow(rgba, origin="lower", extent=(xmin, xmax, ymin, ymax),
              interpolation="nearest", aspect="auto")
    ax.plot(result.params.tx.x, result.params.tx.y, marker="*",
            markersize=14, color="white", markeredgecolor="black")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(f"pathloss, {result.params.location}")

    cax = fig.add_axes([(_MARGIN_LEFT + map_w + 24) / fig_w,
                        _MARGIN_BOTTOM / fig_h, 18 / fig_w, map_h / fig_h])
    sm = cm.ScalarMappable(norm=norm, cmap=cmap.reversed())
    cbar = fig.colorbar(sm, cax=cax)
    cbar.set_label("pathloss (dB)")
    cbar.ax.invert_yaxis()  # strong signal (low dB) at the top, like the map

    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path
