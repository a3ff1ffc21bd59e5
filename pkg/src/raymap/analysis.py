"""Quantitative radio-map summaries and their natural-language rendering.

The summarizer works on the simulation grids, not on rendered pixels, so its
statistics are exact and reproducible. An optional hook forwards the rendered
heatmap to a vision-capable chat model instead; that path is never used by
the deterministic pipeline and its output is always labeled as coming from a
model.
"""

from __future__ import annotations

import base64
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .radiomap import RadioMapResult

QUADRANTS = ("lower_left", "lower_right", "upper_left", "upper_right")
_QUADRANT_LABEL = {
    "lower_left": "lower-left",
    "lower_right": "lower-right",
    "upper_left": "upper-left",
    "upper_right": "upper-right",
}

DEFAULT_GRADIENT_THRESHOLD_DB = 10.0
DEFAULT_COVERAGE_THRESHOLD_DB = 150.0
# at least this share of high-gradient cells must touch a building before the
# text attributes the gradients to walls
WALL_ATTRIBUTION_FRACTION = 0.3


@dataclass
class MapSummary:
    value_range: tuple[float, float]
    percentiles: dict[str, float]  # p5, p25, p50, p75, p95
    quadrant_stats: dict[str, dict[str, float]]  # mean/median per quadrant
    strongest_quadrant: str
    weakest_quadrant: str
    coverage_threshold_db: float
    coverage_fraction: float
    gradient_threshold_db: float
    high_gradient_cells: list[tuple[int, int]]
    wall_adjacent_fraction: float
    los_fraction: float

    def to_dict(self) -> dict:
        return {
            "value_range": list(self.value_range),
            "percentiles": dict(self.percentiles),
            "quadrant_stats": {k: dict(v) for k, v in self.quadrant_stats.items()},
            "strongest_quadrant": self.strongest_quadrant,
            "weakest_quadrant": self.weakest_quadrant,
            "coverage_threshold_db": self.coverage_threshold_db,
            "coverage_fraction": self.coverage_fraction,
            "gradient_threshold_db": self.gradient_threshold_db,
            "high_gradient_cell_count": len(self.high_gradient_cells),
            "high_gradient_cells": [list(c) for c in self.high_gradient_cells[:100]],
            "wall_adjacent_fraction": self.wall_adjacent_fraction,
            "los_fraction": self.los_fraction,
        }


def _quadrant_slices(ny: int, nx: int) -> dict[str, tuple[slice, slice]]:
    # exact midline cells belong to the lower/left side
    jm = (ny + 1) // 2
    im = (nx + 1) // 2
    return {
        "lower_left": (slice(0, jm), slice(0, im)),
        "lower_right": (slice(0, jm), slice(im, nx)),
        "upper_left": (slice(jm, ny), slice(0, im)),
        "upper_right": (slice(jm, ny), slice(im, nx)),
    }


def coverage_fraction(result: RadioMapResult, threshold_db: float) -> float:
    """Share of all cells whose pathloss is finite and at most threshold_db."""
    good = result.covered_mask & (result.pathloss_db <= threshold_db)
    return float(good.sum()) / result.pathloss_db.size


def gradient_magnitude(pathloss_db: np.ndarray, covered: np.ndarray) -> np.ndarray:
    """Central-difference gradient magnitude; NaN where the stencil touches an
    uncovered cell (gradients across the sentinel are meaningless)."""
    work = np.where(covered, pathloss_db, np.nan)
    gy, gx = np.gradient(work)
    return np.hypot(gx, gy)


def summarize_pathloss_map(
    result: RadioMapResult,
    gradient_threshold_db: float = DEFAULT_GRADIENT_THRESHOLD_DB,
    coverage_threshold_db: float = DEFAULT_COVERAGE_THRESHOLD_DB,
) -> MapSummary:
    pl = result.pathloss_db
    covered = result.covered_mask
    finite = pl[covered]
    if finite.size == 0:
        raise ValueError("cannot summarize an all-uncovered map")

    percentiles = {
        f"p{p}": float(np.percentile(finite, p)) for p in (5, 25, 50, 75, 95)
    }

    ny, nx = pl.shape
    stats: dict[str, dict[str, float]] = {}
    means: dict[str, float] = {}
    for name, (js, is_) in _quadrant_slices(ny, nx).items():
        vals = pl[js, is_][covered[js, is_]]
        if vals.size:
            stats[name] = {"mean": float(vals.mean()),
                           "median": float(np.median(vals))}
            means[name] = stats[name]["mean"]
        else:
            stats[name] = {"mean": math.nan, "median": math.nan}
    if not means:
        raise ValueError("no quadrant has any covered cell")
    strongest = min(means, key=means.get)  # low pathloss = strong signal
    weakest = max(means, key=means.get)

    grad = gradient_magnitude(pl, covered)
    high = np.argwhere(np.nan_to_num(grad, nan=0.0) > gradient_threshold_db)
    high_cells = [(int(j), int(i)) for j, i in high]

    if high_cells:
        bm = result.building_mask
        padded = np.pad(bm, 1, mode="constant")
        near_wall = np.zeros_like(bm, dtype=bool)
        for dj in (0, 1, 2):
            for di in (0, 1, 2):
                near_wall |= padded[dj:dj + ny, di:di + nx] == 1
        adjacent = sum(1 for j, i in high_cells if near_wall[j, i])
        wall_frac = adjacent / len(high_cells)
    else:
        wall_frac = 0.0

    return MapSummary(
        value_range=(float(finite.min()), float(finite.max())),
        percentiles=percentiles,
        quadrant_stats=stats,
        strongest_quadrant=strongest,
        weakest_quadrant=weakest,
        coverage_threshold_db=coverage_threshold_db,
        coverage_fraction=coverage_fraction(result, coverage_threshold_db),
        gradient_threshold_db=gradient_threshold_db,
        high_gradient_cells=high_cells,
        wall_adjacent_fraction=wall_frac,
        los_fraction=float(result.los_mask.mean()),
    )


def render_summary_text(summary: MapSummary) -> str:
    """Fixed-template technical paragraph; byte-stable for equal summaries."""
    lo, hi = summary.value_range
    if hi - lo < 1e-9:
        range_sentence = f"Pathloss is uniform at {lo:.1f} dB across the covered area."
    else:
        range_sentence = (
            f"Pathloss values range from {lo:.1f} dB to {hi:.1f} dB "
            f"(median {summary.percentiles['p50']:.1f} dB).")

    means = {q: s["mean"] for q, s in summary.quadrant_stats.items()
             if not math.isnan(s["mean"])}
    spread = max(means.values()) - min(means.values()) if means else 0.0
    if spread < 1e-9:
        quadrant_sentence = "Signal strength is effectively uniform across quadrants."
    else:
        quadrant_sentence = (
            f"Strong signals (lower pathloss) concentrate in the "
            f"{_QUADRANT_LABEL[summary.strongest_quadrant]} quadrant, while weaker "
            f"signals (higher pathloss) appear in the "
            f"{_QUADRANT_LABEL[summary.weakest_quadrant]} quadrant.")

    n_high = len(summary.high_gradient_cells)
    if n_high == 0:
        gradient_sentence = "There are no significant spatial gradients."
    elif summary.wall_adjacent_fraction >= WALL_ATTRIBUTION_FRACTION:
        gradient_sentence = (
            f"{n_high} cells exceed the {summary.gradient_threshold_db:.0f} dB "
            f"per-cell gradient threshold, and "
            f"{100 * summary.wall_adjacent_fraction:.0f}% of them lie within one "
            f"cell of a building, indicating sharp attenuation near walls.")
    else:
        gradient_sentence = (
            f"{n_high} cells exceed the {summary.gradient_threshold_db:.0f} dB "
            f"per-cell gradient threshold, without a clear association to "
            f"building walls.")

    return " ".join((range_sentence, quadrant_sentence, gradient_sentence))


def summarize_image_via_vision_model(image_path: str | Path, client,
                                     prompt: Optional[str] = None) -> str:
    """Send a rendered heatmap to a vision-capable chat endpoint and return
    the model's text verbatim. Raises on transport failure; callers fall back
    to the deterministic summarizer."""
    image_path = Path(image_path)
    payload = base64.b64encode(image_path.read_bytes()).decode("ascii")
    instruction = prompt or (
        "Describe this radio pathloss heatmap: value range, spatial pattern "
        "of strong and weak signal, and any sharp attenuation features.")
    messages = [{
        "role": "user",
        "content": [
            {"type": "text", "text": instruction},
            {"type": "image_url",
             "image_url": {"url": f"data:image/png;base64,{payload}"}},
        ],
    }]
    return client.complete_text(messages)
