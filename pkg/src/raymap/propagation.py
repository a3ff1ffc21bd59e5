"""Pathloss models: free-space loss, Fresnel reflection losses, non-coherent
power combination, an empirical street-canyon NLOS floor, and building entry
loss at a configurable exceedance probability.

All functions are stateless; distances in meters, frequencies in GHz, angles
in radians unless a name says otherwise, losses in dB (positive = weaker).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from statistics import NormalDist
from typing import Optional, Sequence

from .raytrace import RayPath

C_LIGHT = 299_792_458.0  # m/s
MIN_DISTANCE_M = 1.0  # near-field clamp
FRESNEL_LOSS_CAP_DB = 200.0

_STD_NORMAL = NormalDist()

# Building-entry-loss coefficients, traditional construction class:
# horizontal-loss quadratic (r, s, t), spread terms (u, v), second lognormal
# component (w, x, y, z) and the floor constant C.
_BEL_TRADITIONAL = {
    "r": 12.64, "s": 3.72, "t": 0.96,
    "u": 9.6, "v": 2.0,
    "w": 9.1, "x": -3.0,
    "y": 9.4, "z": -2.1,
    "C": -3.0,
}


@dataclass(frozen=True)
class RadioConfig:
    """Carrier and material configuration shared by a whole simulation."""

    frequency: float = 3.5  # GHz
    tx_power_dbm: float = 30.0  # bookkeeping only; pathloss is power-independent
    wall_permittivity: float = 5.31  # concrete-like, lossless dielectric
    rx_height_default: float = 1.5  # meters

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError(f"frequency must be > 0 GHz, got {self.frequency}")
        if not self.wall_permittivity > 1:
            raise ValueError(
                f"wall_permittivity must be > 1, got {self.wall_permittivity}")


@dataclass(frozen=True)
class PathContribution:
    path: Optional[RayPath]
    loss_db: float


def fspl(d: float, f: float) -> float:
    """Free-space pathloss in dB; d clamped to 1 m below the near-field limit."""
    if f <= 0:
        raise ValueError(f"frequency must be > 0 GHz, got {f}")
    d = max(d, MIN_DISTANCE_M)
    return 20.0 * math.log10(4.0 * math.pi * d * f * 1e9 / C_LIGHT)


def fresnel_reflection_loss(angle: float, eps_r: float) -> float:
    """Reflection loss −20·log10|Γ⊥| for a lossless dielectric half-space.

    angle is measured from the surface normal, in [0, π/2). Perpendicular
    polarization; the loss is capped so a near-unity-permittivity wall cannot
    produce an infinite value.
    """
    if not (0.0 <= angle < math.pi / 2):
        raise ValueError(f"angle must be in [0, pi/2), got {angle}")
    if eps_r <= 1.0:
        return FRESNEL_LOSS_CAP_DB
    sin2 = math.sin(angle) ** 2
    root = math.sqrt(eps_r - sin2)
    cos = math.cos(angle)
    gamma = (root - cos) / (root + cos)
    if gamma <= 10 ** (-FRESNEL_LOSS_CAP_DB / 20.0):
        return FRESNEL_LOSS_CAP_DB
    return min(-20.0 * math.log10(gamma), FRESNEL_LOSS_CAP_DB)


def combine_contributions(contribs: Sequence[PathContribution]) -> Optional[float]:
    """Non-coherent power sum of per-path losses; None when no path exists."""
    if not contribs:
        return None
    total = sum(10.0 ** (-c.loss_db / 10.0) for c in contribs)
    return -10.0 * math.log10(total)


def nlos_3gpp(d3d: float, f: float, h_ut: float) -> float:
    """Street-canyon NLOS pathloss with a free-space lower bound.

    h_ut outside the model's [0.5, 22.5] m validity range is clamped, with a
    warning so callers notice silent extrapolation.
    """
    d3d = max(d3d, MIN_DISTANCE_M)
    if not (0.5 <= h_ut <= 22.5):
        warnings.warn(
            f"h_ut={h_ut} m outside model range [0.5, 22.5], clamping",
            stacklevel=2)
        h_ut = min(22.5, max(0.5, h_ut))
    nlos = 35.3 * math.log10(d3d) + 22.4 + 21.3 * math.log10(f) \
        - 0.3 * (h_ut - 1.5)
    return max(fspl(d3d, f), nlos)


def bel_p2109(f: float, elevation_angle: float, probability: float = 0.5) -> float:
    """Building entry loss (traditional construction) at an exceedance
    probability, for a given carrier frequency and ray elevation in degrees."""
    if not (0.08 <= f <= 100.0):
        raise ValueError(f"frequency {f} GHz outside supported range [0.08, 100]")
    if not (0.0 < probability < 1.0):
        raise ValueError(f"probability must be in (0, 1), got {probability}")
    if not (-90.0 <= elevation_angle <= 90.0):
        raise ValueError(
            f"elevation_angle must be in [-90, 90] degrees, got {elevation_angle}")
    c = _BEL_TRADITIONAL
    lf = math.log10(f)
    l_h = c["r"] + c["s"] * lf + c["t"] * lf * lf
    l_e = 0.212 * abs(elevation_angle)
    mu1 = l_h + l_e
    mu2 = c["w"] + c["x"] * lf
    sigma1 = c["u"] + c["v"] * lf
    sigma2 = c["y"] + c["z"] * lf
    q = _STD_NORMAL.inv_cdf(probability)
    a = q * sigma1 + mu1
    b = q * sigma2 + mu2
    return 10.0 * math.log10(
        10.0 ** (0.1 * a) + 10.0 ** (0.1 * b) + 10.0 ** (0.1 * c["C"]))
