"""Antenna systems: isotropic, vertical-dipole-like omni, and directive horn.

Patterns are cos-power shapes whose exponent is solved numerically so the
gain averaged over the full sphere equals 1 (total radiated power is
conserved). Gains are linear power factors applied per ray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from scipy.integrate import quad
from scipy.optimize import bisect

from .geometry import Vec3, norm

# Gain used behind the horn aperture (and wherever the pattern would
# otherwise underflow it): -40 dB, avoids exact zeros in coherent sums.
BACK_LOBE_GAIN = 1e-4

_KINDS = ("isotropic", "omni", "horn")


@dataclass(frozen=True)
class AntennaSystem:
    """One end-to-end antenna configuration (same pattern at Tx and Rx).

    boresight is the transmitter's pointing direction; the receiver faces
    back along it. The omni pattern is symmetric about the vertical axis,
    so its boresight only marks the link direction.
    """

    kind: str
    tx_power_dbm: float
    peak_gain_dbi: float
    boresight: Vec3 = (1.0, 0.0, 0.0)
    pattern_exponent: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown antenna kind {self.kind!r}; expected one of {_KINDS}")
        b = self.boresight
        n = norm(b)
        if not 1e-12 < n < math.inf:
            raise ValueError(f"boresight must be a non-zero finite vector, got {b}")
        object.__setattr__(self, "boresight", (b[0] / n, b[1] / n, b[2] / n))

    @property
    def tx_power_watts(self) -> float:
        return 10.0 ** (self.tx_power_dbm / 10.0) / 1000.0

    @property
    def peak_gain_linear(self) -> float:
        return 10.0 ** (self.peak_gain_dbi / 10.0)


def _sphere_average(kind: str, exponent: float, peak_linear: float) -> float:
    """Pattern gain averaged over the full sphere (1 = power conserved)."""
    if kind == "isotropic":
        return peak_linear
    if kind == "omni":
        # (1/4pi) * integral over azimuth and elevation of G cos^n(el).
        val, _ = quad(lambda el: math.cos(el) ** (exponent + 1.0), 0.0, math.pi / 2)
        return peak_linear * val
    # horn: front hemisphere keeps max(G cos^m(psi), floor), back is floor.
    if peak_linear > BACK_LOBE_GAIN and exponent > 0.0:
        crossover = math.acos((BACK_LOBE_GAIN / peak_linear) ** (1.0 / exponent))
        pts = [crossover]
    else:
        pts = None
    front, _ = quad(
        lambda psi: max(peak_linear * math.cos(psi) ** exponent, BACK_LOBE_GAIN)
        * math.sin(psi),
        0.0, math.pi / 2, points=pts)
    return 0.5 * front + 0.5 * BACK_LOBE_GAIN


def solve_pattern_exponent(kind: str, peak_gain_dbi: float) -> float:
    """Exponent making the sphere-averaged gain equal 1 for the given peak."""
    if kind == "isotropic":
        if abs(peak_gain_dbi) > 1e-9:
            raise ValueError("isotropic pattern requires 0 dBi peak gain")
        return 0.0
    peak = 10.0 ** (peak_gain_dbi / 10.0)
    f = lambda x: _sphere_average(kind, x, peak) - 1.0
    if f(0.0) <= 0.0:
        raise ValueError(
            f"peak gain {peak_gain_dbi} dBi too low to normalize a {kind} pattern")
    hi = 64.0
    while f(hi) > 0.0:
        hi *= 2.0
        if hi > 1e7:
            raise ValueError(
                f"peak gain {peak_gain_dbi} dBi too high to normalize (beam too narrow)")
    return bisect(f, 0.0, hi, xtol=1e-9)


def make_system(kind: str, tx_power_dbm: float, peak_gain_dbi: float,
                boresight: Vec3 = (1.0, 0.0, 0.0)) -> AntennaSystem:
    """Antenna system with its pattern exponent solved for power conservation."""
    return AntennaSystem(
        kind=kind,
        tx_power_dbm=tx_power_dbm,
        peak_gain_dbi=peak_gain_dbi,
        boresight=boresight,
        pattern_exponent=solve_pattern_exponent(kind, peak_gain_dbi),
    )


_PRESETS = {
    "system1": ("isotropic", 20.0, 0.0),
    "system2": ("omni", 20.0, 8.5),
    "system3": ("horn", 10.0, 20.8),
}
# The kind names double as preset aliases.
_PRESET_ALIASES = {"isotropic": "system1", "omni": "system2", "horn": "system3"}


@lru_cache(maxsize=None)
def system_preset(name: str) -> AntennaSystem:
    """One of the three studied configurations.

    system1: isotropic, 20 dBm, 0 dBi
    system2: omnidirectional, 20 dBm, 8.5 dBi
    system3: horn, 10 dBm, 20.8 dBi
    """
    key = _PRESET_ALIASES.get(name, name)
    if key not in _PRESETS:
        known = sorted(_PRESETS) + sorted(_PRESET_ALIASES)
        raise ValueError(f"unknown antenna preset {name!r}; expected one of {known}")
    kind, power, peak = _PRESETS[key]
    return make_system(kind, power, peak)


def gain(sys: AntennaSystem,
         direction: Union[Vec3, np.ndarray],
         boresight: Optional[Vec3] = None) -> Union[float, np.ndarray]:
    """Linear power gain of the pattern in the given unit direction(s).

    direction may be one 3-vector or an (N, 3) array. boresight overrides
    the system's own pointing direction (used for the receiving end).
    """
    arr = np.asarray(direction, dtype=float)
    single = arr.ndim == 1
    pts = np.atleast_2d(arr)
    if pts.shape[-1] != 3:
        raise ValueError(f"direction must have 3 components, got shape {arr.shape}")
    norms = np.sqrt(np.einsum("ij,ij->i", pts, pts))
    if np.any(np.abs(norms - 1.0) > 1e-6):
        raise ValueError("direction must be a unit vector")

    if sys.kind == "isotropic":
        out = np.ones(pts.shape[0])
    elif sys.kind == "omni":
        cos_el = np.sqrt(np.clip(1.0 - pts[:, 2] ** 2, 0.0, 1.0))
        out = sys.peak_gain_linear * cos_el ** sys.pattern_exponent
    else:
        b = np.asarray(boresight if boresight is not None else sys.boresight, float)
        b = b / np.linalg.norm(b)
        cos_psi = pts @ b
        front = np.maximum(
            sys.peak_gain_linear * np.clip(cos_psi, 0.0, 1.0) ** sys.pattern_exponent,
            BACK_LOBE_GAIN)
        out = np.where(cos_psi > 0.0, front, BACK_LOBE_GAIN)
    return float(out[0]) if single else out
