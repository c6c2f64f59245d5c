"""Generalised Lambertian emitters and detectors.

A single line-of-sight link between an emitter with Lambertian order ``n``
and a detector of area ``A`` separated by distance ``r`` has gain::

    (n + 1) / (2 pi r^2) * cos^n(phi) * A * cos(theta)

where ``phi`` is the emission angle and ``theta`` the incidence angle. The
gain is zero outside the emitter's front hemisphere, outside the
detector's front hemisphere or beyond the detector field of view.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .geometry import Vec3, as_vec3

SPEED_OF_LIGHT = 2.99792458e8  # m/s

# Absolute slack on cos(theta) so that theta == fov survives float rounding.
FOV_COS_TOL = 1e-12


def lambertian_order(half_power_semiangle: float) -> float:
    """Lambertian order for a half-power semiangle given in degrees."""
    if not 0.0 < half_power_semiangle < 90.0:
        raise InvalidArgumentError(
            f"half-power semiangle must lie in (0, 90) degrees, got {half_power_semiangle}"
        )
    n = -math.log(2.0) / math.log(math.cos(math.radians(half_power_semiangle)))
    # cos(60 deg) rounds to 0.5000000000000001; snap such residues to the integer order
    return float(round(n)) if abs(n - round(n)) < 1e-12 else n


def normal_from_angles(elevation_deg: float, azimuth_deg: float) -> Vec3:
    """Unit normal for a detector pointing at (elevation, azimuth).

    Elevation 90 degrees points straight up (+z); azimuth is measured from
    +x towards +y.
    """
    el, az = math.radians(elevation_deg), math.radians(azimuth_deg)
    # snap the tiny cos(pi/2) residue so vertical detectors are exactly vertical
    c_el = 0.0 if abs(math.cos(el)) < 1e-15 else math.cos(el)
    return Vec3(c_el * math.cos(az), c_el * math.sin(az), math.sin(el))


def _check_unit(v: Vec3, what: str) -> Vec3:
    if abs(v.norm() - 1.0) > 1e-9:
        raise InvalidArgumentError(f"{what} must be a unit vector, got {v}")
    return v


@dataclass(frozen=True)
class Emitter:
    position: Vec3
    normal: Vec3
    order: float = 1.0
    optical_power: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", as_vec3(self.position))
        object.__setattr__(self, "normal", _check_unit(as_vec3(self.normal), "emitter normal"))
        if not self.order >= 0:
            raise InvalidArgumentError(f"Lambertian order must be >= 0, got {self.order}")
        if not self.optical_power >= 0:
            raise InvalidArgumentError("optical power must be >= 0")

    @classmethod
    def from_semiangle(cls, position, normal, hps_deg: float, optical_power: float = 1.0) -> "Emitter":
        return cls(as_vec3(position), as_vec3(normal), lambertian_order(hps_deg), optical_power)


@dataclass(frozen=True)
class Detector:
    position: Vec3
    normal: Vec3
    area: float = 1e-4
    fov: float = 90.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", as_vec3(self.position))
        object.__setattr__(self, "normal", _check_unit(as_vec3(self.normal), "detector normal"))
        if not self.area > 0:
            raise InvalidArgumentError(f"detector area must be positive, got {self.area}")
        if not 0.0 < self.fov <= 90.0:
            raise InvalidArgumentError(f"fov must lie in (0, 90] degrees, got {self.fov}")

    @property
    def cos_fov(self) -> float:
        return math.cos(math.radians(self.fov))


def path_contribution(e: Emitter, d: Detector) -> tuple[float, float]:
    """Gain and propagation delay (seconds) of the direct path ``e -> d``."""
    dx = d.position.x - e.position.x
    dy = d.position.y - e.position.y
    dz = d.position.z - e.position.z
    r2 = dx * dx + dy * dy + dz * dz
    if r2 == 0.0:
        raise InvalidArgumentError("emitter and detector positions coincide")
    r = math.sqrt(r2)
    delay = r / SPEED_OF_LIGHT
    cos_phi = (e.normal.x * dx + e.normal.y * dy + e.normal.z * dz) / r
    cos_theta = -(d.normal.x * dx + d.normal.y * dy + d.normal.z * dz) / r
    if cos_phi <= 0.0 or cos_theta <= 0.0 or cos_theta < d.cos_fov - FOV_COS_TOL:
        return 0.0, delay
    gain = (e.order + 1.0) / (2.0 * math.pi * r2) * cos_phi**e.order * d.area * cos_theta
    return gain, delay


def link_gains(
    src_pos: np.ndarray,
    src_normal: np.ndarray,
    src_order: float,
    dst_pos: np.ndarray,
    dst_normal: np.ndarray,
    dst_area: np.ndarray | float,
    dst_cos_fov: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`path_contribution` over broadcastable point sets.

    Positions and normals carry the coordinate on the last axis. Returns
    ``(gain, distance)``. Zero-length links get zero gain and distance 0.
    """
    dx = dst_pos[..., 0] - src_pos[..., 0]
    dy = dst_pos[..., 1] - src_pos[..., 1]
    dz = dst_pos[..., 2] - src_pos[..., 2]
    r2 = dx * dx + dy * dy + dz * dz
    r = np.sqrt(r2)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_phi = (src_normal[..., 0] * dx + src_normal[..., 1] * dy + src_normal[..., 2] * dz) / r
        cos_theta = -(dst_normal[..., 0] * dx + dst_normal[..., 1] * dy + dst_normal[..., 2] * dz) / r
        ok = (r2 > 0.0) & (cos_phi > 0.0) & (cos_theta > 0.0) & (cos_theta >= dst_cos_fov - FOV_COS_TOL)
        gain = (src_order + 1.0) / (2.0 * np.pi * r2) * cos_phi**src_order * dst_area * cos_theta
    gain = np.where(ok, gain, 0.0)
    return gain, r
