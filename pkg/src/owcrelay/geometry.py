"""Rectangular room model and tessellation of its surfaces.

Coordinates: x spans the width ``[0, W]``, y spans the length ``[0, L]`` and
z spans the height ``[0, H]``. With the default 8 x 4 x 3 m room the
ceiling centre is ``(2, 4, 3)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import InvalidArgumentError

# Relative tolerance used when deciding how many grid cells cover an extent.
_GRID_RTOL = 1e-9


class Vec3(NamedTuple):
    x: float
    y: float
    z: float

    def __sub__(self, other: Sequence[float]) -> "Vec3":  # type: ignore[override]
        return Vec3(self.x - other[0], self.y - other[1], self.z - other[2])

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def unit(self) -> "Vec3":
        n = self.norm()
        if n == 0.0:
            raise InvalidArgumentError("cannot normalise a zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)


def as_vec3(v: Sequence[float]) -> Vec3:
    out = Vec3(float(v[0]), float(v[1]), float(v[2]))
    if not all(math.isfinite(c) for c in out):
        raise InvalidArgumentError(f"non-finite vector component in {v!r}")
    return out


@dataclass(frozen=True)
class Surface:
    """One face of the room box.

    ``axis`` is the coordinate index fixed on the face (0=x, 1=y, 2=z) and
    ``offset`` its value. The face is parametrised by the two remaining axes
    ``(u_axis, v_axis)`` with extents ``(u_extent, v_extent)``.
    """

    name: str
    axis: int
    offset: float
    normal: Vec3
    u_axis: int
    v_axis: int
    u_extent: float
    v_extent: float
    reflectivity: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.reflectivity <= 1.0:
            raise InvalidArgumentError(
                f"reflectivity of {self.name} must lie in [0, 1], got {self.reflectivity}"
            )
        if abs(self.normal.norm() - 1.0) > 1e-12:
            raise InvalidArgumentError(f"normal of {self.name} is not a unit vector")

    @property
    def area(self) -> float:
        return self.u_extent * self.v_extent


@dataclass(frozen=True)
class RoomModel:
    """Empty rectangular room with Lambertian walls, ceiling and floor."""

    length: float = 8.0
    width: float = 4.0
    height: float = 3.0
    wall_reflectivity: float = 0.8
    ceiling_reflectivity: float = 0.8
    floor_reflectivity: float = 0.3
    surfaces: tuple[Surface, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        for name in ("length", "width", "height"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidArgumentError(f"room {name} must be positive, got {value}")
        W, L, H = self.width, self.length, self.height
        rw, rc, rf = self.wall_reflectivity, self.ceiling_reflectivity, self.floor_reflectivity
        faces = (
            Surface("floor", 2, 0.0, Vec3(0.0, 0.0, 1.0), 0, 1, W, L, rf),
            Surface("ceiling", 2, H, Vec3(0.0, 0.0, -1.0), 0, 1, W, L, rc),
            Surface("wall_x0", 0, 0.0, Vec3(1.0, 0.0, 0.0), 1, 2, L, H, rw),
            Surface("wall_xW", 0, W, Vec3(-1.0, 0.0, 0.0), 1, 2, L, H, rw),
            Surface("wall_y0", 1, 0.0, Vec3(0.0, 1.0, 0.0), 0, 2, W, H, rw),
            Surface("wall_yL", 1, L, Vec3(0.0, -1.0, 0.0), 0, 2, W, H, rw),
        )
        object.__setattr__(self, "surfaces", faces)

    @property
    def dimensions(self) -> Vec3:
        """Extents along (x, y, z)."""
        return Vec3(self.width, self.length, self.height)

    @property
    def surface_area(self) -> float:
        return sum(s.area for s in self.surfaces)

    def contains(self, p: Sequence[float], tol: float = 1e-9) -> bool:
        dims = self.dimensions
        return all(-tol <= p[i] <= dims[i] + tol for i in range(3))


@dataclass(frozen=True)
class ReflectionElement:
    centroid: Vec3
    normal: Vec3
    area: float
    reflectivity: float
    surface: str


@dataclass(frozen=True, eq=False)
class Tessellation:
    """Struct-of-arrays view of a list of reflection elements.

    Iterating yields :class:`ReflectionElement` objects in tessellation
    order; the arrays are what the vectorised channel engine consumes.
    """

    element_side: float
    centroids: np.ndarray
    normals: np.ndarray
    areas: np.ndarray
    reflectivity: np.ndarray
    surface_index: np.ndarray
    surface_names: tuple[str, ...]

    def __len__(self) -> int:
        return self.areas.shape[0]

    def __iter__(self) -> Iterator[ReflectionElement]:
        for k in range(len(self)):
            yield self[k]

    def __getitem__(self, k: int) -> ReflectionElement:
        c, n = self.centroids[k], self.normals[k]
        return ReflectionElement(
            centroid=Vec3(float(c[0]), float(c[1]), float(c[2])),
            normal=Vec3(float(n[0]), float(n[1]), float(n[2])),
            area=float(self.areas[k]),
            reflectivity=float(self.reflectivity[k]),
            surface=self.surface_names[int(self.surface_index[k])],
        )

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())


def _grid_edges(extent: float, side: float) -> np.ndarray:
    """Cell edges covering ``[0, extent]``; the last cell is clipped."""
    count = max(1, math.ceil(extent / side - _GRID_RTOL))
    edges = np.arange(count + 1, dtype=float) * side
    edges[-1] = extent
    return edges


def tessellate(room: RoomModel, element_side: float) -> Tessellation:
    """Divide every room surface into square reflection elements.

    Elements are ordered by surface (floor, ceiling, x=0, x=W, y=0, y=L) and
    row-major within a surface (v index outer, u index inner). When
    ``element_side`` does not divide a face dimension, the trailing row or
    column holds clipped rectangles with proportionally smaller area.
    """
    if not (math.isfinite(element_side) and element_side > 0):
        raise InvalidArgumentError(f"element_side must be positive, got {element_side}")
    if element_side > min(room.dimensions) * (1 + _GRID_RTOL):
        raise InvalidArgumentError(
            f"element_side {element_side} exceeds the smallest room dimension"
        )

    centroids, normals, areas, refl, index = [], [], [], [], []
    for s_idx, surf in enumerate(room.surfaces):
        ue = _grid_edges(surf.u_extent, element_side)
        ve = _grid_edges(surf.v_extent, element_side)
        uc = 0.5 * (ue[:-1] + ue[1:])
        vc = 0.5 * (ve[:-1] + ve[1:])
        du = np.diff(ue)
        dv = np.diff(ve)
        vv, uu = np.meshgrid(vc, uc, indexing="ij")
        dvv, duu = np.meshgrid(dv, du, indexing="ij")
        n = uu.size
        pts = np.empty((n, 3))
        pts[:, surf.axis] = surf.offset
        pts[:, surf.u_axis] = uu.ravel()
        pts[:, surf.v_axis] = vv.ravel()
        centroids.append(pts)
        normals.append(np.tile(np.asarray(surf.normal, dtype=float), (n, 1)))
        areas.append((duu * dvv).ravel())
        refl.append(np.full(n, surf.reflectivity))
        index.append(np.full(n, s_idx, dtype=np.int64))

    arrays = [np.concatenate(a) for a in (centroids, normals, areas, refl, index)]
    for a in arrays:
        a.setflags(write=False)
    return Tessellation(
        element_side,
        *arrays,
        surface_names=tuple(s.name for s in room.surfaces),
    )
