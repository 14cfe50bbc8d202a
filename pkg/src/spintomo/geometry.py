"""Voxel grids on a physical plane, parallel-beam scan geometry and ordered
ray-voxel traversal."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class GridSpec:
    """Uniform square-voxel grid; origin is the lower-left corner (meters)."""

    nx: int
    ny: int
    voxel_size: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid must have at least one voxel per axis")
        if self.voxel_size <= 0:
            raise ValueError("voxel_size must be positive")

    @property
    def width(self) -> float:
        return self.nx * self.voxel_size

    @property
    def height(self) -> float:
        return self.ny * self.voxel_size

    @property
    def center(self) -> tuple[float, float]:
        return (self.origin[0] + 0.5 * self.width, self.origin[1] + 0.5 * self.height)

    def centers_x(self) -> np.ndarray:
        return self.origin[0] + (np.arange(self.nx) + 0.5) * self.voxel_size

    def centers_y(self) -> np.ndarray:
        return self.origin[1] + (np.arange(self.ny) + 0.5) * self.voxel_size

    @staticmethod
    def centered(nx: int, ny: int, fov: float) -> "GridSpec":
        """Grid of width fov centered on the coordinate origin."""
        h = fov / nx
        return GridSpec(nx, ny, h, (-0.5 * fov, -0.5 * ny * h))


@dataclass
class VectorField2D:
    """3-component magnetic field (Tesla) sampled at voxel centers of a grid.

    values has shape (nx, ny, 3); index [i, j] maps to the voxel center
    (origin_x + (i+0.5)h, origin_y + (j+0.5)h).
    """

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        expected = (self.spec.nx, self.spec.ny, 3)
        if self.values.shape != expected:
            raise ValueError(f"field shape {self.values.shape} != {expected}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite entries")

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.values**2, axis=2))

    def scaled(self, alpha: float) -> "VectorField2D":
        return VectorField2D(self.spec, alpha * self.values)

    @staticmethod
    def zeros(spec: GridSpec) -> "VectorField2D":
        return VectorField2D(spec, np.zeros((spec.nx, spec.ny, 3)))


@dataclass(frozen=True)
class Ray:
    """2D ray with unit direction; the origin should lie outside any grid it
    is traced through (rays_for_scan guarantees this)."""

    origin: tuple[float, float]
    direction: tuple[float, float]

    def __post_init__(self):
        norm = math.hypot(*self.direction)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"ray direction must be unit length, got {norm}")


@dataclass(frozen=True)
class ScanGeometry:
    """Parallel-beam acquisition: n_angles views at equiangular increments,
    n_detectors offsets per view, detector line through the grid center."""

    n_angles: int
    angle_start: float
    angle_step: float
    n_detectors: int
    detector_pitch: float
    neutron_speed: float

    def __post_init__(self):
        if self.n_angles < 1 or self.n_detectors < 1:
            raise ValueError("need at least one angle and one detector")
        if self.detector_pitch <= 0 or self.neutron_speed <= 0:
            raise ValueError("detector_pitch and neutron_speed must be positive")

    def angles(self) -> np.ndarray:
        return self.angle_start + self.angle_step * np.arange(self.n_angles)

    def detector_offsets(self) -> np.ndarray:
        d = np.arange(self.n_detectors)
        return (d - 0.5 * (self.n_detectors - 1)) * self.detector_pitch


@dataclass(frozen=True)
class TraversalSegment:
    voxel_index: tuple[int, int]
    chord_length: float


def traverse(spec: GridSpec, ray: Ray) -> list[TraversalSegment]:
    """Ordered voxel visits of a ray through the grid.

    Segments are returned in encounter order; the chord lengths sum to the
    length of the ray's intersection with the grid bounding box.  A ray
    that misses the grid yields an empty list.
    """
    cap = spec.nx + spec.ny + 4
    seg_i = np.empty(cap, np.int64)
    seg_j = np.empty(cap, np.int64)
    seg_c = np.empty(cap)
    m = _kernels.traverse_into(
        ray.origin[0], ray.origin[1], ray.direction[0], ray.direction[1],
        spec.origin[0], spec.origin[1], spec.voxel_size, spec.nx, spec.ny,
        seg_i, seg_j, seg_c,
    )
    return [
        TraversalSegment((int(seg_i[n]), int(seg_j[n])), float(seg_c[n]))
        for n in range(m)
    ]


def scan_ray_arrays(spec: GridSpec, geom: ScanGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Origins and unit directions for every (angle, detector) ray, flattened
    angle-major, as (N, 2) float arrays for the compiled kernels."""
    cx, cy = spec.center
    half_diag = 0.5 * math.hypot(spec.width, spec.height)
    back = half_diag + max(2.0 * spec.voxel_size, 0.01 * half_diag)
    thetas = geom.angles()
    offsets = geom.detector_offsets()
    dx = np.cos(thetas)
    dy = np.sin(thetas)
    # Detector normal is the ray direction rotated +90 degrees.
    ox = cx + offsets[None, :] * (-dy[:, None]) - back * dx[:, None]
    oy = cy + offsets[None, :] * (dx[:, None]) - back * dy[:, None]
    origins = np.stack([ox.ravel(), oy.ravel()], axis=1)
    dirs = np.stack(
        [np.repeat(dx, geom.n_detectors), np.repeat(dy, geom.n_detectors)], axis=1
    )
    return np.ascontiguousarray(origins), np.ascontiguousarray(dirs)


def rays_for_scan(spec: GridSpec, geom: ScanGeometry) -> list[tuple[int, int, Ray]]:
    """Enumerate (angle_index, detector_index, Ray) for the whole scan."""
    origins, dirs = scan_ray_arrays(spec, geom)
    out = []
    n = 0
    for a in range(geom.n_angles):
        for d in range(geom.n_detectors):
            out.append(
                (a, d, Ray((origins[n, 0], origins[n, 1]), (dirs[n, 0], dirs[n, 1])))
            )
            n += 1
    return out
