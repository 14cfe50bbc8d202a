"""Magnetic-field phantoms: Biot-Savart integration along piecewise-linear
current paths, helical coil construction and grid sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import GridSpec, VectorField2D

MU_0 = 4e-7 * np.pi  # T m / A

# Evaluation closer than this to a wire segment is singular.
WIRE_CLEARANCE = 1e-9


@dataclass
class WirePath:
    """Polyline carrying a constant current from vertex to vertex (amperes)."""

    vertices: np.ndarray
    current: float

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValueError("vertices must be an (n, 3) array")
        if self.vertices.shape[0] < 2:
            raise ValueError("a wire needs at least two vertices")
        steps = np.diff(self.vertices, axis=0)
        if np.any(np.linalg.norm(steps, axis=1) == 0.0):
            raise ValueError("consecutive wire vertices must be distinct")


@dataclass
class SolenoidSpec:
    radius: float
    pitch: float
    n_turns: int
    segments_per_turn: int
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    current: float = 1.0

    def __post_init__(self):
        if self.radius <= 0 or self.pitch <= 0:
            raise ValueError("solenoid radius and pitch must be positive")
        if self.n_turns < 1:
            raise ValueError("need at least one turn")
        if self.segments_per_turn < 2:
            raise ValueError("need at least two segments per turn")


def _field_at_points(wire: WirePath, points: np.ndarray) -> np.ndarray:
    """Exact field of every straight segment, summed, at (P, 3) points.

    Uses the closed form B = (mu0 I / 4 pi) (a x b)(|a|+|b|) /
    (|a||b|(|a||b| + a.b)) per segment, with a and b running from the
    segment endpoints to the evaluation point.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    starts = np.ascontiguousarray(wire.vertices[:-1])
    ends = np.ascontiguousarray(wire.vertices[1:])
    out = np.empty_like(points)
    min_dist = _kernels.segment_field_kernel(starts, ends, points, out)
    if min_dist < WIRE_CLEARANCE:
        raise ValueError("evaluation point lies on a wire segment")
    out *= MU_0 * wire.current / (4.0 * np.pi)
    return out


def biot_savart(wire: WirePath, point) -> np.ndarray:
    """Magnetic field (Tesla) of the wire at a single 3D point."""
    pt = np.asarray(point, dtype=np.float64).reshape(1, 3)
    return _field_at_points(wire, pt)[0]


def solenoid_wire(spec: SolenoidSpec) -> WirePath:
    """Helical polyline for the coil, centered on spec.center along spec.axis."""
    axis = np.asarray(spec.axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    seed = np.array([1.0, 0.0, 0.0])
    if abs(axis @ seed) > 0.9:
        seed = np.array([0.0, 1.0, 0.0])
    u = np.cross(axis, seed)
    u /= np.linalg.norm(u)
    v = np.cross(axis, u)

    n_seg = spec.n_turns * spec.segments_per_turn
    t = np.linspace(0.0, 2.0 * np.pi * spec.n_turns, n_seg + 1)
    length = spec.pitch * spec.n_turns
    along = spec.pitch * t / (2.0 * np.pi) - 0.5 * length
    center = np.asarray(spec.center, dtype=np.float64)
    verts = (
        center[None, :]
        + spec.radius * (np.cos(t)[:, None] * u[None, :] + np.sin(t)[:, None] * v[None, :])
        + along[:, None] * axis[None, :]
    )
    return WirePath(verts, spec.current)


def sample_field(wire: WirePath, spec: GridSpec, plane_height: float = 0.0) -> VectorField2D:
    """Full 3-vector field at every voxel center on the plane z = plane_height."""
    xs = spec.centers_x()
    ys = spec.centers_y()
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack(
        [gx.ravel(), gy.ravel(), np.full(gx.size, plane_height)], axis=1
    )
    vals = _field_at_points(wire, pts).reshape(spec.nx, spec.ny, 3)
    return VectorField2D(spec, vals)


def scale_field(f: VectorField2D, alpha: float) -> VectorField2D:
    """Pointwise multiplication of the field by a dimensionless factor."""
    return f.scaled(alpha)
