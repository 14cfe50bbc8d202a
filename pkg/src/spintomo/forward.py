"""Spin transport along rays: the nonlinear ray transform (one SO(3) matrix
per ray), its Gateaux derivative, and a high-accuracy ODE reference."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import Ray, ScanGeometry, VectorField2D, scan_ray_arrays

GYROMAGNETIC_RATIO_NEUTRON = -1.8324e8  # rad / (s T)


@dataclass(frozen=True)
class PhysicsConstants:
    gamma_n: float = GYROMAGNETIC_RATIO_NEUTRON
    neutron_speed: float = 790.0

    def __post_init__(self):
        if self.neutron_speed <= 0:
            raise ValueError("neutron speed must be positive")

    @property
    def rate(self) -> float:
        """Signed precession rate gamma_N / v in rad / (T m)."""
        return self.gamma_n / self.neutron_speed


@dataclass
class RaySpinResult:
    spin: np.ndarray
    accumulated_angle: float
    angle_index: int = -1
    detector_index: int = -1


@dataclass
class SinogramSet:
    """Nine scalar sinograms, one per spin-matrix entry.

    values has shape (3, 3, n_angles, n_detectors); values[j, k] is the
    sinogram of matrix entry (j, k) (zero-based).
    """

    values: np.ndarray
    geom: ScanGeometry

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        expected = (3, 3, self.geom.n_angles, self.geom.n_detectors)
        if self.values.shape != expected:
            raise ValueError(f"sinogram shape {self.values.shape} != {expected}")

    def entry(self, j: int, k: int) -> np.ndarray:
        """Sinogram of matrix entry (j, k) in one-based index notation."""
        return self.values[j - 1, k - 1]

    @staticmethod
    def identity(geom: ScanGeometry) -> "SinogramSet":
        vals = np.zeros((3, 3, geom.n_angles, geom.n_detectors))
        for i in range(3):
            vals[i, i] = 1.0
        return SinogramSet(vals, geom)


def propagate_ray(field: VectorField2D, ray: Ray, consts: PhysicsConstants) -> RaySpinResult:
    """Ordered product of per-voxel rotations along one ray.

    Voxels are visited in encounter order and multiply from the left, so
    the result is the transport solution with identity initial condition.
    Voxels with |B| below 1e-15 T contribute the identity.
    """
    spec = field.spec
    cap = spec.nx + spec.ny + 4
    seg_i = np.empty(cap, np.int64)
    seg_j = np.empty(cap, np.int64)
    seg_c = np.empty(cap)
    m = _kernels.traverse_into(
        ray.origin[0], ray.origin[1], ray.direction[0], ray.direction[1],
        spec.origin[0], spec.origin[1], spec.voxel_size, spec.nx, spec.ny,
        seg_i, seg_j, seg_c,
    )
    sigma = np.empty((3, 3))
    total = _kernels.propagate_ray_core(
        field.values, seg_i, seg_j, seg_c, m, consts.rate, sigma
    )
    return RaySpinResult(spin=sigma, accumulated_angle=float(total))


def ode_oracle(
    field: VectorField2D, ray: Ray, consts: PhysicsConstants, step: float
) -> np.ndarray:
    """RK4 integration of the transport ODE with the same piecewise-constant
    per-voxel field; reference for testing the product formula."""
    if step <= 0:
        raise ValueError("step must be positive")
    spec = field.spec
    cap = spec.nx + spec.ny + 4
    seg_i = np.empty(cap, np.int64)
    seg_j = np.empty(cap, np.int64)
    seg_c = np.empty(cap)
    m = _kernels.traverse_into(
        ray.origin[0], ray.origin[1], ray.direction[0], ray.direction[1],
        spec.origin[0], spec.origin[1], spec.voxel_size, spec.nx, spec.ny,
        seg_i, seg_j, seg_c,
    )
    return _kernels.rk4_ray_kernel(field.values, seg_i, seg_j, seg_c, m, consts.rate, step)


def forward_scan(
    field: VectorField2D, geom: ScanGeometry, consts: PhysicsConstants
) -> tuple[SinogramSet, float]:
    """Spin matrices for every (angle, detector) ray.

    Returns the nine sinograms and the maximum accumulated rotation angle
    (radians) over all rays.
    """
    spec = field.spec
    origins, dirs = scan_ray_arrays(spec, geom)
    flat, angles = _kernels.scan_kernel(
        field.values, spec.origin[0], spec.origin[1], spec.voxel_size,
        spec.nx, spec.ny, origins, dirs, consts.rate,
    )
    vals = flat.reshape(3, 3, geom.n_angles, geom.n_detectors)
    return SinogramSet(vals, geom), float(angles.max())


def derivative_dS(
    field: VectorField2D,
    perturbation: VectorField2D,
    geom: ScanGeometry,
    consts: PhysicsConstants,
) -> SinogramSet:
    """Gateaux derivative of the ray transform at `field` in the direction
    `perturbation`: per ray, (gamma/v) S(B) H(integral of Sigma^T dB ds),
    with the running product advanced to each segment midpoint."""
    if perturbation.spec != field.spec:
        raise ValueError("field and perturbation must share a grid")
    spec = field.spec
    origins, dirs = scan_ray_arrays(spec, geom)
    flat = _kernels.derivative_kernel(
        field.values, perturbation.values, spec.origin[0], spec.origin[1],
        spec.voxel_size, spec.nx, spec.ny, origins, dirs, consts.rate,
    )
    return SinogramSet(flat.reshape(3, 3, geom.n_angles, geom.n_detectors), geom)
