"""Simulation and reconstruction toolkit for polarimetric neutron
tomography of magnetic fields."""

from .forward import (
    PhysicsConstants,
    RaySpinResult,
    SinogramSet,
    derivative_dS,
    forward_scan,
    ode_oracle,
    propagate_ray,
)
from .geometry import (
    GridSpec,
    Ray,
    ScanGeometry,
    TraversalSegment,
    VectorField2D,
    rays_for_scan,
    traverse,
)
from .phantom import (
    SolenoidSpec,
    WirePath,
    biot_savart,
    sample_field,
    scale_field,
    solenoid_wire,
)
from .processing import add_noise, rebin, relative_error, resample_bilinear
from .radon import ScalarImage, Sinogram, fbp, radon_transform
from .recon import (
    MnkmConfig,
    ReconReport,
    linear_reconstruct,
    mnkm_reconstruct,
    residual,
    residual_curve,
)
from .so3 import eig_structure, hodge_star, is_rotation, rodrigues

__version__ = "0.1.0"

__all__ = [
    "GridSpec",
    "MnkmConfig",
    "PhysicsConstants",
    "Ray",
    "RaySpinResult",
    "ReconReport",
    "ScalarImage",
    "ScanGeometry",
    "Sinogram",
    "SinogramSet",
    "SolenoidSpec",
    "TraversalSegment",
    "VectorField2D",
    "WirePath",
    "add_noise",
    "biot_savart",
    "derivative_dS",
    "eig_structure",
    "fbp",
    "forward_scan",
    "hodge_star",
    "is_rotation",
    "linear_reconstruct",
    "mnkm_reconstruct",
    "ode_oracle",
    "propagate_ray",
    "radon_transform",
    "rays_for_scan",
    "rebin",
    "relative_error",
    "resample_bilinear",
    "residual",
    "residual_curve",
    "rodrigues",
    "sample_field",
    "scale_field",
    "solenoid_wire",
    "traverse",
]
