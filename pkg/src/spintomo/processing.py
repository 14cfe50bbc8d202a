"""Data conditioning between acquisition and reconstruction: noise
injection, rebinning, grid resampling and error metrics."""

from __future__ import annotations

import numpy as np

from .forward import SinogramSet
from .geometry import GridSpec, ScanGeometry, VectorField2D


def add_noise(data: SinogramSet, level: float, seed: int) -> SinogramSet:
    """Additive Gaussian perturbation of every sinogram entry, with the
    per-entry standard deviation level * |entry|; deterministic for a
    given seed.  No re-projection onto SO(3) is performed afterwards.

    The relative scaling is what makes a percent-level setting meaningful
    across the full dynamic range: spin-matrix entries span from O(1) on
    the diagonals down to the small off-diagonal deflections that carry
    the weak-field signal.
    """
    if level < 0:
        raise ValueError("noise level must be nonnegative")
    if level == 0:
        return SinogramSet(data.values.copy(), data.geom)
    rng = np.random.default_rng(seed)
    noisy = data.values * (1.0 + rng.normal(0.0, level, size=data.values.shape))
    return SinogramSet(noisy, data.geom)


def rebin(data: SinogramSet, factor: int) -> SinogramSet:
    """Non-overlapping factor x factor block means over (angle, detector).

    The geometry is coarsened to match: pitch and angle step grow by the
    factor and the first angle moves to the center of its block.
    """
    if factor < 1:
        raise ValueError("rebin factor must be >= 1")
    geom = data.geom
    if geom.n_angles % factor or geom.n_detectors % factor:
        raise ValueError(
            f"rebin factor {factor} must divide angles {geom.n_angles} "
            f"and detectors {geom.n_detectors}"
        )
    if factor == 1:
        return SinogramSet(data.values.copy(), geom)
    a2 = geom.n_angles // factor
    d2 = geom.n_detectors // factor
    vals = data.values.reshape(3, 3, a2, factor, d2, factor).mean(axis=(3, 5))
    new_geom = ScanGeometry(
        n_angles=a2,
        angle_start=geom.angle_start + 0.5 * (factor - 1) * geom.angle_step,
        angle_step=geom.angle_step * factor,
        n_detectors=d2,
        detector_pitch=geom.detector_pitch * factor,
        neutron_speed=geom.neutron_speed,
    )
    return SinogramSet(vals, new_geom)


def resample_bilinear(field: VectorField2D, out_spec: GridSpec) -> VectorField2D:
    """Field values bilinearly interpolated at out_spec pixel centers,
    clamped at the source boundary."""
    src = field.spec
    u = (out_spec.centers_x() - src.origin[0]) / src.voxel_size - 0.5
    v = (out_spec.centers_y() - src.origin[1]) / src.voxel_size - 0.5
    u = np.clip(u, 0.0, src.nx - 1.0)
    v = np.clip(v, 0.0, src.ny - 1.0)
    i0 = np.clip(np.floor(u).astype(int), 0, src.nx - 2)
    j0 = np.clip(np.floor(v).astype(int), 0, src.ny - 2)
    fu = (u - i0)[:, None, None]
    fv = (v - j0)[None, :, None]
    vals = field.values
    interp = (
        vals[np.ix_(i0, j0)] * (1 - fu) * (1 - fv)
        + vals[np.ix_(i0 + 1, j0)] * fu * (1 - fv)
        + vals[np.ix_(i0, j0 + 1)] * (1 - fu) * fv
        + vals[np.ix_(i0 + 1, j0 + 1)] * fu * fv
    )
    return VectorField2D(out_spec, interp)


def relative_error(
    estimate: VectorField2D, truth: VectorField2D
) -> tuple[float, float, float, float]:
    """L2 relative errors (B1, B2, B3, |B|); both fields on the same grid."""
    if estimate.spec != truth.spec:
        raise ValueError("estimate and truth must share a grid")
    out = []
    for c in range(3):
        diff = np.linalg.norm(estimate.values[:, :, c] - truth.values[:, :, c])
        ref = np.linalg.norm(truth.values[:, :, c])
        out.append(diff / ref if ref > 0 else (0.0 if diff == 0 else np.inf))
    mag_est = estimate.magnitude()
    mag_true = truth.magnitude()
    ref = np.linalg.norm(mag_true)
    diff = np.linalg.norm(mag_est - mag_true)
    out.append(diff / ref if ref > 0 else (0.0 if diff == 0 else np.inf))
    return tuple(out)
