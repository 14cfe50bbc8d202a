"""Scalar Radon transform over the shared ray traversal, and filtered
backprojection with a Hamming-windowed ramp filter."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import GridSpec, ScanGeometry, scan_ray_arrays


@dataclass
class ScalarImage:
    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != (self.spec.nx, self.spec.ny):
            raise ValueError(
                f"image shape {self.values.shape} != {(self.spec.nx, self.spec.ny)}"
            )


@dataclass
class Sinogram:
    values: np.ndarray
    geom: ScanGeometry

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        expected = (self.geom.n_angles, self.geom.n_detectors)
        if self.values.shape != expected:
            raise ValueError(f"sinogram shape {self.values.shape} != {expected}")


def radon_transform(img: ScalarImage, geom: ScanGeometry) -> Sinogram:
    """Line integrals of the image for every scan ray, via traversal chords."""
    spec = img.spec
    origins, dirs = scan_ray_arrays(spec, geom)
    flat = _kernels.chord_integral_kernel(
        img.values, spec.origin[0], spec.origin[1], spec.voxel_size,
        spec.nx, spec.ny, origins, dirs,
    )
    return Sinogram(flat.reshape(geom.n_angles, geom.n_detectors), geom)


def pad_length(n_detectors: int) -> int:
    """DFT length for filtering: next power of two >= 2x the detector count,
    which suppresses circular-convolution wrap-around."""
    n = 1
    while n < 2 * n_detectors:
        n *= 2
    return n


def ramp_hamming(n_pad: int, pitch: float) -> np.ndarray:
    """|freq| ramp apodized by a Hamming window up to the detector Nyquist."""
    freqs = np.fft.fftfreq(n_pad, d=pitch)
    nyquist = 0.5 / pitch
    window = 0.54 + 0.46 * np.cos(np.pi * freqs / nyquist)
    return np.abs(freqs) * window


def _angular_weight(geom: ScanGeometry) -> float:
    """Per-view backprojection weight.

    The inversion integral runs over a half turn of directions; views
    covering a full turn measure every line twice, so the weight halves.
    """
    coverage = geom.n_angles * geom.angle_step
    half_turns = max(1, int(round(coverage / np.pi)))
    return geom.angle_step / half_turns


def fbp(sino: Sinogram, out_spec: GridSpec) -> ScalarImage:
    """Filtered backprojection onto out_spec pixel centers.

    Each view is ramp-filtered in the frequency domain (Hamming window,
    zero-padded DFT) and smeared along its rays with linear interpolation
    in the detector coordinate.  Angles must cover at least a half turn.
    """
    geom = sino.geom
    coverage = geom.n_angles * geom.angle_step
    if geom.n_angles < 2 or coverage < np.pi * (1.0 - 1e-9):
        raise ValueError("fbp needs at least two views covering a half turn")

    n_pad = pad_length(geom.n_detectors)
    filt = ramp_hamming(n_pad, geom.detector_pitch)
    padded = np.zeros((geom.n_angles, n_pad))
    padded[:, : geom.n_detectors] = sino.values
    filtered = np.real(np.fft.ifft(np.fft.fft(padded, axis=1) * filt[None, :], axis=1))
    filtered = filtered[:, : geom.n_detectors]

    xs = out_spec.centers_x() - out_spec.center[0]
    ys = out_spec.centers_y() - out_spec.center[1]
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    offsets = geom.detector_offsets()
    weight = _angular_weight(geom)

    out = np.zeros((out_spec.nx, out_spec.ny))
    for a, theta in enumerate(geom.angles()):
        s = gx * (-np.sin(theta)) + gy * np.cos(theta)
        out += np.interp(s, offsets, filtered[a], left=0.0, right=0.0)
    out *= weight
    return ScalarImage(out_spec, out)
