"""Small exact kernels for the rotation-group algebra: Hodge star, Rodrigues
rotations and SO(3) validity checks."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

ORTHOGONALITY_TOL = 1e-10


def hodge_star(b) -> np.ndarray:
    """Skew-symmetric matrix H(b) with H(b) @ s == cross(s, b) for any s."""
    b1, b2, b3 = b
    return np.array(
        [
            [0.0, b3, -b2],
            [-b3, 0.0, b1],
            [b2, -b1, 0.0],
        ]
    )


def rodrigues(k, phi: float) -> np.ndarray:
    """Rotation matrix exp(phi * H(k)) for a unit axis k.

    Evaluates I + sin(phi) H(k) + (1 - cos(phi)) H(k)^2.  Because H(k) s =
    s x k, a positive phi turns vectors clockwise when viewed from the tip
    of +k; this is exactly the exponential generated by the spin-transport
    equation, so signed precession angles can be passed through unchanged.
    """
    k = np.asarray(k, dtype=float)
    norm = np.sqrt(k @ k)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"rotation axis must be unit length, got |k| = {norm}")
    h = hodge_star(k)
    return np.eye(3) + np.sin(phi) * h + (1.0 - np.cos(phi)) * (h @ h)


class EigStructure(NamedTuple):
    values: tuple
    degenerate: bool


def eig_structure(b, gamma_over_v: float) -> EigStructure:
    """Eigenvalues (0, +i g|B|, -i g|B|) of g * H(B); test oracle only.

    A zero field has no preferred axis; all three eigenvalues collapse to
    zero and the result is flagged degenerate.
    """
    b = np.asarray(b, dtype=float)
    mag = np.sqrt(b @ b)
    if mag == 0.0:
        return EigStructure((0j, 0j, 0j), True)
    w = gamma_over_v * mag
    return EigStructure((0j, 1j * w, -1j * w), False)


def rotation_defect(m: np.ndarray) -> tuple[float, float]:
    """Frobenius distance of M^T M from I and |det M - 1|."""
    m = np.asarray(m, dtype=float)
    ortho = np.linalg.norm(m.T @ m - np.eye(3))
    det = abs(np.linalg.det(m) - 1.0)
    return ortho, det


def is_rotation(m: np.ndarray, tol: float = ORTHOGONALITY_TOL) -> bool:
    ortho, det = rotation_defect(m)
    return ortho < tol and det < tol
