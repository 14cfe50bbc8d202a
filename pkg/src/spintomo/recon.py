"""Field reconstruction: linearized Radon inversion of the off-diagonal
spin data, and the damped modified Newton-Kantorovich iteration with a
quadratic line search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forward import PhysicsConstants, SinogramSet, forward_scan
from .geometry import GridSpec, ScanGeometry, VectorField2D
from .processing import relative_error, resample_bilinear
from .radon import Sinogram, fbp


@dataclass
class MnkmConfig:
    """Solver settings.

    tol is the relative update-norm stopping threshold; with noisy data it
    should be set no tighter than the noise floor of the update sequence
    (the default suits noise-free data).  alpha_clamp caps the quadratic
    line-search extrapolation; values above the largest sampled alpha make
    overshoot limit cycles possible near convergence.
    """

    tol: float = 1e-5
    max_iters: int = 100
    line_search_alphas: tuple[float, ...] = (0.1, 0.55, 1.0)
    alpha_clamp: float = 1.0
    # Abort after this many consecutive iterations in which no line-search
    # candidate reduces the residual (the search is trapped).
    stall_limit: int = 15

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        alphas = tuple(self.line_search_alphas)
        if len(set(alphas)) != len(alphas) or any(a <= 0 for a in alphas):
            raise ValueError("line search alphas must be distinct and positive")
        if not 0 < self.alpha_clamp <= 2.0:
            raise ValueError("alpha_clamp must lie in (0, 2]")
        self.line_search_alphas = alphas


@dataclass
class IterationRecord:
    residual: float
    alpha: float
    update_norm: float


@dataclass
class ReconReport:
    field_estimate: VectorField2D
    iterations: list[IterationRecord]
    converged: bool
    initial_residual: float
    per_component_relative_error: tuple[float, float, float, float] | None = None


# Cyclic map fixed by the sign pattern of the Hodge star: the (1,2) entry
# of H(B) is B3, (2,3) is B1 and (3,1) is B2 (one-based indices).
_ENTRY_FOR_COMPONENT = {0: (2, 3), 1: (3, 1), 2: (1, 2)}


def linear_reconstruct(
    data: SinogramSet, consts: PhysicsConstants, out_spec: GridSpec
) -> VectorField2D:
    """Invert the small-field approximation: each cyclic off-diagonal entry
    is (gamma/v) times the scalar Radon transform of one field component,
    so one filtered backprojection per component recovers the field."""
    scale = 1.0 / consts.rate
    vals = np.empty((out_spec.nx, out_spec.ny, 3))
    for comp, (j, k) in _ENTRY_FOR_COMPONENT.items():
        img = fbp(Sinogram(data.entry(j, k), data.geom), out_spec)
        vals[:, :, comp] = scale * img.values
    return VectorField2D(out_spec, vals)


def residual(a: SinogramSet, b: SinogramSet) -> float:
    """Sum of squared entry differences over all rays and matrix entries."""
    return float(np.sum((a.values - b.values) ** 2))


def residual_curve(
    f: VectorField2D,
    alphas,
    geom: ScanGeometry,
    consts: PhysicsConstants,
) -> list[tuple[float, float]]:
    """Residual of the scaled-field scan against the unscaled scan, per alpha."""
    reference, _ = forward_scan(f, geom, consts)
    out = []
    for a in alphas:
        scan, _ = forward_scan(f.scaled(float(a)), geom, consts)
        out.append((float(a), residual(scan, reference)))
    return out


def _quadratic_minimizer(alphas, residuals, clamp: float) -> float | None:
    """Vertex of the fitted parabola, clamped to (0, clamp]; None when the
    fit is concave or the vertex is nonpositive."""
    coeffs = np.polyfit(alphas, residuals, 2)
    if coeffs[0] <= 0:
        return None
    vertex = -coeffs[1] / (2.0 * coeffs[0])
    if vertex <= 0:
        return None
    return min(vertex, clamp)


def mnkm_reconstruct(
    data: SinogramSet,
    consts: PhysicsConstants,
    out_spec: GridSpec,
    cfg: MnkmConfig | None = None,
    truth: VectorField2D | None = None,
) -> ReconReport:
    """Damped modified Newton-Kantorovich iteration from a zero initial field.

    Every iteration re-solves the forward problem at the current field,
    applies the fixed zero-field inverse to the data residual to get an
    update direction, and picks the step length by a quadratic fit through
    the sampled line-search residuals.  Steps are only accepted when they
    do not increase the residual; the iteration stops when the relative
    update norm drops below cfg.tol, and reports converged=False when it
    runs out of iterations or the line search stalls.
    """
    cfg = cfg or MnkmConfig()
    geom = data.geom
    b = VectorField2D.zeros(out_spec)
    current_scan, _ = forward_scan(b, geom, consts)
    current_res = residual(data, current_scan)
    initial_res = current_res

    records: list[IterationRecord] = []
    converged = False
    stalls = 0
    for _ in range(cfg.max_iters):
        shifted = SinogramSet(data.values - current_scan.values, geom)
        delta = linear_reconstruct(shifted, consts, out_spec)

        candidates = []
        for a in cfg.line_search_alphas:
            scan, _ = forward_scan(
                VectorField2D(out_spec, b.values + a * delta.values), geom, consts
            )
            candidates.append((a, scan, residual(data, scan)))
        if len(cfg.line_search_alphas) >= 3:
            a_fit = _quadratic_minimizer(
                [c[0] for c in candidates], [c[2] for c in candidates], cfg.alpha_clamp
            )
            if a_fit is not None and all(abs(a_fit - c[0]) > 1e-12 for c in candidates):
                scan, _ = forward_scan(
                    VectorField2D(out_spec, b.values + a_fit * delta.values),
                    geom,
                    consts,
                )
                candidates.append((a_fit, scan, residual(data, scan)))

        alpha, scan, res = min(candidates, key=lambda c: c[2])
        if res > current_res:
            # Trapped: no candidate reduces the residual from this field.
            records.append(IterationRecord(current_res, 0.0, 0.0))
            stalls += 1
            if stalls >= cfg.stall_limit:
                break
            continue
        stalls = 0
        prev_norm = np.linalg.norm(b.values)
        update = alpha * delta.values
        update_norm = np.linalg.norm(update) / max(prev_norm, 1e-30)
        b = VectorField2D(out_spec, b.values + update)
        current_scan = scan
        current_res = res
        records.append(IterationRecord(current_res, float(alpha), float(update_norm)))
        if update_norm < cfg.tol:
            converged = True
            break

    errors = None
    if truth is not None:
        truth_on_grid = truth if truth.spec == out_spec else resample_bilinear(truth, out_spec)
        errors = relative_error(b, truth_on_grid)
    return ReconReport(
        field_estimate=b,
        iterations=records,
        converged=converged,
        initial_residual=initial_res,
        per_component_relative_error=errors,
    )
