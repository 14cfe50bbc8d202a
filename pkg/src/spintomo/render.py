"""Figure export for fields, sinogram sets and solver traces."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .forward import SinogramSet
from .geometry import VectorField2D

_COMPONENT_LABELS = ("$B_1$", "$B_2$", "$B_3$", "$|B|$")


def _extent_cm(spec):
    ox, oy = spec.origin
    return [100 * ox, 100 * (ox + spec.width), 100 * oy, 100 * (oy + spec.height)]


def render_field(f: VectorField2D, path: str | Path) -> Path:
    """Four panels: the three field components and the magnitude."""
    panels = [f.values[:, :, c] for c in range(3)] + [f.magnitude()]
    extent = _extent_cm(f.spec)
    fig, axes = plt.subplots(2, 2, figsize=(9, 8), constrained_layout=True)
    for ax, data, label in zip(axes.ravel(), panels, _COMPONENT_LABELS):
        im = ax.imshow(data.T, origin="lower", extent=extent, cmap="RdBu_r")
        ax.set_title(label)
        ax.set_xlabel("x (cm)")
        ax.set_ylabel("y (cm)")
        fig.colorbar(im, ax=ax, label="T")
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def render_sinogram_set(s: SinogramSet, path: str | Path) -> Path:
    """3x3 grid of the spin-matrix entry sinograms (angle vs detector)."""
    fig, axes = plt.subplots(3, 3, figsize=(10, 9), constrained_layout=True)
    for j in range(3):
        for k in range(3):
            ax = axes[j, k]
            im = ax.imshow(s.values[j, k], aspect="auto", origin="lower", cmap="gray")
            ax.set_title(f"entry ({j + 1},{k + 1})")
            ax.set_xlabel("detector")
            ax.set_ylabel("angle index")
            fig.colorbar(im, ax=ax)
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=130)
    plt.close(fig)
    return out


def render_residual_trace(residuals, path: str | Path, initial: float | None = None) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4.5), constrained_layout=True)
    xs = np.arange(1, len(residuals) + 1)
    ax.semilogy(xs, residuals, "o-", ms=4)
    if initial is not None:
        ax.axhline(initial, color="gray", ls="--", lw=1, label="initial residual")
        ax.legend()
    ax.set_xlabel("iteration")
    ax.set_ylabel("residual")
    ax.grid(True, which="both", alpha=0.3)
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def render_curve(alphas, residuals, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4.5), constrained_layout=True)
    ax.plot(alphas, residuals, "o-", ms=3)
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel("residual")
    ax.grid(True, alpha=0.3)
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
