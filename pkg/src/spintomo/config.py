"""Run configuration: JSON-loadable parameters for the phantom, scan
geometry, physics constants, noise, rebinning and the iterative solver,
with defaults matching the desk-scale experiment."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .forward import PhysicsConstants
from .geometry import GridSpec, ScanGeometry, VectorField2D
from .phantom import SolenoidSpec, sample_field, scale_field, solenoid_wire
from .recon import MnkmConfig


class ConfigError(ValueError):
    pass


@dataclass
class PhantomConfig:
    """Coil phantom: a helical solenoid sampled on the grid plane.

    The coil sits above the sampling plane (its wire never crosses it) so
    the slice sees the smooth end fringe field, with substantial in-plane
    and out-of-plane components.  The current is rescaled so the peak
    field magnitude over the slice equals peak_field_t, then the whole
    slice is multiplied by `scale`.
    """

    radius_m: float = 0.010
    pitch_m: float = 0.002
    n_turns: int = 10
    segments_per_turn: int = 64
    axis: tuple[float, float, float] = (0.25, 0.35, 0.9)
    center_m: tuple[float, float, float] = (0.0, 0.0, 0.014)
    current_a: float = 1.0
    peak_field_t: float | None = 5.8e-6
    scale: float = 1.0
    plane_height_m: float = 0.0


@dataclass
class GridConfig:
    nx: int
    ny: int
    fov_m: float

    def spec(self) -> GridSpec:
        return GridSpec.centered(self.nx, self.ny, self.fov_m)


@dataclass
class GeometryConfig:
    n_angles: int = 360
    angle_start_deg: float = 0.0
    angle_step_deg: float = 1.0
    n_detectors: int = 270
    detector_pitch_m: float | None = None  # default: fov / n_detectors
    neutron_speed_mps: float = 790.0


@dataclass
class NoiseConfig:
    level: float = 0.05
    seed: int = 7

@dataclass
class MnkmSection:
    tol: float = 1e-5
    max_iters: int = 100
    line_search_alphas: tuple[float, ...] = (0.1, 0.55, 1.0)
    alpha_clamp: float = 1.0
    stall_limit: int = 15


@dataclass
class RunConfig:
    phantom: PhantomConfig = field(default_factory=PhantomConfig)
    sim_grid: GridConfig = field(default_factory=lambda: GridConfig(180, 180, 0.04))
    recon_grid: GridConfig = field(default_factory=lambda: GridConfig(67, 67, 0.04))
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    gamma_n: float = -1.8324e8
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    rebin_factor: int = 3
    mnkm: MnkmSection = field(default_factory=MnkmSection)

    def sim_spec(self) -> GridSpec:
        return self.sim_grid.spec()

    def recon_spec(self) -> GridSpec:
        return self.recon_grid.spec()

    def constants(self) -> PhysicsConstants:
        return PhysicsConstants(self.gamma_n, self.geometry.neutron_speed_mps)

    def scan_geometry(self) -> ScanGeometry:
        g = self.geometry
        pitch = g.detector_pitch_m
        if pitch is None:
            pitch = self.sim_grid.fov_m / g.n_detectors
        return ScanGeometry(
            n_angles=g.n_angles,
            angle_start=math.radians(g.angle_start_deg),
            angle_step=math.radians(g.angle_step_deg),
            n_detectors=g.n_detectors,
            detector_pitch=pitch,
            neutron_speed=g.neutron_speed_mps,
        )

    def mnkm_config(self) -> MnkmConfig:
        m = self.mnkm
        return MnkmConfig(
            tol=m.tol,
            max_iters=m.max_iters,
            line_search_alphas=tuple(m.line_search_alphas),
            alpha_clamp=m.alpha_clamp,
            stall_limit=m.stall_limit,
        )

    def build_phantom_field(self) -> VectorField2D:
        p = self.phantom
        wire = solenoid_wire(
            SolenoidSpec(
                radius=p.radius_m,
                pitch=p.pitch_m,
                n_turns=p.n_turns,
                segments_per_turn=p.segments_per_turn,
                axis=p.axis,
                center=p.center_m,
                current=p.current_a,
            )
        )
        f = sample_field(wire, self.sim_spec(), p.plane_height_m)
        if p.peak_field_t is not None:
            peak = float(f.magnitude().max())
            if peak == 0:
                raise ConfigError("phantom field vanishes on the slice")
            f = scale_field(f, p.peak_field_t / peak)
        if p.scale != 1.0:
            f = scale_field(f, p.scale)
        return f

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


_SECTIONS = {
    "phantom": PhantomConfig,
    "sim_grid": GridConfig,
    "recon_grid": GridConfig,
    "geometry": GeometryConfig,
    "noise": NoiseConfig,
    "mnkm": MnkmSection,
}


def _merge_section(cls, base, overrides: dict, where: str):
    valid = set(cls.__dataclass_fields__)
    for key, value in overrides.items():
        if key not in valid:
            raise ConfigError(f"unknown key '{key}' in config section '{where}'")
        if isinstance(value, list):
            value = tuple(value)
        setattr(base, key, value)
    return base


def load_config(path: str | Path | None = None) -> RunConfig:
    """Defaults, deep-merged with the JSON file when one is given."""
    cfg = RunConfig()
    if path is None:
        return cfg
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    for key, value in raw.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"config section '{key}' must be an object")
            _merge_section(_SECTIONS[key], getattr(cfg, key), value, key)
        elif key in ("gamma_n", "rebin_factor"):
            setattr(cfg, key, value)
        else:
            raise ConfigError(f"unknown config key '{key}'")
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    if cfg.rebin_factor < 1:
        raise ConfigError("rebin_factor must be >= 1")
    if cfg.noise.level < 0:
        raise ConfigError("noise level must be nonnegative")
    for name in ("sim_grid", "recon_grid"):
        g = getattr(cfg, name)
        if g.nx < 1 or g.ny < 1 or g.fov_m <= 0:
            raise ConfigError(f"{name} must have positive size and field of view")
    axis = np.asarray(cfg.phantom.axis, dtype=float)
    if not np.any(axis):
        raise ConfigError("phantom axis must be a nonzero vector")
