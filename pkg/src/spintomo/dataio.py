"""Persistence: field and sinogram-set files (JSON header + little-endian
float64 raw payload in a sibling file), plus CSV traces.  All writes go
through a temp file and an atomic rename."""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .forward import SinogramSet
from .geometry import GridSpec, ScanGeometry, VectorField2D

FORMAT_VERSION = 1


class FormatError(ValueError):
    pass


def _paths(path: str | Path) -> tuple[Path, Path]:
    base = Path(path)
    if base.suffix in (".json", ".raw"):
        base = base.with_suffix("")
    return base.with_suffix(".json"), base.with_suffix(".raw")


def _atomic_write(path: Path, payload: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(payload: dict, path: str | Path) -> Path:
    out = Path(path)
    _atomic_write(out, json.dumps(payload, indent=2).encode())
    return out


def peek_kind(path: str | Path) -> str:
    """'field' or 'sinograms', sniffed from the JSON header."""
    header_path, _ = _paths(path)
    header = _read_header(header_path)
    if "n_angles" in header:
        return "sinograms"
    if "nx" in header:
        return "field"
    raise FormatError(f"{header_path} is neither a field nor a sinogram file")


def write_field(f: VectorField2D, path: str | Path) -> Path:
    header_path, raw_path = _paths(path)
    header = {
        "format_version": FORMAT_VERSION,
        "nx": f.spec.nx,
        "ny": f.spec.ny,
        "voxel_size_m": f.spec.voxel_size,
        "origin_m": list(f.spec.origin),
        "components": 3,
        "dtype": "f64le",
        "order": "row-major, component-innermost",
    }
    _atomic_write(raw_path, f.values.astype("<f8").tobytes())
    _atomic_write(header_path, json.dumps(header, indent=2).encode())
    return header_path


def read_field(path: str | Path) -> VectorField2D:
    header_path, raw_path = _paths(path)
    header = _read_header(header_path)
    try:
        nx = int(header["nx"])
        ny = int(header["ny"])
        voxel = float(header["voxel_size_m"])
        origin = tuple(float(v) for v in header["origin_m"])
        components = int(header["components"])
        dtype = header["dtype"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed field header {header_path}: {exc}") from exc
    if len(origin) != 2:
        raise FormatError(f"field origin must have two coordinates in {header_path}")
    if components != 3 or dtype != "f64le":
        raise FormatError(f"unsupported field encoding in {header_path}")
    payload = _read_payload(raw_path, nx * ny * 3)
    spec = GridSpec(nx, ny, voxel, origin)
    return VectorField2D(spec, payload.reshape(nx, ny, 3))


def write_sinograms(s: SinogramSet, path: str | Path) -> Path:
    header_path, raw_path = _paths(path)
    g = s.geom
    header = {
        "format_version": FORMAT_VERSION,
        "n_angles": g.n_angles,
        "n_detectors": g.n_detectors,
        "angle_start_deg": math.degrees(g.angle_start),
        "angle_step_deg": math.degrees(g.angle_step),
        "detector_pitch_m": g.detector_pitch,
        "neutron_speed_mps": g.neutron_speed,
        "planes": 9,
        "plane_order": "(j,k) row-major",
    }
    _atomic_write(raw_path, s.values.astype("<f8").tobytes())
    _atomic_write(header_path, json.dumps(header, indent=2).encode())
    return header_path


def read_sinograms(path: str | Path) -> SinogramSet:
    header_path, raw_path = _paths(path)
    header = _read_header(header_path)
    try:
        geom = ScanGeometry(
            n_angles=int(header["n_angles"]),
            angle_start=math.radians(float(header["angle_start_deg"])),
            angle_step=math.radians(float(header["angle_step_deg"])),
            n_detectors=int(header["n_detectors"]),
            detector_pitch=float(header["detector_pitch_m"]),
            neutron_speed=float(header["neutron_speed_mps"]),
        )
        planes = int(header["planes"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed sinogram header {header_path}: {exc}") from exc
    if planes != 9:
        raise FormatError(f"expected 9 sinogram planes, got {planes}")
    payload = _read_payload(raw_path, 9 * geom.n_angles * geom.n_detectors)
    return SinogramSet(payload.reshape(3, 3, geom.n_angles, geom.n_detectors), geom)


def _read_header(path: Path) -> dict:
    try:
        header = json.loads(path.read_text())
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed JSON header {path}: {exc}") from exc
    if not isinstance(header, dict):
        raise FormatError(f"header {path} must be a JSON object")
    return header


def _read_payload(path: Path, count: int) -> np.ndarray:
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if len(blob) != count * 8:
        raise FormatError(
            f"payload {path} holds {len(blob)} bytes, expected {count * 8}"
        )
    return np.frombuffer(blob, dtype="<f8").astype(np.float64)


def write_csv(path: str | Path, columns: list[str], rows) -> Path:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_cell(v) for v in row))
    out = Path(path)
    _atomic_write(out, ("\n".join(lines) + "\n").encode())
    return out


def _format_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)
