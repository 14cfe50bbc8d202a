import numpy as np
import pytest

from spintomo.geometry import GridSpec
from spintomo.phantom import (
    MU_0,
    SolenoidSpec,
    WirePath,
    biot_savart,
    sample_field,
    scale_field,
    solenoid_wire,
)


def test_long_straight_wire_limit():
    # 10 km segment, observation 1 m from its midpoint: B -> mu0 I / (2 pi r)
    wire = WirePath([[0.0, 0.0, -5000.0], [0.0, 0.0, 5000.0]], current=1.0)
    b = biot_savart(wire, (1.0, 0.0, 0.0))
    expected = MU_0 / (2 * np.pi)
    assert abs(np.linalg.norm(b) - expected) / expected < 1e-3
    # right-hand rule: current along +z, point on +x, field along +y
    assert b[1] > 0 and abs(b[0]) < 1e-20 and abs(b[2]) < 1e-20


def test_square_loop_axis_field_is_axial():
    side = 1.0
    half = side / 2
    loop = WirePath(
        [
            [-half, -half, 0.0],
            [half, -half, 0.0],
            [half, half, 0.0],
            [-half, half, 0.0],
            [-half, -half, 0.0],
        ],
        current=2.0,
    )
    b = biot_savart(loop, (0.0, 0.0, 0.7))
    assert abs(b[0]) < 1e-15 * abs(b[2])
    assert abs(b[1]) < 1e-15 * abs(b[2])


def test_polygon_loop_converges_to_circle():
    # regular 256-gon of radius 1: field at center -> mu0 I / (2 R)
    t = np.linspace(0.0, 2 * np.pi, 257)
    verts = np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], axis=1)
    loop = WirePath(verts, current=1.0)
    b = biot_savart(loop, (0.0, 0.0, 0.0))
    expected = MU_0 / 2.0
    assert abs(b[2] - expected) / expected < 1e-3


def test_field_linear_in_current():
    wire1 = WirePath([[0, 0, -1], [0.3, 0.1, 1]], current=1.0)
    wire2 = WirePath([[0, 0, -1], [0.3, 0.1, 1]], current=2.0)
    p = (0.5, -0.2, 0.1)
    assert np.allclose(2 * biot_savart(wire1, p), biot_savart(wire2, p), rtol=1e-15)


def test_point_on_wire_is_singular():
    wire = WirePath([[0, 0, -1], [0, 0, 1]], current=1.0)
    with pytest.raises(ValueError):
        biot_savart(wire, (0.0, 0.0, 0.5))


def test_wire_path_validation():
    with pytest.raises(ValueError):
        WirePath([[0, 0, 0]], current=1.0)
    with pytest.raises(ValueError):
        WirePath([[0, 0, 0], [0, 0, 0]], current=1.0)


def test_solenoid_wire_coarse_turn():
    spec = SolenoidSpec(radius=0.01, pitch=0.002, n_turns=1, segments_per_turn=4)
    wire = solenoid_wire(spec)
    assert wire.vertices.shape == (5, 3)


def test_solenoid_wire_rejects_zero_pitch():
    with pytest.raises(ValueError):
        SolenoidSpec(radius=0.01, pitch=0.0, n_turns=1, segments_per_turn=8)


def test_solenoid_wire_vertex_radii():
    spec = SolenoidSpec(
        radius=0.01,
        pitch=0.002,
        n_turns=20,
        segments_per_turn=64,
        axis=(0.3, -0.2, 0.9),
        center=(0.01, 0.02, 0.03),
    )
    wire = solenoid_wire(spec)
    assert wire.vertices.shape == (1281, 3)
    axis = np.array(spec.axis) / np.linalg.norm(spec.axis)
    rel = wire.vertices - np.array(spec.center)
    radial = rel - (rel @ axis)[:, None] * axis[None, :]
    assert np.allclose(np.linalg.norm(radial, axis=1), spec.radius, atol=1e-12)


def test_far_wire_gives_near_uniform_field():
    grid = GridSpec.centered(12, 12, 0.04)
    wire = WirePath([[60.0, 0.0, -500.0], [60.0, 0.0, 500.0]], current=100.0)
    f = sample_field(wire, grid)
    mags = f.magnitude()
    assert (mags.max() - mags.min()) / mags.max() < 0.01


def test_solenoid_center_slice_physics():
    spec = SolenoidSpec(radius=0.01, pitch=0.002, n_turns=10, segments_per_turn=64)
    wire = solenoid_wire(spec)
    grid = GridSpec.centered(45, 45, 0.04)
    f = sample_field(wire, grid, plane_height=0.0)
    mags = f.magnitude()
    i, j = np.unravel_index(np.argmax(mags), mags.shape)
    x = grid.centers_x()[i]
    y = grid.centers_y()[j]
    # peak sits on the coil (interior of the grid), not out in the fringe
    assert np.hypot(x, y) < 1.2 * spec.radius
    # at the bore center the field is axial and matches the finite-solenoid
    # central-axis formula mu0 n I L / sqrt(L^2 + 4 R^2)
    ic, jc = grid.nx // 2, grid.ny // 2
    bx, by, bz = f.values[ic, jc]
    assert abs(bz) > 10 * np.hypot(bx, by)
    length = spec.pitch * spec.n_turns
    n_density = 1.0 / spec.pitch
    expected = MU_0 * n_density * spec.current * length / np.hypot(length, 2 * spec.radius)
    assert abs(bz - expected) / expected < 0.05


def test_scale_field():
    grid = GridSpec.centered(8, 8, 0.04)
    wire = solenoid_wire(
        SolenoidSpec(radius=0.01, pitch=0.002, n_turns=5, segments_per_turn=32,
                     center=(0.0, 0.0, 0.012))
    )
    f = sample_field(wire, grid)
    peak = f.magnitude().max()
    f1 = scale_field(f, 1.0)
    assert np.array_equal(f1.values, f.values)
    assert np.isclose(scale_field(f, 50.0).magnitude().max(), 50 * peak)
    assert np.isclose(scale_field(f, 100.0).magnitude().max(), 100 * peak)


def test_divergence_free_numerically():
    wire = solenoid_wire(
        SolenoidSpec(radius=0.01, pitch=0.002, n_turns=10, segments_per_turn=64,
                     center=(0.0, 0.0, 0.014))
    )
    rng = np.random.default_rng(8)
    h = 2.22e-4
    for _ in range(10):
        p = np.append(rng.uniform(-0.015, 0.015, size=2), 0.0)
        div = 0.0
        for ax in range(3):
            step = np.zeros(3)
            step[ax] = h
            div += (biot_savart(wire, p + step)[ax] - biot_savart(wire, p - step)[ax]) / (2 * h)
        mag = np.linalg.norm(biot_savart(wire, p))
        assert abs(div) < 1e-3 * mag / h


def test_segment_refinement_converges():
    grid = GridSpec.centered(16, 16, 0.04)
    fields = {}
    for spt in (64, 128):
        wire = solenoid_wire(
            SolenoidSpec(radius=0.01, pitch=0.002, n_turns=10, segments_per_turn=spt,
                         center=(0.0, 0.0, 0.014))
        )
        fields[spt] = sample_field(wire, grid)
    diff = np.abs(fields[128].values - fields[64].values).max()
    assert diff < 0.005 * np.abs(fields[64].values).max()
