import numpy as np
import pytest

from spintomo.forward import SinogramSet
from spintomo.geometry import GridSpec, ScanGeometry, VectorField2D
from spintomo.processing import add_noise, rebin, relative_error, resample_bilinear


def geometry(n_angles=360, n_detectors=270):
    return ScanGeometry(n_angles, 0.0, 2 * np.pi / n_angles, n_detectors, 0.04 / n_detectors, 790.0)


def test_zero_level_is_identity():
    rng = np.random.default_rng(40)
    geom = geometry(12, 30)
    data = SinogramSet(rng.normal(size=(3, 3, 12, 30)), geom)
    noisy = add_noise(data, 0.0, seed=1)
    assert np.array_equal(noisy.values, data.values)


def test_noise_is_deterministic_per_seed():
    rng = np.random.default_rng(41)
    geom = geometry(12, 30)
    data = SinogramSet(rng.normal(size=(3, 3, 12, 30)), geom)
    a = add_noise(data, 0.05, seed=99)
    b = add_noise(data, 0.05, seed=99)
    c = add_noise(data, 0.05, seed=100)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_noise_sample_sigma():
    # on unit-magnitude entries the relative level equals the absolute sigma
    rng = np.random.default_rng(42)
    geom = geometry(120, 100)  # 9 * 120 * 100 > 1e5 entries
    signs = rng.choice([-1.0, 1.0], size=(3, 3, 120, 100))
    data = SinogramSet(signs, geom)
    noisy = add_noise(data, 0.05, seed=5)
    sample_sigma = np.std(noisy.values - data.values)
    assert 0.048 < sample_sigma < 0.052


def test_noise_scales_with_entry_magnitude():
    geom = geometry(12, 30)
    vals = np.full((3, 3, 12, 30), 1e-2)
    noisy = add_noise(SinogramSet(vals, geom), 0.05, seed=3)
    sigma = np.std(noisy.values - vals)
    assert 1e-2 * 0.04 < sigma < 1e-2 * 0.06


def test_rebin_identity_factor():
    rng = np.random.default_rng(43)
    geom = geometry(12, 30)
    data = SinogramSet(rng.normal(size=(3, 3, 12, 30)), geom)
    out = rebin(data, 1)
    assert np.array_equal(out.values, data.values)
    assert out.geom == geom


def test_rebin_desk_scale_shape():
    rng = np.random.default_rng(44)
    geom = geometry(360, 270)
    data = SinogramSet(rng.normal(size=(3, 3, 360, 270)), geom)
    out = rebin(data, 3)
    assert out.values.shape == (3, 3, 120, 90)
    assert out.geom.n_angles == 120
    assert out.geom.n_detectors == 90
    assert np.isclose(out.geom.angle_step, 3 * geom.angle_step)
    assert np.isclose(out.geom.detector_pitch, 3 * geom.detector_pitch)
    assert np.isclose(out.geom.angle_start, geom.angle_start + geom.angle_step)


def test_rebin_block_mean_oracle():
    rng = np.random.default_rng(45)
    geom = geometry(6, 9)
    data = SinogramSet(rng.normal(size=(3, 3, 6, 9)), geom)
    out = rebin(data, 3)
    for j in range(3):
        for k in range(3):
            for a in range(2):
                for d in range(3):
                    block = data.values[j, k, 3 * a : 3 * a + 3, 3 * d : 3 * d + 3]
                    assert np.isclose(out.values[j, k, a, d], block.mean())


def test_rebin_constant_unchanged():
    geom = geometry(12, 30)
    data = SinogramSet(np.full((3, 3, 12, 30), 0.37), geom)
    out = rebin(data, 3)
    assert np.allclose(out.values, 0.37)


def test_rebin_requires_divisibility():
    geom = geometry(12, 31)
    data = SinogramSet(np.zeros((3, 3, 12, 31)), geom)
    with pytest.raises(ValueError):
        rebin(data, 3)


def test_relative_error_basics():
    spec = GridSpec.centered(8, 8, 0.04)
    rng = np.random.default_rng(46)
    truth = VectorField2D(spec, rng.normal(size=(8, 8, 3)))
    assert relative_error(truth, truth) == (0.0, 0.0, 0.0, 0.0)
    zero = VectorField2D.zeros(spec)
    assert np.allclose(relative_error(zero, truth), (1.0, 1.0, 1.0, 1.0))
    scaled = VectorField2D(spec, 1.1 * truth.values)
    assert np.allclose(relative_error(scaled, truth), (0.1, 0.1, 0.1, 0.1))


def test_resample_constant_field():
    src = GridSpec.centered(32, 32, 0.04)
    dst = GridSpec.centered(13, 13, 0.04)
    f = VectorField2D(src, np.full((32, 32, 3), 2.5))
    out = resample_bilinear(f, dst)
    assert np.allclose(out.values, 2.5)


def test_resample_reproduces_affine_field():
    src = GridSpec.centered(32, 32, 0.04)
    dst = GridSpec.centered(15, 15, 0.03)  # interior of the source
    xs = src.centers_x()
    ys = src.centers_y()
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    vals = np.stack([2 * gx + gy, gx - 3 * gy, np.full_like(gx, 0.7)], axis=2)
    out = resample_bilinear(VectorField2D(src, vals), dst)
    dx = dst.centers_x()
    dy = dst.centers_y()
    ggx, ggy = np.meshgrid(dx, dy, indexing="ij")
    expected = np.stack([2 * ggx + ggy, ggx - 3 * ggy, np.full_like(ggx, 0.7)], axis=2)
    assert np.allclose(out.values, expected, atol=1e-12)
