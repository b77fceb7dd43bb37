import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specclass.errors import DataError
from specclass.raster import Raster
from specclass.weierstrass import (WeierstrassTransform, apply_transform, build_kernel_1d,
                                   build_kernel_2d, make_kernel)

SQRT2 = math.sqrt(2.0)


def reflect_index(i, n):
    # edge-repeating mirror: -1 -> 0, n -> n - 1
    while i < 0 or i >= n:
        i = -i - 1 if i < 0 else 2 * n - 1 - i
    return i


def loop_convolve(band, grid):
    """Per-pixel brute-force 2-D convolution with reflect boundary."""
    h, w = band.shape
    r = (grid.shape[0] - 1) // 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    acc += grid[r - dy, r - dx] * band[reflect_index(y + dy, h),
                                                       reflect_index(x + dx, w)]
            out[y, x] = acc
    return out


class TestKernel1D:
    @pytest.mark.parametrize("sigma,trunc", [(0.5, 1), (1.0, 3), (SQRT2, 3), (2.7, 4.5)])
    def test_sums_to_one(self, sigma, trunc):
        k = build_kernel_1d(sigma, trunc)
        assert abs(k.weights.sum() - 1.0) < 1e-12
        assert np.all(k.weights >= 0)

    def test_classical_weierstrass_tap_ratio(self):
        k = build_kernel_1d(SQRT2)
        r = k.radius
        # exp(-x^2 / 4) evaluated at x = 0, 1
        assert k.weights[r + 1] / k.weights[r] == pytest.approx(math.exp(-0.25), rel=1e-14)
        assert math.exp(-0.25) == pytest.approx(0.77880, abs=1e-5)

    def test_radius_rule(self):
        k = build_kernel_1d(SQRT2, 3)
        assert k.radius == 5
        assert len(k.weights) == 11

    def test_taps_follow_gaussian_shape(self):
        k = build_kernel_1d(1.3, 3)
        x = np.arange(-k.radius, k.radius + 1)
        ref = np.exp(-x ** 2 / (2 * 1.3 ** 2))
        np.testing.assert_allclose(k.weights, ref / ref.sum(), rtol=1e-14)

    @pytest.mark.parametrize("sigma,trunc", [(0.0, 3), (-1.0, 3), (1.0, 0.5)])
    def test_rejects_bad_parameters(self, sigma, trunc):
        with pytest.raises(DataError):
            build_kernel_1d(sigma, trunc)


class TestKernel2D:
    def test_rho_zero_is_outer_product(self):
        k1 = build_kernel_1d(1.7)
        k2 = build_kernel_2d(1.7, 1.7, 0.0)
        assert np.abs(k2.weights - np.outer(k1.weights, k1.weights)).max() < 1e-12

    def test_rho_boundary(self):
        build_kernel_2d(1.0, 1.0, 0.99999)
        build_kernel_2d(1.0, 1.0, -0.99999)
        for bad in (1.0, -1.0, 1.5):
            with pytest.raises(DataError):
                build_kernel_2d(1.0, 1.0, bad)

    def test_symmetries_with_correlation(self):
        w = build_kernel_2d(1.5, 1.5, 0.5).weights
        np.testing.assert_allclose(w, w.T, atol=1e-15)
        np.testing.assert_allclose(w, w[::-1, ::-1], atol=1e-15)
        assert abs(w.sum() - 1.0) < 1e-12

    def test_matches_bivariate_density(self):
        sx, sy, rho = 1.2, 2.0, -0.3
        k = build_kernel_2d(sx, sy, rho)
        r = k.radius
        cov = np.array([[sx * sx, rho * sx * sy], [rho * sx * sy, sy * sy]])
        prec = np.linalg.inv(cov)
        ref = np.empty_like(k.weights)
        for row in range(2 * r + 1):
            for col in range(2 * r + 1):
                v = np.array([col - r, row - r], float)
                ref[row, col] = math.exp(-0.5 * v @ prec @ v)
        np.testing.assert_allclose(k.weights, ref / ref.sum(), rtol=1e-12)

    def test_separable_flag(self):
        assert build_kernel_2d(1.0, 2.0, 0.0).is_separable
        assert not build_kernel_2d(1.0, 1.0, 0.2).is_separable
        with pytest.raises(ValueError):
            build_kernel_2d(1.0, 1.0, 0.2).factors()


class TestApplyTransform:
    def test_constant_raster_unchanged(self):
        r = Raster(np.full((2, 9, 7), 3.25))
        out = apply_transform(r, build_kernel_1d(SQRT2), "reflect")
        assert np.abs(out.data - 3.25).max() < 1e-12

    def test_impulse_reproduces_kernel(self):
        k = build_kernel_2d(1.0, 1.5, 0.4)
        n = 2 * k.radius + 11
        img = np.zeros((1, n, n))
        img[0, n // 2, n // 2] = 1.0
        out = apply_transform(Raster(img), k, "zero").data[0]
        r = k.radius
        c = n // 2
        np.testing.assert_allclose(out[c - r:c + r + 1, c - r:c + r + 1], k.weights, atol=1e-15)

    @pytest.mark.parametrize("boundary", ["reflect", "replicate", "zero"])
    def test_shape_preserved(self, rng, boundary):
        r = Raster(rng.random((3, 5, 13)))
        out = apply_transform(r, build_kernel_2d(2.0, 1.0, 0.3), boundary)
        assert out.data.shape == r.data.shape
        assert out.band_names == r.band_names

    def test_matches_brute_force_loop(self, rng):
        band = rng.random((12, 9))
        for k in (build_kernel_1d(SQRT2), build_kernel_2d(1.0, 1.4, 0.6)):
            got = apply_transform(Raster(band[None]), k, "reflect").data[0]
            np.testing.assert_allclose(got, loop_convolve(band, k.grid()), atol=1e-12)

    def test_zero_boundary_darkens_edges(self):
        out = apply_transform(Raster(np.ones((1, 20, 20))), build_kernel_1d(1.0), "zero").data[0]
        assert out[0, 0] < 1.0
        assert out[10, 10] == pytest.approx(1.0, abs=1e-12)

    def test_unknown_boundary(self, small_raster):
        with pytest.raises(DataError):
            apply_transform(small_raster, build_kernel_1d(1.0), "wrap")

    @pytest.mark.parametrize("boundary", ["reflect", "replicate"])
    def test_output_within_input_range(self, rng, boundary):
        data = rng.normal(size=(2, 17, 23))
        out = apply_transform(Raster(data), build_kernel_2d(1.3, 0.8, -0.4), boundary).data
        assert out.min() >= data.min() - 1e-12
        assert out.max() <= data.max() + 1e-12

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.3, 3.0))
    def test_variance_never_increases(self, seed, sigma):
        data = np.random.default_rng(seed).lognormal(size=(1, 24, 19))
        out = apply_transform(Raster(data), build_kernel_1d(sigma), "reflect").data
        assert out.var() <= data.var() * (1 + 1e-12)

    def test_semigroup_on_smooth_input(self):
        # sampled Gaussians compose exactly only up to aliasing near Nyquist, so the
        # input here is band-limited; white-noise behaviour is in the acceptance suite
        yy, xx = np.mgrid[0:64, 0:64]
        band = np.sin(0.3 * xx) + np.cos(0.2 * yy + 0.1 * xx)
        k1, k2 = build_kernel_1d(1.0, 8), build_kernel_1d(SQRT2, 8)
        r = Raster(band[None])
        twice = apply_transform(apply_transform(r, k1), k1).data[0]
        once = apply_transform(r, k2).data[0]
        m = 2 * k1.radius + k2.radius
        assert np.abs(twice - once)[m:-m, m:-m].max() < 1e-6

    def test_thread_count_does_not_change_result(self, rng, monkeypatch):
        r = Raster(rng.random((4, 30, 31)))
        k = build_kernel_1d(SQRT2)
        monkeypatch.setenv("SPECCLASS_THREADS", "1")
        a = apply_transform(r, k).data
        monkeypatch.setenv("SPECCLASS_THREADS", "4")
        b = apply_transform(r, k).data
        assert a.tobytes() == b.tobytes()


class TestEstimator:
    def test_defaults_are_classical_weierstrass(self):
        est = WeierstrassTransform().fit()
        assert est.kernel_.sigma_x == SQRT2
        assert est.kernel_.weights.ndim == 1
        assert est.get_params()["boundary"] == "reflect"

    def test_raster_and_array_inputs_agree(self, small_raster):
        est = WeierstrassTransform(sigma=1.1)
        out_r = est.fit_transform(small_raster)
        out_a = est.transform(np.asarray(small_raster.data))
        assert isinstance(out_r, Raster)
        np.testing.assert_array_equal(out_r.data, out_a)
        np.testing.assert_array_equal(est.transform(small_raster.data[0]), out_a[0])

    def test_make_kernel_dispatch(self):
        assert make_kernel(1.0).weights.ndim == 1
        assert make_kernel(1.0, 2.0).weights.ndim == 2
        assert make_kernel(1.0, rho=0.1).weights.ndim == 2

    def test_bad_boundary(self):
        with pytest.raises(DataError):
            WeierstrassTransform(boundary="wrap").fit()
