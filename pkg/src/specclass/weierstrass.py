"""Discrete Gaussian kernels and the Weierstrass (Gauss) transform of images.

The classical Weierstrass transform convolves with ``exp(-x**2 / 4) / sqrt(4 pi)``,
a Gaussian of variance 2, hence the default ``sigma = sqrt(2)``.  Kernels are
sampled at integer offsets, truncated at ``ceil(truncation * sigma)`` and
renormalised to unit sum.
"""

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._threads import parallel_map
from .errors import DataError
from .raster import Raster

DEFAULT_SIGMA = math.sqrt(2.0)
DEFAULT_TRUNCATION = 3.0
BOUNDARY_MODES = ("reflect", "replicate", "zero")

# reflect repeats the edge sample: (d c b a | a b c d | d c b a)
_PAD_MODES = {"reflect": "symmetric", "replicate": "edge", "zero": "constant"}


@dataclass(frozen=True)
class GaussianKernel:
    """Renormalised sampled Gaussian.

    ``weights`` is a 1-D tap vector for the isotropic, uncorrelated case and
    a ``(2r+1, 2r+1)`` grid indexed ``[row (y), column (x)]`` otherwise.
    """

    sigma_x: float
    sigma_y: float
    rho: float
    radius: int
    weights: np.ndarray

    @property
    def is_separable(self):
        return self.rho == 0.0

    @property
    def taps(self):
        return 2 * self.radius + 1

    def grid(self):
        """Full 2-D weight grid, whatever the stored representation."""
        if self.weights.ndim == 1:
            return np.outer(self.weights, self.weights)
        return self.weights

    def factors(self):
        """``(row_taps, column_taps)`` whose outer product is the grid (rho = 0 only)."""
        if not self.is_separable:
            raise ValueError("correlated kernel has no separable factorisation")
        if self.weights.ndim == 1:
            return self.weights, self.weights
        return _taps(self.sigma_y, self.radius), _taps(self.sigma_x, self.radius)


def _taps(sigma, radius):
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(k * k) / (2.0 * sigma * sigma))
    return w / w.sum()


def _check_sigma_truncation(truncation, *sigmas):
    for s in sigmas:
        if not (s > 0 and math.isfinite(s)):
            raise DataError(f"sigma must be positive and finite, got {s}")
    if not truncation >= 1:
        raise DataError(f"truncation must be >= 1, got {truncation}")


def build_kernel_1d(sigma=DEFAULT_SIGMA, truncation=DEFAULT_TRUNCATION):
    _check_sigma_truncation(truncation, sigma)
    radius = max(1, math.ceil(truncation * sigma))
    return GaussianKernel(float(sigma), float(sigma), 0.0, radius, _taps(sigma, radius))


def build_kernel_2d(sigma_x=DEFAULT_SIGMA, sigma_y=DEFAULT_SIGMA, rho=0.0,
                    truncation=DEFAULT_TRUNCATION):
    """Bivariate Gaussian grid with correlation ``rho`` (centred, zero mean)."""
    _check_sigma_truncation(truncation, sigma_x, sigma_y)
    if not -1.0 < rho < 1.0:
        raise DataError(f"rho must lie in (-1, 1), got {rho}")
    radius = max(1, math.ceil(truncation * max(sigma_x, sigma_y)))
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    u = k[np.newaxis, :] / sigma_x
    v = k[:, np.newaxis] / sigma_y
    q = (u * u + v * v - 2.0 * rho * u * v) / (2.0 * (1.0 - rho * rho))
    w = np.exp(-q)
    return GaussianKernel(float(sigma_x), float(sigma_y), float(rho), radius, w / w.sum())


def make_kernel(sigma=DEFAULT_SIGMA, sigma_y=None, rho=0.0, truncation=DEFAULT_TRUNCATION):
    """1-D kernel when isotropic and uncorrelated, otherwise a full grid."""
    if (sigma_y is None or sigma_y == sigma) and rho == 0.0:
        return build_kernel_1d(sigma, truncation)
    return build_kernel_2d(sigma, sigma if sigma_y is None else sigma_y, rho, truncation)


def _pad(band, radius, boundary, axes):
    if boundary not in _PAD_MODES:
        raise DataError(f"boundary must be one of {BOUNDARY_MODES}, got {boundary!r}")
    width = [(0, 0), (0, 0)]
    for ax in axes:
        width[ax] = (radius, radius)
    return np.pad(band, width, mode=_PAD_MODES[boundary])


def _pass_1d(band, taps, axis, boundary):
    r = (len(taps) - 1) // 2
    padded = _pad(band, r, boundary, (axis,))
    n = band.shape[axis]
    out = np.zeros(band.shape, dtype=np.float64)
    for i, w in enumerate(taps):
        if axis == 0:
            out += w * padded[i:i + n, :]
        else:
            out += w * padded[:, i:i + n]
    return out


def convolve_separable(band, row_taps, col_taps, boundary="reflect"):
    band = np.asarray(band, dtype=np.float64)
    return _pass_1d(_pass_1d(band, row_taps, 0, boundary), col_taps, 1, boundary)


def convolve_direct(band, grid, boundary="reflect"):
    """Shift-and-add 2-D convolution with a point-symmetric ``grid``."""
    band = np.asarray(band, dtype=np.float64)
    r = (grid.shape[0] - 1) // 2
    padded = _pad(band, r, boundary, (0, 1))
    h, w = band.shape
    out = np.zeros((h, w), dtype=np.float64)
    for i in range(grid.shape[0]):
        for j in range(grid.shape[1]):
            out += grid[i, j] * padded[i:i + h, j:j + w]
    return out


def convolve_band(band, kernel, boundary="reflect"):
    if kernel.is_separable:
        row_taps, col_taps = kernel.factors()
        return convolve_separable(band, row_taps, col_taps, boundary)
    return convolve_direct(band, kernel.grid(), boundary)


def apply_transform(raster, kernel, boundary="reflect"):
    """Convolve every band of ``raster`` with ``kernel``; shape is preserved."""
    if boundary not in _PAD_MODES:
        raise DataError(f"boundary must be one of {BOUNDARY_MODES}, got {boundary!r}")
    bands = parallel_map(lambda b: convolve_band(b, kernel, boundary), raster.data)
    return raster.with_data(np.stack(bands))


class WeierstrassTransform(TransformerMixin, BaseEstimator):
    """Gaussian smoothing of multiband images as a scikit-learn transformer.

    Parameters
    ----------
    sigma : float, default=sqrt(2)
        Standard deviation along x (and y unless ``sigma_y`` is given), in pixels.
    sigma_y : float or None, default=None
        Standard deviation along y.
    rho : float, default=0.0
        Correlation between the x and y axes, in (-1, 1).
    truncation : float, default=3.0
        Kernel radius in multiples of the larger sigma.
    boundary : {'reflect', 'replicate', 'zero'}, default='reflect'
        Edge handling.

    Notes
    -----
    ``transform`` accepts a :class:`Raster` (returning a Raster) or an array
    shaped ``(height, width)`` or ``(bands, height, width)``.  Fitting only
    builds the kernel; the data passed to ``fit`` are ignored.
    """

    def __init__(self, sigma=DEFAULT_SIGMA, sigma_y=None, rho=0.0,
                 truncation=DEFAULT_TRUNCATION, boundary="reflect"):
        self.sigma = sigma
        self.sigma_y = sigma_y
        self.rho = rho
        self.truncation = truncation
        self.boundary = boundary

    def fit(self, X=None, y=None):
        if self.boundary not in BOUNDARY_MODES:
            raise DataError(f"boundary must be one of {BOUNDARY_MODES}, got {self.boundary!r}")
        self.kernel_ = make_kernel(self.sigma, self.sigma_y, self.rho, self.truncation)
        return self

    def transform(self, X):
        check_is_fitted(self, "kernel_")
        if isinstance(X, Raster):
            return apply_transform(X, self.kernel_, self.boundary)
        X = np.asarray(X, dtype=np.float64)
        if X.ndim not in (2, 3):
            raise DataError(f"expected (height, width) or (bands, height, width), got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise DataError("input contains non-finite samples")
        if X.ndim == 2:
            return convolve_band(X, self.kernel_, self.boundary)
        return np.stack(parallel_map(lambda b: convolve_band(b, self.kernel_, self.boundary), X))
