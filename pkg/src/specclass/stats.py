"""Per-band histograms and moment-based normality diagnostics."""

from dataclasses import dataclass

import numpy as np

from .errors import DataError

APPROXIMATELY_NORMAL = "approximately-normal"
SKEWED = "skewed"
HEAVY_TAILED = "heavy-tailed"
DEGENERATE = "degenerate"

SKEW_THRESHOLD = 0.5
KURTOSIS_THRESHOLD = 1.0


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    band_index: int

    def to_dict(self):
        return {
            "band_index": self.band_index,
            "bin_edges": self.bin_edges.tolist(),
            "counts": self.counts.tolist(),
        }

    def csv_rows(self):
        for lo, hi, count in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts):
            yield float(lo), float(hi), int(count)


@dataclass(frozen=True)
class MomentsReport:
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    verdict: str

    def to_dict(self):
        def clean(x):
            return None if np.isnan(x) else float(x)

        return {
            "mean": self.mean,
            "variance": self.variance,
            "skewness": clean(self.skewness),
            "excess_kurtosis": clean(self.excess_kurtosis),
            "verdict": self.verdict,
        }


def _band(raster, band):
    if not 0 <= band < raster.bands:
        raise DataError(f"band {band} out of range for {raster.bands}-band raster")
    return np.asarray(raster.data[band], dtype=np.float64).ravel()


def histogram_of(values, bins, band_index=0):
    """Equal-width histogram of ``values`` over ``[min, max]``.

    The maximum lands in the last bin.  A constant input gets a unit-wide
    range centred on its value so that every sample falls in one bin.
    """
    if bins < 1:
        raise DataError("bins must be >= 1")
    values = np.asarray(values, dtype=np.float64).ravel()
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    index = np.floor((values - lo) / (hi - lo) * bins).astype(np.int64)
    index = np.clip(index, 0, bins - 1)
    counts = np.bincount(index, minlength=bins)
    return Histogram(edges, counts, band_index)


def band_histogram(raster, band, bins=256):
    return histogram_of(_band(raster, band), bins, band)


def verdict_for(skewness, excess_kurtosis, skew_threshold=SKEW_THRESHOLD,
                kurtosis_threshold=KURTOSIS_THRESHOLD):
    if np.isnan(skewness) or np.isnan(excess_kurtosis):
        return DEGENERATE
    if abs(skewness) >= skew_threshold:
        return SKEWED
    if abs(excess_kurtosis) >= kurtosis_threshold:
        return HEAVY_TAILED
    return APPROXIMATELY_NORMAL


def moments_of(values, skew_threshold=SKEW_THRESHOLD, kurtosis_threshold=KURTOSIS_THRESHOLD):
    """Population moments (divide by N) and a normality verdict."""
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size < 4:
        raise DataError("need at least 4 samples for moments")
    mean = float(x.mean())
    d = x - mean
    m2 = float(np.mean(d * d))
    # a constant band can leave rounding residue of order eps * |mean|
    if m2 <= (8.0 * np.finfo(float).eps * abs(mean)) ** 2:
        return MomentsReport(mean, 0.0, float("nan"), float("nan"), DEGENERATE)
    m3 = float(np.mean(d ** 3))
    m4 = float(np.mean(d ** 4))
    skew = m3 / m2 ** 1.5
    kurt = m4 / (m2 * m2) - 3.0
    return MomentsReport(mean, m2, skew, kurt,
                         verdict_for(skew, kurt, skew_threshold, kurtosis_threshold))


def band_moments(raster, band, skew_threshold=SKEW_THRESHOLD,
                 kurtosis_threshold=KURTOSIS_THRESHOLD):
    return moments_of(_band(raster, band), skew_threshold, kurtosis_threshold)
