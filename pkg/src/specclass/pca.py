"""Cross-band statistics, principal components and redundant-band selection."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DataError, NumericError

DEFAULT_THRESHOLD = 0.95
MAX_SWEEPS = 100


@dataclass(frozen=True)
class BandStatistics:
    means: np.ndarray
    covariance: np.ndarray
    correlation: np.ndarray
    degenerate: tuple = ()

    @property
    def variances(self):
        return np.diag(self.covariance)


@dataclass(frozen=True)
class PcaResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    variance_explained: np.ndarray

    def to_dict(self):
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "eigenvectors": self.eigenvectors.tolist(),
            "variance_explained": self.variance_explained.tolist(),
        }


@dataclass(frozen=True)
class BandDrop:
    dropped: int
    kept: int
    correlation: float

    def to_dict(self):
        return {"dropped": self.dropped, "kept": self.kept, "correlation": self.correlation}


def statistics_from_pixels(X):
    """Population mean/covariance/correlation of an ``(n_pixels, n_bands)`` matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DataError("need at least 2 contributing pixels for band statistics")
    means = X.mean(axis=0)
    D = X - means
    cov = D.T @ D / X.shape[0]
    cov = 0.5 * (cov + cov.T)
    var = np.diag(cov).copy()
    degenerate = tuple(int(b) for b in np.flatnonzero(var <= 0.0))
    sd = np.sqrt(np.where(var > 0.0, var, 1.0))
    corr = cov / np.outer(sd, sd)
    corr[list(degenerate), :] = 0.0
    corr[:, list(degenerate)] = 0.0
    corr = np.clip(corr, -1.0, 1.0)
    for b in range(len(var)):
        corr[b, b] = 0.0 if b in degenerate else 1.0
    return BandStatistics(means, cov, corr, degenerate)


def band_statistics(raster, mask=None):
    """Band statistics over all pixels, or over pixels where ``mask`` is nonzero."""
    X = raster.pixels()
    if mask is not None:
        if (mask.height, mask.width) != (raster.height, raster.width):
            raise DataError("mask and raster dimensions differ")
        X = X[mask.labels.ravel() != 0]
    return statistics_from_pixels(X)


def jacobi_eigh(A, tol=1e-15, max_sweeps=MAX_SWEEPS):
    """Eigenvalues and eigenvectors of a symmetric matrix by cyclic Jacobi rotations.

    Returns unsorted ``(w, V)`` with ``A @ V[:, k] == w[k] * V[:, k]``.
    """
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    V = np.eye(n)
    upper = np.triu_indices(n, 1)
    scale = np.sqrt(np.sum(A * A))
    if scale == 0.0:
        return np.zeros(n), V
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(A[upper] ** 2))
        if off <= tol * scale:
            return np.diag(A).copy(), V
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                # below rounding level of both diagonal entries: annihilate without rotating
                if abs(apq) <= 1e-18 * (abs(A[p, p]) + abs(A[q, q])):
                    A[p, q] = A[q, p] = 0.0
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                Ap = A[:, p].copy()
                Aq = A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap = A[p, :].copy()
                Aq = A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                A[p, q] = A[q, p] = 0.0
                Vp = V[:, p].copy()
                Vq = V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
    raise NumericError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def principal_components(stats):
    """Eigendecomposition of the band covariance, eigenvalues descending.

    Each eigenvector is signed so that its largest-magnitude entry is positive.
    """
    cov = stats.covariance if isinstance(stats, BandStatistics) else np.asarray(stats, float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise DataError("covariance must be square")
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(cov).max())):
        raise DataError("covariance is not symmetric")
    w, V = jacobi_eigh(0.5 * (cov + cov.T))
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    for k in range(V.shape[1]):
        if V[np.argmax(np.abs(V[:, k])), k] < 0:
            V[:, k] = -V[:, k]
    positive = np.clip(w, 0.0, None)
    total = positive.sum()
    explained = positive / total if total > 0 else np.zeros_like(w)
    return PcaResult(w, V, explained)


def select_bands(stats, threshold=DEFAULT_THRESHOLD):
    """Greedy redundancy filter over band pairs.

    Pairs ``(i, j)``, ``i < j``, are scanned in index order.  When both bands
    are still retained and ``|corr| >= threshold`` the lower-variance band is
    dropped (the higher index on a tie).

    Returns
    -------
    retained : list of int
    drops : list of BandDrop
    """
    if not 0.0 < threshold <= 1.0:
        raise DataError(f"threshold must lie in (0, 1], got {threshold}")
    corr = stats.correlation
    var = stats.variances
    n = corr.shape[0]
    retained = set(range(n))
    drops = []
    for i in range(n - 1):
        for j in range(i + 1, n):
            if i not in retained or j not in retained:
                continue
            c = float(corr[i, j])
            if abs(c) >= threshold:
                drop, keep = (i, j) if var[i] < var[j] else (j, i)
                retained.discard(drop)
                drops.append(BandDrop(drop, keep, c))
    return sorted(retained), drops


class BandSelector(TransformerMixin, BaseEstimator):
    """Drops bands that duplicate another band's information.

    Parameters
    ----------
    threshold : float, default=0.95
        Absolute correlation at or above which a pair counts as redundant.

    Attributes
    ----------
    statistics_ : BandStatistics
    components_ : PcaResult
    retained_bands_ : list of int
    drops_ : list of BandDrop
    """

    def __init__(self, threshold=DEFAULT_THRESHOLD):
        self.threshold = threshold

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.n_features_in_ = X.shape[1]
        self.statistics_ = statistics_from_pixels(X)
        self.components_ = principal_components(self.statistics_)
        self.retained_bands_, self.drops_ = select_bands(self.statistics_, self.threshold)
        return self

    def transform(self, X):
        check_is_fitted(self, "retained_bands_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise DataError(f"expected {self.n_features_in_} bands, got {X.shape[1]}")
        return X[:, self.retained_bands_]

    def get_support(self, indices=False):
        check_is_fitted(self, "retained_bands_")
        if indices:
            return np.asarray(self.retained_bands_)
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.retained_bands_] = True
        return mask
