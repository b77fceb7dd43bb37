"""Gaussian maximum-likelihood classification.

Each class ``i`` is modelled as ``N(mean_i, cov_i)`` with prior ``P(i)``.  A
pixel ``x`` is scored with the log discriminant

    g_i(x) = ln P(i) - 0.5 ln|cov_i| - 0.5 (x - mean_i)^T cov_i^-1 (x - mean_i)

whose softmax is the Bayes posterior (the shared ``(2 pi)^(-B/2)`` factor
cancels).  The decision is the arg-max, ties going to the smaller class id,
or 0 (unclassified) when the best score is below an optional threshold.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._threads import parallel_map
from .errors import DataError, NumericError
from .raster import LabelMask, class_table_from_json, class_table_to_json

DEFAULT_REGULARIZATION = 1e-6
DEGENERATE_EPSILON = 1e-6
PRIOR_MODES = ("uniform", "proportional")
_ROW_BLOCK = 64


@dataclass(frozen=True)
class ClassModel:
    class_id: int
    mean: np.ndarray
    covariance: np.ndarray
    prior: float
    log_det_cov: float = field(init=False)
    precision: np.ndarray = field(init=False, repr=False)
    cholesky: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.covariance, dtype=np.float64)
        if cov.shape != (len(mean), len(mean)):
            raise DataError(f"class {self.class_id}: covariance shape {cov.shape} "
                            f"does not match mean length {len(mean)}")
        cov = 0.5 * (cov + cov.T)
        try:
            L = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"class {self.class_id}: covariance is not positive definite") from exc
        Linv = np.linalg.inv(L)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "prior", float(self.prior))
        object.__setattr__(self, "cholesky", L)
        object.__setattr__(self, "log_det_cov", float(2.0 * np.sum(np.log(np.diag(L)))))
        object.__setattr__(self, "precision", Linv.T @ Linv)

    def mahalanobis_sq(self, X):
        """Squared Mahalanobis distance of each row of ``X`` by forward substitution.

        Plain elementwise arithmetic keeps every pixel's value independent of
        how the rows are batched.
        """
        L = self.cholesky
        D = np.asarray(X, dtype=np.float64) - self.mean
        B = L.shape[0]
        z = [None] * B
        q = np.zeros(D.shape[0])
        for k in range(B):
            acc = D[:, k].copy()
            for j in range(k):
                acc -= L[k, j] * z[j]
            z[k] = acc / L[k, k]
            q += z[k] * z[k]
        return q

    def discriminant(self, X):
        return math.log(self.prior) - 0.5 * self.log_det_cov - 0.5 * self.mahalanobis_sq(X)


@dataclass(frozen=True)
class ClassModelSet:
    models: tuple
    band_count: int
    threshold: float | None = None

    def __post_init__(self):
        models = tuple(sorted(self.models, key=lambda m: m.class_id))
        if not models:
            raise DataError("model set needs at least one class")
        if len({m.class_id for m in models}) != len(models):
            raise DataError("duplicate class ids in model set")
        for m in models:
            if m.class_id == 0:
                raise DataError("class id 0 is reserved for unclassified")
            if len(m.mean) != self.band_count:
                raise DataError(f"class {m.class_id} has {len(m.mean)} bands, "
                                f"expected {self.band_count}")
            if not 0.0 < m.prior <= 1.0:
                raise DataError(f"class {m.class_id} prior {m.prior} outside (0, 1]")
        total = sum(m.prior for m in models)
        if abs(total - 1.0) > 1e-12:
            raise DataError(f"priors sum to {total}, not 1")
        object.__setattr__(self, "models", models)

    @property
    def class_ids(self):
        return np.array([m.class_id for m in self.models], dtype=np.int64)

    def __len__(self):
        return len(self.models)

    def to_dict(self):
        return {
            "band_count": self.band_count,
            "threshold": self.threshold,
            "models": [
                {
                    "class_id": m.class_id,
                    "prior": m.prior,
                    "mean": m.mean.tolist(),
                    "covariance": m.covariance.ravel().tolist(),
                }
                for m in self.models
            ],
        }

    @classmethod
    def from_dict(cls, obj):
        try:
            b = int(obj["band_count"])
            models = [
                ClassModel(int(m["class_id"]), np.asarray(m["mean"], dtype=np.float64),
                           np.asarray(m["covariance"], dtype=np.float64).reshape(b, b),
                           float(m["prior"]))
                for m in obj["models"]
            ]
            threshold = obj.get("threshold")
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed model description: {exc}") from exc
        return cls(tuple(models), b, None if threshold is None else float(threshold))


@dataclass(frozen=True)
class ClassScores:
    class_ids: np.ndarray
    discriminants: np.ndarray
    posteriors: np.ndarray
    decision: int


def _regularized_covariance(X, regularization):
    mean = X.mean(axis=0)
    D = X - mean
    cov = D.T @ D / X.shape[0]
    cov = 0.5 * (cov + cov.T)
    scale = float(np.mean(np.diag(cov)))
    if scale <= 0.0:
        return mean, DEGENERATE_EPSILON * np.eye(X.shape[1])
    return mean, cov + regularization * scale * np.eye(X.shape[1])


def fit_models(X, y, priors_mode="uniform", regularization=DEFAULT_REGULARIZATION,
               threshold=None):
    """Per-class mean, regularised population covariance and prior."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if priors_mode not in PRIOR_MODES:
        raise DataError(f"priors_mode must be one of {PRIOR_MODES}, got {priors_mode!r}")
    if regularization < 0:
        raise DataError("regularization must be >= 0")
    ids, counts = np.unique(y, return_counts=True)
    if np.any(ids == 0):
        raise DataError("training labels must be nonzero class ids")
    models = []
    for class_id, n in zip(ids, counts):
        if n < 2:
            raise DataError(f"class {class_id} has {n} training pixel(s); need >= 2")
        mean, cov = _regularized_covariance(X[y == class_id], regularization)
        prior = 1.0 / len(ids) if priors_mode == "uniform" else n / counts.sum()
        models.append((int(class_id), mean, cov, prior))
    priors = np.array([m[3] for m in models])
    priors = priors / priors.sum()
    return ClassModelSet(
        tuple(ClassModel(cid, mean, cov, p) for (cid, mean, cov, _), p in zip(models, priors)),
        X.shape[1], threshold)


def fit_class_models(train, priors_mode="uniform", regularization=DEFAULT_REGULARIZATION,
                     threshold=None):
    """Fit a :class:`ClassModelSet` from a :class:`~specclass.sampling.TrainingSet`."""
    return fit_models(train.X, train.y, priors_mode, regularization, threshold)


def discriminants(models, X):
    """``(n_pixels, n_classes)`` log discriminants, columns in class-id order."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != models.band_count:
        raise DataError(f"features have shape {X.shape}, model expects {models.band_count} bands")
    return np.column_stack([m.discriminant(X) for m in models.models])


def posteriors_from(g):
    g = g - g.max(axis=1, keepdims=True)
    e = np.exp(g)
    return e / e.sum(axis=1, keepdims=True)


def decide(models, g):
    best = np.argmax(g, axis=1)
    labels = models.class_ids[best]
    if models.threshold is not None:
        labels = np.where(g[np.arange(len(g)), best] < models.threshold, 0, labels)
    return labels


def classify_pixel(models, feature):
    feature = np.asarray(feature, dtype=np.float64).ravel()
    if len(feature) != models.band_count:
        raise DataError(f"feature has {len(feature)} bands, model expects {models.band_count}")
    if not np.all(np.isfinite(feature)):
        raise DataError("feature vector contains non-finite values")
    g = discriminants(models, feature[np.newaxis, :])
    return ClassScores(models.class_ids, g[0], posteriors_from(g)[0], int(decide(models, g)[0]))


def classify_raster(raster, models, band_subset=None, class_table=None):
    """Label every pixel; 0 where the threshold rejects it."""
    bands = list(range(raster.bands)) if band_subset is None else list(band_subset)
    if len(bands) != models.band_count:
        raise DataError(f"{len(bands)} bands selected, model expects {models.band_count}")
    data = raster.data[bands]
    blocks = range(0, raster.height, _ROW_BLOCK)

    def run(r0):
        chunk = data[:, r0:r0 + _ROW_BLOCK, :]
        X = chunk.reshape(len(bands), -1).T
        return decide(models, discriminants(models, X)).reshape(chunk.shape[1:])

    labels = np.concatenate(parallel_map(run, blocks), axis=0)
    if class_table is None:
        class_table = {int(c): {"name": f"class {c}"} for c in models.class_ids}
    return LabelMask(labels.astype(np.uint32), class_table)


def save_models(models, path, class_table=None, band_subset=None):
    obj = models.to_dict()
    if class_table:
        obj["class_table"] = class_table_to_json(class_table)
    if band_subset is not None:
        obj["band_subset"] = [int(b) for b in band_subset]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, indent=2) + "\n")


def load_models(path):
    """Returns ``(ClassModelSet, class_table or None, band_subset or None)``."""
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError as exc:
        raise DataError(f"model file not found: {path}") from exc
    except ValueError as exc:
        raise DataError(f"model file {path} is not valid JSON: {exc}") from exc
    table = class_table_from_json(obj["class_table"]) if "class_table" in obj else None
    return ClassModelSet.from_dict(obj), table, obj.get("band_subset")


class MaximumLikelihoodClassifier(ClassifierMixin, BaseEstimator):
    """Gaussian maximum-likelihood classifier.

    Parameters
    ----------
    priors : {'uniform', 'proportional'}, default='uniform'
        Class priors: equal, or proportional to the training counts.
    regularization : float, default=1e-6
        Ridge added to each covariance as a multiple of its mean variance.
    threshold : float or None, default=None
        Minimum log discriminant for assignment; lower-scoring pixels are
        predicted as 0 (unclassified).

    Attributes
    ----------
    classes_ : ndarray of shape (n_classes,)
    model_set_ : ClassModelSet
    """

    def __init__(self, priors="uniform", regularization=DEFAULT_REGULARIZATION,
                 threshold=None):
        self.priors = priors
        self.regularization = regularization
        self.threshold = threshold

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        check_classification_targets(y)
        self.model_set_ = fit_models(X, y, self.priors, self.regularization, self.threshold)
        self.classes_ = self.model_set_.class_ids
        self.n_features_in_ = X.shape[1]
        return self

    @classmethod
    def from_model_set(cls, model_set, regularization=DEFAULT_REGULARIZATION):
        est = cls(regularization=regularization, threshold=model_set.threshold)
        est.model_set_ = model_set
        est.classes_ = model_set.class_ids
        est.n_features_in_ = model_set.band_count
        return est

    def decision_function(self, X):
        check_is_fitted(self, "model_set_")
        return discriminants(self.model_set_, check_array(X, dtype=np.float64))

    def predict_proba(self, X):
        return posteriors_from(self.decision_function(X))

    def predict(self, X):
        return decide(self.model_set_, self.decision_function(X))
