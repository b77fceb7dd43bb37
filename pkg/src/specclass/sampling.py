"""Stratified random selection of training pixels and train/eval splitting.

All randomness comes from one :class:`~specclass.rng.SplitMix64` stream per
call, consumed class by class in ascending class-id order, so a seed fully
determines the selection on every platform.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .rng import SplitMix64


@dataclass(frozen=True)
class TrainingSet:
    """Sampled pixels: coordinates, class ids and feature vectors (one row each)."""

    rows: np.ndarray
    cols: np.ndarray
    class_ids: np.ndarray
    features: np.ndarray
    seed: int = 0
    band_names: tuple = field(default=())

    def __post_init__(self):
        n = len(self.rows)
        if not (len(self.cols) == len(self.class_ids) == len(self.features) == n):
            raise DataError("training set columns have different lengths")
        if n and np.any(np.asarray(self.class_ids) == 0):
            raise DataError("training entries must carry a nonzero class id")
        coords = set(zip(np.asarray(self.rows).tolist(), np.asarray(self.cols).tolist()))
        if len(coords) != n:
            raise DataError("training set contains duplicated pixel coordinates")

    def __len__(self):
        return len(self.rows)

    @property
    def per_class_counts(self):
        ids, counts = np.unique(self.class_ids, return_counts=True)
        return {int(i): int(c) for i, c in zip(ids, counts)}

    @property
    def X(self):
        return np.asarray(self.features, dtype=np.float64)

    @property
    def y(self):
        return np.asarray(self.class_ids)

    def subset(self, index):
        index = np.asarray(index, dtype=np.int64)
        return TrainingSet(self.rows[index], self.cols[index], self.class_ids[index],
                           self.features[index], self.seed, self.band_names)

    def with_features_from(self, raster):
        """Same coordinates, features re-read from ``raster``."""
        feats = raster.data[:, self.rows, self.cols].T.astype(np.float64)
        return TrainingSet(self.rows, self.cols, self.class_ids, feats, self.seed,
                           raster.band_names)

    def select_bands(self, bands):
        bands = list(bands)
        names = tuple(self.band_names[b] for b in bands) if self.band_names else ()
        return TrainingSet(self.rows, self.cols, self.class_ids, self.features[:, bands],
                           self.seed, names)

    def write_csv(self, path):
        names = list(self.band_names) or [f"b{i}" for i in range(self.features.shape[1])]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["row", "col", "class_id", *names])
            for r, c, k, f in zip(self.rows, self.cols, self.class_ids, self.features):
                writer.writerow([int(r), int(c), int(k), *(repr(float(v)) for v in f)])


def read_training_csv(path, seed=0):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:3] != ["row", "col", "class_id"]:
            raise DataError(f"{path}: expected header row,col,class_id,...")
        rows = [[float(v) for v in line] for line in reader if line]
    arr = np.array(rows, dtype=np.float64).reshape(-1, len(header))
    return TrainingSet(arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64),
                       arr[:, 2].astype(np.int64), arr[:, 3:], seed, tuple(header[3:]))


def partial_shuffle(items, k, rng):
    """First ``k`` elements of a Fisher-Yates shuffle of ``items`` (a copy)."""
    items = list(items)
    for i in range(k):
        j = i + rng.bounded(len(items) - i)
        items[i], items[j] = items[j], items[i]
    return items[:k]


def stratified_sample(labels, raster, per_class, seed=0):
    """Draw exactly ``per_class`` pixels without replacement from each class.

    Every class in ``labels.class_table`` is a stratum; its candidate pixels
    are listed in row-major order before the partial Fisher-Yates pass.
    """
    if per_class < 1:
        raise DataError("per_class must be >= 1")
    if (labels.height, labels.width) != (raster.height, raster.width):
        raise DataError("label mask and raster dimensions differ")
    flat = labels.labels.ravel()
    rng = SplitMix64(seed)
    picked = []
    ids = []
    for class_id in labels.class_ids:
        stratum = np.flatnonzero(flat == class_id)
        if len(stratum) < per_class:
            name = labels.class_table[class_id].name
            raise DataError(f"class {class_id} ({name}) has {len(stratum)} labeled pixels, "
                            f"fewer than per_class={per_class}")
        picked.extend(partial_shuffle(stratum.tolist(), per_class, rng))
        ids.extend([class_id] * per_class)
    picked = np.asarray(picked, dtype=np.int64)
    rows, cols = np.divmod(picked, labels.width)
    feats = raster.data[:, rows, cols].T.astype(np.float64)
    return TrainingSet(rows, cols, np.asarray(ids, dtype=np.int64), feats, int(seed),
                       raster.band_names)


def split_train_eval(tset, train_fraction=0.7, seed=0):
    """Per-class random split into disjoint train and evaluation sets.

    Each class with ``n`` entries sends ``round(train_fraction * n)`` (half
    up, clamped to ``[1, n - 1]``) to training.  Both outputs keep the input
    entry order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError("train_fraction must lie in (0, 1)")
    rng = SplitMix64(seed)
    train_idx, eval_idx = [], []
    for class_id, n in sorted(tset.per_class_counts.items()):
        if n < 2:
            raise DataError(f"class {class_id} has {n} entries; need >= 2 to split")
        members = np.flatnonzero(tset.class_ids == class_id).tolist()
        n_train = min(max(math.floor(train_fraction * n + 0.5), 1), n - 1)
        order = partial_shuffle(members, n, rng)
        train_idx.extend(order[:n_train])
        eval_idx.extend(order[n_train:])
    return tset.subset(sorted(train_idx)), tset.subset(sorted(eval_idx))
