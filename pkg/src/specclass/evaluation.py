"""Accuracy assessment: confusion (error) matrix, overall/producer/user accuracy,
kappa coefficient and per-class area tables."""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts shaped ``(C + 1, C)``.

    Rows ``0..C-1`` are predicted classes in ``class_ids`` order and row ``C``
    is the unclassified row; columns are ground-truth classes.
    """

    class_ids: tuple
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        c = len(self.class_ids)
        if counts.shape != (c + 1, c):
            raise DataError(f"counts shape {counts.shape} does not match {c} classes")
        if np.any(counts < 0):
            raise DataError("confusion counts must be non-negative")
        object.__setattr__(self, "class_ids", tuple(int(k) for k in self.class_ids))
        object.__setattr__(self, "counts", counts)

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def unclassified(self):
        return self.counts[-1]

    @property
    def square(self):
        return self.counts[:-1]

    def to_dict(self):
        return {"class_ids": list(self.class_ids), "counts": self.counts.tolist(),
                "total": self.total}

    def write_csv(self, path, class_table=None):
        def name(k):
            return class_table[k].name if class_table and k in class_table else str(k)

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["predicted\\truth", *(name(k) for k in self.class_ids)])
            for k, row in zip(self.class_ids, self.square):
                writer.writerow([name(k), *row.tolist()])
            writer.writerow(["unclassified", *self.unclassified.tolist()])


@dataclass(frozen=True)
class AccuracyReport:
    """Full-precision accuracy figures; ``None`` marks an undefined quantity."""

    class_ids: tuple
    overall_accuracy: float
    kappa: float | None
    producer_accuracy: tuple
    user_accuracy: tuple
    correct: int
    total: int

    def to_dict(self):
        return {
            "overall_accuracy": self.overall_accuracy,
            "kappa": self.kappa,
            "correct": self.correct,
            "total": self.total,
            "producer_accuracy": {str(k): v for k, v in zip(self.class_ids, self.producer_accuracy)},
            "user_accuracy": {str(k): v for k, v in zip(self.class_ids, self.user_accuracy)},
        }


@dataclass(frozen=True)
class AreaEntry:
    class_id: int
    name: str
    pixels: int
    percent: float
    area_m2: float


@dataclass(frozen=True)
class AreaReport:
    entries: tuple
    pixel_size: float

    def __getitem__(self, class_id):
        for e in self.entries:
            if e.class_id == class_id:
                return e
        raise KeyError(class_id)

    def largest(self, include_unclassified=False):
        pool = [e for e in self.entries if include_unclassified or e.class_id != 0]
        return max(pool, key=lambda e: (e.pixels, -e.class_id))

    def to_dict(self):
        return {
            "pixel_size_m": self.pixel_size,
            "classes": [
                {"class_id": e.class_id, "name": e.name, "pixels": e.pixels,
                 "percent": e.percent, "area_m2": e.area_m2}
                for e in self.entries
            ],
        }


def confusion_matrix(predicted, truth, class_ids=None):
    """Tally (predicted, truth) over pixels where ``truth`` is nonzero.

    ``class_ids`` defaults to the union of both class tables and every
    nonzero label seen at evaluated pixels.
    """
    if predicted.labels.shape != truth.labels.shape:
        raise DataError(f"predicted {predicted.labels.shape} and truth "
                        f"{truth.labels.shape} dimensions differ")
    t = truth.labels.ravel().astype(np.int64)
    p = predicted.labels.ravel().astype(np.int64)
    keep = t != 0
    if not keep.any():
        raise DataError("truth mask has no labeled pixels")
    t, p = t[keep], p[keep]
    if class_ids is None:
        ids = set(truth.class_table) | set(predicted.class_table)
        ids |= set(np.unique(t).tolist()) | set(np.unique(p).tolist())
        class_ids = sorted(ids - {0})
    class_ids = [int(k) for k in class_ids]
    c = len(class_ids)
    order = np.argsort(class_ids, kind="stable")
    sorted_ids = np.asarray(class_ids, dtype=np.int64)[order]

    def index_of(values):
        pos = np.clip(np.searchsorted(sorted_ids, values), 0, max(c - 1, 0))
        hit = sorted_ids[pos] == values if c else np.zeros(len(values), bool)
        return np.where(hit, order[pos] if c else 0, c)

    ti = index_of(t)
    pi = index_of(p)
    if np.any(ti == c):
        raise DataError(f"truth labels {sorted(set(t[ti == c].tolist()))} not in class_ids")
    if np.any(p[pi == c] != 0):
        raise DataError(f"predicted labels {sorted(set(p[(pi == c) & (p != 0)].tolist()))} "
                        "not in class_ids")
    counts = np.zeros((c + 1, c), dtype=np.int64)
    np.add.at(counts, (pi, ti), 1)
    return ConfusionMatrix(tuple(class_ids), counts)


def accuracy_report(cm):
    """Overall accuracy, kappa, producer (column) and user (row) accuracy.

    Expected agreement ``p_e`` sums ``row_k * col_k / total**2`` over class
    rows only; unclassified predictions enlarge the total without ever
    matching a column.
    """
    total = cm.total
    if total == 0:
        raise DataError("confusion matrix is empty")
    counts = cm.counts.astype(np.float64)
    diag = np.diag(counts[:-1])
    correct = int(np.trace(cm.counts[:-1]))
    p_o = correct / total
    row = counts[:-1].sum(axis=1)
    col = counts.sum(axis=0)
    p_e = float(np.sum(row * col)) / (float(total) * float(total))
    kappa = None if p_e == 1.0 else (p_o - p_e) / (1.0 - p_e)
    producer = tuple(float(d / s) if s > 0 else None for d, s in zip(diag, col))
    user = tuple(float(d / s) if s > 0 else None for d, s in zip(diag, row))
    return AccuracyReport(cm.class_ids, p_o, kappa, producer, user, correct, total)


def area_report(classmap, pixel_size):
    """Pixel count, percent of image and area in square metres per label (0 included)."""
    if not pixel_size > 0:
        raise DataError("pixel_size must be > 0")
    labels = classmap.labels.ravel()
    n = labels.size
    ids, counts = np.unique(labels, return_counts=True)
    found = dict(zip(ids.tolist(), counts.tolist()))
    table = classmap.class_table
    entries = []
    for k in sorted({0} | set(table) | set(found)):
        count = int(found.get(k, 0))
        name = "Unclassified" if k == 0 else table[k].name
        entries.append(AreaEntry(k, name, count, 100.0 * count / n,
                                 count * pixel_size * pixel_size))
    return AreaReport(tuple(entries), float(pixel_size))
