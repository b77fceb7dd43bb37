"""Raster and label-mask data model plus the on-disk format.

A raster is stored as two files sharing a stem:

``<stem>.hdr.json``
    UTF-8 JSON header ``{width, height, bands, band_names, pixel_size_m}``.
``<stem>.bsq``
    Raw little-endian float32 samples, band-sequential, row-major within
    each band.  Its size is exactly ``width * height * bands * 4`` bytes.

A label mask is a one-band raster with integral values plus
``<stem>.classes.json`` mapping class id to ``{name, rgb}``.
"""

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError

DEFAULT_PIXEL_SIZE = 2.44
HEADER_SUFFIX = ".hdr.json"
PAYLOAD_SUFFIX = ".bsq"
CLASSES_SUFFIX = ".classes.json"


def _frozen(array):
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Raster:
    """Multiband image, ``data`` shaped ``(bands, height, width)``.

    Samples are kept in whatever float dtype they were built with.  Files
    always hold float32, so only float32-representable rasters survive a
    write/read cycle bit for bit.
    """

    data: np.ndarray
    band_names: tuple = ()
    pixel_size: float = DEFAULT_PIXEL_SIZE

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim == 2:
            data = data[np.newaxis]
        if data.ndim != 3 or data.shape[0] < 1 or data.shape[1] < 1 or data.shape[2] < 1:
            raise DataError(f"raster data must be (bands, height, width), got shape {data.shape}")
        if not np.issubdtype(data.dtype, np.floating):
            data = data.astype(np.float64)
        if not np.all(np.isfinite(data)):
            raise DataError("raster contains non-finite samples")
        if not self.pixel_size > 0:
            raise DataError(f"pixel_size must be > 0, got {self.pixel_size}")
        names = tuple(self.band_names) or tuple(f"band{i + 1}" for i in range(data.shape[0]))
        if len(names) != data.shape[0]:
            raise DataError(f"{len(names)} band names for {data.shape[0]} bands")
        object.__setattr__(self, "data", _frozen(np.array(data, copy=True)))
        object.__setattr__(self, "band_names", names)
        object.__setattr__(self, "pixel_size", float(self.pixel_size))

    @property
    def bands(self):
        return self.data.shape[0]

    @property
    def height(self):
        return self.data.shape[1]

    @property
    def width(self):
        return self.data.shape[2]

    def pixels(self, bands=None):
        """Feature matrix ``(height * width, n_bands)`` in row-major pixel order."""
        data = self.data if bands is None else self.data[list(bands)]
        return data.reshape(data.shape[0], -1).T

    def select_bands(self, bands):
        bands = list(bands)
        return Raster(self.data[bands], tuple(self.band_names[b] for b in bands), self.pixel_size)

    def with_data(self, data):
        return Raster(data, self.band_names, self.pixel_size)


@dataclass(frozen=True)
class ClassInfo:
    name: str
    rgb: tuple = (0, 0, 0)


@dataclass(frozen=True)
class LabelMask:
    """Class-id grid ``labels`` shaped ``(height, width)``; 0 means unlabeled."""

    labels: np.ndarray
    class_table: dict = field(default_factory=dict)

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise DataError(f"labels must be 2-D, got shape {labels.shape}")
        if labels.size and (labels.min() < 0 or not np.issubdtype(labels.dtype, np.integer)):
            raise DataError("labels must be non-negative integers")
        table = {}
        for key, info in dict(self.class_table).items():
            if not isinstance(info, ClassInfo):
                info = ClassInfo(str(info["name"]), tuple(int(c) for c in info.get("rgb", (0, 0, 0))))
            table[int(key)] = info
        if 0 in table:
            raise DataError("class id 0 is reserved for unlabeled pixels")
        present = set(np.unique(labels).tolist()) - {0}
        missing = sorted(present - set(table))
        if missing:
            raise DataError(f"labels {missing} missing from class table")
        object.__setattr__(self, "labels", _frozen(labels.astype(np.uint32)))
        object.__setattr__(self, "class_table", dict(sorted(table.items())))

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]

    @property
    def class_ids(self):
        return list(self.class_table)

    def to_raster(self, pixel_size=DEFAULT_PIXEL_SIZE):
        return Raster(self.labels.astype(np.float32), ("label",), pixel_size)

    def __eq__(self, other):
        if not isinstance(other, LabelMask):
            return NotImplemented
        return self.class_table == other.class_table and np.array_equal(self.labels, other.labels)

    __hash__ = None


def _stem(path):
    path = str(path)
    for suffix in (HEADER_SUFFIX, PAYLOAD_SUFFIX, CLASSES_SUFFIX):
        if path.endswith(suffix):
            return path[: -len(suffix)]
    return path


def header_path(path):
    return Path(_stem(path) + HEADER_SUFFIX)


def payload_path(path):
    return Path(_stem(path) + PAYLOAD_SUFFIX)


def classes_path(path):
    return Path(_stem(path) + CLASSES_SUFFIX)


def _dump_json(obj):
    return json.dumps(obj, indent=2) + "\n"


def read_raster(path):
    """Read a raster from ``<stem>.hdr.json`` and its ``.bsq`` payload."""
    hdr = header_path(path)
    bsq = payload_path(path)
    if not hdr.exists():
        raise DataError(f"raster header not found: {hdr}")
    if not bsq.exists():
        raise DataError(f"raster payload not found: {bsq}")
    try:
        header = json.loads(hdr.read_text(encoding="utf-8"))
        width = int(header["width"])
        height = int(header["height"])
        bands = int(header["bands"])
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(f"corrupt raster header {hdr}: {exc}") from exc
    if width < 1 or height < 1 or bands < 1:
        raise DataError(f"corrupt raster header {hdr}: non-positive dimensions")
    expected = width * height * bands * 4
    actual = bsq.stat().st_size
    if actual != expected:
        raise DataError(
            f"payload {bsq} has {actual} bytes, header {width}x{height}x{bands} needs {expected}"
        )
    data = np.fromfile(bsq, dtype="<f4").reshape(bands, height, width)
    if not np.all(np.isfinite(data)):
        raise DataError(f"payload {bsq} contains non-finite samples")
    return Raster(
        data.astype(np.float32),
        tuple(header.get("band_names") or ()),
        header.get("pixel_size_m", DEFAULT_PIXEL_SIZE),
    )


def write_raster(raster, path):
    """Write ``raster`` as header plus float32 band-sequential payload."""
    data = np.asarray(raster.data)
    if not np.all(np.isfinite(data)):
        raise DataError("refusing to write raster with non-finite samples")
    header = {
        "width": raster.width,
        "height": raster.height,
        "bands": raster.bands,
        "band_names": list(raster.band_names),
        "pixel_size_m": raster.pixel_size,
    }
    hdr = header_path(path)
    if hdr.parent != Path(""):
        os.makedirs(hdr.parent, exist_ok=True)
    payload = np.ascontiguousarray(data, dtype="<f4").tobytes()
    hdr.write_text(_dump_json(header), encoding="utf-8")
    payload_path(path).write_bytes(payload)
    return hdr


def as_label_mask(raster, class_table):
    """Interpret a one-band raster of non-negative integers as a label mask."""
    if raster.bands != 1:
        raise DataError(f"label raster must have 1 band, got {raster.bands}")
    values = np.asarray(raster.data[0], dtype=np.float64)
    if np.any(values < 0):
        raise DataError("label raster contains negative samples")
    rounded = np.rint(values)
    if np.any(rounded != values):
        raise DataError("label raster contains non-integer samples")
    return LabelMask(rounded.astype(np.uint32), class_table)


def class_table_to_json(class_table):
    return {
        str(k): {"name": v.name, "rgb": [int(c) for c in v.rgb]}
        for k, v in sorted(class_table.items())
    }


def class_table_from_json(obj):
    return {int(k): ClassInfo(str(v["name"]), tuple(int(c) for c in v.get("rgb", (0, 0, 0))))
            for k, v in obj.items()}


def read_class_table(path):
    p = classes_path(path)
    if not p.exists():
        raise DataError(f"class table not found: {p}")
    try:
        return class_table_from_json(json.loads(p.read_text(encoding="utf-8")))
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise DataError(f"corrupt class table {p}: {exc}") from exc


def read_label_mask(path):
    raster = read_raster(path)
    return as_label_mask(raster, read_class_table(path)), raster.pixel_size


def write_label_mask(mask, path, pixel_size=DEFAULT_PIXEL_SIZE):
    hdr = write_raster(mask.to_raster(pixel_size), path)
    classes_path(path).write_text(_dump_json(class_table_to_json(mask.class_table)), encoding="utf-8")
    return hdr
