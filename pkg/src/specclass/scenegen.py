"""Deterministic synthetic multiband scenes with known ground truth.

A scene is a set of classes, each owning image regions and one sample
distribution per band.  Every pixel's band value is an independent draw from
its class's distribution.  Draws come from a single SplitMix64 stream
consumed band by band, row-major within each band (one standard normal per
pixel per band), so a spec and seed fix the output exactly.

Regions are either ``{"type": "rect", "x0", "y0", "x1", "y1"}`` (half-open
pixel bounds) or ``{"type": "seeds", "points": [[x, y], ...]}``.  Seeded
classes split the image by nearest seed point (earlier points win ties);
rectangles are then painted over in class order.  Together they must cover
every pixel.
"""

import json
import math
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .errors import DataError
from .raster import DEFAULT_PIXEL_SIZE, ClassInfo, LabelMask, Raster
from .rng import SplitMix64


@dataclass(frozen=True)
class BandDistribution:
    kind: str
    mu: float
    sigma: float

    def __post_init__(self):
        if self.kind not in ("normal", "lognormal"):
            raise DataError(f"unknown distribution {self.kind!r}")
        if not self.sigma > 0:
            raise DataError(f"distribution sigma must be > 0, got {self.sigma}")

    def mean(self):
        if self.kind == "normal":
            return self.mu
        return math.exp(self.mu + 0.5 * self.sigma ** 2)

    def std(self):
        if self.kind == "normal":
            return self.sigma
        s2 = self.sigma ** 2
        return math.sqrt((math.exp(s2) - 1.0) * math.exp(2.0 * self.mu + s2))

    def from_standard_normal(self, z):
        if self.kind == "normal":
            return self.mu + self.sigma * z
        return np.exp(self.mu + self.sigma * z)


@dataclass(frozen=True)
class ClassSpec:
    class_id: int
    name: str
    bands: tuple
    region: dict
    rgb: tuple = (0, 0, 0)


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    classes: tuple
    band_names: tuple = ()
    noise_floor: float = 0.0
    seed: int = 0
    pixel_size: float = DEFAULT_PIXEL_SIZE

    @property
    def bands(self):
        return len(self.classes[0].bands)

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def validate(self):
        if self.width < 1 or self.height < 1:
            raise DataError("scene dimensions must be positive")
        if not self.classes:
            raise DataError("scene needs at least one class")
        if self.noise_floor < 0:
            raise DataError("noise_floor must be >= 0")
        ids = [c.class_id for c in self.classes]
        if len(set(ids)) != len(ids) or 0 in ids:
            raise DataError("class ids must be unique and nonzero")
        nb = self.bands
        if nb < 1 or any(len(c.bands) != nb for c in self.classes):
            raise DataError("every class needs the same, nonzero number of band distributions")
        if self.band_names and len(self.band_names) != nb:
            raise DataError("band_names length does not match band count")
        for c in self.classes:
            kind = c.region.get("type")
            if kind not in ("rect", "seeds"):
                raise DataError(f"class {c.class_id}: unknown region type {kind!r}")
            if kind == "seeds" and not c.region.get("points"):
                raise DataError(f"class {c.class_id}: seeds region without points")

    @classmethod
    def from_dict(cls, obj):
        try:
            classes = tuple(
                ClassSpec(
                    int(c["class_id"]),
                    str(c.get("name", f"class {c['class_id']}")),
                    tuple(BandDistribution(str(b["dist"]), float(b["mu"]), float(b["sigma"]))
                          for b in c["bands"]),
                    dict(c["region"]),
                    tuple(int(v) for v in c.get("rgb", (0, 0, 0))),
                )
                for c in obj["classes"]
            )
            spec = cls(int(obj["width"]), int(obj["height"]), classes,
                       tuple(obj.get("band_names", ())), float(obj.get("noise_floor", 0.0)),
                       int(obj.get("seed", 0)), float(obj.get("pixel_size_m", DEFAULT_PIXEL_SIZE)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DataError):
                raise
            raise DataError(f"malformed scene spec: {exc}") from exc
        spec.validate()
        return spec


def load_scene_spec(path):
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError as exc:
        raise DataError(f"scene spec not found: {path}") from exc
    except ValueError as exc:
        raise DataError(f"scene spec {path} is not valid JSON: {exc}") from exc
    return SceneSpec.from_dict(obj)


def default_scene_spec():
    """The checked-in 512x512, 4-band, 5-class reference scene."""
    text = resources.files("specclass").joinpath("data/default_scene.json").read_text("utf-8")
    return SceneSpec.from_dict(json.loads(text))


def region_labels(spec):
    """Ground-truth grid implied by the class regions."""
    h, w = spec.height, spec.width
    labels = np.zeros((h, w), dtype=np.uint32)
    seeds = [(c.class_id, p) for c in spec.classes if c.region["type"] == "seeds"
             for p in c.region["points"]]
    if seeds:
        yy, xx = np.mgrid[0:h, 0:w]
        best = np.full((h, w), np.inf)
        for class_id, (px, py) in seeds:
            d = (xx - float(px)) ** 2 + (yy - float(py)) ** 2
            closer = d < best
            labels[closer] = class_id
            best[closer] = d[closer]
    for c in spec.classes:
        if c.region["type"] == "rect":
            r = c.region
            labels[max(int(r["y0"]), 0):int(r["y1"]), max(int(r["x0"]), 0):int(r["x1"])] = c.class_id
    if np.any(labels == 0):
        raise DataError("class regions do not cover the whole image")
    return labels


def generate_scene(spec):
    """Return ``(Raster, LabelMask)`` for ``spec``; float32 samples."""
    spec.validate()
    labels = region_labels(spec)
    flat = labels.ravel()
    rng = SplitMix64(spec.seed)
    n = spec.width * spec.height
    data = np.empty((spec.bands, spec.height, spec.width), dtype=np.float32)
    for b in range(spec.bands):
        z = rng.normal_array(n)
        out = np.empty(n, dtype=np.float64)
        for c in spec.classes:
            sel = flat == c.class_id
            out[sel] = c.bands[b].from_standard_normal(z[sel])
        data[b] = (out + spec.noise_floor).reshape(spec.height, spec.width)
    table = {c.class_id: ClassInfo(c.name, c.rgb) for c in spec.classes}
    return Raster(data, spec.band_names, spec.pixel_size), LabelMask(labels, table)
