"""Before/after comparison: classify the original image and its Weierstrass transform.

Training pixels are sampled once, on the original image, and the same
coordinates are re-read from the transformed image, so the transform is the
only factor that differs between the two branches.  The redundant-band
decision is made once, on the transformed image, and applied to both.
"""

import json
import math
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, SpecclassError
from .evaluation import accuracy_report, area_report, confusion_matrix
from .mlc import DEFAULT_REGULARIZATION, classify_raster, fit_class_models, save_models
from .pca import DEFAULT_THRESHOLD, band_statistics, principal_components, select_bands
from .raster import LabelMask, header_path, read_label_mask, read_raster, write_label_mask
from .sampling import split_train_eval, stratified_sample
from .stats import band_moments
from .weierstrass import DEFAULT_SIGMA, DEFAULT_TRUNCATION, apply_transform, make_kernel


class StageError(SpecclassError):
    """A pipeline stage failed; ``stage`` names it and ``__cause__`` holds the reason."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@contextmanager
def stage(name):
    try:
        yield
    except StageError:
        raise
    except (SpecclassError, ArithmeticError, ValueError, OSError) as exc:
        raise StageError(name, exc) from exc


@dataclass(frozen=True)
class PipelineConfig:
    image: str
    labels: str
    output_dir: str
    sigma: float = DEFAULT_SIGMA
    sigma_y: float | None = None
    rho: float = 0.0
    truncation: float = DEFAULT_TRUNCATION
    boundary: str = "reflect"
    pca_threshold: float = DEFAULT_THRESHOLD
    per_class: int = 500
    train_fraction: float = 0.7
    priors: str = "uniform"
    regularization: float = DEFAULT_REGULARIZATION
    threshold: float | None = None
    seed: int = 42

    def validate(self):
        for p in (header_path(self.image), header_path(self.labels)):
            if not p.exists():
                raise DataError(f"input file not found: {p}")


@dataclass(frozen=True)
class BranchResult:
    classmap: LabelMask
    confusion: object
    accuracy: object
    areas: object


@dataclass(frozen=True)
class PipelineResult:
    config: PipelineConfig
    retained_bands: list
    before: BranchResult
    after: BranchResult

    @property
    def delta_oa(self):
        return self.after.accuracy.overall_accuracy - self.before.accuracy.overall_accuracy

    @property
    def delta_kappa(self):
        kb, ka = self.before.accuracy.kappa, self.after.accuracy.kappa
        return None if kb is None or ka is None else ka - kb

    def summary(self):
        return {
            "seed": self.config.seed,
            "retained_bands": list(self.retained_bands),
            "before": {"overall_accuracy": self.before.accuracy.overall_accuracy,
                       "kappa": self.before.accuracy.kappa},
            "after": {"overall_accuracy": self.after.accuracy.overall_accuracy,
                      "kappa": self.after.accuracy.kappa},
            "delta": {"overall_accuracy": self.delta_oa, "kappa": self.delta_kappa},
        }


def _json_default(obj):
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(_clean(obj), indent=2, default=_json_default) + "\n",
                          encoding="utf-8")


def _branch(raster, truth, eval_mask, train, bands, config):
    models = fit_class_models(train.select_bands(bands), config.priors,
                              config.regularization, config.threshold)
    classmap = classify_raster(raster, models, bands, truth.class_table)
    cm = confusion_matrix(classmap, eval_mask, truth.class_ids)
    return models, BranchResult(classmap, cm, accuracy_report(cm),
                                area_report(classmap, raster.pixel_size))


def _eval_mask(truth, eval_set):
    labels = np.zeros_like(truth.labels)
    labels[eval_set.rows, eval_set.cols] = eval_set.class_ids
    return LabelMask(labels, truth.class_table)


def run_comparison(raster, truth, config):
    """Both branches in memory; returns a :class:`PipelineResult`."""
    with stage("sample"):
        sample = stratified_sample(truth, raster, config.per_class, config.seed)
        train, evaluation = split_train_eval(sample, config.train_fraction, config.seed)
        eval_mask = _eval_mask(truth, evaluation)
    with stage("transform"):
        kernel = make_kernel(config.sigma, config.sigma_y, config.rho, config.truncation)
        smoothed = apply_transform(raster, kernel, config.boundary)
    with stage("pca"):
        stats = band_statistics(smoothed)
        retained, drops = select_bands(stats, config.pca_threshold)
    with stage("classify-before"):
        models_b, before = _branch(raster, truth, eval_mask, train, retained, config)
    with stage("classify-after"):
        models_a, after = _branch(smoothed, truth, eval_mask, train.with_features_from(smoothed),
                                  retained, config)
    result = PipelineResult(config, retained, before, after)
    extras = {"smoothed": smoothed, "stats": stats, "drops": drops, "train": train,
              "evaluation": evaluation, "models_before": models_b, "models_after": models_a,
              "kernel": kernel}
    return result, extras


def run_pipeline(config):
    """Run the full comparison from files and write every report under ``output_dir``."""
    with stage("load"):
        config.validate()
        raster = read_raster(config.image)
        truth, _ = read_label_mask(config.labels)
        if (truth.height, truth.width) != (raster.height, raster.width):
            raise DataError("label mask and image dimensions differ")
    result, extras = run_comparison(raster, truth, config)
    out = Path(config.output_dir)
    with stage("write"):
        out.mkdir(parents=True, exist_ok=True)
        pca = principal_components(extras["stats"])
        write_json(out / "config.json", asdict(config))
        write_json(out / "pca.json", {
            "seed": config.seed,
            **pca.to_dict(),
            "correlation": extras["stats"].correlation.tolist(),
            "retained_bands": result.retained_bands,
            "drops": [d.to_dict() for d in extras["drops"]],
        })
        write_json(out / "moments.json", {
            "seed": config.seed,
            "before": [band_moments(raster, b).to_dict() for b in range(raster.bands)],
            "after": [band_moments(extras["smoothed"], b).to_dict()
                      for b in range(raster.bands)],
        })
        extras["train"].write_csv(out / "train.csv")
        extras["evaluation"].write_csv(out / "eval.csv")
        for name, branch, models in (("before", result.before, extras["models_before"]),
                                     ("after", result.after, extras["models_after"])):
            d = out / name
            d.mkdir(exist_ok=True)
            write_label_mask(branch.classmap, d / "classmap", raster.pixel_size)
            save_models(models, d / "model.json", truth.class_table, result.retained_bands)
            branch.confusion.write_csv(d / "confusion.csv", truth.class_table)
            write_json(d / "report.json", {
                "seed": config.seed,
                "confusion": branch.confusion.to_dict(),
                "accuracy": branch.accuracy.to_dict(),
                "areas": branch.areas.to_dict(),
            })
        write_json(out / "summary.json", result.summary())
    return result
