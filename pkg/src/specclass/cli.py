"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Reports are JSON on stdout (or ``--output``) at full precision; rounded
human-readable lines go to stderr.
"""

import csv
import json
import math
import sys
from pathlib import Path

import click

from .errors import DataError, NumericError, SpecclassError
from .evaluation import accuracy_report, area_report, confusion_matrix
from .mlc import DEFAULT_REGULARIZATION, classify_raster, fit_class_models, load_models, save_models
from .pca import DEFAULT_THRESHOLD, band_statistics, principal_components, select_bands
from .pipeline import PipelineConfig, StageError, run_pipeline, write_json
from .raster import read_class_table, read_label_mask, read_raster, write_label_mask, write_raster
from .sampling import read_training_csv, split_train_eval, stratified_sample
from .scenegen import default_scene_spec, generate_scene, load_scene_spec
from .stats import KURTOSIS_THRESHOLD, SKEW_THRESHOLD, band_histogram, band_moments
from .weierstrass import BOUNDARY_MODES, DEFAULT_SIGMA, DEFAULT_TRUNCATION, apply_transform, make_kernel

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


def _emit(obj, output):
    if output:
        write_json(output, obj)
    else:
        click.echo(json.dumps(obj, indent=2))


def _parse_bands(text):
    if text is None:
        return None
    try:
        return [int(b) for b in text.split(",") if b.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"expected comma-separated band indices, got {text!r}") from exc


def _fmt_pct(x):
    return "n/a" if x is None else f"{100.0 * x:.2f}%"


def _fmt_kappa(k):
    return "undefined" if k is None else f"{k:.4f}"


def _accuracy_lines(acc):
    return [f"Overall Accuracy = ({acc.correct}/{acc.total}) = {_fmt_pct(acc.overall_accuracy)}",
            f"Kappa Coefficient = {_fmt_kappa(acc.kappa)}"]


output_option = click.option("--output", "-o", type=click.Path(dir_okay=False),
                             help="Write the JSON report here instead of stdout.")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli():
    """Maximum-likelihood classification with Weierstrass (Gaussian) preprocessing."""


@cli.command()
@click.argument("spec")
@click.argument("out_prefix")
@click.option("--seed", type=click.IntRange(min=0), default=None,
              help="Override the seed stored in the scene spec.")
def synth(spec, out_prefix, seed):
    """Generate a synthetic scene from SPEC (a JSON file, or 'default').

    Writes OUT_PREFIX.hdr.json/.bsq and the truth mask OUT_PREFIX_truth.*.
    """
    scene = default_scene_spec() if spec == "default" else load_scene_spec(spec)
    if seed is not None:
        scene = scene.with_seed(seed)
    raster, truth = generate_scene(scene)
    image = write_raster(raster, out_prefix)
    labels = write_label_mask(truth, f"{out_prefix}_truth", raster.pixel_size)
    _emit({"image": str(image), "labels": str(labels), "seed": scene.seed,
           "width": raster.width, "height": raster.height, "bands": raster.bands}, None)


@cli.command()
@click.argument("image")
@click.option("--band", type=int, default=None, help="Single band index (default: all).")
@click.option("--bins", type=click.IntRange(min=1), default=256, show_default=True)
@click.option("--csv-dir", type=click.Path(file_okay=False), default=None,
              help="Also write band<N>_hist.csv (bin_lo, bin_hi, count) files here.")
@output_option
def histogram(image, band, bins, csv_dir, output):
    """Per-band equal-width histograms of IMAGE."""
    raster = read_raster(image)
    bands = range(raster.bands) if band is None else [band]
    hists = [band_histogram(raster, b, bins) for b in bands]
    if csv_dir:
        Path(csv_dir).mkdir(parents=True, exist_ok=True)
        for h in hists:
            with open(Path(csv_dir) / f"band{h.band_index}_hist.csv", "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["bin_lo", "bin_hi", "count"])
                writer.writerows(h.csv_rows())
    _emit({"histograms": [h.to_dict() for h in hists]}, output)


@cli.command()
@click.argument("image")
@click.option("--skew-threshold", type=float, default=SKEW_THRESHOLD, show_default=True)
@click.option("--kurtosis-threshold", type=float, default=KURTOSIS_THRESHOLD, show_default=True)
@output_option
def moments(image, skew_threshold, kurtosis_threshold, output):
    """Mean, variance, skewness, excess kurtosis and a normality verdict per band."""
    raster = read_raster(image)
    reports = []
    for b in range(raster.bands):
        m = band_moments(raster, b, skew_threshold, kurtosis_threshold)
        reports.append({"band": b, "name": raster.band_names[b], **m.to_dict()})
        skew = "n/a" if math.isnan(m.skewness) else f"{m.skewness:.3f}"
        click.echo(f"{raster.band_names[b]}: skewness {skew} -> {m.verdict}", err=True)
    _emit({"bands": reports}, output)


@cli.command()
@click.argument("image")
@click.argument("out")
@click.option("--sigma", type=float, default=DEFAULT_SIGMA, show_default=True,
              help="Gaussian standard deviation in pixels (x axis).")
@click.option("--sigma-y", type=float, default=None, help="Standard deviation along y.")
@click.option("--rho", type=float, default=0.0, show_default=True, help="x/y correlation.")
@click.option("--truncation", type=float, default=DEFAULT_TRUNCATION, show_default=True,
              help="Kernel radius in multiples of sigma.")
@click.option("--boundary", type=click.Choice(BOUNDARY_MODES), default="reflect",
              show_default=True)
def transform(image, out, sigma, sigma_y, rho, truncation, boundary):
    """Apply the Weierstrass (Gaussian) transform to every band of IMAGE."""
    raster = read_raster(image)
    kernel = make_kernel(sigma, sigma_y, rho, truncation)
    path = write_raster(apply_transform(raster, kernel, boundary), out)
    _emit({"output": str(path), "radius": kernel.radius, "sigma_x": kernel.sigma_x,
           "sigma_y": kernel.sigma_y, "rho": kernel.rho, "boundary": boundary}, None)


@cli.command()
@click.argument("image")
@click.option("--threshold", type=float, default=DEFAULT_THRESHOLD, show_default=True,
              help="|correlation| at which a band pair counts as redundant.")
@click.option("--mask", type=click.Path(dir_okay=False), default=None,
              help="Label mask restricting statistics to labeled pixels.")
@output_option
def pca(image, threshold, mask, output):
    """Principal components and redundant-band selection for IMAGE."""
    raster = read_raster(image)
    labels = read_label_mask(mask)[0] if mask else None
    stats = band_statistics(raster, labels)
    result = principal_components(stats)
    retained, drops = select_bands(stats, threshold)
    _emit({
        "eigenvalues": result.eigenvalues.tolist(),
        "eigenvectors": result.eigenvectors.tolist(),
        "variance_explained": result.variance_explained.tolist(),
        "correlation": stats.correlation.tolist(),
        "retained_bands": retained,
        "drops": [d.to_dict() for d in drops],
    }, output)


@cli.command()
@click.argument("labels")
@click.argument("image")
@click.option("--per-class", type=click.IntRange(min=1), default=500, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=42, show_default=True)
@click.option("--train-fraction", type=float, default=0.7, show_default=True)
@click.option("--out-prefix", default="samples", show_default=True,
              help="Writes <prefix>_train.csv and <prefix>_eval.csv.")
def sample(labels, image, per_class, seed, train_fraction, out_prefix):
    """Stratified random training pixels from LABELS with features from IMAGE."""
    truth, _ = read_label_mask(labels)
    raster = read_raster(image)
    tset = stratified_sample(truth, raster, per_class, seed)
    train, evaluation = split_train_eval(tset, train_fraction, seed)
    train_path, eval_path = f"{out_prefix}_train.csv", f"{out_prefix}_eval.csv"
    train.write_csv(train_path)
    evaluation.write_csv(eval_path)
    _emit({"train": train_path, "eval": eval_path, "seed": seed,
           "train_counts": train.per_class_counts, "eval_counts": evaluation.per_class_counts},
          None)


@cli.command()
@click.argument("train_csv")
@click.argument("model_out")
@click.option("--bands", default=None, help="Comma-separated band indices to use (default: all).")
@click.option("--priors", type=click.Choice(["uniform", "proportional"]), default="uniform",
              show_default=True)
@click.option("--regularization", type=click.FloatRange(min=0), default=DEFAULT_REGULARIZATION,
              show_default=True)
@click.option("--threshold", type=float, default=None,
              help="Minimum log discriminant; lower-scoring pixels become unclassified.")
@click.option("--classes", type=click.Path(dir_okay=False), default=None,
              help="Label mask (or its .classes.json) supplying class names.")
def train(train_csv, model_out, bands, priors, regularization, threshold, classes):
    """Fit per-class Gaussian models from a training CSV."""
    tset = read_training_csv(train_csv)
    subset = _parse_bands(bands)
    if subset is not None:
        tset = tset.select_bands(subset)
    models = fit_class_models(tset, priors, regularization, threshold)
    table = read_class_table(classes) if classes else None
    save_models(models, model_out, table, subset)
    _emit({"model": model_out, "classes": models.class_ids.tolist(),
           "band_count": models.band_count}, None)


@cli.command()
@click.argument("image")
@click.argument("model")
@click.argument("out")
@click.option("--bands", default=None,
              help="Comma-separated band indices (default: the model's recorded subset).")
def classify(image, model, out, bands):
    """Label every pixel of IMAGE with MODEL; writes a class-map raster to OUT."""
    raster = read_raster(image)
    models, table, recorded = load_models(model)
    subset = _parse_bands(bands)
    if subset is None:
        subset = recorded
    classmap = classify_raster(raster, models, subset, table)
    path = write_label_mask(classmap, out, raster.pixel_size)
    areas = area_report(classmap, raster.pixel_size)
    largest = areas.largest()
    click.echo(f"largest class: {largest.name} ({largest.percent:.2f}%)", err=True)
    _emit({"output": str(path), "areas": areas.to_dict()}, None)


@cli.command()
@click.argument("predicted")
@click.argument("truth")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None,
              help="Also write the confusion matrix as CSV.")
@output_option
def evaluate(predicted, truth, csv_path, output):
    """Confusion matrix, accuracies, kappa and class areas of PREDICTED against TRUTH."""
    pred, pixel_size = read_label_mask(predicted)
    ref, _ = read_label_mask(truth)
    cm = confusion_matrix(pred, ref)
    acc = accuracy_report(cm)
    if csv_path:
        cm.write_csv(csv_path, {**pred.class_table, **ref.class_table})
    for line in _accuracy_lines(acc):
        click.echo(line, err=True)
    _emit({"confusion": cm.to_dict(), "accuracy": acc.to_dict(),
           "areas": area_report(pred, pixel_size).to_dict()}, output)


@cli.command()
@click.argument("image")
@click.argument("labels")
@click.argument("output_dir")
@click.option("--sigma", type=float, default=DEFAULT_SIGMA, show_default=True)
@click.option("--sigma-y", type=float, default=None)
@click.option("--rho", type=float, default=0.0, show_default=True)
@click.option("--truncation", type=float, default=DEFAULT_TRUNCATION, show_default=True)
@click.option("--boundary", type=click.Choice(BOUNDARY_MODES), default="reflect",
              show_default=True)
@click.option("--pca-threshold", type=float, default=DEFAULT_THRESHOLD, show_default=True)
@click.option("--per-class", type=click.IntRange(min=1), default=500, show_default=True)
@click.option("--train-fraction", type=float, default=0.7, show_default=True)
@click.option("--priors", type=click.Choice(["uniform", "proportional"]), default="uniform",
              show_default=True)
@click.option("--regularization", type=click.FloatRange(min=0), default=DEFAULT_REGULARIZATION,
              show_default=True)
@click.option("--threshold", type=float, default=None)
@click.option("--seed", type=click.IntRange(min=0), default=42, show_default=True)
def pipeline(image, labels, output_dir, **options):
    """Classify IMAGE before and after the transform and compare against LABELS."""
    config = PipelineConfig(image, labels, output_dir, **options)
    result = run_pipeline(config)
    for name, branch in (("before", result.before), ("after", result.after)):
        click.echo(f"[{name}] " + "; ".join(_accuracy_lines(branch.accuracy)), err=True)
    dk = result.delta_kappa
    click.echo(f"delta OA = {100.0 * result.delta_oa:+.2f} pp, delta kappa = "
               f"{'undefined' if dk is None else f'{dk:+.4f}'}", err=True)
    _emit(result.summary(), None)


def _exit_code(exc):
    if isinstance(exc, StageError):
        exc = exc.cause
    if isinstance(exc, (NumericError, ArithmeticError)):
        return EXIT_NUMERIC
    return EXIT_DATA


def main(argv=None):
    """Entry point; returns the process exit code."""
    try:
        rv = cli.main(args=argv, prog_name="specclass", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    except (SpecclassError, OSError, ValueError, ArithmeticError) as exc:
        click.echo(f"error: {exc}", err=True)
        return _exit_code(exc)
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
