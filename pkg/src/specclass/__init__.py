"""Maximum-likelihood classification of multispectral rasters, with
Weierstrass (Gaussian) preprocessing, band-redundancy analysis, stratified
sampling and confusion-matrix accuracy assessment."""

from .errors import DataError, NumericError, SpecclassError
from .evaluation import (AccuracyReport, AreaReport, ConfusionMatrix, accuracy_report,
                         area_report, confusion_matrix)
from .mlc import (ClassModel, ClassModelSet, ClassScores, MaximumLikelihoodClassifier,
                  classify_pixel, classify_raster, fit_class_models)
from .pca import (BandSelector, BandStatistics, PcaResult, band_statistics,
                  principal_components, select_bands)
from .pipeline import PipelineConfig, run_comparison, run_pipeline
from .raster import (ClassInfo, LabelMask, Raster, as_label_mask, read_label_mask,
                     read_raster, write_label_mask, write_raster)
from .sampling import TrainingSet, split_train_eval, stratified_sample
from .scenegen import SceneSpec, default_scene_spec, generate_scene
from .stats import Histogram, MomentsReport, band_histogram, band_moments
from .weierstrass import (GaussianKernel, WeierstrassTransform, apply_transform,
                          build_kernel_1d, build_kernel_2d)

__version__ = "0.1.0"
