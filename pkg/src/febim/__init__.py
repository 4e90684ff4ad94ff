"""Behavioral simulator for a crossbar-based in-memory Bayesian inference engine."""

__version__ = "0.1.0"

from .data import Dataset, SplitSpec, load_csv, load_dataset, split  # noqa: E402
from .gnbc import GnbcParams, predict_float, train  # noqa: E402
from .mapping import MappedModel, QuantSpec, map_model  # noqa: E402
from .crossbar import CrossbarImage, DeviceModel, infer, program  # noqa: E402
from .experiments import ExperimentConfig, SweepReport, quant_sweep, variation_sweep  # noqa: E402
