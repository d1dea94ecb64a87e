"""Susceptibility statistics of a spin coupled to a chaotic bath."""

import io
import json

from ._core import (
    ConfigError,
    DistributionModel,
    InvalidArgument,
    NumericalError,
    __version__,
    cat_entropy,
    czz_infinite,
    default_tail_count,
    delta_s,
    ee_moments,
    estimate_log_chi_star,
    experiment_names,
    f_od_cdf,
    f_od_pdf,
    perturbative_entropy,
)
from ._core import run_experiment as _run_experiment


def run(experiment, config="", workers=1):
    """Run an experiment and return (csv text, manifest dict)."""
    out = _run_experiment(experiment, config, workers)
    return out["csv"], json.loads(out["manifest"])


def run_frame(experiment, config="", workers=1):
    """Run an experiment and return (pandas DataFrame, manifest dict)."""
    import pandas as pd

    csv, manifest = run(experiment, config, workers)
    return pd.read_csv(io.StringIO(csv)), manifest


__all__ = [
    "ConfigError",
    "DistributionModel",
    "InvalidArgument",
    "NumericalError",
    "__version__",
    "cat_entropy",
    "czz_infinite",
    "default_tail_count",
    "delta_s",
    "ee_moments",
    "estimate_log_chi_star",
    "experiment_names",
    "f_od_cdf",
    "f_od_pdf",
    "perturbative_entropy",
    "run",
    "run_frame",
]
