"""Simulation of correlation-based noise radars with Gaussian quadrature models.

The package covers the classical two-mode noise (TMN) and quantum two-mode
squeezed vacuum (TMSV) covariance models, seeded window sampling, phase
preprocessing, five detector statistics, empirical and analytic ROC curves,
correlation fitting and integration gain.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .analytic import (
    AnalyticConfig,
    AnalyticModel,
    NonconvergenceError,
    NumericFailure,
    analytic_pdet,
    analytic_pfa,
    analytic_roc,
    fit_rho,
    threshold_for_pfa,
)
from .bessel import BesselDomainError, log_bessel_i, log_bessel_k
from .detectors import (
    DetectorSeries,
    TooFewSamplesError,
    detector,
    matched_statistic,
    run_experiment,
    sample_covariance,
)
from .preprocess import DegenerateWindowError, estimate_phase, rotate_to_zero_phase
from .roc import (
    RocCurve,
    SimulatedConfig,
    integration_gain,
    pd_at_pfa,
    roc_from_series,
    summarize,
)
from .sampler import NonPsdCovarianceError, WindowSpec, off_covariance, sample_windows
from .signal_model import (
    Covariance4,
    InvalidParamsError,
    PhaseNonzeroError,
    TmnParams,
    TmsvParams,
    entanglement_witness,
    squeezed_variances,
    tmn_covariance,
    tmsv_covariance,
    validate_physical,
)

__all__ = [
    "__version__",
    "analytic_pdet",
    "analytic_pfa",
    "analytic_roc",
    "AnalyticConfig",
    "AnalyticModel",
    "BACKEND",
    "BesselDomainError",
    "Covariance4",
    "DegenerateWindowError",
    "detector",
    "DetectorSeries",
    "entanglement_witness",
    "estimate_phase",
    "fit_rho",
    "integration_gain",
    "InvalidParamsError",
    "log_bessel_i",
    "log_bessel_k",
    "matched_statistic",
    "NonconvergenceError",
    "NonPsdCovarianceError",
    "NumericFailure",
    "off_covariance",
    "pd_at_pfa",
    "PhaseNonzeroError",
    "roc_from_series",
    "RocCurve",
    "rotate_to_zero_phase",
    "run_experiment",
    "sample_covariance",
    "sample_windows",
    "SimulatedConfig",
    "squeezed_variances",
    "summarize",
    "threshold_for_pfa",
    "tmn_covariance",
    "TmnParams",
    "tmsv_covariance",
    "TmsvParams",
    "TooFewSamplesError",
    "validate_physical",
    "WindowSpec",
]
