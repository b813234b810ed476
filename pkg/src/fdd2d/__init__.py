"""Stochastic-geometry analysis of inband full-duplex D2D video distribution."""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    DuplexMode,
    LinkMetrics,
    SystemParams,
    closed_form_se_interference_limited,
    interferer_intensity,
    laplace_interference,
    link_metrics,
    outage_probability,
    sinr_sample_shape,
    spectral_efficiency,
)
from .caching import (  # noqa: E402
    CachingProfile,
    CollaborationProbabilities,
    ZipfModel,
    build_caching_profile,
    collaboration_at_density,
    collaboration_probabilities,
    expected_demanders,
    lambda_serve,
    zipf_pmf,
)
from .exceptions import ConvergenceError, DivergenceError, InvalidParameterError, PoleError  # noqa: E402
from .numerics import QuadratureSpec, cosine_integral, csc, integrate_semi_infinite, sine_integral  # noqa: E402

__all__ = [
    "CachingProfile", "CollaborationProbabilities", "ConvergenceError", "DivergenceError", "DuplexMode",
    "InvalidParameterError", "LinkMetrics", "PoleError", "QuadratureSpec", "SystemParams", "ZipfModel",
    "build_caching_profile", "closed_form_se_interference_limited", "collaboration_at_density",
    "collaboration_probabilities", "cosine_integral", "csc", "expected_demanders", "integrate_semi_infinite",
    "interferer_intensity", "lambda_serve", "laplace_interference", "link_metrics", "outage_probability",
    "sine_integral", "sinr_sample_shape", "spectral_efficiency", "zipf_pmf",
]
