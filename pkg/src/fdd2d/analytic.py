"""Closed-form link metrics of an HD/FD D2D network on a Poisson field.

The interferers of a mode form a thinned PPP of intensity
``mu * P_delta * lambda``; with Rayleigh fading this gives an exponential
Laplace functional, from which outage and spectral efficiency follow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .caching import CollaborationProbabilities
from .exceptions import DivergenceError, InvalidParameterError
from .numerics import QuadratureSpec, cosine_integral, csc, integrate_semi_infinite, sine_integral

LN2 = math.log(2.0)


class DuplexMode(enum.Enum):
    HD = "hd"
    FD = "fd"

    @property
    def indicator(self) -> int:
        """1 when the receiver also transmits (and so sees residual SI)."""
        return 1 if self is DuplexMode.FD else 0

    @property
    def kappa(self) -> int:
        """Number of simultaneous links a collaborating pair carries."""
        return 2 if self is DuplexMode.FD else 1

    @classmethod
    def parse(cls, value) -> "DuplexMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidParameterError(f"unknown duplex mode {value!r}; expected 'hd' or 'fd'") from None


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the typical D2D link. All values linear (SI units)."""

    lam: float
    mu: float
    alpha: float = 4.0
    beta: float = 0.0
    rho_d: float = 0.1
    sigma2: float = 0.0
    theta_d: float = 10.0
    r_d: float = 10.0

    def __post_init__(self):
        if not self.alpha > 2:
            raise DivergenceError(f"interference diverges for path-loss exponent alpha={self.alpha!r} <= 2")
        checks = [
            ("lam", self.lam >= 0),
            ("mu", 0 <= self.mu <= 1),
            ("beta", 0 <= self.beta <= 1),
            ("rho_d", self.rho_d > 0),
            ("sigma2", self.sigma2 >= 0),
            ("theta_d", self.theta_d > 0),
            ("r_d", self.r_d > 0),
        ]
        for name, ok in checks:
            if not ok:
                raise InvalidParameterError(f"{name}={getattr(self, name)!r} is out of range")

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class LinkMetrics:
    outage: float
    spectral_efficiency: float
    laplace_at_s: float | None = None


@dataclass(frozen=True)
class SinrShape:
    """``SINR = signal_scale * h / (noise + I + self_interference)``."""

    signal_scale: float
    noise: float
    self_interference: float

    def __call__(self, typical_fade, interference):
        # An empty field with no noise or SI leaves nothing in the denominator: SINR is unbounded.
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.divide(
                self.signal_scale * np.asarray(typical_fade, dtype=float),
                self.noise + np.asarray(interference, dtype=float) + self.self_interference,
            )[()]


def sinr_sample_shape(params: SystemParams, mode: DuplexMode) -> SinrShape:
    """The SINR composition shared by the closed forms and the simulator."""
    mode = DuplexMode.parse(mode)
    return SinrShape(
        signal_scale=params.rho_d * params.r_d ** (-params.alpha),
        noise=params.sigma2,
        self_interference=mode.indicator * params.beta * params.rho_d,
    )


def interferer_intensity(params: SystemParams, mode: DuplexMode, collab: CollaborationProbabilities) -> float:
    """Density of co-channel transmitters of ``mode`` (per m^2)."""
    return params.mu * collab.for_mode(DuplexMode.parse(mode)) * params.lam


def _laplace_exponent(s, params, mode, collab):
    intensity = interferer_intensity(params, mode, collab)
    a = params.alpha
    return (2 * math.pi**2 / a) * intensity * (np.asarray(s, dtype=float) * params.rho_d) ** (2 / a) * csc(2 * math.pi / a)


def laplace_interference(s, params: SystemParams, mode: DuplexMode, collab: CollaborationProbabilities):
    """``E[exp(-s I)]`` of the aggregate interference; ``s`` may be an array."""
    if np.any(np.asarray(s) < 0):
        raise InvalidParameterError("Laplace argument must be >= 0")
    return np.exp(-_laplace_exponent(s, params, mode, collab))[()]


def laplace_interference_alpha4(s, params: SystemParams, mode: DuplexMode, collab: CollaborationProbabilities):
    """Laplace functional specialised to ``alpha = 4``; ignores ``params.alpha``."""
    intensity = interferer_intensity(params, mode, collab)
    return np.exp(-(math.pi**2 / 2) * intensity * np.sqrt(np.asarray(s, dtype=float) * params.rho_d))[()]


def outage_probability(params: SystemParams, mode: DuplexMode, collab: CollaborationProbabilities) -> float:
    """``P(SINR <= theta_d)`` at the typical receiver."""
    mode = DuplexMode.parse(mode)
    shape = sinr_sample_shape(params, mode)
    s = params.theta_d * params.r_d**params.alpha / params.rho_d
    noise_exponent = s * (shape.noise + shape.self_interference)
    return float(-math.expm1(-(noise_exponent + float(_laplace_exponent(s, params, mode, collab)))))


def success_probability(params: SystemParams, mode: DuplexMode, collab: CollaborationProbabilities) -> float:
    """``J * L(theta R^alpha / rho)``, the complement of the outage."""
    mode = DuplexMode.parse(mode)
    shape = sinr_sample_shape(params, mode)
    s = params.theta_d * params.r_d**params.alpha / params.rho_d
    return math.exp(-s * (shape.noise + shape.self_interference)) * float(laplace_interference(s, params, mode, collab))


def spectral_efficiency(
    params: SystemParams,
    mode: DuplexMode,
    collab: CollaborationProbabilities,
    quad: QuadratureSpec | None = None,
) -> float:
    """Ergodic rate ``kappa * E[log2(1 + SINR)]`` in bit/s/Hz, by quadrature."""
    mode = DuplexMode.parse(mode)
    shape = sinr_sample_shape(params, mode)
    scale = params.r_d**params.alpha / params.rho_d
    attenuation = (shape.noise + shape.self_interference) * scale
    if attenuation == 0.0 and interferer_intensity(params, mode, collab) == 0.0:
        raise DivergenceError(
            "spectral efficiency is unbounded: noise, residual self-interference and "
            "interferer intensity are all zero"
        )

    def integrand(tau):
        return np.exp(-attenuation * tau - _laplace_exponent(tau * scale, params, mode, collab)) / (1.0 + tau)

    result = integrate_semi_infinite(integrand, quad)
    return mode.kappa / LN2 * result.value


def interference_limited_argument(params: SystemParams, mode: DuplexMode, collab: CollaborationProbabilities) -> float:
    """``T = (pi^2 / 2) mu P_delta lambda R_d^2``, taken positive."""
    return (math.pi**2 / 2) * interferer_intensity(params, mode, collab) * params.r_d**2


def closed_form_se_interference_limited(
    params: SystemParams, mode: DuplexMode, collab: CollaborationProbabilities
) -> float:
    """Spectral efficiency for ``sigma2 = 0``, ``alpha = 4`` and no residual SI.

    An HD receiver never sees SI, so for HD only ``sigma2`` and ``alpha``
    are constrained.
    """
    mode = DuplexMode.parse(mode)
    if params.sigma2 != 0 or params.alpha != 4 or mode.indicator * params.beta != 0:
        raise InvalidParameterError(
            "closed form needs sigma2=0, alpha=4 and beta=0 (FD); "
            f"got sigma2={params.sigma2}, alpha={params.alpha}, beta={params.beta}, mode={mode.value}"
        )
    t = interference_limited_argument(params, mode, collab)
    if t == 0.0:
        raise DivergenceError("spectral efficiency is unbounded without interference, noise or SI")
    bracket = (math.pi - 2 * sine_integral(t)) * math.sin(t) - 2 * cosine_integral(t) * math.cos(t)
    return mode.kappa / LN2 * bracket


def closed_form_applies(params: SystemParams, mode: DuplexMode) -> bool:
    mode = DuplexMode.parse(mode)
    return params.sigma2 == 0 and params.alpha == 4 and mode.indicator * params.beta == 0


def link_metrics(
    params: SystemParams,
    mode: DuplexMode,
    collab: CollaborationProbabilities,
    quad: QuadratureSpec | None = None,
    s: float | None = None,
) -> LinkMetrics:
    return LinkMetrics(
        outage=outage_probability(params, mode, collab),
        spectral_efficiency=spectral_efficiency(params, mode, collab, quad),
        laplace_at_s=None if s is None else float(laplace_interference(s, params, mode, collab)),
    )
