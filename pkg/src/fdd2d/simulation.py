"""Monte Carlo oracle for the closed forms.

Every trial draws from its own counter-based Philox stream keyed by the
master seed, with the trial index in the counter. A trial is therefore
reproducible on its own, and estimates do not depend on how trials are
scheduled or split across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import DuplexMode, SystemParams, interferer_intensity, sinr_sample_shape
from .caching import CollaborationProbabilities, ZipfModel
from .exceptions import InvalidParameterError

# Independent stream families drawn from one master seed.
_SINR_STREAM = 0
_COLLAB_STREAM = 1
_CHUNK = 4096
_MASK64 = (1 << 64) - 1
MIN_ESTIMATE_TRIALS = 100


def trial_rng(master_seed: int, trial_index: int, stream: int = 0) -> np.random.Generator:
    """Generator for one trial; disjoint from every other (trial, stream)."""
    bit_gen = np.random.Philox(key=int(master_seed) & _MASK64, counter=[0, int(trial_index), int(stream), 0])
    return np.random.Generator(bit_gen)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _sample_radii(rng: np.random.Generator, intensity: float, radius: float) -> np.ndarray:
    count = rng.poisson(intensity * math.pi * radius**2) if intensity > 0 else 0
    # 1 - U lies in (0, 1], so no point sits exactly at the origin.
    return radius * np.sqrt(1.0 - rng.random(count))


def sample_ppp_disc(intensity: float, radius: float, seed=None) -> np.ndarray:
    """Homogeneous PPP on the disc of ``radius`` centred at the origin.

    Returns an ``(n, 2)`` array of Cartesian points. ``seed`` may be an int,
    a SeedSequence or a Generator.
    """
    if intensity < 0:
        raise InvalidParameterError(f"intensity must be >= 0, got {intensity!r}")
    if not radius > 0:
        raise InvalidParameterError(f"radius must be > 0, got {radius!r}")
    rng = _as_rng(seed)
    r = _sample_radii(rng, intensity, radius)
    phi = 2 * math.pi * rng.random(r.size)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float
    trials: int

    @classmethod
    def from_samples(cls, samples) -> "EstimateWithError":
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        std = float(np.std(samples, ddof=1)) if n > 1 else float("nan")
        return cls(value=float(np.mean(samples)), std_error=std / math.sqrt(n), trials=n)

    def z_score(self, expected: float) -> float:
        diff = self.value - expected
        if self.std_error > 0:
            return diff / self.std_error
        return 0.0 if abs(diff) <= 1.0 / self.trials else math.inf


@dataclass(frozen=True)
class SimConfig:
    params: SystemParams
    mode: DuplexMode
    collab: CollaborationProbabilities
    trials: int = 100_000
    master_seed: int = 0
    window_radius: float | None = None
    collab_source: str = "analytic"

    def __post_init__(self):
        object.__setattr__(self, "mode", DuplexMode.parse(self.mode))
        if self.trials < 1:
            raise InvalidParameterError("trials must be >= 1")
        if self.window_radius is not None and not self.window_radius > 0:
            raise InvalidParameterError("window radius must be > 0")
        if self.collab_source not in ("analytic", "empirical"):
            raise InvalidParameterError(f"collab_source must be 'analytic' or 'empirical', got {self.collab_source!r}")

    @property
    def intensity(self) -> float:
        return interferer_intensity(self.params, self.mode, self.collab)

    @property
    def window(self) -> float:
        """Interferer disc radius: the configured one or max(20 R_d, 10 / sqrt(intensity))."""
        if self.window_radius is not None:
            return self.window_radius
        base = 20.0 * self.params.r_d
        if self.intensity > 0:
            base = max(base, 10.0 / math.sqrt(self.intensity))
        return base


@dataclass(frozen=True)
class PppRealization:
    interferer_distances: np.ndarray
    fading_gains: np.ndarray
    typical_fade: float
    sinr: float


def simulate_sinr_trial(config: SimConfig, trial_index: int) -> PppRealization:
    """One independent draw of the interferer field and fading at the typical receiver."""
    rng = trial_rng(config.master_seed, trial_index, _SINR_STREAM)
    distances = _sample_radii(rng, config.intensity, config.window)
    gains = rng.exponential(size=distances.size)
    typical = rng.exponential()
    p = config.params
    interference = p.rho_d * float(np.sum(gains * distances ** (-p.alpha)))
    sinr = sinr_sample_shape(p, config.mode)(typical, interference)
    return PppRealization(distances, gains, float(typical), float(sinr))


def _sinr_chunk(config: SimConfig, start: int, stop: int):
    sinr = np.empty(stop - start)
    counts = np.empty(stop - start, dtype=np.int64)
    for k, trial in enumerate(range(start, stop)):
        real = simulate_sinr_trial(config, trial)
        sinr[k] = real.sinr
        counts[k] = real.interferer_distances.size
    return sinr, counts


@dataclass(frozen=True)
class SinrSamples:
    sinr: np.ndarray
    interferer_counts: np.ndarray


def _chunks(trials):
    return [(start, min(start + _CHUNK, trials)) for start in range(0, trials, _CHUNK)]


def simulate_sinr_samples(config: SimConfig, workers: int = 1) -> SinrSamples:
    """SINR of every trial, in trial order. ``workers > 1`` uses processes."""
    chunks = _chunks(config.trials)
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_sinr_chunk, [config] * len(chunks), *zip(*chunks)))
    else:
        parts = [_sinr_chunk(config, a, b) for a, b in chunks]
    return SinrSamples(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))


def _require_power(trials):
    if trials < MIN_ESTIMATE_TRIALS:
        raise InvalidParameterError(f"estimates need at least {MIN_ESTIMATE_TRIALS} trials, got {trials}")


def estimate_outage(config: SimConfig, samples: SinrSamples | None = None) -> EstimateWithError:
    """Fraction of trials with ``SINR <= theta_d``."""
    _require_power(config.trials)
    if samples is None:
        samples = simulate_sinr_samples(config)
    return EstimateWithError.from_samples(samples.sinr <= config.params.theta_d)


def estimate_spectral_efficiency(config: SimConfig, samples: SinrSamples | None = None) -> EstimateWithError:
    """Sample mean of ``kappa * log2(1 + SINR)``."""
    _require_power(config.trials)
    if samples is None:
        samples = simulate_sinr_samples(config)
    return EstimateWithError.from_samples(config.mode.kappa * np.log2(1.0 + samples.sinr))


def estimate_interferer_intensity(config: SimConfig, samples: SinrSamples | None = None) -> EstimateWithError:
    """Interferers per unit area inside the simulation window."""
    if samples is None:
        samples = simulate_sinr_samples(config)
    return EstimateWithError.from_samples(samples.interferer_counts / (math.pi * config.window**2))


@dataclass(frozen=True)
class TruncationCheck:
    outage_default: float
    outage_extended: float
    std_error: float
    flips: int

    @property
    def passed(self) -> bool:
        return abs(self.outage_extended - self.outage_default) < 0.5 * self.std_error


def truncation_self_test(config: SimConfig, factor: float = 2.0) -> TruncationCheck:
    """Compare outage on the default window against a ``factor`` times larger one.

    Both use the same draws: the field is sampled on the larger disc and
    the default estimate keeps only the points inside the default window,
    which is itself a PPP of the same intensity.
    """
    inner = config.window
    outer = factor * inner
    p = config.params
    shape = sinr_sample_shape(p, config.mode)
    base = np.empty(config.trials, dtype=bool)
    extended = np.empty(config.trials, dtype=bool)
    for trial in range(config.trials):
        rng = trial_rng(config.master_seed, trial, _SINR_STREAM)
        distances = _sample_radii(rng, config.intensity, outer)
        gains = rng.exponential(size=distances.size)
        typical = rng.exponential()
        contrib = p.rho_d * gains * distances ** (-p.alpha)
        near = distances <= inner
        base[trial] = shape(typical, float(np.sum(contrib[near]))) <= p.theta_d
        extended[trial] = shape(typical, float(np.sum(contrib))) <= p.theta_d
    est = EstimateWithError.from_samples(base)
    return TruncationCheck(
        outage_default=est.value,
        outage_extended=float(np.mean(extended)),
        std_error=est.std_error,
        flips=int(np.sum(base != extended)),
    )


@dataclass(frozen=True)
class CollaborationEstimate:
    p_hd: EstimateWithError
    p_fd: EstimateWithError


def _collab_chunk(cdf, cache_size, mean_users, n_users, seed, start, stop):
    hd = np.zeros(stop - start)
    fd = np.zeros(stop - start)
    for k, trial in enumerate(range(start, stop)):
        rng = trial_rng(seed, trial, _COLLAB_STREAM)
        n = int(n_users) if n_users is not None else int(rng.poisson(mean_users))
        if n == 0:
            continue
        # Owner (0-based user index) of each user's requested content; owners >= n hold nothing.
        requests = np.searchsorted(cdf, rng.random(n), side="right")
        owners = requests // cache_size
        # The probed user is the one holding a freshly requested content.
        probed = int(np.searchsorted(cdf, rng.random(), side="right")) // cache_size
        if probed >= n:
            continue
        asked = np.count_nonzero(owners == probed) - (owners[probed] == probed)
        if asked == 0:
            continue
        own_owner = owners[probed]
        if own_owner < n and own_owner != probed:
            fd[k] = 1.0
        else:
            hd[k] = 1.0
    return hd, fd


def estimate_collaboration(
    model: ZipfModel,
    cache_size: int,
    mu: float,
    lam: float,
    radius: float,
    trials: int = 100_000,
    seed: int = 0,
    n_users: int | None = None,
    workers: int = 1,
) -> CollaborationEstimate:
    """Empirical HD/FD collaboration probabilities.

    Each trial places ``N ~ Poisson(mu lam pi radius^2)`` requesting users
    (or exactly ``n_users`` when given) with disjoint rank-ordered caches
    and i.i.d. Zipf requests. A user is probed with probability equal to
    its cached popularity: a content is drawn from the Zipf law and its
    holder, if any, is examined. The probed user collaborates if another
    user asks for one of its contents; it is FD if its own request is held
    by a different user and HD otherwise.
    """
    _require_power(trials)
    if cache_size < 1 or cache_size > model.m:
        raise InvalidParameterError("cache size must lie in 1..m")
    if n_users is not None and n_users < 0:
        raise InvalidParameterError("n_users must be >= 0")
    ranks = np.arange(1, model.m + 1, dtype=float)
    weights = ranks ** (-float(model.gamma_r))
    cdf = np.cumsum(weights) / np.sum(weights)
    cdf[-1] = 1.0
    mean_users = mu * lam * math.pi * radius**2
    args = (cdf, int(cache_size), mean_users, n_users, seed)
    chunks = _chunks(trials)
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_collab_chunk, *[[a] * len(chunks) for a in args], *zip(*chunks)))
    else:
        parts = [_collab_chunk(*args, a, b) for a, b in chunks]
    hd = np.concatenate([p[0] for p in parts])
    fd = np.concatenate([p[1] for p in parts])
    return CollaborationEstimate(EstimateWithError.from_samples(hd), EstimateWithError.from_samples(fd))
