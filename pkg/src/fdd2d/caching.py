"""Zipf request model, disjoint rank-ordered cache placement and HD/FD
collaboration probabilities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParameterError

# Above this many partners the explicit binomial sum switches to log-space terms.
_DIRECT_SUM_MAX_N = 60


@dataclass(frozen=True)
class ZipfModel:
    """Rank-based popularity law over a library of ``m`` contents."""

    m: int
    gamma_r: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise InvalidParameterError(f"library size m must be a positive integer, got {self.m!r}")
        if not self.gamma_r >= 0:
            raise InvalidParameterError(f"Zipf exponent must be >= 0, got {self.gamma_r!r}")


@dataclass(frozen=True)
class CachingProfile:
    n_users: int
    per_user_mass: np.ndarray = field(repr=False)
    f_hit: float
    cache_size: int


@dataclass(frozen=True)
class CollaborationProbabilities:
    p_hd: float
    p_fd: float

    def __post_init__(self):
        for name in ("p_hd", "p_fd"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidParameterError(f"{name} must lie in [0, 1], got {value!r}")

    def for_mode(self, mode) -> float:
        """Collaboration probability of ``mode`` (a :class:`DuplexMode` or 'hd'/'fd')."""
        key = getattr(mode, "value", mode)
        if key == "hd":
            return self.p_hd
        if key == "fd":
            return self.p_fd
        raise InvalidParameterError(f"unknown duplex mode {mode!r}")


def _zipf_weights(model: ZipfModel) -> np.ndarray:
    ranks = np.arange(1, int(model.m) + 1, dtype=np.float64)
    return ranks ** (-float(model.gamma_r))


def zipf_pmf(model: ZipfModel) -> np.ndarray:
    """Request probability of each content, indexed by rank - 1."""
    if model.m < 1:
        raise InvalidParameterError("library size must be >= 1")
    weights = _zipf_weights(model)
    return weights / math.fsum(weights)


def build_caching_profile(model: ZipfModel, cache_size: int, n_users: int) -> CachingProfile:
    """Place contents so that user ``i`` holds ranks ``(i-1)*X+1 .. i*X``.

    Caches are disjoint; users past the end of the library hold nothing.
    The hit probability is the library mass covered by the first
    ``min(n_users * cache_size, m)`` ranks, so it is exactly 1 once the
    library is fully covered.
    """
    if int(cache_size) != cache_size or cache_size < 1:
        raise InvalidParameterError(f"cache size must be a positive integer, got {cache_size!r}")
    if cache_size > model.m:
        raise InvalidParameterError(f"cache size {cache_size} exceeds library size {model.m}")
    if int(n_users) != n_users or n_users < 1:
        raise InvalidParameterError(f"number of users must be a positive integer, got {n_users!r}")
    cache_size = int(cache_size)
    n_users = int(n_users)

    pmf = zipf_pmf(model)
    covered_users = min(n_users, -(-model.m // cache_size))
    # Equal-length blocks summed the same way keep f(i) exactly non-increasing.
    starts = np.arange(covered_users) * cache_size
    masses = np.zeros(n_users)
    covered_ranks = min(n_users * cache_size, model.m)
    masses[:covered_users] = np.minimum(np.add.reduceat(pmf[:covered_ranks], starts), 1.0)

    weights = _zipf_weights(model)
    f_hit = math.fsum(weights[:covered_ranks]) / math.fsum(weights)
    return CachingProfile(n_users=n_users, per_user_mass=masses, f_hit=f_hit, cache_size=cache_size)


def expected_demanders(mu: float, lam: float, radius: float) -> int:
    """Expected number of requesting users in a disc, rounded up.

    Products that land within float noise of an integer are snapped to it
    so that e.g. ``mu=1, lam=1/pi, radius=1`` gives 1 rather than 2.
    """
    if not 0.0 <= mu <= 1.0:
        raise InvalidParameterError(f"mu must lie in [0, 1], got {mu!r}")
    if not lam >= 0.0:
        raise InvalidParameterError(f"density must be >= 0, got {lam!r}")
    if not radius > 0.0:
        raise InvalidParameterError(f"radius must be > 0, got {radius!r}")
    mean = mu * lam * math.pi * radius**2
    nearest = round(mean)
    if abs(mean - nearest) <= 1e-9 * max(1.0, mean):
        return int(nearest)
    return int(math.ceil(mean))


def _serve_probability(mass, n_users: int):
    # P(Binomial(N-1, f) >= 1) = 1 - (1-f)^(N-1)
    if n_users <= 1:
        return np.zeros_like(np.asarray(mass, dtype=float))[()]
    mass = np.asarray(mass, dtype=float)
    with np.errstate(divide="ignore"):
        return -np.expm1((n_users - 1) * np.log1p(-mass))


def lambda_serve(i: int, profile: CachingProfile) -> float:
    """Probability that user ``i`` (1-based) is asked for at least one of its
    cached contents by the other ``N - 1`` users."""
    if not 1 <= i <= profile.n_users:
        raise InvalidParameterError(f"user index {i} outside 1..{profile.n_users}")
    return float(_serve_probability(profile.per_user_mass[i - 1], profile.n_users))


def lambda_serve_explicit(mass: float, n_users: int) -> float:
    """Term-by-term binomial sum ``sum_{n=1}^{N-1} C(N-1,n) f^n (1-f)^(N-1-n)``.

    Kept as an independent check on :func:`lambda_serve`; uses log-space
    terms when ``N - 1`` is large enough for the binomial coefficients to
    overflow.
    """
    trials = n_users - 1
    if trials <= 0:
        return 0.0
    if trials <= _DIRECT_SUM_MAX_N:
        return math.fsum(
            math.comb(trials, n) * mass**n * (1.0 - mass) ** (trials - n)
            for n in range(1, trials + 1)
        )
    if mass == 0.0:
        return 0.0
    if mass == 1.0:
        return 1.0
    log_p, log_q = math.log(mass), math.log1p(-mass)
    log_norm = math.lgamma(trials + 1)
    return math.fsum(
        math.exp(log_norm - math.lgamma(n + 1) - math.lgamma(trials - n + 1) + n * log_p + (trials - n) * log_q)
        for n in range(1, trials + 1)
    )


def collaboration_probabilities(profile: CachingProfile) -> CollaborationProbabilities:
    masses = profile.per_user_mass
    serve = _serve_probability(masses, profile.n_users)
    # Probability that the user's own request is held by someone else.
    served_elsewhere = np.clip(profile.f_hit - masses, 0.0, 1.0)
    weight = serve * masses
    p_fd = math.fsum(served_elsewhere * weight)
    p_hd = math.fsum((1.0 - served_elsewhere) * weight)
    return CollaborationProbabilities(p_hd=min(p_hd, 1.0), p_fd=min(p_fd, 1.0))


def collaboration_at_density(
    model: ZipfModel, cache_size: int, mu: float, lam: float, radius: float
) -> tuple[CachingProfile | None, CollaborationProbabilities]:
    """Collaboration probabilities with ``N`` taken from the user density.

    Returns ``(None, zeros)`` when no user is expected to make a request.
    """
    n_users = expected_demanders(mu, lam, radius)
    if n_users == 0:
        return None, CollaborationProbabilities(0.0, 0.0)
    profile = build_caching_profile(model, cache_size, n_users)
    return profile, collaboration_probabilities(profile)
