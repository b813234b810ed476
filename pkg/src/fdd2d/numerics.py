"""Special functions and semi-infinite quadrature used by the closed forms."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import ConvergenceError, InvalidParameterError, PoleError

EULER_GAMMA = 0.57721566490153286061

# Below this argument Si/ci use their Maclaurin series, above it the
# auxiliary functions from the continued fraction of E1(ix).
SERIES_CUTOFF = 4.0

_EPS = np.finfo(float).eps


def csc(x: float) -> float:
    """Cosecant. Raises :class:`PoleError` at integer multiples of pi."""
    turns = x / math.pi
    if abs(turns - round(turns)) <= 4 * _EPS * max(1.0, abs(turns)):
        raise PoleError(f"csc has a pole at x={x!r}")
    return 1.0 / math.sin(x)


def _si_series(x):
    # sum_k (-1)^k x^(2k+1) / ((2k+1) (2k+1)!)
    x2 = x * x
    term = x
    total = x
    k = 0
    while True:
        k += 1
        term *= -x2 / ((2 * k) * (2 * k + 1))
        contrib = term / (2 * k + 1)
        total += contrib
        if abs(contrib) <= _EPS * abs(total):
            return total


def _ci_series(x):
    # gamma + ln x + sum_{k>=1} (-1)^k x^(2k) / (2k (2k)!)
    x2 = x * x
    term = 1.0
    total = 0.0
    k = 0
    while True:
        k += 1
        term *= -x2 / ((2 * k - 1) * (2 * k))
        contrib = term / (2 * k)
        total += contrib
        if abs(contrib) <= _EPS * max(abs(total), 1e-300):
            return EULER_GAMMA + math.log(x) + total


def auxiliary_fg(x: float) -> tuple[float, float]:
    """Auxiliary functions ``f(x), g(x)`` of the sine/cosine integrals.

    Uses ``exp(ix) E1(ix) = g(x) - i f(x)`` with the continued fraction of
    E1 evaluated by the modified Lentz method. Accurate to a few ulps for
    ``x >= 2``; slower to converge below that.
    """
    if not x > 0:
        raise InvalidParameterError(f"auxiliary functions need x > 0, got {x!r}")
    tiny = 1e-300
    b = complex(1.0, x)
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 100_000):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta.real - 1.0) + abs(delta.imag) < _EPS:
            break
    else:  # pragma: no cover - unreachable for x >= 2
        raise ConvergenceError("E1 continued fraction did not converge", h, float("nan"))
    return -h.imag, h.real


def sine_integral(x: float) -> float:
    """``Si(x)`` for ``x >= 0``."""
    if x < 0 or math.isnan(x):
        raise InvalidParameterError(f"sine integral is defined here for x >= 0, got {x!r}")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return math.pi / 2
    if x <= SERIES_CUTOFF:
        return _si_series(x)
    f, g = auxiliary_fg(x)
    return math.pi / 2 - f * math.cos(x) - g * math.sin(x)


def cosine_integral(x: float) -> float:
    """``ci(x) = -int_x^inf cos(t)/t dt`` for ``x > 0``."""
    if not x > 0:
        raise InvalidParameterError(f"cosine integral needs x > 0, got {x!r}")
    if math.isinf(x):
        return 0.0
    if x <= SERIES_CUTOFF:
        return _ci_series(x)
    f, g = auxiliary_fg(x)
    return f * math.sin(x) - g * math.cos(x)


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InvalidParameterError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise InvalidParameterError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    intervals: int


# 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded
# 7-point Gauss rule.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes (x_gk[1], x_gk[3], ...).
_GAUSS_W = np.zeros(15)
_GAUSS_W[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _evaluate(f, x):
    try:
        y = np.asarray(f(x), dtype=float)
        if y.shape == x.shape:
            return y
    except TypeError:
        pass
    return np.array([float(f(v)) for v in x])


def _gauss_kronrod(g, a, b):
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    y = _evaluate(g, center + half * _NODES)
    if not np.all(np.isfinite(y)):
        raise InvalidParameterError("integrand is not finite on the integration range")
    kronrod = half * np.dot(_KRONROD_W, y)
    gauss = half * np.dot(_GAUSS_W, y)
    # QUADPACK error heuristic (qk15).
    mean = 0.5 * kronrod / half if half else 0.0
    resasc = abs(half) * np.dot(_KRONROD_W, np.abs(y - mean))
    resabs = abs(half) * np.dot(_KRONROD_W, np.abs(y))
    err = abs(kronrod - gauss)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > np.finfo(float).tiny / (50 * _EPS):
        err = max(50 * _EPS * resabs, err)
    return float(kronrod), float(err)


def integrate_interval(f: Callable, a: float, b: float, spec: QuadratureSpec | None = None) -> QuadratureResult:
    """Globally adaptive 15-point Gauss-Kronrod quadrature of ``f`` on ``[a, b]``.

    ``f`` should accept a NumPy array of abscissae; scalar-only callables
    are evaluated point by point.
    """
    spec = spec or QuadratureSpec()
    value, err = _gauss_kronrod(f, a, b)
    heap = [(-err, a, b, value)]
    total, total_err = value, err
    intervals = 1
    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if intervals >= spec.max_subdivisions:
            raise ConvergenceError(
                f"quadrature did not converge within {spec.max_subdivisions} subdivisions "
                f"(estimate {total!r}, error {total_err!r})",
                total,
                total_err,
            )
        neg_err, lo, hi, part = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise ConvergenceError("interval too small to bisect further", total, total_err)
        left, left_err = _gauss_kronrod(f, lo, mid)
        right, right_err = _gauss_kronrod(f, mid, hi)
        heapq.heappush(heap, (-left_err, lo, mid, left))
        heapq.heappush(heap, (-right_err, mid, hi, right))
        intervals += 1
        # Re-sum from scratch: cheap, and avoids drift from repeated updates.
        total = math.fsum(item[3] for item in heap)
        total_err = math.fsum(-item[0] for item in heap)
    return QuadratureResult(value=total, error=total_err, intervals=intervals)


def integrate_semi_infinite(f: Callable, spec: QuadratureSpec | None = None) -> QuadratureResult:
    """Integrate ``f`` over ``[0, inf)``.

    Maps ``tau = t / (1 - t)`` onto ``[0, 1)`` and integrates adaptively;
    the endpoint ``t = 1`` is never evaluated. ``f`` must be finite on
    ``[0, inf)``.
    """

    def mapped(t):
        s = 1.0 - t
        return f(t / s) / (s * s)

    return integrate_interval(mapped, 0.0, 1.0, spec)
