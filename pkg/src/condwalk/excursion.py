"""Reference densities of killed Brownian motion and the normalized excursion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericError

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
EXCURSION_PREFACTOR = 2.0 * math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class ExcursionSettings:
    atol: float = 1e-9
    cutoff_sd: float = 12.0


DEFAULT_SETTINGS = ExcursionSettings()


def r_kernel(u: float, v: float) -> float:
    """sqrt(2/pi) sinh(uv) exp(-(u^2 + v^2)/2), evaluated without overflow.

    Uses sinh(uv) e^{-(u^2+v^2)/2} = -expm1(-2uv) e^{-(u-v)^2/2} / 2.
    """
    if u < 0 or v < 0:
        raise DomainError(f"r(u, v) needs u, v >= 0; got ({u}, {v})")
    return SQRT_2_OVER_PI * 0.5 * -math.expm1(-2.0 * u * v) * math.exp(-0.5 * (u - v) ** 2)


def r0_kernel(v: float) -> float:
    return v * math.exp(-0.5 * v * v) / math.sqrt(2.0 * math.pi)


def q_density(t: float, x: float, y: float) -> float:
    """Transition density of Brownian motion killed at 0."""
    if t <= 0:
        raise DomainError(f"q_t needs t > 0, got {t}")
    s = math.sqrt(t)
    return r_kernel(x / s, y / s) / s


def l_density(t: float, y: float) -> float:
    """Entrance density from 0: (1/t) r0(y / sqrt t)."""
    if t <= 0:
        raise DomainError(f"l_t needs t > 0, got {t}")
    return r0_kernel(y / math.sqrt(t)) / t


def _check_times(times: Sequence[float]) -> None:
    if len(times) == 0:
        raise DomainError("need at least one interior time")
    prev = 0.0
    for t in times:
        if not prev < t < 1.0:
            raise DomainError(f"times must satisfy 0 < t_1 < ... < t_k < 1; got {list(times)}")
        prev = t


def fdd_density(times: Sequence[float], values: Sequence[float]) -> float:
    """Joint density of the normalized excursion at ``times``."""
    _check_times(times)
    if len(values) != len(times):
        raise DomainError("times and values must have equal length")
    if any(x < 0 for x in values):
        return 0.0
    dens = EXCURSION_PREFACTOR * l_density(times[0], values[0])
    for i in range(1, len(times)):
        dens *= q_density(times[i] - times[i - 1], values[i - 1], values[i])
    return dens * l_density(1.0 - times[-1], values[-1])


def marginal_density(t: float, x: float) -> float:
    return fdd_density((t,), (x,))


def cutoff(t: float, settings: ExcursionSettings = DEFAULT_SETTINGS) -> float:
    """Upper integration limit: ``cutoff_sd`` standard deviations of the marginal scale."""
    return settings.cutoff_sd * math.sqrt(min(t, 1.0 - t))


def marginal_cdf(t: float, x: float, settings: ExcursionSettings = DEFAULT_SETTINGS) -> float:
    """P[e_t <= x] by adaptive quadrature of the one-time density."""
    _check_times((t,))
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0:
        return 0.0
    upper = min(x, cutoff(t, settings))
    val, err = integrate.quad(lambda s: marginal_density(t, s), 0.0, upper,
                              epsabs=settings.atol, epsrel=0.0, limit=200)
    if err > settings.atol:
        raise NumericError(f"marginal_cdf({t}, {x}) did not converge", err)
    return min(val, 1.0)


def marginal_cdf_grid(t: float, xs: np.ndarray, settings: ExcursionSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """``marginal_cdf`` on a sorted grid, integrating cell by cell."""
    xs = np.asarray(xs, dtype=float)
    if np.any(np.diff(xs) < 0):
        raise DomainError("grid must be sorted")
    out = np.empty(len(xs))
    acc, prev = 0.0, 0.0
    top = cutoff(t, settings)
    for i, x in enumerate(xs):
        x = max(x, 0.0)
        lo, hi = min(prev, top), min(x, top)
        if hi > lo:
            val, err = integrate.quad(lambda s: marginal_density(t, s), lo, hi,
                                      epsabs=settings.atol / max(len(xs), 1), epsrel=0.0, limit=200)
            acc += val
        out[i] = min(acc, 1.0)
        prev = max(prev, x)
    return out


def density_table(times: Sequence[float], xs: Sequence[float],
                  settings: ExcursionSettings = DEFAULT_SETTINGS) -> list[tuple[float, float, float, float]]:
    """Rows ``(t, x, density, cdf)`` for plotting."""
    rows = []
    xs = sorted(float(x) for x in xs)
    for t in times:
        cdfs = marginal_cdf_grid(t, np.asarray(xs), settings)
        for x, c in zip(xs, cdfs):
            rows.append((float(t), x, marginal_density(t, x), float(c)))
    return rows
