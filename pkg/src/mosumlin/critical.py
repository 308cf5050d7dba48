"""Gumbel-type critical values for max_k W and Monte Carlo calibration of log H."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._errors import InputError
from .core import Series, mosum_profile
from .rng import stream

DEFAULT_LOG_H = 0.7284


def gumbel2_cdf(z: float) -> float:
    """P(Gamma_2 <= z) = exp(-2 exp(-z))."""
    return math.exp(-2.0 * math.exp(-z))


def gumbel2_quantile(p: float) -> float:
    if not 0 < p < 1:
        raise InputError(f"probability must lie in (0, 1), got {p}")
    return -math.log(-math.log(p) / 2.0)


@dataclass(frozen=True)
class CriticalValueSpec:
    n: int
    G: int
    alpha: float
    log_h: float
    a_g: float
    b_g: float
    c_n: float


def _scale_constants(n: int, G: int) -> tuple[float, float]:
    if G <= 0 or not n / G > math.e:
        raise InputError(f"need n/G > e for log log(n/G) to be positive; got n={n}, G={G}")
    r = math.log(n / G)
    return math.sqrt(2.0 * r), 2.0 * r + math.log(r)


def critical_value(n: int, G: int, alpha: float = 0.05, log_h: float = DEFAULT_LOG_H) -> CriticalValueSpec:
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    a_g, b0 = _scale_constants(n, G)
    b_g = b0 + log_h
    c_n = (b_g - math.log(-math.log(1.0 - alpha) / 2.0)) / a_g
    if G < n ** (2.0 / 3.0):
        warnings.warn(
            f"G={G} is below n^(2/3)={n ** (2 / 3):.0f}; the Gumbel approximation may be loose",
            stacklevel=2,
        )
    return CriticalValueSpec(n, G, alpha, log_h, a_g, b_g, c_n)


def _lower_median(x: np.ndarray) -> float:
    s = np.sort(x)
    return float(s[(s.size - 1) // 2])


def null_maxima(n: int, G: int, replications: int, seed: int, threads: int | None = None,
                *, known_sigma: bool = True) -> np.ndarray:
    """max_k W for ``replications`` i.i.d. N(0, 1) series, in replication order."""

    def one(r):
        x = stream(seed, r).standard_normal(n)
        prof = mosum_profile(Series.from_values(x), G, sigma=1.0 if known_sigma else None)
        return prof.max()

    if threads == 1:
        return np.array([one(r) for r in range(replications)])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.fromiter(pool.map(one, range(replications)), dtype=float, count=replications)


def calibrate_log_h(n: int, G: int, replications: int = 1000, seed: int = 0,
                    threads: int | None = None) -> float:
    """Estimate log H by matching the median of the normalised null maximum.

    Each replication uses an i.i.d. standard normal series with the variance
    fixed at one, computes ``a_G max_k W - 2 log(n/G) - log log(n/G)`` and the
    (lower) median over replications is compared with the median of Gamma_2.
    """
    if replications < 100:
        raise InputError(f"calibration needs >= 100 replications, got {replications}")
    a_g, b0 = _scale_constants(n, G)
    if not 2 * G < n:
        raise InputError(f"bandwidth G={G} violates 2G < n with n={n}")
    m = a_g * null_maxima(n, G, replications, seed, threads) - b0
    return _lower_median(m) - gumbel2_quantile(0.5)
