"""Windowed least-squares fits and the MOSUM Wald statistic.

For every ``k = G .. n-G`` the observations on the right window
``{k+1, ..., k+G}`` and the left window ``{k-G+1, ..., k}`` are regressed on
``(1, (i - k) / G)``. All window quantities come from prefix sums, so a full
profile costs O(n) regardless of ``G``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from ._errors import InputError
from .signal import TimeGrid

DEFAULT_CLAMP_FLOOR = 1e-12
SIGMA_DIAG = (8.0, 24.0)


def compensated_cumsum(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Prefix sums with a leading zero, as a (high, low) pair.

    ``high`` is the ordinary float64 running sum; ``low`` accumulates the exact
    rounding error of every addition (TwoSum), so ``high[m] + low[m]`` carries
    roughly twice the working precision.
    """
    x = np.asarray(x, dtype=np.float64)
    hi = np.empty(x.size + 1)
    hi[0] = 0.0
    np.cumsum(x, out=hi[1:])
    prev = hi[:-1]
    cur = hi[1:]
    bp = cur - prev
    err = (prev - (cur - bp)) + (x - bp)
    lo = np.empty_like(hi)
    lo[0] = 0.0
    np.cumsum(err, out=lo[1:])
    return hi, lo


class _Prefix:
    __slots__ = ("hi", "lo")

    def __init__(self, x):
        self.hi, self.lo = compensated_cumsum(x)

    def window(self, a, b):
        """Sum over indices a+1..b (1-based)."""
        return (self.hi[b] - self.hi[a]) + (self.lo[b] - self.lo[a])


@dataclass(frozen=True, eq=False)
class Series:
    values: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise InputError("series values must be one-dimensional")
        if v.size != self.grid.n:
            raise InputError(f"series has {v.size} values but grid.n = {self.grid.n}")
        if not np.all(np.isfinite(v)):
            raise InputError("series contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, values, delta_t: float = 1.0) -> "Series":
        values = np.asarray(values, dtype=np.float64)
        return cls(values, TimeGrid(values.size, delta_t))

    @property
    def n(self) -> int:
        return self.grid.n

    @cached_property
    def _sums(self):
        # Centring keeps the raw-moment variance formula well conditioned.
        n = self.n
        offset = float(np.mean(self.values))
        y = self.values - offset
        u = np.arange(1, n + 1) - (n + 1) / 2.0
        return offset, (n + 1) / 2.0, _Prefix(y), _Prefix(u * y), _Prefix(y * y)


@dataclass(frozen=True)
class WindowFit:
    k: int
    beta_plus: np.ndarray
    beta_minus: np.ndarray
    sigma2_plus: float
    sigma2_minus: float
    sigma2: float
    w: float


def _window_moments(series: Series, a, b, k, G: int):
    """OLS of X on (1, (i-k)/G) over i = a+1..b (b - a == G), vectorised.

    Returns (beta0, beta1, rss).
    """
    offset, centre, p0, p1, p2 = series._sums
    s0 = p0.window(a, b)
    s1 = p1.window(a, b) + (centre - k) * s0
    s2 = p2.window(a, b)
    xbar = ((a + 1 + b) / 2.0 - k) / G
    sxx = (G * G - 1.0) / (12.0 * G)
    sxy = s1 / G - xbar * s0
    beta1 = sxy / sxx
    beta0 = s0 / G - beta1 * xbar + offset
    rss = s2 - s0 * s0 / G - beta1 * beta1 * sxx
    return beta0, beta1, np.maximum(rss, 0.0)


def _check_window(n: int, k: int, G: int, side: str):
    if G < 2:
        raise InputError(f"bandwidth must be >= 2 for a two-parameter fit, got {G}")
    if side == "plus":
        if not (0 <= k and k + G <= n):
            raise InputError(f"right window of k={k}, G={G} leaves 1..{n}")
        return k, k + G
    if side == "minus":
        if not (k - G >= 0 and k <= n):
            raise InputError(f"left window of k={k}, G={G} leaves 1..{n}")
        return k - G, k
    raise InputError(f"side must be 'plus' or 'minus', got {side!r}")


def window_ols(series: Series, k: int, G: int, side: Literal["plus", "minus"]) -> np.ndarray:
    """Least-squares coefficients (intercept, slope) on one window, in O(1)."""
    a, b = _check_window(series.n, k, G, side)
    b0, b1, _ = _window_moments(series, a, b, k, G)
    return np.array([b0, b1])


def local_variance(series: Series, k: int, G: int) -> tuple[float, float, float]:
    """(sigma2_plus, sigma2_minus, sigma2) at ``k``."""
    if G < 3:
        raise InputError(f"local variance needs G >= 3 (divides by G - 2), got {G}")
    if not G <= k <= series.n - G:
        raise InputError(f"k={k} outside {G}..{series.n - G}")
    _, _, rss_p = _window_moments(series, k, k + G, k, G)
    _, _, rss_m = _window_moments(series, k - G, k, k, G)
    sp, sm = rss_p / (G - 2), rss_m / (G - 2)
    return float(sp), float(sm), float((sp + sm) / 2)


def _wald(diff0, diff1, sigma2, G, clamp_floor):
    norm = np.sqrt(diff0 * diff0 / SIGMA_DIAG[0] + diff1 * diff1 / SIGMA_DIAG[1])
    sigma = np.sqrt(np.maximum(sigma2, clamp_floor))
    w = np.sqrt(G) * norm / sigma
    if clamp_floor > 0:
        return np.where((sigma2 <= clamp_floor) & (norm == 0), 0.0, w)
    return w


def mosum_statistic(
    beta_plus, beta_minus, sigma2: float, G: int, clamp_floor: float = DEFAULT_CLAMP_FLOOR
) -> float:
    d = np.asarray(beta_plus, dtype=float) - np.asarray(beta_minus, dtype=float)
    return float(_wald(d[0], d[1], sigma2, G, clamp_floor))


@dataclass(frozen=True, eq=False)
class MosumProfile:
    """All window fits for one bandwidth, stored column-wise.

    Row ``r`` corresponds to ``k = G + r``.
    """

    G: int
    k: np.ndarray
    beta_plus: np.ndarray
    beta_minus: np.ndarray
    sigma2_plus: np.ndarray
    sigma2_minus: np.ndarray
    sigma2: np.ndarray
    w: np.ndarray
    clamp_floor: float = DEFAULT_CLAMP_FLOOR
    n: int = 0

    def __len__(self):
        return self.k.size

    def fit(self, k: int) -> WindowFit:
        r = k - self.G
        if not 0 <= r < len(self):
            raise InputError(f"k={k} outside {self.G}..{self.G + len(self) - 1}")
        return WindowFit(
            k=int(k),
            beta_plus=self.beta_plus[r].copy(),
            beta_minus=self.beta_minus[r].copy(),
            sigma2_plus=float(self.sigma2_plus[r]),
            sigma2_minus=float(self.sigma2_minus[r]),
            sigma2=float(self.sigma2[r]),
            w=float(self.w[r]),
        )

    @property
    def beta_difference(self) -> np.ndarray:
        return self.beta_plus - self.beta_minus

    def max(self) -> float:
        return float(self.w.max())


def check_bandwidth(n: int, G: int) -> None:
    if int(G) != G or G < 3:
        raise InputError(f"bandwidth must be an integer >= 3, got {G}")
    if not 2 * G < n:
        raise InputError(f"bandwidth G={G} violates 2G < n with n={n}")


def mosum_profile(
    series: Series,
    G: int,
    *,
    clamp_floor: float = DEFAULT_CLAMP_FLOOR,
    sigma: float | None = None,
) -> MosumProfile:
    """Compute every window fit and W_k for k = G..n-G.

    Parameters
    ----------
    series : Series
    G : int
        Bandwidth, ``3 <= G`` and ``2G < n``.
    clamp_floor : float
        Lower bound applied to the local variance before dividing.
    sigma : float, optional
        Known noise scale. When given, W uses it in place of the local
        variance estimate (the local estimates are still reported).
    """
    n = series.n
    check_bandwidth(n, G)
    k = np.arange(G, n - G + 1)
    b0p, b1p, rss_p = _window_moments(series, k, k + G, k, G)
    b0m, b1m, rss_m = _window_moments(series, k - G, k, k, G)
    s2p = rss_p / (G - 2)
    s2m = rss_m / (G - 2)
    s2 = 0.5 * (s2p + s2m)
    if sigma is None:
        w = _wald(b0p - b0m, b1p - b1m, s2, G, clamp_floor)
    else:
        if not sigma > 0:
            raise InputError(f"sigma must be positive, got {sigma}")
        w = _wald(b0p - b0m, b1p - b1m, sigma * sigma, G, 0.0)
    return MosumProfile(
        G=int(G),
        k=k,
        beta_plus=np.column_stack([b0p, b1p]),
        beta_minus=np.column_stack([b0m, b1m]),
        sigma2_plus=s2p,
        sigma2_minus=s2m,
        sigma2=s2,
        w=w,
        clamp_floor=clamp_floor,
        n=n,
    )


_R3 = np.sqrt(3.0)


def _r00(h):
    a = abs(h)
    if a < 1:
        return 1 - 4.5 * a + 3 * a**2 + 0.75 * a**3
    if a < 2:
        return -1 + 3.5 * a - 3 * a**2 + 0.75 * a**3
    return 0.0


def _r11(h):
    a = abs(h)
    if a < 1:
        return 1 - 1.5 * a - 3 * a**2 + 3 * a**3
    if a < 2:
        return -1 - 1.5 * a + 3 * a**2 - a**3
    return 0.0


def _r01(h):
    if 0 <= h < 1:
        return _R3 * (-1.5 * h + 2.25 * h**2 - 0.5 * h**3)
    if 1 <= h < 2:
        return _R3 * (1.5 * h - 1.75 * h**2 + 0.5 * h**3)
    if -1 < h < 0:
        return _R3 * (-1.5 * h - 2.25 * h**2 - 0.5 * h**3)
    if -2 < h <= -1:
        return _R3 * (1.5 * h + 1.75 * h**2 + 0.5 * h**3)
    return 0.0


def theoretical_Z_covariance(h: float) -> np.ndarray:
    """Lag-``h`` cross-covariance of the limiting normalised difference process.

    Entry ``[a, b]`` is ``Cov(Z_a(t), Z_b(t + h))`` with ``h`` in units of G.
    """
    h = float(h)
    return np.array([[_r00(h), _r01(h)], [_r01(-h), _r11(h)]])
