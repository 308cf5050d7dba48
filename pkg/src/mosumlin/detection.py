"""Change point estimates from MOSUM profiles, single- and multi-bandwidth."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._errors import InputError
from .core import MosumProfile, Series, check_bandwidth, mosum_profile
from .critical import DEFAULT_LOG_H, critical_value

DEFAULT_ALPHA = 0.05
DEFAULT_ETA = 0.3
DEFAULT_THETA = 0.8
MIN_SEGMENT = 3
RSS_FLOOR = 1e-18


@dataclass(frozen=True)
class ExceedanceInterval:
    v: int
    w: int
    peak_k: int
    peak_w: float


@dataclass
class CandidateSet:
    G: int
    estimates: list[ExceedanceInterval] = field(default_factory=list)
    bic: float = math.nan

    @property
    def locations(self) -> list[int]:
        return [e.peak_k for e in self.estimates]


@dataclass(frozen=True)
class ChangePoint:
    k: int
    t: float
    G: int
    stat: float


@dataclass
class DetectionResult:
    change_points: list[ChangePoint]
    params: dict

    @property
    def locations(self) -> list[int]:
        return [cp.k for cp in self.change_points]

    def to_json(self) -> dict:
        return {
            "changes": [{"k": c.k, "t": c.t, "G": c.G, "stat": c.stat} for c in self.change_points],
            "params": self.params,
        }


def detect_single(profile: MosumProfile, c: float, eta: float = DEFAULT_ETA) -> CandidateSet:
    """Apply the eta-rule to one profile.

    A maximal run ``v..w`` of ``W >= c`` is kept when ``w - v >= eta * G``;
    its estimate is the first argmax of W on the run. Indices just outside
    the profile count as below the threshold.
    """
    if not 0 < eta < 0.5:
        raise InputError(f"eta must lie in (0, 1/2), got {eta}")
    if not c > 0:
        raise InputError(f"critical value must be positive, got {c}")
    above = np.concatenate(([False], profile.w >= c, [False]))
    edges = np.flatnonzero(np.diff(above.astype(np.int8)))
    starts, stops = edges[0::2], edges[1::2] - 1
    out = []
    for s, e in zip(starts, stops):
        if e - s < eta * profile.G:
            continue
        r = s + int(np.argmax(profile.w[s : e + 1]))
        out.append(ExceedanceInterval(
            v=int(profile.k[s]), w=int(profile.k[e]),
            peak_k=int(profile.k[r]), peak_w=float(profile.w[r]),
        ))
    return CandidateSet(profile.G, out)


def segment_rss(series: Series, change_points: Sequence[int]) -> float:
    """Sum of squared residuals of separate line fits on each segment.

    Returns ``inf`` if any segment has fewer than three observations.
    Residuals are formed explicitly (two passes over the data) so that an
    exact piecewise-linear fit gives an RSS at rounding level.
    """
    cps = np.asarray(sorted(change_points), dtype=np.int64)
    bounds = np.concatenate(([0], cps, [series.n]))
    lengths = np.diff(bounds)
    if np.any(lengths < MIN_SEGMENT):
        return math.inf
    label = np.repeat(np.arange(lengths.size), lengths)
    u = np.arange(series.n, dtype=float)
    y = series.values

    def seg_mean(v):
        return np.bincount(label, weights=v) / lengths

    uc = u - seg_mean(u)[label]
    yc = y - seg_mean(y)[label]
    slope = np.bincount(label, weights=uc * yc) / np.bincount(label, weights=uc * uc)
    resid = yc - slope[label] * uc
    return float(resid @ resid)


def bic(series: Series, change_points: Sequence[int]) -> float:
    rss = segment_rss(series, change_points)
    if math.isinf(rss):
        return math.inf
    n = series.n
    return n * math.log(max(rss, n * RSS_FLOOR) / n) + 2 * (len(change_points) + 1) * math.log(n)


def fibonacci_bandwidths(g1: int, n: int) -> list[int]:
    """Bandwidths g1, 2 g1, 3 g1, 5 g1, ... strictly below n / log10(n)."""
    if g1 < 3:
        raise InputError(f"initial bandwidth must be >= 3, got {g1}")
    if n <= 10:
        raise InputError(f"need n > 10, got {n}")
    bound = n / math.log10(n)
    if g1 >= bound:
        raise InputError(f"initial bandwidth {g1} is not below n/log10(n) = {bound:.1f}")
    out = [g1]
    prev, cur = g1, 2 * g1
    while cur < bound:
        out.append(cur)
        prev, cur = cur, prev + cur
    return out


def multiscale_merge(
    candidate_sets: Iterable[CandidateSet],
    series: Series,
    theta: float = DEFAULT_THETA,
) -> list[tuple[int, CandidateSet, ExceedanceInterval]]:
    """BIC-ordered merge of candidate sets.

    Every set is scored by the BIC of its estimated locations; the best set
    is accepted whole, then each estimate of the next sets is accepted when
    it lies more than ``theta * G`` from everything accepted so far.
    Returns ``(k, source set, interval)`` sorted by ``k``.
    """
    if not 0 < theta <= 1:
        raise InputError(f"theta must lie in (0, 1], got {theta}")
    sets = list(candidate_sets)
    if not sets:
        raise InputError("need at least one candidate set")
    for cs in sets:
        cs.bic = bic(series, cs.locations)
    order = sorted(sets, key=lambda cs: (cs.bic, cs.G))
    accepted: list[tuple[int, CandidateSet, ExceedanceInterval]] = [
        (e.peak_k, order[0], e) for e in order[0].estimates
    ]
    for cs in order[1:]:
        for e in sorted(cs.estimates, key=lambda e: e.peak_k):
            if all(abs(e.peak_k - k) > theta * cs.G for k, _, _ in accepted):
                accepted.append((e.peak_k, cs, e))
    return sorted(accepted, key=lambda item: item[0])


def candidate_set(series: Series, G: int, alpha: float, eta: float, log_h: float) -> CandidateSet:
    prof = mosum_profile(series, G)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        c = critical_value(series.n, G, alpha, log_h).c_n
    return detect_single(prof, c, eta)


def detect(
    series: Series,
    bandwidths: Sequence[int],
    *,
    alpha: float = DEFAULT_ALPHA,
    eta: float = DEFAULT_ETA,
    theta: float = DEFAULT_THETA,
    log_h: float = DEFAULT_LOG_H,
    threads: int | None = 1,
) -> DetectionResult:
    """Single- or multi-bandwidth detection on ``series``."""
    bandwidths = sorted(set(int(g) for g in bandwidths))
    if not bandwidths:
        raise InputError("at least one bandwidth is required")
    for g in bandwidths:
        check_bandwidth(series.n, g)
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0 < eta < 0.5:
        raise InputError(f"eta must lie in (0, 1/2), got {eta}")
    if not 0 < theta <= 1:
        raise InputError(f"theta must lie in (0, 1], got {theta}")

    def one(g):
        return candidate_set(series, g, alpha, eta, log_h)

    if threads == 1 or len(bandwidths) == 1:
        sets = [one(g) for g in bandwidths]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sets = list(pool.map(one, bandwidths))
    merged = multiscale_merge(sets, series, theta)
    dt = series.grid.delta_t
    cps = [ChangePoint(k, k * dt, cs.G, e.peak_w) for k, cs, e in merged]
    params = {
        "alpha": alpha, "eta": eta, "theta": theta, "log_h": log_h,
        "bandwidths": bandwidths, "n": series.n, "delta_t": dt,
    }
    return DetectionResult(cps, params)
