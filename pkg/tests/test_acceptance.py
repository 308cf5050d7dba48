"""Acceptance suite.

Run under pytest (one test per criterion, each printing a PASS/FAIL line) or
directly with ``python3 tests/test_acceptance.py`` for the summary alone.
"""

from __future__ import annotations

import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mosumlin.core import Series, mosum_profile, theoretical_Z_covariance  # noqa: E402
from mosumlin.critical import calibrate_log_h, critical_value, null_maxima  # noqa: E402
from mosumlin.detection import detect, fibonacci_bandwidths  # noqa: E402
from mosumlin.evaluation import run_benchmark  # noqa: E402
from mosumlin.rng import stream  # noqa: E402
from mosumlin.signal import (  # noqa: E402
    PiecewiseLinearSignal,
    Segment,
    TimeGrid,
    change_magnitudes,
    expected_beta_difference,
)
from mosumlin.simulation import NoiseSpec, ScenarioSpec, gen_scenario  # noqa: E402
from oracles import direct_window_fit  # noqa: E402


def _best_time(fn, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def criterion_1():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(2000)
    s = Series.from_values(x)
    worst = 0.0
    t0 = time.perf_counter()
    profiles = {G: mosum_profile(s, G) for G in (3, 10, 50)}
    elapsed = time.perf_counter() - t0
    for G, prof in profiles.items():
        for r, k in enumerate(prof.k):
            bp, rss_p = direct_window_fit(x, k, G, "plus")
            bm, rss_m = direct_window_fit(x, k, G, "minus")
            sigma2 = 0.5 * (rss_p + rss_m) / (G - 2)
            worst = max(
                worst,
                np.abs(prof.beta_plus[r] - bp).max(),
                np.abs(prof.beta_minus[r] - bm).max(),
                abs(prof.sigma2[r] - sigma2),
            )
    ok = worst <= 1e-9 and elapsed < 1.0
    return ok, f"max abs diff {worst:.2e} (<= 1e-9), fast path {elapsed * 1e3:.1f} ms (< 1 s)"


def criterion_2():
    rng = np.random.default_rng(2)
    G, kj, n = 100, 500, 1000
    grid = TimeGrid(n, 0.01)
    worst = 0.0
    for _ in range(10):
        jump, slope = rng.uniform(-3, 3, size=2)
        a1_left = rng.uniform(-2, 2)
        a1_right = a1_left - slope
        a0_right = (a1_left - a1_right) * kj * grid.delta_t - jump
        sig = PiecewiseLinearSignal(grid, (kj,), (Segment(0.5, a1_left), Segment(0.5 + a0_right, a1_right)))
        prof = mosum_profile(Series(sig.values(), grid), G)
        delta = change_magnitudes(sig, 1, G).vector
        for k in range(kj - G + 1, kj + G + 1):
            got = prof.beta_plus[k - G] - prof.beta_minus[k - G]
            worst = max(worst, np.abs(got - expected_beta_difference(delta, k, kj, G)).max())
    return worst <= 1e-10, f"max abs deviation {worst:.2e} over 10 signals, both branches (<= 1e-10)"


def criterion_3(replications=50):
    n, G = 200_000, 1000
    lags = (0.0, 0.5, 1.0, 1.5)
    scale = np.array([np.sqrt(8.0), np.sqrt(24.0)])
    acc = {h: np.zeros((2, 2)) for h in lags}
    count = dict.fromkeys(lags, 0)
    t0 = time.perf_counter()
    for r in range(replications):
        x = stream(2024, r, purpose=3).standard_normal(n)
        z = np.sqrt(G) * mosum_profile(Series.from_values(x), G, sigma=1.0).beta_difference / scale
        for h in lags:
            lag = int(round(h * G))
            a, b = z[: len(z) - lag], z[lag:]
            acc[h] += a.T @ b
            count[h] += len(a)
    elapsed = time.perf_counter() - t0
    worst = max(np.abs(acc[h] / count[h] - theoretical_Z_covariance(h)).max() for h in lags)
    ok = worst <= 0.05 and elapsed < 30
    return ok, f"max entrywise error {worst:.3f} (<= 0.05) pooled over {replications} series, {elapsed:.1f} s"


def criterion_4():
    t0 = time.perf_counter()
    h1000 = calibrate_log_h(10**5, 1000, replications=500, seed=0)
    h500 = calibrate_log_h(10**5, 500, replications=500, seed=0)
    elapsed = time.perf_counter() - t0
    ok = 0.55 <= h1000 <= 0.75 and 0.54 <= h500 <= 0.74 and elapsed < 300
    return ok, f"log H: G=1000 {h1000:.4f} in [0.55, 0.75], G=500 {h500:.4f} in [0.54, 0.74], {elapsed:.1f} s"


def criterion_5():
    n, G = 10**5, 1000
    t0 = time.perf_counter()
    maxima = null_maxima(n, G, 1000, seed=1, known_sigma=False)
    c = critical_value(n, G, 0.05, 0.6544).c_n
    elapsed = time.perf_counter() - t0
    rate = float(np.mean(maxima >= c))
    ok = 0.01 <= rate <= 0.10 and elapsed < 300
    return ok, f"rejection rate {rate:.3f} in [0.01, 0.10], {elapsed:.1f} s"


def criterion_6():
    t0 = time.perf_counter()
    rep = run_benchmark("sim1", sigma_eps=(0.5, 1.0), replications=200, seed=1)
    elapsed = time.perf_counter() - t0
    reference = {0.5: 0.060, 1.0: 0.088}
    parts, ok = [], elapsed < 120
    for s, ref in reference.items():
        m = rep.row(s).mean
        good = m["count_score"] <= 0.05 and abs(m["max_score1"] - ref) <= 0.06
        ok &= good
        parts.append(f"sigma {s}: count {m['count_score']:.3f}, MAXscore1 {m['max_score1']:.3f} (ref {ref})")
    return ok, "; ".join(parts) + f", {elapsed:.1f} s"


def criterion_7():
    t0 = time.perf_counter()
    counts = {
        fam: run_benchmark("sim4", fam, sigma_eps=(1.0,), replications=200, seed=1).row(1.0).mean["count_score"]
        for fam in ("gaussian", "laplace", "t5")
    }
    elapsed = time.perf_counter() - t0
    ok = all(v <= 0.02 for v in counts.values()) and elapsed < 180
    return ok, ", ".join(f"{k} {v:.3f}" for k, v in counts.items()) + f" (each <= 0.02), {elapsed:.1f} s"


def criterion_8():
    G, hits, missed = 200, 0, np.zeros(3, dtype=int)
    for r in range(200):
        series, sig = gen_scenario(ScenarioSpec("sim2", NoiseSpec("gaussian", 1.0), seed=1, replication=r))
        est = detect(series, [G]).locations
        truth = sig.change_indices
        near = [any(abs(e - k) < G for e in est) for k in truth]
        missed += np.logical_not(near)
        if len(est) == 3 and all(abs(e - k) < G for e, k in zip(est, truth)):
            hits += 1
    frac = hits / 200
    return frac >= 0.95, f"fraction {frac:.3f} (>= 0.95); true changes missed per index {missed.tolist()} of 200"


def criterion_9():
    series, _ = gen_scenario(ScenarioSpec("sim1", seed=3))
    t_detect = _best_time(lambda: detect(series, [200]), repeat=20)
    rng = np.random.default_rng(9)
    s5 = Series.from_values(rng.standard_normal(10**5))
    s6 = Series.from_values(rng.standard_normal(10**6))
    t5 = _best_time(lambda: mosum_profile(Series(s5.values, s5.grid), 200))
    t6 = _best_time(lambda: mosum_profile(Series(s6.values, s6.grid), 200))
    ratio = t6 / t5
    ok = t_detect < 0.010 and t6 < 1.0 and 5 <= ratio <= 20
    return ok, (
        f"detect n=3500 {t_detect * 1e3:.2f} ms (< 10), profile n=1e6 {t6 * 1e3:.0f} ms (< 1000), "
        f"ratio {ratio:.1f} in [5, 20]"
    )


def criterion_10():
    a = fibonacci_bandwidths(50, 3500)
    b = fibonacci_bandwidths(100, 9830)
    ok = a == [50, 100, 150, 250, 400, 650] and b == [100, 200, 300, 500, 800, 1300, 2100]
    return ok, f"{a}; {b}"


CRITERIA = {
    1: ("oracle equivalence", criterion_1),
    2: ("drift identity on noiseless signals", criterion_2),
    3: ("null covariance", criterion_3),
    4: ("log H calibration", criterion_4),
    5: ("size control", criterion_5),
    6: ("simulation 1 reproduction", criterion_6),
    7: ("simulation 4 null behaviour", criterion_7),
    8: ("localisation on simulation 2", criterion_8),
    9: ("performance", criterion_9),
    10: ("bandwidth sets", criterion_10),
}


def _line(num: int) -> tuple[bool, str]:
    name, fn = CRITERIA[num]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ok, detail = fn()
    return ok, f"{'PASS' if ok else 'FAIL'} criterion {num} ({name}): {detail}"


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num, capsys):
    ok, line = _line(num)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


if __name__ == "__main__":
    results = [_line(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
