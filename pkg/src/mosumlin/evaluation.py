"""Scoring estimated change sets and aggregating benchmark runs."""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._errors import InputError
from .critical import DEFAULT_LOG_H
from .detection import DEFAULT_ALPHA, DEFAULT_ETA, DEFAULT_THETA, detect, fibonacci_bandwidths
from .signal import TimeGrid
from .simulation import N_OBS, NoiseSpec, ScenarioSpec, gen_scenario

SCORE_NAMES = ("count_score", "max_score1", "max_score2")


@dataclass(frozen=True)
class ScoreTriple:
    count_score: int
    max_score1: float
    max_score2: float

    @property
    def hausdorff(self) -> float:
        return max(self.max_score1, self.max_score2)


def score(truth: Sequence[int], estimate: Sequence[int], grid: TimeGrid) -> ScoreTriple:
    """Count error and the two directed distances, in time units.

    A side with no points has no defined min/max, so: missing every true
    change costs the full span in ``max_score1``; spurious estimates with no
    truth cost the full span in ``max_score2``.
    """
    t = np.asarray(truth, dtype=float) * grid.delta_t
    e = np.asarray(estimate, dtype=float) * grid.delta_t
    count = abs(e.size - t.size)
    if t.size and e.size:
        d = np.abs(t[:, None] - e[None, :])
        return ScoreTriple(count, float(d.min(axis=1).max()), float(d.min(axis=0).max()))
    if t.size:
        return ScoreTriple(count, grid.span, 0.0)
    if e.size:
        return ScoreTriple(count, 0.0, grid.span)
    return ScoreTriple(0, 0.0, 0.0)


@dataclass(frozen=True)
class MethodConfig:
    bandwidths: tuple[int, ...] = tuple(fibonacci_bandwidths(50, N_OBS))
    alpha: float = DEFAULT_ALPHA
    eta: float = DEFAULT_ETA
    theta: float = DEFAULT_THETA
    log_h: float = DEFAULT_LOG_H

    def as_dict(self) -> dict:
        return {
            "bandwidths": list(self.bandwidths), "alpha": self.alpha, "eta": self.eta,
            "theta": self.theta, "log_h": self.log_h,
        }


@dataclass
class BenchmarkRow:
    sigma_eps: float
    mean: dict[str, float]
    sd: dict[str, float]
    se: dict[str, float]
    scores: np.ndarray
    n_detected: np.ndarray
    wall_seconds: float


@dataclass
class BenchmarkReport:
    scenario: str
    noise: str
    method: MethodConfig
    replications: int
    seed: int
    rows: list[BenchmarkRow] = field(default_factory=list)

    @property
    def total_seconds(self) -> float:
        return sum(r.wall_seconds for r in self.rows)

    @property
    def mean_seconds(self) -> float:
        return self.total_seconds / max(1, self.replications * len(self.rows))

    def row(self, sigma_eps: float) -> BenchmarkRow:
        for r in self.rows:
            if r.sigma_eps == sigma_eps:
                return r
        raise KeyError(sigma_eps)

    def to_csv(self) -> str:
        """One line per noise level; timings are left out so output is reproducible."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["scenario", "noise", "sigma_eps", "replications", "seed"]
        for name in SCORE_NAMES:
            header += [f"{name}_mean", f"{name}_sd", f"{name}_se"]
        w.writerow(header)
        for r in self.rows:
            line = [self.scenario, self.noise, repr(r.sigma_eps), self.replications, self.seed]
            for name in SCORE_NAMES:
                line += [_fmt(r.mean[name]), _fmt(r.sd[name]), _fmt(r.se[name])]
            w.writerow(line)
        return buf.getvalue()

    def to_table(self) -> str:
        lines = [
            f"{self.scenario} / {self.noise}: {self.replications} replications, seed {self.seed}",
            f"{'sigma_eps':>9}  " + "  ".join(f"{n:>20}" for n in SCORE_NAMES),
        ]
        for r in self.rows:
            cells = [f"{r.mean[n]:.3f} ({r.se[n]:.4f})" for n in SCORE_NAMES]
            lines.append(f"{r.sigma_eps:>9g}  " + "  ".join(f"{c:>20}" for c in cells))
        lines.append("mean (standard error)")
        return "\n".join(lines)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _aggregate(scores: np.ndarray) -> tuple[dict, dict, dict]:
    r = scores.shape[0]
    mean = scores.mean(axis=0)
    sd = scores.std(axis=0, ddof=1) if r > 1 else np.zeros(scores.shape[1])
    se = sd / np.sqrt(r)
    as_dict = lambda v: {n: float(x) for n, x in zip(SCORE_NAMES, v)}
    return as_dict(mean), as_dict(sd), as_dict(se)


def run_replication(scenario: str, noise: NoiseSpec, method: MethodConfig, seed: int,
                    replication: int) -> tuple[ScoreTriple, int]:
    series, sig = gen_scenario(ScenarioSpec(scenario, noise, seed, replication))
    res = detect(
        series, method.bandwidths, alpha=method.alpha, eta=method.eta,
        theta=method.theta, log_h=method.log_h, threads=1,
    )
    return score(sig.change_indices, res.locations, series.grid), len(res.change_points)


def run_benchmark(
    scenario: str,
    noise: str = "gaussian",
    sigma_eps: Sequence[float] = (0.5, 1.0, 1.5, 2.0),
    replications: int = 1000,
    seed: int = 0,
    method: MethodConfig | None = None,
    threads: int | None = None,
) -> BenchmarkReport:
    """Simulate, detect and score ``replications`` series per noise level.

    Replication ``r`` uses the random streams of ``(seed, r)`` at every noise
    level, so rows share their signal coefficients and noise shape.
    """
    if replications < 1:
        raise InputError(f"replications must be >= 1, got {replications}")
    method = method or MethodConfig()
    report = BenchmarkReport(scenario, noise, method, replications, seed)
    workers = threads or os.cpu_count() or 1
    for s in sigma_eps:
        spec = NoiseSpec(noise, float(s))
        start = time.perf_counter()

        def one(r, spec=spec):
            return run_replication(scenario, spec, method, seed, r)

        if workers == 1:
            results = [one(r) for r in range(replications)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(one, range(replications)))
        elapsed = time.perf_counter() - start
        scores = np.array([[t.count_score, t.max_score1, t.max_score2] for t, _ in results], dtype=float)
        mean, sd, se = _aggregate(scores)
        report.rows.append(BenchmarkRow(
            float(s), mean, sd, se, scores, np.array([k for _, k in results]), elapsed,
        ))
    return report
