"""Seeded generators for the benchmark scenarios and their noise families."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from ._errors import InputError
from .core import Series
from .rng import stream
from .signal import PiecewiseLinearSignal, Segment, TimeGrid

NoiseFamily = Literal["gaussian", "laplace", "t5"]
NOISE_FAMILIES = ("gaussian", "laplace", "t5")
SCENARIOS = ("sim1", "sim2", "sim3", "sim4")

N_OBS = 3500
DELTA_T = 0.01
CHANGES = (1000, 2000, 2500)
BETA_SD = 0.2
_BETA_MEAN = {
    "sim1": (-1.0, -1.0, -2.5, 2.5),
    "sim2": (-1.0, -1.0, -2.5, 2.5),
    "sim3": (-2.0, 2.0, -5.0, 5.0),
    "sim4": (-1.0,),
}

_T5_DOF = 5
_PURPOSE_BETA = 1
_PURPOSE_NOISE = 2


@dataclass(frozen=True)
class NoiseSpec:
    family: NoiseFamily = "gaussian"
    sigma_eps: float = 1.0

    def __post_init__(self):
        if self.family not in NOISE_FAMILIES:
            raise InputError(f"unknown noise family {self.family!r}; choose from {NOISE_FAMILIES}")
        if not self.sigma_eps > 0:
            raise InputError(f"sigma_eps must be positive, got {self.sigma_eps}")


def _open_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    # Uniforms on the open interval (0, 1): no endpoint reaches log(0).
    return (rng.integers(0, 1 << 53, size=n, dtype=np.int64) + 0.5) / float(1 << 53)


def draw_noise(spec: NoiseSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Zero-mean draws with standard deviation ``spec.sigma_eps``.

    Laplace uses the inverse CDF with classical scale ``b = sigma_eps / sqrt 2``
    (variance ``2 b^2``); t5 draws are rescaled by ``sqrt(3/5)``.
    """
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    s = spec.sigma_eps
    if spec.family == "gaussian":
        return s * rng.standard_normal(n)
    if spec.family == "laplace":
        u = _open_uniform(rng, n) - 0.5
        b = s / math.sqrt(2.0)
        return -b * np.sign(u) * np.log1p(-2.0 * np.abs(u))
    z = rng.standard_normal(n)
    chi2 = rng.chisquare(_T5_DOF, n)
    raw_var = _T5_DOF / (_T5_DOF - 2)
    return s / math.sqrt(raw_var) * z / np.sqrt(chi2 / _T5_DOF)


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0
    replication: int = 0

    def __post_init__(self):
        if self.id not in SCENARIOS:
            raise InputError(f"unknown scenario {self.id!r}; choose from {SCENARIOS}")


def scenario_signal(scenario: str, beta) -> PiecewiseLinearSignal:
    """Ground truth for ``scenario`` at coefficient vector ``beta``."""
    grid = TimeGrid(N_OBS, DELTA_T)
    if scenario == "sim4":
        (b,) = np.atleast_1d(beta)
        return PiecewiseLinearSignal.line(grid, 10.0, float(b))
    b1, b2, b3, b4 = (float(b) for b in beta)
    if scenario == "sim1":
        segs = [
            (10 - 10 * b1, b1),
            (-10 * b2, b2),
            (10 + 10 * b2 - 20 * b3, b3),
            (10 + 10 * b2 + 5 * b3 - 25 * b4, b4),
        ]
    elif scenario == "sim2":
        segs = [
            (-10 * b1, b1),
            (-10 * b2, b2),
            (10 * b2 - 20 * b3, b3),
            (10 * b2 + 5 * b3 - 25 * b4, b4),
        ]
    elif scenario == "sim3":
        segs = [(b1, 0.0), (b2, 0.0), (b3, 0.0), (b4, 0.0)]
    else:
        raise InputError(f"unknown scenario {scenario!r}")
    return PiecewiseLinearSignal(grid, CHANGES, tuple(Segment(a0, a1) for a0, a1 in segs))


def draw_beta(scenario: str, rng: np.random.Generator) -> np.ndarray:
    mu = np.array(_BETA_MEAN[scenario])
    return mu + BETA_SD * rng.standard_normal(mu.size)


def scenario_beta(spec: ScenarioSpec) -> np.ndarray:
    """Signal coefficients of one replication, drawn from their own stream."""
    return draw_beta(spec.id, stream(spec.seed, spec.replication, purpose=_PURPOSE_BETA))


def gen_scenario(spec: ScenarioSpec) -> tuple[Series, PiecewiseLinearSignal]:
    sig = scenario_signal(spec.id, scenario_beta(spec))
    return simulate_signal(sig, spec.noise, spec.seed, spec.replication), sig


def simulate_signal(sig: PiecewiseLinearSignal, noise: NoiseSpec, seed: int = 0,
                    replication: int = 0) -> Series:
    rng = stream(seed, replication, purpose=_PURPOSE_NOISE)
    return Series(sig.values() + draw_noise(noise, sig.grid.n, rng), sig.grid)


def block_mean(series: Series, block: int) -> Series:
    """Non-overlapping block averages; a short final block averages what it has."""
    if int(block) != block or block < 1:
        raise InputError(f"block must be a positive integer, got {block}")
    n = series.n
    if block > n:
        raise InputError(f"block {block} exceeds series length {n}")
    starts = np.arange(0, n, block)
    sums = np.add.reduceat(series.values, starts)
    counts = np.minimum(starts + block, n) - starts
    return Series(sums / counts, TimeGrid(starts.size, series.grid.delta_t * block))
