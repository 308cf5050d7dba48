"""Piecewise linear ground truth and the theoretical drift of the MOSUM difference.

Index convention: observation ``i`` (1-based) at time ``t_i = i * delta_t``
belongs to segment ``j`` iff ``k_j < i <= k_{j+1}`` with ``k_0 = 0`` and
``k_{J+1} = n``. A change point ``k_j`` is therefore the last index of the
segment before the change.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from ._errors import InputError

Side = Literal["before", "after"]


@dataclass(frozen=True)
class TimeGrid:
    n: int
    delta_t: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InputError(f"n must be a positive integer, got {self.n!r}")
        if not self.delta_t > 0:
            raise InputError(f"delta_t must be positive, got {self.delta_t!r}")

    @property
    def span(self) -> float:
        """Observation period T = n * delta_t."""
        return self.n * self.delta_t

    def times(self) -> np.ndarray:
        return np.arange(1, self.n + 1) * self.delta_t

    def t(self, i) -> float:
        return i * self.delta_t


@dataclass(frozen=True)
class Segment:
    a0: float
    a1: float


@dataclass(frozen=True)
class ChangeMagnitudes:
    delta0: float
    delta1: float
    d: float

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.delta0, self.delta1])


@dataclass(frozen=True)
class PiecewiseLinearSignal:
    """Signal ``f_i = a0_j + a1_j * t_i`` on segment ``j``.

    Slopes ``a1`` are per unit of time, not per index.
    """

    grid: TimeGrid
    change_indices: tuple[int, ...]
    segments: tuple[Segment, ...]
    _bounds: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ks = tuple(int(k) for k in self.change_indices)
        segs = tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.segments)
        object.__setattr__(self, "change_indices", ks)
        object.__setattr__(self, "segments", segs)
        if len(segs) != len(ks) + 1:
            raise InputError(
                f"need len(segments) == len(change_indices) + 1, got {len(segs)} and {len(ks)}"
            )
        if any(not 0 < k < self.grid.n for k in ks):
            raise InputError("change indices must satisfy 0 < k < n")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise InputError("change indices must be strictly increasing")
        for j, (s, s_next) in enumerate(zip(segs, segs[1:]), start=1):
            if s.a0 == s_next.a0 and s.a1 == s_next.a1:
                raise InputError(f"segments {j} and {j + 1} are identical; k_{j} is not a change")
        object.__setattr__(self, "_bounds", np.array((0,) + ks + (self.grid.n,)))

    @classmethod
    def line(cls, grid: TimeGrid, a0: float, a1: float) -> "PiecewiseLinearSignal":
        return cls(grid, (), (Segment(a0, a1),))

    @property
    def n_changes(self) -> int:
        return len(self.change_indices)

    def segment_of(self, i: int) -> int:
        """0-based segment ordinal holding index ``i``."""
        return int(np.searchsorted(self._bounds, i, side="left")) - 1

    def values(self) -> np.ndarray:
        i = np.arange(1, self.grid.n + 1)
        seg = np.searchsorted(self._bounds, i, side="left") - 1
        a0 = np.array([s.a0 for s in self.segments])
        a1 = np.array([s.a1 for s in self.segments])
        return a0[seg] + a1[seg] * (i * self.grid.delta_t)

    def to_json(self) -> dict:
        return {
            "n": self.grid.n,
            "delta_t": self.grid.delta_t,
            "changes": list(self.change_indices),
            "segments": [{"a0": s.a0, "a1": s.a1} for s in self.segments],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PiecewiseLinearSignal":
        try:
            grid = TimeGrid(int(obj["n"]), float(obj.get("delta_t", 1.0)))
            segs = tuple(Segment(float(s["a0"]), float(s["a1"])) for s in obj["segments"])
            return cls(grid, tuple(int(k) for k in obj.get("changes", [])), segs)
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed signal specification: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "PiecewiseLinearSignal":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def evaluate_signal(sig: PiecewiseLinearSignal, i: int) -> float:
    if not 1 <= i <= sig.grid.n:
        raise InputError(f"index {i} outside 1..{sig.grid.n}")
    s = sig.segments[sig.segment_of(i)]
    return s.a0 + s.a1 * sig.grid.t(i)


def change_magnitudes(sig: PiecewiseLinearSignal, j: int, G: int) -> ChangeMagnitudes:
    """Jump size, bandwidth-scaled slope change and second difference at ``k_j``.

    ``j`` is 1-based. Both sizes are "before minus after".
    """
    if not 1 <= j <= sig.n_changes:
        raise InputError(f"change ordinal {j} outside 1..{sig.n_changes}")
    if G < 1:
        raise InputError(f"bandwidth must be >= 1, got {G}")
    left, right = sig.segments[j - 1], sig.segments[j]
    tk = sig.grid.t(sig.change_indices[j - 1])
    d_slope = left.a1 - right.a1
    delta0 = (left.a0 - right.a0) + d_slope * tk
    delta1 = G * sig.grid.delta_t * d_slope
    return ChangeMagnitudes(delta0, delta1, abs(delta0 + delta1 / G))


def _check_kappa(kappa: float) -> float:
    if not abs(kappa) <= 1:
        raise InputError(f"|kappa| must be <= 1, got {kappa}")
    return abs(kappa)


def drift_matrix_A(kappa: float, side: Side) -> np.ndarray:
    """Leading drift matrix; ``side`` is ``"before"`` for k <= k_j.

    Only ``|kappa|`` enters the matrix, the branch is chosen by ``side``.
    """
    x = _check_kappa(kappa)
    if side == "before":
        m = [[1 - 3 * x, x * x - x], [6 * x, -2 * x * x + x + 1]]
    elif side == "after":
        m = [[1 - 3 * x, x - x * x], [-6 * x, -2 * x * x + x + 1]]
    else:
        raise InputError(f"side must be 'before' or 'after', got {side!r}")
    return (1 - x) * np.array(m, dtype=float)


def drift_matrix_OG(kappa: float, G: int, side: Side) -> np.ndarray:
    """Finite-bandwidth correction to :func:`drift_matrix_A`; vanishes at |kappa| in {0, 1}."""
    x = _check_kappa(kappa)
    if G < 2:
        raise InputError(f"bandwidth must be >= 2, got {G}")
    if side == "before":
        m = [[3, 2 - x], [-6 / (G + 1), (2 * x - 1 - 3 * G) / (G + 1)]]
        scale = -x * (1 - x) / (G - 1)
    elif side == "after":
        m = [[-3, 2 - x], [6 / (G - 1), (2 * x - 1 + 3 * G) / (G - 1)]]
        scale = -x * (1 - x) / (G + 1)
    else:
        raise InputError(f"side must be 'before' or 'after', got {side!r}")
    return scale * np.array(m, dtype=float)


def expected_beta_difference(delta: Sequence[float], k: int, k_j: int, G: int) -> np.ndarray:
    """Noise-free ``beta_plus(k) - beta_minus(k)`` for k in (k_j - G, k_j + G].

    With Delta defined as "before minus after", the window difference equals
    ``-(A + O_G) Delta``: at ``k = k_j`` the right window sees the new segment.
    """
    if not k_j - G < k <= k_j + G:
        raise InputError(f"k={k} outside ({k_j - G}, {k_j + G}]")
    side: Side = "before" if k <= k_j else "after"
    kappa = abs(k - k_j) / G
    m = drift_matrix_A(kappa, side) + drift_matrix_OG(kappa, G, side)
    return -m @ np.asarray(delta, dtype=float)


def delta_curve(delta: Sequence[float], kappa: float) -> np.ndarray:
    """Limit drift delta_j(kappa) for signed ``kappa = (k - k_j) / G``."""
    x = _check_kappa(kappa)
    m = np.array([[1 - 3 * x, kappa * (1 - x)], [-6 * kappa, -2 * x * x + x + 1]])
    return (1 - x) * (m @ np.asarray(delta, dtype=float))


_G_WEIGHT = np.diag([1.0, 1.0 / 3.0])


def g_curve(delta: Sequence[float], kappa: float) -> float:
    d = delta_curve(delta, kappa)
    return float(np.sqrt(d @ _G_WEIGHT @ d))


def g_curve_continuous(delta1: float, kappa: float) -> float:
    """Closed form of :func:`g_curve` when there is no jump (delta0 = 0)."""
    x = _check_kappa(kappa)
    return (1 - x) ** 2 * np.sqrt(x * x + (2 * x + 1) ** 2 / 3) * abs(delta1)
