"""Guided random walk on the integer grid.

At every step the walker follows its instruction with probability ``1 - p``
and otherwise moves to one of the four neighbours uniformly at random. The
random move may coincide with the instruction, so the instructed neighbour is
reached with probability ``1 - 3p/4`` and each other neighbour with ``p/4``.

Besides a seeded simulator this module carries an exact oracle: the law of
``X_t`` obtained by convolving the one-step kernel ``t`` times on a dense
window, and its absorbing variant which yields the first-passage law.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from itertools import islice
from typing import Iterable, Sequence

import numpy as np

from homewalk import _kernels

DEFAULT_MEM_CAP = 2 * 1024**3
MEM_CAP_ENV = "HOMEWALK_MEM_CAP_BYTES"


class MemoryCapError(RuntimeError):
    """The dense DP window would exceed the configured memory cap."""


class StreamExhausted(RuntimeError):
    """An instruction stream ran out before the step budget was used up."""


@dataclass(frozen=True, order=True)
class GridPoint:
    x: int
    y: int

    def __add__(self, other: GridPoint) -> GridPoint:
        return GridPoint(self.x + other.x, self.y + other.y)

    def __sub__(self, other: GridPoint) -> GridPoint:
        return GridPoint(self.x - other.x, self.y - other.y)

    def __neg__(self) -> GridPoint:
        return GridPoint(-self.x, -self.y)

    def l1(self) -> int:
        return abs(self.x) + abs(self.y)

    def linf(self) -> int:
        return max(abs(self.x), abs(self.y))

    @classmethod
    def parse(cls, text: str) -> GridPoint:
        """Parse ``"x,y"``."""
        parts = text.split(",")
        if len(parts) != 2:
            raise ValueError(f"expected 'x,y', got {text!r}")
        return cls(int(parts[0]), int(parts[1]))

    def __str__(self) -> str:
        return f"{self.x},{self.y}"


ORIGIN = GridPoint(0, 0)


class Direction(enum.IntEnum):
    """Cardinal instruction. The integer value is the code used by the kernels."""

    NORTH = 0
    EAST = 1
    SOUTH = 2
    WEST = 3

    @property
    def dx(self) -> int:
        return int(_kernels.DX[self])

    @property
    def dy(self) -> int:
        return int(_kernels.DY[self])

    @property
    def vector(self) -> GridPoint:
        return GridPoint(self.dx, self.dy)


_UNIT = [d.vector for d in Direction]


@dataclass(frozen=True)
class WalkConfig:
    p: float
    home: GridPoint
    max_steps: int
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class TrialResult:
    hit_time: int | None
    final_position: GridPoint
    steps_executed: int

    @property
    def hit(self) -> bool:
        return self.hit_time is not None


def step(position: GridPoint, instruction: Direction, p: float, u: float, choice: int) -> GridPoint:
    """One transition of the chain.

    ``u`` is a uniform draw in [0, 1) deciding whether the step is random
    (``u < p``); ``choice`` in ``0..3`` picks the random direction.
    """
    if u < p:
        return position + _UNIT[choice]
    return position + instruction.vector


def as_codes(instructions: Iterable[Direction] | np.ndarray, limit: int | None = None) -> np.ndarray:
    """Materialise instructions as an int8 code array, reading at most ``limit``."""
    if isinstance(instructions, np.ndarray):
        codes = instructions if limit is None else instructions[:limit]
        return np.ascontiguousarray(codes, dtype=np.int8)
    it = iter(instructions)
    if limit is not None:
        it = islice(it, limit)
    return np.fromiter((int(d) for d in it), dtype=np.int8)


def simulate(instructions: Iterable[Direction] | np.ndarray, config: WalkConfig) -> TrialResult:
    """Run the chain from the origin until it hits ``config.home`` or uses up ``max_steps``.

    Raises StreamExhausted if the instructions end before ``max_steps`` and
    the walk has not hit home by then.
    """
    codes = as_codes(instructions, config.max_steps)
    n = min(len(codes), config.max_steps)
    seeds = np.array([config.seed], dtype=np.uint64)
    hit, fx, fy, steps = _kernels.run_walks(
        codes, n, float(config.p), config.home.x, config.home.y, True, seeds
    )
    hit_time = int(hit[0]) if hit[0] >= 0 else None
    if hit_time is None and n < config.max_steps:
        raise StreamExhausted(f"instructions ended after {n} of {config.max_steps} steps")
    return TrialResult(hit_time, GridPoint(int(fx[0]), int(fy[0])), int(steps[0]))


@dataclass
class DistributionGrid:
    """Probability mass of ``X_t`` on the window ``[x_min..x_max] x [y_min..y_max]``.

    ``mass[i, j]`` is the mass of cell ``(x_min + i, y_min + j)``.
    """

    t: int
    x_min: int
    x_max: int
    y_min: int
    y_max: int
    mass: np.ndarray

    def probability(self, point: GridPoint) -> float:
        if not (self.x_min <= point.x <= self.x_max and self.y_min <= point.y <= self.y_max):
            return 0.0
        return float(self.mass[point.x - self.x_min, point.y - self.y_min])

    def total(self) -> float:
        return float(self.mass.sum())

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.arange(self.x_min, self.x_max + 1), np.arange(self.y_min, self.y_max + 1))

    def mean(self) -> tuple[float, float]:
        xs, ys = self.axes()
        return float(self.mass.sum(axis=1) @ xs), float(self.mass.sum(axis=0) @ ys)

    def variance(self) -> tuple[float, float]:
        xs, ys = self.axes()
        mx, my = self.mean()
        px, py = self.mass.sum(axis=1), self.mass.sum(axis=0)
        return float(px @ (xs - mx) ** 2), float(py @ (ys - my) ** 2)


def memory_cap() -> int:
    raw = os.environ.get(MEM_CAP_ENV)
    return int(raw) if raw else DEFAULT_MEM_CAP


def _check_window(t: int, mem_cap: int | None) -> None:
    cap = memory_cap() if mem_cap is None else mem_cap
    # current + next window, float64
    need = 2 * 8 * (2 * t + 3) ** 2
    if need > cap:
        raise MemoryCapError(f"t={t} needs ~{need} bytes for the DP window, cap is {cap}")


def _convolve_step(cur: np.ndarray, code: int, p: float) -> np.ndarray:
    m = cur.shape[0]
    nxt = np.zeros((m + 2, m + 2))
    q = p / 4.0
    if q > 0.0:
        for k in range(4):
            dx, dy = int(_kernels.DX[k]), int(_kernels.DY[k])
            nxt[1 + dx : 1 + dx + m, 1 + dy : 1 + dy + m] += q * cur
    if p < 1.0:
        dx, dy = int(_kernels.DX[code]), int(_kernels.DY[code])
        nxt[1 + dx : 1 + dx + m, 1 + dy : 1 + dy + m] += (1.0 - p) * cur
    return nxt


def exact_distribution(
    instructions: Sequence[Direction] | np.ndarray, p: float, mem_cap: int | None = None
) -> DistributionGrid:
    """Exact law of ``X_t`` after following ``instructions`` (``t = len``) from the origin."""
    codes = as_codes(instructions)
    t = len(codes)
    _check_window(t, mem_cap)
    cur = np.ones((1, 1))
    for code in codes:
        cur = _convolve_step(cur, int(code), p)
    return DistributionGrid(t, -t, t, -t, t, cur)


def first_passage_distribution(
    instructions: Sequence[Direction] | np.ndarray,
    p: float,
    home: GridPoint,
    mem_cap: int | None = None,
) -> list[tuple[int, float]]:
    """``[(t, P(T = t))]`` for ``t = 1..len(instructions)``; ``[(0, 1.0)]`` if home is the origin.

    Same convolution as exact_distribution, except that the mass landing on
    home is recorded and removed before the next step.
    """
    if home == ORIGIN:
        return [(0, 1.0)]
    codes = as_codes(instructions)
    _check_window(len(codes), mem_cap)
    cur = np.ones((1, 1))
    out = []
    for s, code in enumerate(codes, start=1):
        cur = _convolve_step(cur, int(code), p)
        if home.l1() <= s:
            i, j = home.x + s, home.y + s
            out.append((s, float(cur[i, j])))
            cur[i, j] = 0.0
        else:
            out.append((s, 0.0))
    return out


def max_point_probability(dist: DistributionGrid) -> tuple[GridPoint, float]:
    """Most likely cell and its mass; ties go to the lexicographically smallest ``(x, y)``."""
    # row-major argmax returns the first maximum, i.e. smallest x then smallest y
    flat = int(np.argmax(dist.mass))
    i, j = np.unravel_index(flat, dist.mass.shape)
    return GridPoint(dist.x_min + int(i), dist.y_min + int(j)), float(dist.mass[i, j])


def straight_line(direction: Direction, t: int) -> np.ndarray:
    return np.full(t, int(direction), dtype=np.int8)


def zigzag(t: int, first: Direction = Direction.NORTH) -> np.ndarray:
    """Alternate ``first`` and its opposite: N, S, N, S, ..."""
    a, b = int(first), (int(first) + 2) % 4
    codes = np.full(t, a, dtype=np.int8)
    codes[1::2] = b
    return codes
