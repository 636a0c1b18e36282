"""Phased sweeping instruction stream.

Each phase starts with the instructed position at the sweep centre. It walks to
the south-west corner of a ``2W x 2H`` box, climbs a random offset ``Z``, sweeps
``N`` horizontal lines ``G`` apart, pads the climb so the phase length does not
depend on ``Z`` and walks back to the centre. Box and gap scale with the phase
start time ``t``: ``W, H ~ sqrt(t)`` and ``G ~ sqrt(t) / ln t``.

The stream is the concatenation of the phase blocks. Phase ``i`` is sized
with the clock value ``t_i`` of the schedule (``t_0 = t0``, ``t_{i+1} = t_i +
length``) and starts at walk step ``t_i - t0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Literal

import numpy as np

from homewalk.bounds import sigma
from homewalk.lattice import ORIGIN, Direction, GridPoint

N_, E_, S_, W_ = (int(d) for d in (Direction.NORTH, Direction.EAST, Direction.SOUTH, Direction.WEST))

BoxConvention = Literal["sigma", "literal"]


def derive_box_constants(p0: float, a: float, convention: BoxConvention = "sigma") -> tuple[float, float]:
    """Box half-extents per unit ``sqrt(t)``.

    ``"sigma"`` gives ``(a sigma1(p0), a sigma2(p0))``, the box the walk is kept
    in by the concentration argument. ``"literal"`` gives the squared-sigma
    variant ``(a (p0/2) sqrt(3 - 2 p0), a p0 / 2)``.
    """
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"p0 must lie in (0, 1), got {p0}")
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    if convention == "sigma":
        s1, s2 = sigma(p0)
        return a * s1, a * s2
    if convention == "literal":
        return a * p0 / 2 * math.sqrt(3 - 2 * p0), a * p0 / 2
    raise ValueError(f"unknown box convention {convention!r}")


def ceil_cbrt(t: int) -> int:
    """Exact ``ceil(t ** (1/3))`` for nonnegative integers."""
    c = int(round(t ** (1.0 / 3.0)))
    while c**3 < t:
        c += 1
    while c > 0 and (c - 1) ** 3 >= t:
        c -= 1
    return c


@dataclass(frozen=True)
class PhasePlan:
    t: int
    W: int
    H: int
    G: int
    N: int
    Z: int | None = None

    @property
    def slack(self) -> int:
        """``ceil(t^(1/3))``: extra room of the vertical offset beyond one gap."""
        return ceil_cbrt(self.t)

    @property
    def z_range(self) -> int:
        return self.G + self.slack

    @property
    def length(self) -> int:
        return 2 * self.W + 2 * self.W * self.N + 2 * self.N * self.G + 2 * self.slack

    def with_z(self, z: int) -> PhasePlan:
        if not 1 <= z <= self.z_range:
            raise ValueError(f"Z must lie in 1..{self.z_range}, got {z}")
        return replace(self, Z=z)


def phase_parameters(t: int, p0: float, A: float, B: float) -> PhasePlan:
    """Box half-width/height, line gap and line count for a phase starting at ``t``."""
    if t < 16:
        raise ValueError(f"phase start time must be >= 16, got {t}")
    scale = math.sqrt(t) / (1.0 - p0)
    W = math.ceil(A * scale)
    H = math.ceil(B * scale)
    G = math.ceil(scale / math.log(t))
    N = -(-2 * H // G)
    return PhasePlan(t, W, H, G, N)


def _segments(plan: PhasePlan) -> list[tuple[int, int]]:
    if plan.Z is None:
        raise ValueError("plan has no Z offset")
    W, H, G, N, Z = plan.W, plan.H, plan.G, plan.N, plan.Z
    segs = [(W_, W), (S_, H), (N_, Z)]
    for i in range(N):
        if i:
            segs.append((N_, G))
        segs.append((E_ if i % 2 == 0 else W_, 2 * W))
    segs.append((N_, plan.z_range - Z))
    # back to the centre: horizontal leg first, then vertical
    x_end = W if N % 2 else -W
    y_end = -H + N * G + plan.slack
    segs.append((W_ if x_end > 0 else E_, abs(x_end)))
    segs.append((S_ if y_end > 0 else N_, abs(y_end)))
    return [(d, n) for d, n in segs if n > 0]


def phase_codes(plan: PhasePlan) -> np.ndarray:
    segs = _segments(plan)
    return np.repeat(np.array([d for d, _ in segs], dtype=np.int8), [n for _, n in segs])


def phase_instructions(plan: PhasePlan) -> list[Direction]:
    return [Direction(c) for c in phase_codes(plan)]


@dataclass(frozen=True)
class StrategyConfig:
    p0: float = 0.01139
    a: float = 4.566
    alpha: float = 1.0
    t0: int = 256
    instruction_seed: int = 0
    box: BoxConvention = "sigma"
    home_offset: GridPoint | None = None

    def __post_init__(self):
        if not 0.0 < self.p0 < 1.0:
            raise ValueError(f"p0 must lie in (0, 1), got {self.p0}")
        if self.a <= 0 or self.alpha <= 0:
            raise ValueError("a and alpha must be positive")
        if self.t0 < 16:
            raise ValueError(f"t0 must be >= 16, got {self.t0}")

    @property
    def box_constants(self) -> tuple[float, float]:
        return derive_box_constants(self.p0, self.a, self.box)

    @property
    def centre(self) -> GridPoint:
        return ORIGIN if self.home_offset is None else self.home_offset

    def plan(self, t: int) -> PhasePlan:
        A, B = self.box_constants
        return phase_parameters(t, self.p0, A, B)


def home_offset(home: GridPoint, p0: float) -> GridPoint:
    """Instructed sweep centre that puts the expected position on ``home``."""
    return GridPoint(math.ceil(home.x / (1 - p0)), math.ceil(home.y / (1 - p0)))


def check_t0(config: StrategyConfig, home: GridPoint) -> None:
    """Raise ValueError unless home lies inside the first phase's box."""
    plan = config.plan(config.t0)
    rel = home - config.centre
    if abs(rel.x) > plan.W or abs(rel.y) > plan.H:
        raise ValueError(
            f"home {home} is outside the first box (+-{plan.W}, +-{plan.H}) at t0={config.t0}; raise t0"
        )


def draw_z(config: StrategyConfig, index: int, plan: PhasePlan) -> int:
    """Offset of phase ``index``: uniform on ``1..G + ceil(t^(1/3))``, fixed by the instruction seed."""
    rng = np.random.default_rng([config.instruction_seed, index])
    return int(rng.integers(1, plan.z_range + 1))


@dataclass
class Schedule:
    starts: list[int] = field(default_factory=list)
    plans: list[PhasePlan] = field(default_factory=list)

    def durations(self) -> list[int]:
        return [b - a for a, b in zip(self.starts, self.starts[1:])]


def iter_plans(config: StrategyConfig) -> Iterator[PhasePlan]:
    """Phase plans (with Z) in order, forever."""
    t, i = config.t0, 0
    while True:
        plan = config.plan(t)
        plan = plan.with_z(draw_z(config, i, plan))
        yield plan
        t += plan.length
        i += 1


def build_schedule(config: StrategyConfig, horizon: int) -> Schedule:
    """Phase start times up to and including the first one beyond ``horizon``."""
    sched = Schedule()
    for plan in iter_plans(config):
        sched.starts.append(plan.t)
        if plan.t > horizon:
            break
        sched.plans.append(plan)
    return sched


def _prelude(config: StrategyConfig) -> np.ndarray:
    c = config.centre
    lead = [(E_ if c.x > 0 else W_, abs(c.x)), (N_ if c.y > 0 else S_, abs(c.y))]
    head = np.repeat(np.array([d for d, _ in lead], dtype=np.int8), [n for _, n in lead])
    return head


def walk_time(config: StrategyConfig, t: int) -> int:
    """Walk step at which the phase with clock value ``t`` begins."""
    return t - config.t0 + len(_prelude(config))


def instruction_array(config: StrategyConfig, n: int) -> np.ndarray:
    """First ``n`` instructions of the stream as int8 codes."""
    parts = [_prelude(config)]
    total = len(parts[0])
    if total < n:
        for plan in iter_plans(config):
            block = phase_codes(plan)
            parts.append(block)
            total += len(block)
            if total >= n:
                break
    return np.concatenate(parts)[:n]


def instruction_stream(config: StrategyConfig) -> Iterator[Direction]:
    """The infinite instruction stream, lazily."""
    for c in _prelude(config):
        yield Direction(c)
    for plan in iter_plans(config):
        for c in phase_codes(plan):
            yield Direction(c)


def format_plans(plans: list[PhasePlan]) -> str:
    lines = ["# t W H G N Z length"]
    for pl in plans:
        z = "-" if pl.Z is None else str(pl.Z)
        lines.append(f"{pl.t} {pl.W} {pl.H} {pl.G} {pl.N} {z} {pl.length}")
    return "\n".join(lines) + "\n"


def parse_plans(text: str) -> list[PhasePlan]:
    plans = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        t, W, H, G, N, Z, length = line.split()
        plan = PhasePlan(int(t), int(W), int(H), int(G), int(N), None if Z == "-" else int(Z))
        if plan.length != int(length):
            raise ValueError(f"length column {length} disagrees with parameters on line {line!r}")
        plans.append(plan)
    return plans
