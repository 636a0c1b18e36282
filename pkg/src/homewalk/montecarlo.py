"""Reproducible trial harness: hitting times, survival curves and tail fits.

Trial ``i`` draws its noise from a stream that depends only on the master
seed and ``i`` (see ``homewalk._kernels``). Trials are split into contiguous
chunks, one per worker, and concatenated in trial order, so the worker count
never changes a result.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from itertools import islice

import numpy as np

from homewalk import _kernels
from homewalk.bounds import sigma
from homewalk.lattice import GridPoint, WalkConfig, as_codes
from homewalk.sweep import StrategyConfig, instruction_array, iter_plans, walk_time

log = logging.getLogger(__name__)


class LowPowerWarning(UserWarning):
    """Too few surviving trials for a meaningful conditional estimate."""


@dataclass(frozen=True)
class ExperimentConfig:
    strategy: StrategyConfig
    walk: WalkConfig
    trials: int
    checkpoint_times: tuple[int, ...] = ()

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        cps = self.checkpoint_times
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError("checkpoint times must be strictly increasing")
        if cps and cps[-1] > self.walk.max_steps:
            raise ValueError("last checkpoint exceeds max_steps")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["checkpoint_times"] = list(self.checkpoint_times)
        return d


@dataclass
class HittingStats:
    trials: int
    max_steps: int
    hit_times: np.ndarray  # sorted, one entry per trial that hit
    censored: int

    def __post_init__(self):
        if len(self.hit_times) + self.censored != self.trials:
            raise ValueError("hit count plus censored count must equal trials")

    def survivors(self, t: int) -> int:
        """Trials with ``T > t``; censored trials count as ``T > max_steps``."""
        return int(len(self.hit_times) - np.searchsorted(self.hit_times, t, side="right")) + self.censored

    def summary(self) -> dict:
        h = self.hit_times
        mean = float(h.mean()) if len(h) else None
        return {
            "trials": self.trials,
            "max_steps": self.max_steps,
            "hits": int(len(h)),
            "censored": self.censored,
            "hit_fraction": len(h) / self.trials,
            # with censoring the mean over hits under-estimates E[T]
            "mean_hit_time": mean,
            "mean_is_lower_bound": self.censored > 0,
            "median_hit_time": float(np.median(h)) if len(h) else None,
            "max_hit_time": int(h[-1]) if len(h) else None,
        }


def _chunks(n: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, n))
    bounds = np.linspace(0, n, workers + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]


def _fan_out(fn, n: int, seed: int, workers: int) -> list:
    """Apply ``fn(seeds)`` to the per-trial seed chunks, results in trial order."""
    seeds = _kernels.trial_seeds(np.uint64(seed), 0, n)
    chunks = _chunks(n, workers)
    if len(chunks) == 1:
        return [fn(seeds)]
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        return list(pool.map(lambda c: fn(seeds[c[0] : c[1]]), chunks))


def run_walks(codes: np.ndarray, n_steps: int, p: float, home: GridPoint | None, trials: int, seed: int, workers: int = 1):
    """``(hit, x, y)`` arrays for ``trials`` independent walks; ``hit`` is -1 when home was not reached."""
    codes = as_codes(codes)
    if len(codes) < n_steps:
        raise ValueError(f"need {n_steps} instructions, got {len(codes)}")
    hx, hy = (0, 0) if home is None else (home.x, home.y)
    fn = lambda s: _kernels.run_walks(codes, n_steps, float(p), hx, hy, home is not None, s)
    parts = _fan_out(fn, trials, seed, workers)
    hit = np.concatenate([r[0] for r in parts])
    x = np.concatenate([r[1] for r in parts])
    y = np.concatenate([r[2] for r in parts])
    return hit, x, y


def run_trials(config: ExperimentConfig, workers: int = 1, instructions: np.ndarray | None = None) -> HittingStats:
    """Run the sweep strategy (or the given instructions) ``config.trials`` times."""
    walk = config.walk
    if instructions is None:
        instructions = instruction_array(config.strategy, walk.max_steps)
    hit, _, _ = run_walks(instructions, walk.max_steps, walk.p, walk.home, config.trials, walk.seed, workers)
    hits = np.sort(hit[hit >= 0])
    return HittingStats(config.trials, walk.max_steps, hits, int(np.count_nonzero(hit < 0)))


@dataclass
class SurvivalCurve:
    trials: int
    times: np.ndarray
    survivors: np.ndarray

    @property
    def fraction(self) -> np.ndarray:
        return self.survivors / self.trials

    @property
    def stderr(self) -> np.ndarray:
        q = self.fraction
        return np.sqrt(q * (1 - q) / self.trials)

    def rows(self):
        for t, s, q, e in zip(self.times, self.survivors, self.fraction, self.stderr):
            yield int(t), int(s), float(q), float(e)

    def to_csv(self) -> str:
        lines = ["t,survivors,fraction,stderr"]
        lines += [f"{t},{s},{q!r},{e!r}" for t, s, q, e in self.rows()]
        return "\n".join(lines) + "\n"


def survival_curve(stats: HittingStats, checkpoints) -> SurvivalCurve:
    cps = np.asarray(checkpoints, dtype=np.int64)
    if len(cps) and cps[-1] > stats.max_steps:
        raise ValueError("checkpoint beyond the step budget")
    surv = np.array([stats.survivors(int(t)) for t in cps], dtype=np.int64)
    return SurvivalCurve(stats.trials, cps, surv)


def log_checkpoints(t_min: int, t_max: int, per_decade: int = 10) -> list[int]:
    n = int(math.ceil(per_decade * math.log10(t_max / t_min))) + 1
    return sorted({int(round(t)) for t in np.geomspace(t_min, t_max, n)})


@dataclass
class TailEstimate:
    alpha_hat: float
    fit_window: tuple[int, int]
    r_squared: float
    points: int
    intercept: float = 0.0


def tail_exponent(curve: SurvivalCurve, window: tuple[int, int] | None = None, min_points: int = 5) -> TailEstimate:
    """Least-squares fit of ``log P(T > t) = c - alpha log t`` over ``window``.

    Points at or below the noise floor (survival of 10 trials) are dropped.
    """
    t = curve.times.astype(float)
    q = curve.fraction
    keep = q > 10.0 / curve.trials
    if window is not None:
        keep &= (t >= window[0]) & (t <= window[1])
    if np.count_nonzero(keep) < min_points:
        raise ValueError(f"only {np.count_nonzero(keep)} usable curve points, need {min_points}")
    lx, ly = np.log(t[keep]), np.log(q[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    used = t[keep]
    return TailEstimate(-float(slope), (int(used[0]), int(used[-1])), r2, int(keep.sum()), float(intercept))


def empirical_return_count(p: float, tau: int, instructions, trials: int, seed: int, workers: int = 1) -> tuple[float, float]:
    """Mean and standard error of ``#{t in 1..tau : X_t = 0}``.

    The ``t = 0`` visit is not counted; add 1 before comparing with the
    return-count lower bound.
    """
    codes = as_codes(instructions, tau)
    if len(codes) < tau:
        raise ValueError(f"need {tau} instructions, got {len(codes)}")
    fn = lambda s: _kernels.count_origin_returns(codes, tau, float(p), s)
    counts = np.concatenate(_fan_out(fn, trials, seed, workers))
    sd = float(counts.std(ddof=1)) if trials > 1 else 0.0
    return float(counts.mean()), sd / math.sqrt(trials)


@dataclass
class BoxContainment:
    phase_index: int
    t: int
    walk_step: int
    half_width: float
    half_height: float
    survivors: int
    inside: int
    low_power: bool

    @property
    def fraction(self) -> float:
        return self.inside / self.survivors if self.survivors else float("nan")

    @property
    def outside_fraction(self) -> float:
        return 1.0 - self.fraction


def empirical_box_containment(
    config: ExperimentConfig, phase_index: int, trials: int | None = None, a: float | None = None, workers: int = 1
) -> BoxContainment:
    """Share of trials still searching at the start of phase ``phase_index`` that sit in its box.

    The box is ``(+-a sigma1 sqrt(t_i), +-a sigma2 sqrt(t_i))`` around the sweep
    centre, ``t_i`` the phase clock. Conditioning on ``T`` exceeding the phase
    start is done by discarding trials that already hit home.
    """
    trials = config.trials if trials is None else trials
    a = config.strategy.a if a is None else a
    t_i = next(islice(iter_plans(config.strategy), phase_index, None)).t
    s_i = walk_time(config.strategy, t_i)
    codes = instruction_array(config.strategy, s_i)
    hit, x, y = run_walks(codes, s_i, config.walk.p, config.walk.home, trials, config.walk.seed, workers)
    alive = hit < 0
    s1, s2 = sigma(config.walk.p)
    hw, hh = a * s1 * math.sqrt(t_i), a * s2 * math.sqrt(t_i)
    c = config.strategy.centre
    inside = alive & (np.abs(x - c.x) <= hw) & (np.abs(y - c.y) <= hh)
    n_alive = int(alive.sum())
    low = n_alive < 100
    if low:
        warnings.warn(f"only {n_alive} surviving trials at t={t_i}", LowPowerWarning, stacklevel=2)
    return BoxContainment(phase_index, t_i, s_i, hw, hh, n_alive, int(inside.sum()), low)


def stats_json(stats: HittingStats, config: ExperimentConfig | None = None) -> str:
    doc = {"summary": stats.summary()}
    if config is not None:
        doc["config"] = config.to_dict()
    return json.dumps(doc, indent=2, default=str) + "\n"
