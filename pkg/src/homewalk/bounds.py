"""Return-count lower bound, the two analytic threshold conditions, and their solvers.

Walk counts and binomials are exact Python integers; floating point only
enters when the return-count sum is combined for a given ``p``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

DEFAULT_TAU_CAP = 64


class ThresholdError(RuntimeError):
    """A threshold or optimum could not be certified."""


def sigma(p: float) -> tuple[float, float]:
    """Per-step standard deviations ``(along, across)`` the instructed axis."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return math.sqrt(p / 2 * (3 - 2 * p)), math.sqrt(p / 2)


@dataclass(frozen=True)
class WalkCountTable:
    """``counts[a + r][b + r]`` is the number of ``r``-step nearest-neighbour walks from 0 to ``(a, b)``."""

    r: int
    counts: tuple[tuple[int, ...], ...]

    def __call__(self, a: int, b: int) -> int:
        if abs(a) > self.r or abs(b) > self.r:
            return 0
        return self.counts[a + self.r][b + self.r]

    def items(self):
        r = self.r
        for a in range(-r, r + 1):
            for b in range(-r, r + 1):
                if abs(a) + abs(b) <= r and (a + b - r) % 2 == 0:
                    yield (a, b), self.counts[a + r][b + r]


def _check_cap(r: int, cap: int) -> None:
    if r < 0:
        raise ValueError(f"step count must be nonnegative, got {r}")
    if r > cap:
        raise ValueError(f"step count {r} exceeds cap {cap}")


@lru_cache(maxsize=None)
def _walk_counts(r: int) -> WalkCountTable:
    if r == 0:
        return WalkCountTable(0, ((1,),))
    prev = _walk_counts(r - 1)
    size = 2 * r + 1
    rows = []
    for i in range(size):
        a = i - r
        row = []
        for j in range(size):
            b = j - r
            row.append(prev(a - 1, b) + prev(a + 1, b) + prev(a, b - 1) + prev(a, b + 1))
        rows.append(tuple(row))
    return WalkCountTable(r, tuple(rows))


def walk_counts(r: int, cap: int = DEFAULT_TAU_CAP) -> WalkCountTable:
    _check_cap(r, cap)
    return _walk_counts(r)


@lru_cache(maxsize=None)
def _w_min(r: int, s: int) -> int:
    table = _walk_counts(r)
    best = None
    for a in range(-s, s + 1):
        rest = s - abs(a)
        for b in range(-rest, rest + 1):
            if (a + b - s) % 2:
                continue
            v = table(a, b)
            if best is None or v < best:
                best = v
                if v == 0:
                    return 0
    return best


def w_min(r: int, s: int, cap: int = DEFAULT_TAU_CAP) -> int:
    """Minimum of ``W_r(a, b)`` over ``|a| + |b| <= s`` with ``a + b = s (mod 2)``."""
    _check_cap(r, cap)
    _check_cap(s, cap)
    return _w_min(r, s)


@lru_cache(maxsize=None)
def _integer_coefficients(tau: int) -> tuple[tuple[int, int, int], ...]:
    """``(r, s, C(r+s, r) * W_{r,s})`` for every nonzero term of the sum."""
    out = []
    for k in range(tau // 2 + 1):
        for r in range(2 * k + 1):
            s = 2 * k - r
            c = math.comb(r + s, r) * _w_min(r, s)
            if c:
                out.append((r, s, c))
    return tuple(out)


@dataclass
class RTauReport:
    tau: int
    p: float
    value: float
    per_k_terms: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _check_tau(tau: int, cap: int) -> None:
    if tau < 2 or tau % 2:
        raise ValueError(f"tau must be an even integer >= 2, got {tau}")
    if tau > cap:
        raise ValueError(f"tau {tau} exceeds cap {cap}")


def r_tau_lower_bound(tau: int, p: float, cap: int = DEFAULT_TAU_CAP) -> RTauReport:
    """Lower bound on the least expected number of visits to the start in ``0..tau``.

    Sum over ``k <= tau/2`` of the bound on ``P(X_{2k} = 0)`` obtained by
    splitting ``2k`` steps into ``r`` random and ``s`` instructed ones.
    """
    _check_tau(tau, cap)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    terms = [0.0] * (tau // 2 + 1)
    q = p / 4.0
    for r, s, c in _integer_coefficients(tau):
        terms[(r + s) // 2] += float(c) * (1.0 - p) ** s * q**r
    return RTauReport(tau, p, math.fsum(terms), terms)


def r4_closed_form(p: float) -> float:
    return (
        1
        + p**2 / 4
        + p * (1 - p) / 2
        + 9 * p**4 / 64
        + 9 * p**3 * (1 - p) / 16
        + 3 * p**2 * (1 - p) ** 2 / 8
    )


def impossibility_margin(p: float, tau: int = 4) -> tuple[float, bool]:
    """``rhs = 4 / (pi p sqrt(3 - 2p) R_tau(p))`` and whether ``rhs >= 1``.

    ``holds == False`` means no instruction sequence has finite expected hitting time at ``p``.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    rhs = 4.0 / (math.pi * p * math.sqrt(3 - 2 * p) * r_tau_lower_bound(tau, p).value)
    return rhs, rhs >= 1.0


@dataclass
class ThresholdReport:
    kind: str
    parameter: float
    threshold: float
    lo: float
    hi: float
    tol: float
    iterations: int
    extra: dict = field(default_factory=dict)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_dict(self) -> dict:
        d = asdict(self)
        d["width"] = self.width
        return d


def assert_monotone(f: Callable[[float], float], lo: float, hi: float, increasing: bool, samples: int = 2001) -> None:
    """Dense-sample ``f`` on ``[lo, hi]`` and raise ThresholdError unless it is strictly monotone."""
    xs = np.linspace(lo, hi, samples)
    ys = np.array([f(x) for x in xs])
    d = np.diff(ys)
    ok = np.all(d > 0) if increasing else np.all(d < 0)
    if not ok:
        bad = int(np.argmax(d <= 0) if increasing else np.argmax(d >= 0))
        raise ThresholdError(f"condition not monotone near x={xs[bad]:.6g}; refusing to bisect")


def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float, int]:
    """Shrink ``[lo, hi]`` around the sign change of ``f`` until narrower than ``tol``."""
    flo, fhi = f(lo), f(hi)
    if (flo > 0) == (fhi > 0):
        raise ThresholdError(f"no sign change on [{lo}, {hi}]: f={flo:.6g}, {fhi:.6g}")
    it = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0) == (flo > 0):
            lo = mid
        else:
            hi = mid
        it += 1
    return lo, hi, it


def impossibility_threshold(tau: int = 4, tol: float = 1e-9) -> ThresholdReport:
    """Smallest ``p`` beyond which the return-count condition fails, for this ``tau``."""
    if tol < 1e-9:
        raise ValueError("tol must be >= 1e-9")
    _check_tau(tau, DEFAULT_TAU_CAP)
    g = lambda p: impossibility_margin(p, tau)[0] - 1.0
    lo, hi = 1e-3, 1.0
    assert_monotone(g, lo, hi, increasing=False, samples=1001)
    lo, hi, it = bisect(g, lo, hi, tol)
    return ThresholdReport("impossibility", float(tau), 0.5 * (lo + hi), lo, hi, tol, it)


def feasibility_objective(a: float, alpha: float = 1.0) -> float:
    """``(1 - 4 exp(2 alpha - a^2/4)) / (2 a^2)``, the ``p0``-free side of the sweep condition."""
    if a <= 0 or alpha <= 0:
        raise ValueError("a and alpha must be positive")
    e = 2 * alpha - a * a / 4
    if e > 700:
        return -math.inf
    return (1.0 - 4.0 * math.exp(e)) / (2 * a * a)


PHI = (math.sqrt(5) - 1) / 2


def golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-6) -> tuple[float, float, int]:
    """Golden-section search for the maximum of a unimodal ``f`` on ``[lo, hi]``."""
    x1 = hi - PHI * (hi - lo)
    x2 = lo + PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    it = 0
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + PHI * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - PHI * (hi - lo)
            f1 = f(x1)
        it += 1
    x = 0.5 * (lo + hi)
    return x, f(x), it


def _assert_unimodal(f: Callable[[float], float], lo: float, hi: float, samples: int = 4001) -> None:
    xs = np.geomspace(lo, hi, samples)
    ys = np.array([f(x) for x in xs])
    d = np.diff(ys[np.isfinite(ys)])
    s = np.sign(d[d != 0])
    # at most one switch, and only from rising to falling
    switches = np.flatnonzero(s[1:] != s[:-1])
    if len(switches) > 1 or (len(switches) == 1 and s[0] < 0):
        raise ThresholdError(f"objective is not unimodal on [{lo}, {hi}]: {len(switches)} slope changes")


def optimize_a(alpha: float = 1.0, lo: float = 0.1, hi: float = 100.0, tol: float = 1e-6) -> tuple[float, float]:
    """Box scale ``a`` maximising feasibility_objective, with the maximum."""
    f = lambda a: feasibility_objective(a, alpha)
    _assert_unimodal(f, lo, hi)
    a_star, value, _ = golden_max(f, lo, hi, tol)
    return a_star, value


def feasibility_rhs(p0: float) -> float:
    return p0 * math.sqrt(3 - 2 * p0) / (1 - p0) ** 2


def feasibility_threshold(alpha: float = 1.0, tol: float = 1e-12) -> ThresholdReport:
    """Largest ``p0`` for which some ``a`` satisfies ``objective(a) > alpha * rhs(p0)``."""
    a_star, c = optimize_a(alpha)
    if c <= 0:
        raise ThresholdError(f"objective max {c:.6g} <= 0 at alpha={alpha}: no feasible p0")
    g = lambda p0: c - alpha * feasibility_rhs(p0)
    lo, hi = 1e-12, 1 - 1e-6
    assert_monotone(feasibility_rhs, lo, 0.99, increasing=True)
    lo, hi, it = bisect(g, lo, hi, tol)
    return ThresholdReport(
        "feasibility", alpha, 0.5 * (lo + hi), lo, hi, tol, it, {"a_star": a_star, "objective": c}
    )
