"""Compiled inner loops for the guided random walk.

Randomness is SplitMix64: trial ``i`` of a run with master seed ``m`` uses the
stream whose starting state is ``mix(m + (i + 1) * GAMMA)``; step ``k`` of that
trial consumes the ``k``-th output of the stream. Every trial is therefore a
pure function of ``(m, i)`` and the way trials are split across workers can not
change any result.

Direction codes: 0 = North, 1 = East, 2 = South, 3 = West.
"""

import numpy as np
from numba import njit

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

DX = np.array([0, 1, 0, -1], dtype=np.int64)
DY = np.array([1, 0, -1, 0], dtype=np.int64)


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def trial_seeds(master_seed, start, count):
    """Per-trial stream seeds for trials ``start .. start + count - 1``."""
    out = np.empty(count, dtype=np.uint64)
    base = np.uint64(master_seed)
    for j in range(count):
        out[j] = _mix(base + np.uint64(start + j + 1) * GAMMA)
    return out


@njit(cache=True)
def uniforms(seed, count):
    """First ``count`` uniforms in [0, 1) of the stream started at ``seed``."""
    out = np.empty(count, dtype=np.float64)
    state = np.uint64(seed)
    for k in range(count):
        state += GAMMA
        out[k] = (_mix(state) >> _S11) * _INV53
    return out


@njit(cache=True, nogil=True)
def run_walks(codes, n_steps, p, hx, hy, check_home, seeds):
    """Run one walk per seed for at most ``n_steps`` steps.

    Returns ``(hit, fx, fy, steps)``: the first time the walk sits on
    ``(hx, hy)`` (-1 if never, or if ``check_home`` is false), the position at
    the stopping time and the number of steps executed. A step is random when
    the draw ``u`` falls below ``p``; the random direction is then
    ``floor(4 u / p)``, which is uniform over all four directions.
    """
    n = seeds.shape[0]
    hit = np.full(n, -1, dtype=np.int64)
    fx = np.zeros(n, dtype=np.int64)
    fy = np.zeros(n, dtype=np.int64)
    steps = np.zeros(n, dtype=np.int64)
    scale = 4.0 / p if p > 0.0 else 0.0
    for i in range(n):
        state = seeds[i]
        x = 0
        y = 0
        h = -1
        if check_home and hx == 0 and hy == 0:
            h = 0
        t = 0
        while h < 0 and t < n_steps:
            state += GAMMA
            u = (_mix(state) >> _S11) * _INV53
            if u < p:
                k = int(u * scale)
                if k > 3:
                    k = 3
            else:
                k = codes[t]
            x += DX[k]
            y += DY[k]
            t += 1
            if check_home and x == hx and y == hy:
                h = t
        hit[i] = h
        fx[i] = x
        fy[i] = y
        steps[i] = t
    return hit, fx, fy, steps


@njit(cache=True, nogil=True)
def count_origin_returns(codes, n_steps, p, seeds):
    """Number of ``t`` in ``1..n_steps`` with ``X_t = 0``, one count per seed."""
    n = seeds.shape[0]
    out = np.zeros(n, dtype=np.int64)
    scale = 4.0 / p if p > 0.0 else 0.0
    for i in range(n):
        state = seeds[i]
        x = 0
        y = 0
        c = 0
        for t in range(n_steps):
            state += GAMMA
            u = (_mix(state) >> _S11) * _INV53
            if u < p:
                k = int(u * scale)
                if k > 3:
                    k = 3
            else:
                k = codes[t]
            x += DX[k]
            y += DY[k]
            if x == 0 and y == 0:
                c += 1
        out[i] = c
    return out
