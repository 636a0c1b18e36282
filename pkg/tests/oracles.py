"""Independent reference computations used by the tests.

None of these share code paths with the package: they enumerate paths,
use closed forms of the simple random walk, or re-derive formulas with
mpmath.
"""

import itertools
import math
from collections import defaultdict

import mpmath
import numpy as np

STEPS = [(0, 1), (1, 0), (0, -1), (-1, 0)]  # N, E, S, W


def enumerate_law(codes, p):
    """Exact law of the endpoint by expanding every step into 5 weighted branches."""
    law = {(0, 0): 1.0}
    for c in codes:
        nxt = defaultdict(float)
        for (x, y), w in law.items():
            dx, dy = STEPS[c]
            nxt[(x + dx, y + dy)] += w * (1 - p)
            for dx, dy in STEPS:
                nxt[(x + dx, y + dy)] += w * p / 4
        law = dict(nxt)
    return law


def srw_first_hit_at(home, t):
    """P(T = t) for the simple random walk by listing all 4^t paths."""
    hits = 0
    for path in itertools.product(STEPS, repeat=t):
        x = y = 0
        first = None
        for s, (dx, dy) in enumerate(path, start=1):
            x += dx
            y += dy
            if (x, y) == home:
                first = s
                break
        if first == t:
            hits += 1
    return hits / 4**t


def srw_point_mass(t, a, b):
    """P(X_t = (a, b)) for the simple random walk via the rotated coordinates u=a+b, v=a-b."""
    u, v = a + b, a - b
    if (t + u) % 2 or abs(u) > t or abs(v) > t:
        return 0.0
    lg = math.lgamma
    logc = lambda n, k: lg(n + 1) - lg(k + 1) - lg(n - k + 1)
    return math.exp(logc(t, (t + u) // 2) + logc(t, (t + v) // 2) - t * math.log(4))


def srw_first_passage(home, n):
    """P(T = t), t = 1..n, for the simple random walk by renewal deconvolution.

    P(X_t = h) = sum_{s <= t} f_s P(X_{t-s} = 0).
    """
    q_h = np.array([srw_point_mass(t, *home) for t in range(n + 1)])
    q_0 = np.array([srw_point_mass(t, 0, 0) for t in range(n + 1)])
    f = np.zeros(n + 1)
    for t in range(1, n + 1):
        f[t] = q_h[t] - np.dot(f[1:t], q_0[t - 1 : 0 : -1])
    return f[1:]


def srw_return_mass(tau):
    """sum_{k <= tau/2} P(X_{2k} = 0) for the simple random walk, exact rationals."""
    from fractions import Fraction

    total = Fraction(0)
    for k in range(tau // 2 + 1):
        total += Fraction(math.comb(2 * k, k) ** 2, 4 ** (2 * k))
    return float(total)


def hp_phase(t, p0, A, B):
    """(W, H, G, N) at 50 digits."""
    with mpmath.workdps(50):
        t, p0, A, B = mpmath.mpf(t), mpmath.mpf(p0), mpmath.mpf(A), mpmath.mpf(B)
        s = mpmath.sqrt(t) / (1 - p0)
        W = int(mpmath.ceil(A * s))
        H = int(mpmath.ceil(B * s))
        G = int(mpmath.ceil(s / mpmath.log(t)))
        N = int(mpmath.ceil(mpmath.mpf(2 * H) / G))
    return W, H, G, N


def hp_objective(a, alpha):
    with mpmath.workdps(50):
        a = mpmath.mpf(a)
        return float((1 - 4 * mpmath.exp(2 * alpha - a * a / 4)) / (2 * a * a))
