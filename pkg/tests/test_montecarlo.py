import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from homewalk.bounds import r4_closed_form
from homewalk.lattice import Direction, GridPoint, WalkConfig, first_passage_distribution, straight_line, zigzag
from homewalk.montecarlo import (
    ExperimentConfig,
    HittingStats,
    LowPowerWarning,
    SurvivalCurve,
    empirical_box_containment,
    empirical_return_count,
    log_checkpoints,
    run_trials,
    stats_json,
    survival_curve,
    tail_exponent,
)
from homewalk.sweep import StrategyConfig, instruction_array

from oracles import STEPS, srw_first_passage


def experiment(p, home, max_steps, trials, seed=0, strategy=None, checkpoints=()):
    return ExperimentConfig(strategy or StrategyConfig(), WalkConfig(p, home, max_steps, seed), trials, tuple(checkpoints))


def test_noiseless_hit_on_first_sweep_line():
    cfg = StrategyConfig()
    codes = instruction_array(cfg, 2000)
    pos = np.cumsum(np.array(STEPS)[codes], axis=0)
    first = {}
    for k, (x, y) in enumerate(pos, start=1):
        first.setdefault((int(x), int(y)), k)
    # a cell on the first horizontal line, well away from the corner
    target = max(first.items(), key=lambda kv: kv[0][0] if kv[1] < 200 else -10**9)
    home, k = GridPoint(*target[0]), target[1]
    stats = run_trials(experiment(0.0, home, 2000, 50))
    assert stats.censored == 0
    assert np.all(stats.hit_times == k)


def test_workers_do_not_change_results():
    cfg = experiment(0.05, GridPoint(5, 3), 200_000, 3000, seed=17)
    a, b = run_trials(cfg, workers=1), run_trials(cfg, workers=8)
    assert a.censored == b.censored
    assert np.array_equal(a.hit_times, b.hit_times)
    assert stats_json(a, cfg) == stats_json(b, cfg)


def test_seed_changes_results():
    a = run_trials(experiment(0.3, GridPoint(2, 1), 5000, 500, seed=1))
    b = run_trials(experiment(0.3, GridPoint(2, 1), 5000, 500, seed=2))
    assert not np.array_equal(a.hit_times, b.hit_times)


def test_censored_fraction_small_regime():
    stats = run_trials(experiment(0.005, GridPoint(5, 3), 10**7, 10**4))
    assert stats.censored / stats.trials < 0.05
    s = stats.summary()
    assert s["hits"] + s["censored"] == s["trials"]


def test_summary_flags_censoring():
    stats = HittingStats(4, 10, np.array([3, 7]), 2)
    assert stats.summary()["mean_is_lower_bound"] is True
    with pytest.raises(ValueError):
        HittingStats(4, 10, np.array([3]), 2)


def test_config_checks():
    with pytest.raises(ValueError):
        experiment(0.1, GridPoint(1, 1), 100, 0)
    with pytest.raises(ValueError):
        experiment(0.1, GridPoint(1, 1), 100, 10, checkpoints=(5, 3))
    with pytest.raises(ValueError):
        experiment(0.1, GridPoint(1, 1), 100, 10, checkpoints=(5, 300))


# -- survival curves ----------------------------------------------------------------


def test_survival_all_hit_at_five():
    stats = HittingStats(10, 100, np.full(10, 5), 0)
    curve = survival_curve(stats, [4, 5])
    assert list(curve.fraction) == [1.0, 0.0]


def test_survival_counts_censored_as_alive():
    stats = HittingStats(4, 100, np.array([1, 50]), 2)
    curve = survival_curve(stats, [1, 50, 100])
    assert list(curve.survivors) == [3, 2, 2]


@given(st.lists(st.integers(0, 1000), min_size=1, max_size=200), st.integers(0, 50))
def test_survival_monotone(hits, censored):
    stats = HittingStats(len(hits) + censored, 1000, np.sort(np.array(hits)), censored)
    curve = survival_curve(stats, log_checkpoints(1, 1000, 15))
    q = curve.fraction
    assert np.all((q >= 0) & (q <= 1))
    assert np.all(np.diff(q) <= 0)
    assert curve.survivors[-1] == censored


def test_survival_rejects_late_checkpoint():
    with pytest.raises(ValueError):
        survival_curve(HittingStats(1, 10, np.array([1]), 0), [11])


def test_survival_csv():
    curve = survival_curve(HittingStats(4, 10, np.array([1, 2, 3]), 1), [1, 2])
    assert curve.to_csv().splitlines() == ["t,survivors,fraction,stderr", f"1,3,0.75,{math.sqrt(0.75 * 0.25 / 4)!r}", f"2,2,0.5,0.25"]


def test_survival_matches_first_passage_dp():
    n, trials = 512, 50_000
    codes = straight_line(Direction.NORTH, n)
    stats = run_trials(experiment(1.0, GridPoint(1, 0), n, trials, seed=8), instructions=codes)
    cps = np.arange(1, n + 1)
    curve = survival_curve(stats, cps)
    fp = np.array([q for _, q in first_passage_distribution(codes, 1.0, GridPoint(1, 0))])
    tail = 1.0 - np.cumsum(fp)
    se = np.sqrt(tail * (1 - tail) / trials)
    assert np.all(np.abs(curve.fraction - tail) <= 4 * se + 1e-12)


def test_first_passage_dp_matches_renewal_beyond_dp_range():
    # the DP window at n=10^4 is beyond the memory cap; the renewal oracle covers it
    trials, n = 20_000, 10_000
    stats = run_trials(experiment(1.0, GridPoint(1, 0), n, trials, seed=4), instructions=zigzag(n))
    q = 1.0 - srw_first_passage((1, 0), n).sum()
    se = math.sqrt(q * (1 - q) / trials)
    assert abs(stats.survivors(n) / trials - q) <= 3 * se


# -- tail exponents -------------------------------------------------------------------


def synthetic(alpha, noise=0.0, seed=0):
    t = np.array(log_checkpoints(1, 10**6, 10))
    q = t ** (-alpha) * (1 + noise * np.random.default_rng(seed).standard_normal(len(t)))
    trials = 10**9
    return SurvivalCurve(trials, t, np.round(q * trials).astype(np.int64))


def test_tail_exact_power_law():
    est = tail_exponent(synthetic(0.5))
    assert est.alpha_hat == pytest.approx(0.5, abs=1e-6)
    assert est.r_squared > 0.999999


@pytest.mark.parametrize("seed", range(5))
def test_tail_noisy_power_law(seed):
    assert tail_exponent(synthetic(0.5, 0.05, seed)).alpha_hat == pytest.approx(0.5, abs=0.05)


def test_tail_window_and_floor():
    curve = synthetic(0.5)
    est = tail_exponent(curve, (100, 10**4))
    assert est.fit_window[0] >= 100 and est.fit_window[1] <= 10**4
    sparse = SurvivalCurve(1000, np.array([1, 10, 100, 1000, 10**4, 10**5]), np.array([900, 500, 100, 9, 5, 1]))
    with pytest.raises(ValueError):
        tail_exponent(sparse)


def test_tail_ordering_in_p():
    est = {}
    for p in (0.1, 0.4):
        stats = run_trials(experiment(p, GridPoint(5, 3), 10**6, 2000, seed=5))
        est[p] = tail_exponent(survival_curve(stats, log_checkpoints(1, 10**6, 20)), (1000, 10**6)).alpha_hat
    assert est[0.1] > est[0.4] > 0


# -- return counts ------------------------------------------------------------------------


def test_return_count_noiseless():
    mean, se = empirical_return_count(0.0, 4, straight_line(Direction.NORTH, 4), 1000, seed=0)
    assert mean == 0.0 and se == 0.0


@pytest.mark.parametrize("p", [1.0, 0.8])
def test_return_count_straight_line(p):
    mean, se = empirical_return_count(p, 4, straight_line(Direction.NORTH, 4), 10**6, seed=3)
    assert abs(mean + 1 - r4_closed_form(p)) <= 3 * se


def test_return_count_values():
    assert r4_closed_form(1.0) == 1.390625
    assert r4_closed_form(0.8) == pytest.approx(1.3648, abs=1e-12)


def test_return_count_needs_instructions():
    with pytest.raises(ValueError):
        empirical_return_count(0.5, 4, straight_line(Direction.NORTH, 3), 10, seed=0)


# -- box containment ------------------------------------------------------------------------


def test_box_noiseless():
    cfg = experiment(0.0, GridPoint(500, 500), 10**6, 200)
    res = empirical_box_containment(cfg, 2)
    assert res.fraction == 1.0 and res.survivors == 200


def test_box_outside_bound():
    a = 4.566
    cfg = experiment(0.01, GridPoint(40, 40), 10**7, 4000, seed=6)
    res = empirical_box_containment(cfg, 3, a=a)
    assert not res.low_power
    bound = 4 * math.exp(-a * a / 4 + 2)
    se = math.sqrt(res.outside_fraction * (1 - res.outside_fraction) / res.survivors)
    assert res.outside_fraction <= bound + 3 * se


def test_box_nested_in_a():
    cfg = experiment(0.2, GridPoint(60, 60), 10**7, 4000, seed=2)
    out = [empirical_box_containment(cfg, 4, a=a).outside_fraction for a in (2.0, 3.0, 4.0, 5.0, 6.0)]
    assert all(b <= a for a, b in zip(out, out[1:]))
    assert out[0] > out[-1]


def test_box_low_power_warning():
    # home next to the start: almost everyone has hit before the phase begins
    cfg = experiment(0.5, GridPoint(1, 0), 10**6, 150, seed=1)
    with pytest.warns(LowPowerWarning):
        res = empirical_box_containment(cfg, 3)
    assert res.low_power


def test_stats_json_roundtrip():
    cfg = experiment(0.1, GridPoint(2, 2), 1000, 100)
    doc = json.loads(stats_json(run_trials(cfg), cfg))
    assert doc["summary"]["trials"] == 100
