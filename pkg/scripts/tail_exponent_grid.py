"""Fitted tail exponent of the sweep strategy over a grid of noise levels."""

import argparse
import math

from homewalk.lattice import GridPoint, WalkConfig
from homewalk.montecarlo import ExperimentConfig, log_checkpoints, run_trials, survival_curve, tail_exponent
from homewalk.sweep import StrategyConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=lambda s: [float(v) for v in s.split(",")], default=[0.005, 0.01, 0.02, 0.05, 0.1, 0.2])
    ap.add_argument("--home", type=GridPoint.parse, default=GridPoint(5, 3))
    ap.add_argument("--trials", type=int, default=10**4)
    ap.add_argument("--max-steps", type=int, default=10**7)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    window = (1000, args.max_steps)
    print("p,alpha_hat,r_squared,censored,scaled")
    for p in args.p:
        cfg = ExperimentConfig(StrategyConfig(), WalkConfig(p, args.home, args.max_steps, args.seed), args.trials)
        stats = run_trials(cfg, workers=args.threads)
        est = tail_exponent(survival_curve(stats, log_checkpoints(1, args.max_steps, 20)), window)
        # alpha_hat / ((1-p)/sqrt(p)) would be flat if the rate were exactly that order
        scaled = est.alpha_hat / ((1 - p) / math.sqrt(p))
        print(f"{p!r},{est.alpha_hat!r},{est.r_squared!r},{stats.censored},{scaled!r}")


if __name__ == "__main__":
    main()
