"""Share of surviving walkers outside the phase box, per phase and box scale."""

import argparse
import math
import warnings

from homewalk.lattice import GridPoint, WalkConfig
from homewalk.montecarlo import ExperimentConfig, LowPowerWarning, empirical_box_containment
from homewalk.sweep import StrategyConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=0.01)
    ap.add_argument("--home", type=GridPoint.parse, default=GridPoint(40, 40))
    ap.add_argument("--trials", type=int, default=10**4)
    ap.add_argument("--phases", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = ExperimentConfig(StrategyConfig(), WalkConfig(args.p, args.home, 10**8, args.seed), args.trials)
    print("phase,t,a,survivors,outside,reference")
    for i in range(args.phases):
        for a in (1.0, 2.0, 3.0, 4.566):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", LowPowerWarning)
                r = empirical_box_containment(cfg, i, a=a)
            ref = 4 * math.exp(-a * a / 4 + 2)
            print(f"{i},{r.t},{a},{r.survivors},{r.outside_fraction!r},{ref!r}")


if __name__ == "__main__":
    main()
