"""Impossibility threshold as a function of the return-count horizon tau."""

import argparse

from homewalk.bounds import impossibility_threshold
from homewalk.cli import aitken_limit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tau-max", type=int, default=64)
    ap.add_argument("--tol", type=float, default=1e-9)
    args = ap.parse_args()

    values = []
    print("tau,threshold")
    for tau in range(4, args.tau_max + 1, 2):
        values.append(impossibility_threshold(tau, args.tol).threshold)
        print(f"{tau},{values[-1]!r}")
    print(f"# extrapolated limit: {aitken_limit(values)!r}")


if __name__ == "__main__":
    main()
