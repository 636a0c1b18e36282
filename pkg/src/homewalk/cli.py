"""Command-line entry point.

Every run writes its outputs plus ``manifest.json`` into ``--out``; ``replay``
re-executes a manifest and reproduces the outputs byte for byte.

Exit codes: 0 success, 1 runtime or resource error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from homewalk import __version__
from homewalk import bounds, lattice, montecarlo, sweep
from homewalk.lattice import Direction, GridPoint

MANIFEST = "manifest.json"


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    return "NA" if x is None else repr(float(x))


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _write(out: Path, name: str, text: str, written: list[str]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / name, "w", newline="\n") as fh:
        fh.write(text)
    written.append(name)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _point(text: str) -> GridPoint:
    try:
        return GridPoint.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


# -- simulate ---------------------------------------------------------------


def default_checkpoints(max_steps: int) -> list[int]:
    if max_steps <= 1024:
        return list(range(1, max_steps + 1))
    return montecarlo.log_checkpoints(1, max_steps, per_decade=20)


def run_simulate(params: dict, out: Path, threads: int) -> list[str]:
    if not 0.0 <= params["p"] <= 1.0:
        raise UsageError("--p must lie in [0, 1]")
    if params["trials"] < 1 or params["max_steps"] < 1:
        raise UsageError("--trials and --max-steps must be positive")
    home = GridPoint.parse(params["home"])
    try:
        strategy = sweep.StrategyConfig(p0=params["p0"], a=params["a"], alpha=params["alpha"], t0=params["t0"])
        sweep.check_t0(strategy, home)
        cps = params["checkpoints"] or default_checkpoints(params["max_steps"])
        config = montecarlo.ExperimentConfig(
            strategy,
            lattice.WalkConfig(params["p"], home, params["max_steps"], params["seed"]),
            params["trials"],
            tuple(cps),
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    stats = montecarlo.run_trials(config, workers=threads)
    curve = montecarlo.survival_curve(stats, config.checkpoint_times)
    doc = {"config": config.to_dict(), "summary": stats.summary()}
    if config.trials == 1:
        doc["hit_time"] = int(stats.hit_times[0]) if len(stats.hit_times) else None
    written: list[str] = []
    _write(out, "survival.csv", curve.to_csv(), written)
    _write(out, "stats.json", json.dumps(doc, indent=2, default=str) + "\n", written)
    return written


# -- bounds -----------------------------------------------------------------


def _first_within(taus, values, target, tol):
    for tau, v in zip(taus, values):
        if abs(v - target) <= tol:
            return tau
    return None


def aitken_limit(values: list[float]) -> float | None:
    """Delta-squared extrapolation of the last three terms of a converging sequence."""
    if len(values) < 3:
        return None
    x0, x1, x2 = values[-3:]
    den = x2 - 2 * x1 + x0
    return x2 if den == 0 else x2 - (x2 - x1) ** 2 / den


def run_bounds(params: dict, out: Path, threads: int) -> list[str]:
    tol = params["tol"]
    written: list[str] = []
    try:
        if params["tau_max"] is not None:
            tau_max = params["tau_max"]
            if tau_max % 2 or tau_max < 4:
                raise UsageError("--tau-max must be even and >= 4")
            taus = list(range(4, tau_max + 1, 2))
            reports = [bounds.impossibility_threshold(t, tol) for t in taus]
            lines = ["tau,threshold,lo,hi,iterations"]
            lines += [f"{r.parameter:.0f},{r.threshold!r},{r.lo!r},{r.hi!r},{r.iterations}" for r in reports]
            _write(out, "thresholds.csv", "\n".join(lines) + "\n", written)
            values = [r.threshold for r in reports]
            doc = {
                "tau_max": tau_max,
                "tol": tol,
                "nonincreasing": all(b <= a for a, b in zip(values, values[1:])),
                "target": 0.6554,
                "first_tau_within_1e-3": _first_within(taus, values, 0.6554, 1e-3),
                "extrapolated_limit": aitken_limit(values),
            }
            _write(out, "thresholds.json", _dump(doc), written)
            return written
        tau = params["tau"]
        if tau is None or tau % 2 or tau < 2:
            raise UsageError("--tau must be an even integer >= 2")
        if params["p"] is not None:
            p = params["p"]
            if not 0.0 <= p <= 1.0:
                raise UsageError("--p must lie in [0, 1]")
            doc = bounds.r_tau_lower_bound(tau, p).to_dict()
            if p > 0:
                rhs, holds = bounds.impossibility_margin(p, tau)
                doc.update(rhs=rhs, holds=holds)
            _write(out, "r_tau.json", _dump(doc), written)
        report = bounds.impossibility_threshold(tau, tol)
        _write(out, "threshold.json", _dump(report.to_dict()), written)
    except ValueError as exc:
        raise UsageError(str(exc))
    return written


# -- optimize ---------------------------------------------------------------


def run_optimize(params: dict, out: Path, threads: int) -> list[str]:
    alpha = params["alpha"]
    if alpha <= 0:
        raise UsageError("--alpha must be positive")
    a_star, value = bounds.optimize_a(alpha, tol=params["tol"])
    if value <= 0:
        raise bounds.ThresholdError(f"objective max {value!r} <= 0 at alpha={alpha}: no feasible p0")
    report = bounds.feasibility_threshold(alpha)
    doc = {"alpha": alpha, "tol": params["tol"], "a_star": a_star, "objective": value, "p0_threshold": report.threshold,
           "p0_bracket": [report.lo, report.hi], "iterations": report.iterations}
    written: list[str] = []
    _write(out, "optimize.json", _dump(doc), written)
    return written


# -- anticoncentration ------------------------------------------------------


def preset_instructions(name: str, t: int):
    if name == "straight":
        return lattice.straight_line(Direction.NORTH, t)
    if name == "zigzag":
        return lattice.zigzag(t)
    if name == "sweep":
        return sweep.instruction_array(sweep.StrategyConfig(t0=16), t)
    raise UsageError(f"unknown instruction preset {name!r}")


def anticoncentration_bound(t: int, p: float) -> float | None:
    if p <= 0 or t <= 0:
        return None
    return 2.0 / (math.pi * t * p * math.sqrt(3 - 2 * p))


def run_anticoncentration(params: dict, out: Path, threads: int) -> list[str]:
    p = params["p"]
    if not 0.0 <= p <= 1.0:
        raise UsageError("--p must lie in [0, 1]")
    lines = ["t,max_mass,argmax_x,argmax_y,bound,ratio"]
    for t in params["t"]:
        if t < 0:
            raise UsageError("--t values must be nonnegative")
        dist = lattice.exact_distribution(preset_instructions(params["instructions"], t), p)
        cell, mass = lattice.max_point_probability(dist)
        bound = anticoncentration_bound(t, p)
        ratio = None if bound is None else mass / bound
        lines.append(f"{t},{mass!r},{cell.x},{cell.y},{_fmt(bound)},{_fmt(ratio)}")
    written: list[str] = []
    _write(out, "anticoncentration.csv", "\n".join(lines) + "\n", written)
    return written


RUNNERS = {
    "simulate": run_simulate,
    "bounds": run_bounds,
    "optimize": run_optimize,
    "anticoncentration": run_anticoncentration,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homewalk", description="Guided random walk search workbench")
    parser.add_argument("--version", action="version", version=f"homewalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the sweep strategy and record hitting times")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--home", type=_point, required=True, help="x,y")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--max-steps", type=int, default=10**6)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--t0", type=int, default=256)
    s.add_argument("--a", type=float, default=4.566)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--p0", type=float, default=0.01139)
    s.add_argument("--checkpoints", type=_int_list, default=None, help="comma-separated times")
    s.add_argument("--out", type=Path, default=Path("out/simulate"))
    s.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    b = sub.add_parser("bounds", help="return-count bound and impossibility threshold")
    g = b.add_mutually_exclusive_group(required=True)
    g.add_argument("--tau", type=int)
    g.add_argument("--tau-max", type=int)
    b.add_argument("--p", type=float, default=None, help="also evaluate R_tau at this p")
    b.add_argument("--tol", type=float, default=1e-9)
    b.add_argument("--out", type=Path, default=Path("out/bounds"))

    o = sub.add_parser("optimize", help="optimal box scale and feasibility threshold")
    o.add_argument("--alpha", type=float, default=1.0)
    o.add_argument("--tol", type=float, default=1e-6)
    o.add_argument("--out", type=Path, default=Path("out/optimize"))

    a = sub.add_parser("anticoncentration", help="largest cell mass of the exact law against its bound")
    a.add_argument("--p", type=float, required=True)
    a.add_argument("--t", type=_int_list, required=True, help="comma-separated step counts")
    a.add_argument("--instructions", choices=["straight", "zigzag", "sweep"], default="straight")
    a.add_argument("--out", type=Path, default=Path("out/anticoncentration"))

    r = sub.add_parser("replay", help="re-run a manifest")
    r.add_argument("manifest", type=Path)
    r.add_argument("--out", type=Path, default=None, help="defaults to the manifest's directory")
    r.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    return parser


def _params(args: argparse.Namespace) -> dict:
    skip = {"command", "out", "threads"}
    params = {}
    for k, v in vars(args).items():
        if k in skip:
            continue
        params[k] = str(v) if isinstance(v, GridPoint) else v
    return params


def execute(command: str, params: dict, out: Path, threads: int) -> None:
    written = RUNNERS[command](params, out, threads)
    manifest = {
        "tool": "homewalk",
        "version": __version__,
        "subcommand": command,
        "seed": params.get("seed"),
        "params": params,
        "outputs": written,
    }
    _write(out, MANIFEST, _dump(manifest), [])


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            manifest = json.loads(args.manifest.read_text())
            out = args.out or args.manifest.parent
            execute(manifest["subcommand"], manifest["params"], out, args.threads)
        else:
            execute(args.command, _params(args), args.out, getattr(args, "threads", 1))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"homewalk: error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"homewalk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
