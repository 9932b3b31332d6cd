"""Command-line harness.

Every output file starts with ``# key=value`` lines echoing the resolved
configuration, followed by CSV data with doubles printed to 17 significant
digits.  Wall-clock columns are written as ``nan`` unless ``--wall-time`` is
given, which keeps reruns byte-identical by default.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .experiments import adapt_compare, convergence_study, ternary_run
from .grid import FIVE_POINT, NEUMANN, PERIODIC, SPECTRAL, Grid
from .problems import PRNG_NAME, disk_indicator, random_ternary, seven_circles
from .propagators import (
    Logarithmic,
    Polynomial,
    PreconditionError,
    SolverError,
    TernaryConservative,
)
from .stepper import Adaptive, SimConfig, run

EXPERIMENTS = ("converge-poly", "converge-log", "simulate", "adapt-compare", "ternary")

# experiment-specific defaults for flags left unset
DEFAULTS = {
    "converge-poly": dict(potential="polynomial", boundary=NEUMANN, eps=0.1, t_final=1.0, tau=1e-4),
    "converge-log": dict(potential="logarithmic", boundary=NEUMANN, eps=0.01, t_final=1.0, tau=1e-4),
    "simulate": dict(boundary=NEUMANN, t_final=10.0, tau_min=1e-3, alpha=100.0),
    "adapt-compare": dict(boundary=NEUMANN, t_final=10.0, tau_min=1e-3, alpha=100.0),
    "ternary": dict(
        potential="ternary", boundary=PERIODIC, eps=0.05, t_final=10.0,
        tau_min=1e-3, tau_max=0.1, alpha=100.0,
    ),
}
POTENTIAL_DEFAULTS = {
    "polynomial": dict(eps=0.1, tau_max=0.1),
    "logarithmic": dict(eps=0.01, tau_max=0.01),
}


def fmt(x) -> str:
    if x is None:
        return ""
    return f"{float(x):.17g}"


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="splitac",
        description="Variable-step Strang splitting experiments for Allen-Cahn equations.",
    )
    p.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    p.add_argument("--grid", type=int, default=64, help="points per side (even, >= 4)")
    p.add_argument("--boundary", choices=(NEUMANN, PERIODIC))
    p.add_argument("--symbol", choices=(FIVE_POINT, SPECTRAL), default=FIVE_POINT,
                   help="Laplacian symbol diagonalized by the transform")
    p.add_argument("--potential", choices=("polynomial", "logarithmic"),
                   help="scalar potential for simulate / adapt-compare")
    p.add_argument("--eps", type=float)
    p.add_argument("--theta", type=float, default=0.25)
    p.add_argument("--theta-c", type=float, default=1.0)
    p.add_argument("--t-final", type=float)
    p.add_argument("--tau", type=float, help="uniform reference step")
    p.add_argument("--tau-min", type=float)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--n-list", type=_csv_ints, default=[50, 100, 200, 400])
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--snapshot-times", type=_csv_floats, default=[])
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--max-steps", type=int, help="stop after this many steps")
    p.add_argument("--wall-time", action="store_true",
                   help="record wall-clock seconds (output no longer byte-reproducible)")
    return p


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset flags from the experiment and potential defaults."""
    exp = DEFAULTS[args.experiment]
    if "potential" in exp:
        args.potential = exp["potential"]
    elif args.potential is None:
        args.potential = "polynomial"
    for key, value in exp.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    for key, value in POTENTIAL_DEFAULTS.get(args.potential, {}).items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    if args.tau is None:
        args.tau = args.tau_min
    return args


def make_potential(args):
    if args.potential == "polynomial":
        return Polynomial()
    if args.potential == "logarithmic":
        return Logarithmic(theta=args.theta, theta_c=args.theta_c)
    return TernaryConservative()


def initial_state(args, grid: Grid):
    if args.potential == "polynomial":
        return seven_circles(grid, args.eps)
    if args.potential == "logarithmic":
        return disk_indicator(grid)
    return random_ternary(grid, args.seed)


def header(args, grid: Grid, potential, plan_text: str) -> list[str]:
    lines = [
        ("version", __version__),
        ("experiment", args.experiment),
        ("seed", args.seed),
        ("prng", PRNG_NAME),
        ("grid", f"{grid.nx}x{grid.ny}"),
        ("boundary", grid.boundary),
        ("symbol", grid.symbol),
        ("potential", potential.name),
    ]
    if isinstance(potential, Logarithmic):
        lines += [("theta", fmt(potential.theta)), ("theta_c", fmt(potential.theta_c))]
    lines += [
        ("eps", fmt(args.eps)),
        ("t_final", fmt(args.t_final)),
        ("plan", plan_text),
        ("record_every", args.record_every),
    ]
    if args.max_steps is not None:
        lines.append(("max_steps", args.max_steps))
    if args.snapshot_times:
        lines.append(("snapshot_times", ",".join(fmt(t) for t in args.snapshot_times)))
    lines.append(("wall_time", "on" if args.wall_time else "off"))
    return [f"# {k}={v}" for k, v in lines]


def adaptive_text(args) -> str:
    return f"adaptive(tau_min={fmt(args.tau_min)},tau_max={fmt(args.tau_max)},alpha={fmt(args.alpha)})"


def write_snapshot(path: Path, grid: Grid, values: np.ndarray) -> None:
    with open(path, "w") as fh:
        fh.write(f"{grid.nx} {grid.ny} {grid.boundary}\n")
        for row in values:
            fh.write(" ".join(fmt(x) for x in row) + "\n")


def read_snapshot(path: Path) -> tuple[Grid, np.ndarray]:
    with open(path) as fh:
        nx, ny, boundary = fh.readline().split()
        values = np.loadtxt(fh, ndmin=2)
    grid = Grid(int(nx), int(ny), boundary)
    return grid, values.reshape(grid.shape)


def snapshot_path(out: Path, t: float) -> Path:
    return out.with_name(f"{out.stem}_t{t:.10g}.snap")


def _wall(args, x) -> str:
    return fmt(x) if args.wall_time else "nan"


def cmd_converge(args, grid: Grid) -> list[str]:
    potential = make_potential(args)
    u0 = initial_state(args, grid)
    rows = convergence_study(
        grid, potential, args.eps, u0, args.t_final, args.n_list, args.seed, tau_ref=args.tau
    )
    plan = f"random_normalized(seed={args.seed},n_list={','.join(map(str, args.n_list))})"
    lines = header(args, grid, potential, plan)
    lines.append(f"# tau_ref={fmt(args.tau)}")
    lines.append("N,tau_max,h1_error,rate")
    for r in rows:
        lines.append(f"{r.n},{fmt(r.tau_max)},{fmt(r.h1_error)},{fmt(r.rate)}")
    return lines


def _trace_lines(args, trace, extra=None) -> list[str]:
    cols = "t,tau,energy,max_norm,wall_seconds"
    if extra:
        cols += "," + ",".join(extra)
    lines = [cols]
    for i, (t, tau, e, m, w) in enumerate(trace.rows()):
        row = [fmt(t), fmt(tau), fmt(e), fmt(m), _wall(args, w)]
        if extra:
            row += [fmt(extra[k][i]) for k in extra]
        lines.append(",".join(row))
    return lines


def cmd_simulate(args, grid: Grid) -> list[str]:
    potential = make_potential(args)
    plan = Adaptive(args.tau_min, args.tau_max, args.alpha)
    cfg = SimConfig(grid, potential, args.eps, plan, args.t_final, args.record_every)
    u0 = initial_state(args, grid)
    snap = lambda t, u: write_snapshot(snapshot_path(args.out, t), grid, u)
    _, trace = run(cfg, u0, landmarks=args.snapshot_times, on_landmark=snap, max_steps=args.max_steps)
    return header(args, grid, potential, adaptive_text(args)) + _trace_lines(args, trace)


def cmd_adapt_compare(args, grid: Grid) -> list[str]:
    potential = make_potential(args)
    plan = Adaptive(args.tau_min, args.tau_max, args.alpha)
    u0 = initial_state(args, grid)
    res = adapt_compare(grid, potential, args.eps, u0, args.t_final, plan, tau_uniform=args.tau)
    lines = header(args, grid, potential, adaptive_text(args))
    lines.append(f"# tau_uniform={fmt(args.tau)}")
    lines.append("run,steps,wall_seconds,h1_rel_error")
    lines.append(f"uniform,{res.steps_uniform},{_wall(args, res.wall_uniform)},0")
    lines.append(f"adaptive,{res.steps_adaptive},{_wall(args, res.wall_adaptive)},{fmt(res.e_rel)}")
    return lines


def cmd_ternary(args, grid: Grid) -> list[str]:
    potential = TernaryConservative()
    plan = Adaptive(args.tau_min, args.tau_max, args.alpha)
    cfg = SimConfig(grid, potential, args.eps, plan, args.t_final, args.record_every)
    u0 = random_ternary(grid, args.seed)
    snap = lambda t, u: write_snapshot(snapshot_path(args.out, t), grid, 0.5 * u[0] - u[1])
    _, trace, report = ternary_run(
        cfg, u0, landmarks=args.snapshot_times, on_landmark=snap, max_steps=args.max_steps
    )
    extra = {"mass_drift": report.mass_drift, "hyperplane_violation": report.hyperplane_violation}
    lines = header(args, grid, potential, adaptive_text(args)) + _trace_lines(args, trace, extra)
    lines.append(f"# steps={trace.n_steps}")
    lines.append(f"# max_mass_drift={fmt(report.max_mass_drift)}")
    lines.append(f"# max_hyperplane_violation={fmt(report.max_hyperplane_violation)}")
    return lines


COMMANDS = {
    "converge-poly": cmd_converge,
    "converge-log": cmd_converge,
    "simulate": cmd_simulate,
    "adapt-compare": cmd_adapt_compare,
    "ternary": cmd_ternary,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = resolve(parser.parse_args(argv))
    try:
        grid = Grid(args.grid, args.grid, args.boundary, args.symbol)
        if args.record_every < 1:
            raise ValueError("--record-every must be >= 1")
        if args.max_steps is not None and args.max_steps < 1:
            raise ValueError("--max-steps must be >= 1")
    except ValueError as exc:
        parser.error(str(exc))
    try:
        lines = COMMANDS[args.experiment](args, grid)
    except (PreconditionError, SolverError) as exc:
        print(f"splitac: {args.experiment} failed: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"splitac: invalid configuration: {exc}", file=sys.stderr)
        return 2
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("\n".join(lines) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
