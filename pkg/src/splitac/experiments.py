"""The numerical experiments behind the command-line harness.

Each function returns plain data; :mod:`splitac.cli` owns file output.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .functionals import convergence_rate, error_eN
from .grid import Grid
from .stepper import Adaptive, RandomNormalized, SimConfig, Trace, Uniform, run


@dataclass
class ConvergenceRow:
    n: int
    tau_max: float
    h1_error: float
    rate: Optional[float]


def convergence_study(
    grid: Grid,
    potential,
    eps: float,
    u0: np.ndarray,
    T: float,
    n_list: Sequence[int],
    seed: int,
    tau_ref: float = 1e-4,
    reference: Optional[np.ndarray] = None,
) -> list[ConvergenceRow]:
    """H1 errors at ``T`` for random-step runs against a fine uniform run.

    Rates pair consecutive entries of ``n_list`` using the measured largest
    step of each run.
    """
    n_list = [int(n) for n in n_list]
    if not n_list or any(n < 1 for n in n_list) or any(
        b <= a for a, b in zip(n_list, n_list[1:])
    ):
        raise ValueError(f"N list must be strictly increasing positive integers: {n_list}")
    if reference is None:
        reference, _ = run(SimConfig(grid, potential, eps, Uniform(tau_ref), T), u0)
    rows = []
    for n in n_list:
        cfg = SimConfig(grid, potential, eps, RandomNormalized(seed, n, T), T)
        u, trace = run(cfg, u0)
        err = error_eN(grid, reference, u)
        rate = None
        if rows:
            prev = rows[-1]
            rate = convergence_rate(prev.h1_error, err, prev.tau_max, trace.tau_max)
        rows.append(ConvergenceRow(n, trace.tau_max, err, rate))
    return rows


@dataclass
class AdaptComparison:
    e_rel: float
    steps_uniform: int
    steps_adaptive: int
    wall_uniform: float
    wall_adaptive: float
    trace_adaptive: Trace


def adapt_compare(
    grid: Grid,
    potential,
    eps: float,
    u0: np.ndarray,
    T: float,
    plan: Adaptive,
    tau_uniform: Optional[float] = None,
) -> AdaptComparison:
    """Adaptive run against a uniform run with step ``tau_uniform`` (default tau_min)."""
    tau_uniform = plan.tau_min if tau_uniform is None else tau_uniform
    t0 = time.perf_counter()
    ref, tr_ref = run(SimConfig(grid, potential, eps, Uniform(tau_uniform), T, record_every=10**9), u0)
    t1 = time.perf_counter()
    num, tr_num = run(SimConfig(grid, potential, eps, plan, T), u0)
    t2 = time.perf_counter()
    if np.array_equal(ref, num):
        e_rel = 0.0
    else:
        e_rel = error_eN(grid, ref, num, relative=True)
    return AdaptComparison(e_rel, tr_ref.n_steps, tr_num.n_steps, t1 - t0, t2 - t1, tr_num)


@dataclass
class ConservationReport:
    max_mass_drift: float
    max_hyperplane_violation: float
    mass_drift: list
    hyperplane_violation: list


def ternary_run(
    cfg: SimConfig,
    u0: np.ndarray,
    *,
    landmarks=(),
    on_landmark=None,
    max_steps: Optional[int] = None,
) -> tuple[np.ndarray, Trace, ConservationReport]:
    """Run the ternary system, tracking mass drift and hyperplane violation every step.

    The per-record lists line up with the rows of the returned trace.
    """
    mean0 = u0.reshape(3, -1).mean(axis=1)
    worst = {"mass": 0.0, "plane": 0.0}
    per_record = {"mass": [0.0], "plane": [float(np.max(np.abs(u0.sum(axis=0) - 1.0)))]}
    steps = [0]

    def watch(t, tau, u):
        steps[0] += 1
        drift = float(np.max(np.abs(u.reshape(3, -1).mean(axis=1) - mean0)))
        plane = float(np.max(np.abs(u.sum(axis=0) - 1.0)))
        worst["mass"] = max(worst["mass"], drift)
        worst["plane"] = max(worst["plane"], plane)
        last = t >= cfg.T or (max_steps is not None and steps[0] >= max_steps)
        if last or steps[0] % cfg.record_every == 0:
            per_record["mass"].append(drift)
            per_record["plane"].append(plane)

    u, trace = run(
        cfg, u0, landmarks=landmarks, on_landmark=on_landmark, max_steps=max_steps, on_step=watch
    )
    worst["plane"] = max(worst["plane"], per_record["plane"][0])
    report = ConservationReport(worst["mass"], worst["plane"], per_record["mass"], per_record["plane"])
    return u, trace, report
