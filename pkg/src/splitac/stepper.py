"""Strang composition, step-size plans and the time-stepping loop."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Union

import numpy as np

from .functionals import energy
from .grid import Grid
from .problems import rng
from .propagators import (
    Logarithmic,
    Polynomial,
    TernaryConservative,
    linear_propagate,
    nonlinear_exact,
    nonlinear_log_rk,
    nonlinear_ternary_rk,
)

__all__ = [
    "Uniform",
    "RandomNormalized",
    "Adaptive",
    "SimConfig",
    "Trace",
    "strang_step",
    "generate_random_steps",
    "adaptive_next_tau",
    "run",
]

SIGMA_FLOOR = 1e-8
MAX_RESAMPLE = 1000
# a step this close to a landing time (relative to the step) snaps onto it
SNAP = 1e-6


@dataclass(frozen=True)
class Uniform:
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")


@dataclass(frozen=True)
class RandomNormalized:
    seed: int
    n_steps: int
    T: float

    def __post_init__(self):
        if self.n_steps < 1 or not self.T > 0:
            raise ValueError("need n_steps >= 1 and T > 0")

    def steps(self) -> list[float]:
        return generate_random_steps(self.seed, self.n_steps, self.T)


@dataclass(frozen=True)
class Adaptive:
    tau_min: float
    tau_max: float
    alpha: float

    def __post_init__(self):
        if not (0 < self.tau_min <= self.tau_max) or self.alpha < 0:
            raise ValueError("need 0 < tau_min <= tau_max and alpha >= 0")


StepPlan = Union[Uniform, RandomNormalized, Adaptive]


@dataclass(frozen=True)
class SimConfig:
    grid: Grid
    potential: Union[Polynomial, Logarithmic, TernaryConservative]
    eps: float
    plan: StepPlan
    T: float
    record_every: int = 1

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.T < 0:
            raise ValueError("horizon T must be non-negative")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def eps2(self) -> float:
        return self.eps * self.eps


@dataclass
class Trace:
    t: list = field(default_factory=list)
    tau: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    max_norm: list = field(default_factory=list)
    wall_seconds: list = field(default_factory=list)
    n_steps: int = 0
    tau_max: float = 0.0

    def append(self, t, tau, e, m, wall):
        self.t.append(t)
        self.tau.append(tau)
        self.energy.append(e)
        self.max_norm.append(m)
        self.wall_seconds.append(wall)

    def __len__(self):
        return len(self.t)

    def rows(self) -> Iterator[tuple]:
        return zip(self.t, self.tau, self.energy, self.max_norm, self.wall_seconds)


def nonlinear_flow(u: np.ndarray, tau: float, potential) -> np.ndarray:
    if isinstance(potential, Polynomial):
        return nonlinear_exact(u, tau)
    if isinstance(potential, Logarithmic):
        return nonlinear_log_rk(u, tau, potential)
    if isinstance(potential, TernaryConservative):
        return nonlinear_ternary_rk(u, tau)
    raise TypeError(f"unknown potential {potential!r}")


def strang_step(u: np.ndarray, tau: float, cfg: SimConfig) -> np.ndarray:
    """S_L(tau/2) S_N(tau) S_L(tau/2) u."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    half = 0.5 * tau
    v = linear_propagate(cfg.grid, u, half, cfg.eps2)
    v = nonlinear_flow(v, tau, cfg.potential)
    return linear_propagate(cfg.grid, v, half, cfg.eps2)


def generate_random_steps(seed: int, n_steps: int, T: float) -> list[float]:
    """tau_k = sigma_k T / sum(sigma), sigma_k ~ U[0, 1] (draws below 1e-8 redrawn)."""
    if n_steps < 1 or not T > 0:
        raise ValueError("need n_steps >= 1 and T > 0")
    gen = rng(seed)
    sigma = gen.random(n_steps)
    for _ in range(MAX_RESAMPLE):
        small = sigma < SIGMA_FLOOR
        if not small.any():
            break
        sigma[small] = gen.random(int(small.sum()))
    else:
        raise RuntimeError("degenerate random draw: could not avoid vanishing steps")
    total = math.fsum(sigma)
    return [s * T / total for s in sigma]


def adaptive_next_tau(
    prev_energy: float, curr_energy: float, prev_tau: float, params: Adaptive
) -> float:
    """max(tau_min, tau_max / sqrt(1 + alpha E'^2)), E' by backward difference."""
    if not prev_tau > 0:
        raise ValueError("prev_tau must be positive")
    slope = (curr_energy - prev_energy) / prev_tau
    with np.errstate(over="ignore"):
        denom = math.sqrt(1.0 + params.alpha * slope * slope) if math.isfinite(slope) else math.inf
    tau = params.tau_max / denom
    return min(params.tau_max, max(params.tau_min, tau))


def _step_sizes(cfg: SimConfig) -> Callable[[list], float]:
    """Return a callable giving the next proposed step from the energy history."""
    plan = cfg.plan
    if isinstance(plan, Uniform):
        return lambda hist: plan.tau
    if isinstance(plan, RandomNormalized):
        seq = iter(plan.steps())

        def nxt(hist):
            try:
                return next(seq)
            except StopIteration:
                # plan sums to its own horizon; past it fall back to the last size
                return hist[-1][1]

        return nxt
    if isinstance(plan, Adaptive):

        def nxt(hist):
            # with alpha = 0 the formula ignores E', so no bootstrap step is needed
            if plan.alpha == 0:
                return plan.tau_max
            if len(hist) < 2:
                return plan.tau_min
            (_, _, e0), (_, tau1, e1) = hist[-2], hist[-1]
            return adaptive_next_tau(e0, e1, tau1, plan)

        return nxt
    raise TypeError(f"unknown step plan {plan!r}")


def run(
    cfg: SimConfig,
    u0: np.ndarray,
    *,
    landmarks: Iterable[float] = (),
    on_landmark: Optional[Callable[[float, np.ndarray], None]] = None,
    max_steps: Optional[int] = None,
    on_step: Optional[Callable[[float, float, np.ndarray], None]] = None,
) -> tuple[np.ndarray, Trace]:
    """Advance ``u0`` from t = 0 to ``cfg.T``.

    Steps are shortened to land exactly on ``cfg.T`` and on every time in
    ``landmarks`` (where ``on_landmark`` is called).  ``max_steps`` stops the
    run early; the trace then ends before ``cfg.T``.
    """
    grid = cfg.grid
    u = np.array(grid.check(u0), dtype=float, copy=True)
    T = cfg.T
    marks = {float(s) for s in landmarks if 0 < s <= T}
    stops = iter(sorted(marks | {T}))
    target = next(stops)

    adaptive = isinstance(cfg.plan, Adaptive)
    propose = _step_sizes(cfg)
    start = time.perf_counter()
    e = energy(grid, u, cfg.potential, cfg.eps)
    trace = Trace()
    trace.append(0.0, 0.0, e, float(np.max(np.abs(u))), 0.0)
    if T == 0:
        return u, trace

    # (t, tau, energy) of completed steps; energies only kept when needed
    hist = [(0.0, 0.0, e)]
    t = 0.0
    n = 0
    while t < T:
        if max_steps is not None and n >= max_steps:
            break
        tau = propose(hist)
        t_next = t + tau
        landed = False
        if t_next >= target - SNAP * tau:
            t_next = target
            landed = True
        tau = t_next - t
        u = strang_step(u, tau, cfg)
        n += 1
        trace.tau_max = max(trace.tau_max, tau)
        t = t_next
        last = t >= T or (max_steps is not None and n >= max_steps)
        record = last or n % cfg.record_every == 0
        if adaptive or record:
            e = energy(grid, u, cfg.potential, cfg.eps)
        hist.append((t, tau, e if (adaptive or record) else math.nan))
        if len(hist) > 2:
            del hist[0]
        if record:
            trace.append(t, tau, e, float(np.max(np.abs(u))), time.perf_counter() - start)
        if on_step is not None:
            on_step(t, tau, u)
        if landed:
            if on_landmark is not None and t in marks:
                on_landmark(t, u)
            if t < T:
                target = next(stops)
    trace.n_steps = n
    return u, trace
