"""Energies, discrete norms, masses and convergence rates."""
from __future__ import annotations

import math

import numpy as np

from .grid import (
    Grid,
    UnsupportedOrderError,
    MAX_DERIVATIVE_ORDER,
    coefficient_energy,
    derivative_weight,
    forward,
    quadrature,
)
from .propagators import Logarithmic, Polynomial, TernaryConservative, PreconditionError

__all__ = [
    "energy",
    "potential_density",
    "norm",
    "mass",
    "error_eN",
    "convergence_rate",
    "hk_weight",
]


def hk_weight(grid: Grid, k: int) -> np.ndarray:
    """Sum of derivative weights over all multi-indices with |alpha| <= k."""
    if not 0 <= k <= MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(f"H^{k} norm is not supported")
    total = np.zeros(grid.coeff_shape)
    for order in range(k + 1):
        for i1 in range(order + 1):
            total += derivative_weight(grid, (i1, order - i1))
    return total


def _parse_kind(kind) -> tuple[str, int]:
    if isinstance(kind, int):
        return "H", kind
    kind = str(kind).upper()
    if kind == "L2":
        return "L2", 0
    if kind in ("LINF", "MAX"):
        return "Linf", 0
    if kind.startswith("H") and kind[1:].isdigit():
        return "H", int(kind[1:])
    raise ValueError(f"unknown norm kind {kind!r}")


def norm(grid: Grid, u: np.ndarray, kind="L2") -> float:
    """Discrete norm of ``u``: ``"L2"``, ``"Linf"`` or ``"H<k>"`` (k <= 6)."""
    family, k = _parse_kind(kind)
    u = grid.check(u)
    if family == "Linf":
        return float(np.max(np.abs(u)))
    if family == "L2":
        return math.sqrt(float(np.sum(quadrature(grid, u * u))))
    w = hk_weight(grid, k)
    e = coefficient_energy(grid, forward(grid, u))
    return math.sqrt(float(np.sum(w * e)))


def mass(grid: Grid, u: np.ndarray):
    """Integral of ``u``; one value per component for stacked fields."""
    m = quadrature(grid, u)
    return float(m) if np.ndim(m) == 0 else m


def potential_density(u: np.ndarray, potential) -> np.ndarray:
    if isinstance(potential, Polynomial):
        return 0.25 * (u * u - 1.0) ** 2
    if isinstance(potential, Logarithmic):
        if np.any(np.abs(u) >= 1.0):
            raise PreconditionError("logarithmic potential evaluated at |u| >= 1")
        th, thc = potential.theta, potential.theta_c
        return 0.5 * th * ((1.0 + u) * np.log1p(u) + (1.0 - u) * np.log1p(-u)) - 0.5 * thc * u * u
    if isinstance(potential, TernaryConservative):
        return 0.5 * (u * (1.0 - u)) ** 2
    raise TypeError(f"unknown potential {potential!r}")


def energy(grid: Grid, u: np.ndarray, potential, eps: float) -> float:
    """Ginzburg-Landau energy; stacked ternary states sum their components."""
    u = grid.check(u)
    grad = derivative_weight(grid, (1, 0)) + derivative_weight(grid, (0, 1))
    gradient_term = np.sum(grad * coefficient_energy(grid, forward(grid, u)))
    bulk = np.sum(quadrature(grid, potential_density(u, potential)))
    return float(0.5 * eps * eps * gradient_term + bulk)


def error_eN(grid: Grid, ref: np.ndarray, num: np.ndarray, relative: bool = False) -> float:
    """H1 distance between a reference and a numerical solution."""
    ref = grid.check(ref)
    num = grid.check(num)
    if ref.shape != num.shape:
        raise ValueError(f"shape mismatch {ref.shape} vs {num.shape}")
    err = norm(grid, ref - num, "H1")
    if relative:
        err /= norm(grid, ref, "H1")
    return err


def convergence_rate(e1: float, e2: float, tau1_max: float, tau2_max: float) -> float:
    """log(e1/e2) / log(tau1_max/tau2_max)."""
    if not (e1 > 0 and e2 > 0):
        raise ValueError(f"rate undefined for errors {e1!r}, {e2!r}")
    if not (tau1_max > 0 and tau2_max > 0) or tau1_max == tau2_max:
        raise ValueError(f"rate undefined for step sizes {tau1_max!r}, {tau2_max!r}")
    return math.log(e1 / e2) / math.log(tau1_max / tau2_max)
