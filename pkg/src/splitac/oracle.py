"""Independent reference solvers for tests and acceptance runs.

Nothing here shares code paths with the splitting beyond the grid geometry:
the method-of-lines solver integrates the full right-hand side with classical
RK4 and, by default, a second-order finite-difference Laplacian.
"""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import scipy.linalg

from .grid import NEUMANN, SPECTRAL, Grid, laplacian_symbol, forward, inverse
from .propagators import Logarithmic, Polynomial, PreconditionError, linear_propagate, log_reaction

__all__ = [
    "fd_laplacian",
    "fd_laplacian_matrix",
    "mol_reference",
    "dense_expm_check",
    "ode_rk4",
    "reaction",
    "MAX_ORACLE_POINTS",
]

MAX_ORACLE_POINTS = 64
MAX_DENSE_POINTS = 8


def fd_laplacian(grid: Grid, u: np.ndarray) -> np.ndarray:
    """Five-point Laplacian; mirrored ghost nodes for Neumann, wraparound for periodic."""
    mode = "symmetric" if grid.boundary == NEUMANN else "wrap"
    p = np.pad(u, ((1, 1), (1, 1)), mode=mode)
    c = p[1:-1, 1:-1]
    return (p[1:-1, :-2] - 2 * c + p[1:-1, 2:]) / grid.hx**2 + (
        p[:-2, 1:-1] - 2 * c + p[2:, 1:-1]
    ) / grid.hy**2


def fd_laplacian_matrix(grid: Grid) -> np.ndarray:
    """Dense matrix of :func:`fd_laplacian` acting on row-major flattened fields."""
    n = grid.size
    cols = [fd_laplacian(grid, e.reshape(grid.shape)).ravel() for e in np.eye(n)]
    return np.array(cols).T


def _spectral_laplacian(grid: Grid, u: np.ndarray) -> np.ndarray:
    g = replace(grid, symbol=SPECTRAL)
    return inverse(g, laplacian_symbol(g) * forward(g, u))


def reaction(u, potential):
    """-f(u) for the scalar potentials."""
    if isinstance(potential, Polynomial):
        return u - u * u * u
    if isinstance(potential, Logarithmic):
        if np.any(np.abs(u) >= 1.0):
            raise PreconditionError("logarithmic reaction evaluated at |u| >= 1")
        return log_reaction(u, potential.theta, potential.theta_c)
    if potential is None:
        return np.zeros_like(u)
    raise TypeError(f"oracle supports scalar potentials only, got {potential!r}")


def _rk4(rhs, u, T, n):
    dt = T / n
    for _ in range(n):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * dt * k1)
        k3 = rhs(u + 0.5 * dt * k2)
        k4 = rhs(u + dt * k3)
        u = u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return u


def mol_reference(
    grid: Grid,
    u0: np.ndarray,
    potential,
    eps: float,
    T: float,
    dt: float,
    laplacian: str = "fd",
) -> np.ndarray:
    """RK4 solution of u' = eps^2 Lap u - f(u) at time ``T``.

    ``potential=None`` drops the reaction (pure heat flow).  ``laplacian``
    selects the five-point stencil (``"fd"``, the default) or the exact
    spectral operator (``"spectral"``).  The step ``dt`` is rounded down so an
    integer number of steps reaches ``T``; it must respect the explicit
    stability bound h^2 / (4 eps^2) * 0.5 (or its spectral analogue).
    """
    if grid.nx > MAX_ORACLE_POINTS or grid.ny > MAX_ORACLE_POINTS:
        raise ValueError(f"oracle grids are limited to {MAX_ORACLE_POINTS} points per side")
    eps2 = eps * eps
    if laplacian == "fd":
        lap = lambda u: fd_laplacian(grid, u)
        h2 = min(grid.hx, grid.hy) ** 2
        limit = 0.5 * h2 / (4.0 * eps2)
    elif laplacian == "spectral":
        lap = lambda u: _spectral_laplacian(grid, u)
        # the stencil bound is 1 / (eps^2 * 8/h^2); swap in the largest |mu|
        limit = 1.0 / (eps2 * float(-laplacian_symbol(replace(grid, symbol=SPECTRAL)).min()))
    else:
        raise ValueError(f"unknown laplacian {laplacian!r}")
    if dt > limit:
        raise ValueError(f"dt = {dt} exceeds the stability bound {limit:.6g}")
    u = np.array(grid.check(u0), dtype=float, copy=True)
    if T == 0:
        return u
    n = max(1, math.ceil(T / dt - 1e-9))
    return _rk4(lambda v: eps2 * lap(v) + reaction(v, potential), u, T, n)


def dense_propagators(grid: Grid, eps: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """(expm of the FD Laplacian, spectral propagator) as dense matrices."""
    if grid.nx > MAX_DENSE_POINTS or grid.ny > MAX_DENSE_POINTS:
        raise ValueError(f"dense check is limited to {MAX_DENSE_POINTS} points per side")
    eps2 = eps * eps
    fd = scipy.linalg.expm((t * eps2) * fd_laplacian_matrix(grid))
    basis = np.eye(grid.size).reshape((grid.size,) + grid.shape)
    spec = linear_propagate(grid, basis, t, eps2).reshape(grid.size, grid.size).T
    return fd, spec


def dense_expm_check(grid: Grid, eps: float, t: float) -> float:
    """Max entrywise gap between the two dense heat propagators."""
    fd, spec = dense_propagators(grid, eps, t)
    return float(np.max(np.abs(fd - spec)))


def ode_rk4(v0, potential, T: float, dt: float):
    """Classical RK4 for the pointwise reaction ODE u' = -f(u); ``v0`` may be an array."""
    u = np.asarray(v0, dtype=float)
    if T == 0:
        return u.copy() if u.ndim else float(u)
    n = max(1, math.ceil(T / dt - 1e-9))
    out = _rk4(lambda v: reaction(v, potential), u, T, n)
    return out if np.ndim(out) else float(out)
