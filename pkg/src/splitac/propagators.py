"""Sub-flows of the splitting: heat semigroup and the reaction flows.

The reaction flows act pointwise, except for the ternary system whose
mass-conserving multiplier couples the nodes through a spatial mean.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import FIVE_POINT, Grid, forward, inverse, laplacian_symbol

__all__ = [
    "Polynomial",
    "Logarithmic",
    "TernaryConservative",
    "SdirkTableau",
    "PreconditionError",
    "SolverError",
    "linear_propagate",
    "q_defect",
    "nonlinear_exact",
    "nonlinear_log_rk",
    "nonlinear_ternary_rk",
    "log_reaction",
    "ternary_f",
]

MAXNORM_SLACK = 1e-12
LOG_MARGIN = 1e-14

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50
OUTER_TOL = 1e-12
OUTER_MAXITER = 25


class PreconditionError(ValueError):
    pass


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Polynomial:
    """F(u) = (u^2 - 1)^2 / 4, reaction u - u^3."""

    name = "polynomial"


@dataclass(frozen=True)
class Logarithmic:
    """Flory-Huggins type potential with reaction theta_c u - theta atanh(u)."""

    theta: float = 0.25
    theta_c: float = 1.0
    name = "logarithmic"

    def __post_init__(self):
        if not (self.theta > 0 and self.theta_c > 0):
            raise ValueError("theta and theta_c must be positive")


@dataclass(frozen=True)
class TernaryConservative:
    """Three phases, F(u) = u^2 (1 - u)^2 / 2, mass conserving and summing to one."""

    name = "ternary"


@dataclass(frozen=True)
class SdirkTableau:
    """Two-stage SDIRK: A = [[a, 0], [1 - 2a, a]], b = [1/2, 1/2]."""

    a: float = 1.0 + math.sqrt(2.0) / 2.0

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, 0.0], [1.0 - 2.0 * self.a, self.a]])

    @property
    def weights(self) -> np.ndarray:
        return np.array([0.5, 0.5])

    @property
    def nodes(self) -> np.ndarray:
        return np.array([self.a, 1.0 - self.a])


DEFAULT_TABLEAU = SdirkTableau()


# ---------------------------------------------------------------- linear flow


def linear_propagate(grid: Grid, v: np.ndarray, t: float, eps2: float) -> np.ndarray:
    """Apply exp(t * eps2 * Laplacian) to ``v``.

    With the five-point symbol the heat kernel is a nonnegative matrix with
    unit row sums, so every output value lies between min(v) and max(v);
    transform roundoff outside that range is clipped back.
    """
    if t < 0:
        raise ValueError(f"propagation time must be non-negative, got {t}")
    if t == 0:
        return np.array(v, dtype=float, copy=True)
    mult = np.exp((eps2 * t) * laplacian_symbol(grid))
    out = inverse(grid, mult * forward(grid, v))
    if grid.symbol == FIVE_POINT:
        lo = np.min(v, axis=(-2, -1), keepdims=True)
        hi = np.max(v, axis=(-2, -1), keepdims=True)
        np.clip(out, lo, hi, out=out)
    return out


def q_defect(grid: Grid, v: np.ndarray, tau: float, eps2: float) -> np.ndarray:
    """S_L(tau/2) v - (I + tau/2 * eps2 * Laplacian) v."""
    z = (0.5 * tau * eps2) * laplacian_symbol(grid)
    return inverse(grid, (np.expm1(z) - z) * forward(grid, v))


# ----------------------------------------------------------- polynomial flow


def _check_maxnorm(v: np.ndarray, bound: float, strict: bool = False) -> None:
    if not np.all(np.isfinite(v)):
        idx = np.unravel_index(np.argmax(~np.isfinite(v)), v.shape)
        raise PreconditionError(f"non-finite value at node {idx}")
    a = np.abs(v)
    bad = a >= bound if strict else a > bound
    if bad.any():
        idx = np.unravel_index(np.argmax(bad), v.shape)
        raise PreconditionError(
            f"|v| = {a[idx]!r} at node {idx} violates the bound "
            f"{'<' if strict else '<='} {bound!r}"
        )


def nonlinear_exact(v: np.ndarray, tau: float) -> np.ndarray:
    """Exact flow of u' = u - u^3 over time ``tau``.

    Written as v / sqrt(1 + (1 - e^{-2 tau}) (v - 1)(v + 1)): no overflow,
    |output| <= 1 whenever |v| <= 1, and +-1 are fixed points bit for bit
    (roundoff there would otherwise pile up under the weak contraction
    toward the wells).
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    v = np.asarray(v, dtype=float)
    _check_maxnorm(v, 1.0 + MAXNORM_SLACK)
    growth = -math.expm1(-2.0 * tau)
    return v / np.sqrt(1.0 + growth * ((v - 1.0) * (v + 1.0)))


# ---------------------------------------------------------- logarithmic flow


def log_reaction(u, theta: float, theta_c: float):
    """theta_c u - (theta/2) (ln(1+u) - ln(1-u))."""
    return theta_c * u - 0.5 * theta * (np.log1p(u) - np.log1p(-u))


def _log_stage(rhs, c, theta, theta_c):
    """Solve U - c * g(U) = rhs pointwise for U in (-1, 1).

    g is the logarithmic reaction.  The residual runs from -inf to +inf over
    (-1, 1), so a bracket always exists; Newton steps that leave the current
    bracket are replaced by bisection.
    """
    lo = np.full_like(rhs, -1.0 + LOG_MARGIN)
    hi = np.full_like(rhs, 1.0 - LOG_MARGIN)
    u = np.clip(rhs, lo, hi)
    for _ in range(NEWTON_MAXITER):
        res = u - c * log_reaction(u, theta, theta_c) - rhs
        if np.all(np.abs(res) <= NEWTON_TOL):
            return u
        # residual is negative left of the root
        neg = res < 0
        lo = np.where(neg, u, lo)
        hi = np.where(neg, hi, u)
        dres = 1.0 - c * (theta_c - theta / ((1.0 - u) * (1.0 + u)))
        with np.errstate(divide="ignore", invalid="ignore"):
            step = u - res / dres
        ok = np.isfinite(step) & (step > lo) & (step < hi)
        u = np.where(ok, step, 0.5 * (lo + hi))
    res = u - c * log_reaction(u, theta, theta_c) - rhs
    worst = np.unravel_index(np.argmax(np.abs(res)), res.shape)
    if abs(res[worst]) <= NEWTON_TOL:
        return u
    raise SolverError(
        f"SDIRK stage did not converge at node {worst}: residual {res[worst]:.3e}"
    )


def nonlinear_log_rk(
    v: np.ndarray,
    tau: float,
    params: Logarithmic,
    tableau: SdirkTableau = DEFAULT_TABLEAU,
) -> np.ndarray:
    """One SDIRK step of the logarithmic reaction ODE at every node."""
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    v = np.asarray(v, dtype=float)
    _check_maxnorm(v, 1.0, strict=True)
    th, thc = params.theta, params.theta_c
    A = tableau.matrix
    b = tableau.weights

    u1 = _log_stage(v, A[0, 0] * tau, th, thc)
    k1 = log_reaction(u1, th, thc)
    u2 = _log_stage(v + (A[1, 0] * tau) * k1, A[1, 1] * tau, th, thc)
    k2 = log_reaction(u2, th, thc)
    out = v + tau * (b[0] * k1 + b[1] * k2)
    if not np.all(np.abs(out) < 1.0):
        idx = np.unravel_index(np.argmax(np.abs(out)), out.shape)
        raise SolverError(f"SDIRK step left (-1, 1) at node {idx}: {out[idx]!r}")
    return out


# -------------------------------------------------------------- ternary flow


def ternary_f(u):
    """Derivative of u^2 (1-u)^2 / 2."""
    return u * (1.0 - u) * (1.0 - 2.0 * u)


def _ternary_df(u):
    return 1.0 - 6.0 * u + 6.0 * u * u


def _spatial_mean(u: np.ndarray) -> np.ndarray:
    # Fixed reduction order (numpy pairwise sum over the flattened field) keeps
    # the coupling scalars reproducible.
    return u.reshape(u.shape[0], -1).mean(axis=1)


def _ternary_rhs(u: np.ndarray) -> np.ndarray:
    """-(f(u_l) - beta_l + Lambda) with beta_l the mean of f(u_l)."""
    fu = ternary_f(u)
    d = fu - _spatial_mean(fu)[:, None, None]
    return -(d - d.mean(axis=0))


def _ternary_stage(rhs: np.ndarray, c: float) -> np.ndarray:
    """Solve U + c * (f(U) - beta + Lambda(U)) = rhs, beta = mean f(U).

    Outer fixed point on the three scalars beta_l; for frozen beta the
    equations decouple into a 3x3 Newton system per node.  Its Jacobian
    diag(1 + c f') - (c/3) 1 f'^T is a rank-one update of a diagonal, so
    the Newton correction is written out in closed form.
    """
    u = rhs.copy()
    beta = _spatial_mean(ternary_f(u))
    for _ in range(OUTER_MAXITER):
        for _ in range(NEWTON_MAXITER):
            d = ternary_f(u) - beta[:, None, None]
            res = u + c * (d - d.mean(axis=0)) - rhs
            if np.max(np.abs(res)) <= NEWTON_TOL:
                break
            df = _ternary_df(u)
            diag = 1.0 + c * df
            y = res / diag
            z = 1.0 / diag
            scale = (c / 3.0) * (df * y).sum(axis=0) / (1.0 - (c / 3.0) * (df * z).sum(axis=0))
            u = u - (y + z * scale)
        else:
            raise SolverError(
                f"ternary stage Newton did not converge: residual {np.max(np.abs(res)):.3e}"
            )
        new_beta = _spatial_mean(ternary_f(u))
        change = np.max(np.abs(new_beta - beta))
        beta = new_beta
        if change <= OUTER_TOL:
            return u
    raise SolverError(f"ternary outer iteration stalled: beta change {change:.3e}")


def nonlinear_ternary_rk(
    state: np.ndarray, tau: float, tableau: SdirkTableau = DEFAULT_TABLEAU
) -> np.ndarray:
    """One SDIRK step of the ternary reaction system; ``state`` has shape (3, ny, nx).

    Stage slopes are re-evaluated from the converged stage values with their
    own spatial means, so each slope has zero mean and zero component sum up
    to roundoff: mass and the hyperplane sum are preserved by construction.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    state = np.asarray(state, dtype=float)
    if state.ndim != 3 or state.shape[0] != 3:
        raise ValueError(f"ternary state must have shape (3, ny, nx), got {state.shape}")
    if not np.all(np.isfinite(state)):
        raise PreconditionError("ternary state has non-finite values")
    A = tableau.matrix
    b = tableau.weights
    u1 = _ternary_stage(state, A[0, 0] * tau)
    k1 = _ternary_rhs(u1)
    u2 = _ternary_stage(state + (A[1, 0] * tau) * k1, A[1, 1] * tau)
    k2 = _ternary_rhs(u2)
    return state + tau * (b[0] * k1 + b[1] * k2)
