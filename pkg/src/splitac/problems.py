"""Initial conditions and random test fields.

Randomness comes from numpy's Philox 4x64 counter-based generator so every
draw is reproducible from a single 64-bit seed.
"""
from __future__ import annotations

import math

import numpy as np

from .grid import Grid, NEUMANN, inverse

PI = math.pi

# (x_i, y_i, r_i) of the seven-circle layout
SEVEN_CIRCLES = (
    (PI / 2, PI / 2, PI / 5),
    (PI / 4, 3 * PI / 4, 2 * PI / 15),
    (PI / 2, 5 * PI / 4, 2 * PI / 15),
    (PI, PI / 4, PI / 10),
    (3 * PI / 2, PI / 4, PI / 10),
    (PI, PI, PI / 4),
    (3 * PI / 2, 3 * PI / 2, PI / 4),
)

PRNG_NAME = "numpy.random.Philox(4x64)"
DISK_RADIUS_SQ = 1.2


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def bump(s: np.ndarray, eps: float) -> np.ndarray:
    """2 exp(-eps^2/s^2) inside (s < 0), zero outside."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = s < 0
    out[inside] = 2.0 * np.exp(-(eps * eps) / s[inside] ** 2)
    return out


def seven_circles_at(x, y, eps: float, circles=SEVEN_CIRCLES) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = np.full(np.broadcast(x, y).shape, -1.0)
    for cx, cy, r in circles:
        u += bump(np.hypot(x - cx, y - cy) - r, eps)
    return u


def seven_circles(grid: Grid, eps: float) -> np.ndarray:
    X, Y = grid.mesh()
    return seven_circles_at(X, Y, eps)


def disk_indicator(grid: Grid) -> np.ndarray:
    """0.25 inside the closed disk (x-pi)^2 + (y-pi)^2 <= 1.2, -0.25 outside."""
    X, Y = grid.mesh()
    inside = (X - PI) ** 2 + (Y - PI) ** 2 <= DISK_RADIUS_SQ
    return 0.5 * (inside.astype(float) - 0.5)


def random_ternary(grid: Grid, seed: int) -> np.ndarray:
    """Three uniform random fields normalized to sum to one at every node."""
    gen = rng(seed)
    phi = gen.random((3,) + grid.shape)
    # resample nodes with a zero sum (measure zero, but keep the division safe)
    total = phi.sum(axis=0)
    while np.any(total <= 0):
        bad = total <= 0
        phi[:, bad] = gen.random((3, int(bad.sum())))
        total = phi.sum(axis=0)
    return phi / total


def random_bandlimited(
    grid: Grid, seed: int, max_mode: int, amplitude: float
) -> np.ndarray:
    """Random smooth field with modes below ``max_mode`` and max-norm ``amplitude``."""
    if not 0 < max_mode < min(grid.nx, grid.ny) / 2:
        raise ValueError(f"max_mode must lie in (0, {min(grid.nx, grid.ny) // 2})")
    gen = rng(seed)
    coeffs = np.zeros(grid.coeff_shape, dtype=float if grid.boundary == NEUMANN else complex)
    if grid.boundary == NEUMANN:
        coeffs[:max_mode, :max_mode] = gen.standard_normal((max_mode, max_mode))
    else:
        rows = np.r_[0:max_mode, grid.ny - max_mode + 1 : grid.ny]
        shape = (len(rows), max_mode)
        block = gen.standard_normal(shape) + 1j * gen.standard_normal(shape)
        coeffs[rows, :max_mode] = block
    v = inverse(grid, coeffs)
    peak = np.max(np.abs(v))
    if amplitude == 0 or peak == 0:
        return np.zeros(grid.shape)
    return v * (amplitude / peak)
