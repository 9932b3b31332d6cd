"""Collocation grids on [0, 2*pi]^2 and their spectral transforms.

Fields are plain ``ndarray`` objects of shape ``(ny, nx)`` (row-major, y
outer).  Stacked fields such as the ternary state carry extra leading axes;
every transform here acts on the last two axes only.

Neumann grids use midpoint nodes and the orthonormal type-II cosine
transform, so every basis function ``cos(k x / 2) cos(l y / 2)`` has zero
normal derivative at the walls.  Periodic grids use the real FFT.

Both transforms diagonalize two Laplacians on the same nodes, selected by
``Grid.symbol``:

* ``"spectral"``: the exact symbol, frequency ``kappa = k`` per direction;
* ``"fd"``: the five-point stencil with mirrored (Neumann) or wrapped
  (periodic) ghost nodes, ``kappa = (2/h) sin(k h / 2)``.

Only the five-point operator has a nonnegative heat kernel on the grid, so
only it keeps the discrete maximum principle; the truncated spectral kernel
rings next to steep interfaces.  Derivative weights use the same ``kappa``
so energies and norms match the operator being integrated.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "NEUMANN",
    "PERIODIC",
    "SPECTRAL",
    "FIVE_POINT",
    "UnsupportedOrderError",
    "forward",
    "inverse",
    "laplacian_symbol",
    "derivative_weight",
    "coefficient_energy",
    "quadrature",
]

NEUMANN = "neumann"
PERIODIC = "periodic"
SPECTRAL = "spectral"
FIVE_POINT = "fd"

LENGTH = 2.0 * math.pi
AREA = LENGTH * LENGTH
MAX_DERIVATIVE_ORDER = 6


class UnsupportedOrderError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    boundary: str = NEUMANN
    symbol: str = FIVE_POINT

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if int(n) != n or n < 4 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 4, got {n!r}")
        if self.boundary not in (NEUMANN, PERIODIC):
            raise ValueError(f"unknown boundary kind {self.boundary!r}")
        if self.symbol not in (SPECTRAL, FIVE_POINT):
            raise ValueError(f"unknown Laplacian symbol {self.symbol!r}")

    @classmethod
    def square(cls, n: int, boundary: str = NEUMANN, symbol: str = FIVE_POINT) -> "Grid":
        return cls(n, n, boundary, symbol)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def area(self) -> float:
        return AREA

    @property
    def hx(self) -> float:
        return LENGTH / self.nx

    @property
    def hy(self) -> float:
        return LENGTH / self.ny

    def axis_nodes(self, n: int) -> np.ndarray:
        shift = 0.5 if self.boundary == NEUMANN else 0.0
        return (np.arange(n) + shift) * (LENGTH / n)

    @property
    def x(self) -> np.ndarray:
        return self.axis_nodes(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.axis_nodes(self.ny)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, Y)`` node coordinates, each of shape ``(ny, nx)``."""
        return np.meshgrid(self.x, self.y, indexing="xy")

    def check(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if values.ndim < 2 or values.shape[-2:] != self.shape:
            raise ValueError(
                f"field of shape {values.shape} does not match grid shape {self.shape}"
            )
        return values

    @property
    def coeff_shape(self) -> tuple[int, int]:
        if self.boundary == NEUMANN:
            return self.shape
        return (self.ny, self.nx // 2 + 1)


def forward(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Spectral coefficients of a nodal field (last two axes)."""
    values = grid.check(values)
    if grid.boundary == NEUMANN:
        return sfft.dctn(values, type=2, axes=(-2, -1), norm="ortho")
    return sfft.rfft2(values, axes=(-2, -1))


def inverse(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs)
    if coeffs.ndim < 2 or coeffs.shape[-2:] != grid.coeff_shape:
        raise ValueError(
            f"coefficients of shape {coeffs.shape} do not match {grid.coeff_shape}"
        )
    if grid.boundary == NEUMANN:
        return sfft.idctn(coeffs, type=2, axes=(-2, -1), norm="ortho")
    return sfft.irfft2(coeffs, s=grid.shape, axes=(-2, -1))


@functools.lru_cache(maxsize=64)
def _frequencies(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    # Effective frequencies along x (columns) and y (rows) of the coefficient array.
    if grid.boundary == NEUMANN:
        kx = np.arange(grid.nx) / 2.0
        ky = np.arange(grid.ny) / 2.0
    else:
        kx = sfft.rfftfreq(grid.nx, 1.0 / grid.nx)
        ky = sfft.fftfreq(grid.ny, 1.0 / grid.ny)
    if grid.symbol == FIVE_POINT:
        kx = (2.0 / grid.hx) * np.sin(0.5 * grid.hx * kx)
        ky = (2.0 / grid.hy) * np.sin(0.5 * grid.hy * ky)
    return kx[np.newaxis, :], ky[:, np.newaxis]


@functools.lru_cache(maxsize=64)
def laplacian_symbol(grid: Grid) -> np.ndarray:
    """Eigenvalue of the Laplacian for every mode; all entries <= 0."""
    kx, ky = _frequencies(grid)
    mu = -(kx**2 + ky**2)
    mu[0, 0] = 0.0
    mu.setflags(write=False)
    return mu


@functools.lru_cache(maxsize=256)
def derivative_weight(grid: Grid, alpha: tuple[int, int]) -> np.ndarray:
    """Plancherel weight of ``D^alpha`` per mode.

    ``||D^alpha u||^2 = sum(derivative_weight(grid, alpha) * coefficient_energy(grid, c))``.
    """
    i1, i2 = (int(a) for a in alpha)
    if i1 < 0 or i2 < 0:
        raise UnsupportedOrderError(f"negative multi-index {alpha!r}")
    if i1 + i2 > MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(
            f"|alpha| = {i1 + i2} exceeds the supported order {MAX_DERIVATIVE_ORDER}"
        )
    kx, ky = _frequencies(grid)
    w = (kx ** (2 * i1)) * (ky ** (2 * i2))
    w = np.broadcast_to(w, grid.coeff_shape).copy()
    w.setflags(write=False)
    return w


@functools.lru_cache(maxsize=64)
def _energy_scale(grid: Grid) -> np.ndarray:
    if grid.boundary == NEUMANN:
        return np.full(grid.coeff_shape, AREA / grid.size)
    # Columns 1 .. nx/2 - 1 of the half spectrum stand for two conjugate modes.
    mult = np.full(grid.nx // 2 + 1, 2.0)
    mult[0] = mult[-1] = 1.0
    return np.broadcast_to(mult * (AREA / grid.size**2), grid.coeff_shape).copy()


def coefficient_energy(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    """Per-mode share of the squared L2 norm; sums to ``quadrature(u**2)``."""
    return _energy_scale(grid) * np.abs(coeffs) ** 2


def quadrature(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Integral over the domain by the uniform-weight rule (last two axes)."""
    values = grid.check(values)
    return values.mean(axis=(-2, -1)) * AREA
