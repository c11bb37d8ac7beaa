"""Phase-space diagnostics: Wigner function on a grid and negativity measures.

Displaced-parity convention, normalized so that the Wigner function
integrates to one over the (x, p) plane:

    W(x, p) = (1/pi) Tr[rho D(alpha) Pi D(-alpha)],   alpha = (x + i p)/sqrt(2),

with Pi the photon-number parity operator and x = (a + a^dag)/sqrt(2)
(hbar = 1).  Using Pi D(-alpha) = D(alpha) Pi this reduces to the exact
closed form

    W = (1/pi) sum_{n,m} rho_{nm} (-1)^n <m|D(2 alpha)|n>,

whose displacement matrix elements are associated Laguerre polynomials, so
no numerical quadrature or operator exponential is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre

from .errors import DimensionMismatchError, ToleranceNotMetError
from .fock import DensityOperator, PureState

NORMALIZATION_TOL = 1e-3
DEFAULT_EXTENT = 4.0
DEFAULT_POINTS = 161
CONVENTION = "displaced-parity"


@dataclass(frozen=True)
class WignerGrid:
    """Wigner samples W[i, j] = W(x[i], p[j]) on uniform grids (x-major)."""

    x: np.ndarray
    p: np.ndarray
    W: np.ndarray
    convention: str = CONVENTION

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    def integral(self) -> float:
        """Riemann sum of W over the grid (should be ~1 when the grid is
        wide enough)."""
        return float(np.sum(self.W) * self.dx * self.dp)

    def marginal_x(self) -> np.ndarray:
        """Position-quadrature distribution: sum over p of W * dp."""
        return np.sum(self.W, axis=1) * self.dp


def _field_density_matrix(rho_field) -> np.ndarray:
    if isinstance(rho_field, PureState):
        rho_field = rho_field.to_density()
    space = rho_field.space
    if space.atom is not None or len(space.modes) != 1:
        raise DimensionMismatchError("wigner expects a single-mode field-only state")
    return rho_field.matrix


def _displacement_column(m: int, n: int, gamma: np.ndarray) -> np.ndarray:
    """<m|D(gamma)|n> evaluated on an array of displacements."""
    a2 = np.abs(gamma) ** 2
    if m >= n:
        pref = math.sqrt(math.factorial(n) / math.factorial(m))
        return pref * gamma ** (m - n) * np.exp(-a2 / 2) * eval_genlaguerre(n, m - n, a2)
    pref = math.sqrt(math.factorial(m) / math.factorial(n))
    return pref * (-np.conj(gamma)) ** (n - m) * np.exp(-a2 / 2) * eval_genlaguerre(m, n - m, a2)


def wigner_point(rho_field, x: float, p: float) -> float:
    """Single-point evaluation (used for spot checks and the parity identity)."""
    rho = _field_density_matrix(rho_field)
    d = rho.shape[0]
    gamma = np.array([2.0 * (x + 1j * p) / math.sqrt(2.0)])
    total = 0.0 + 0.0j
    for n in range(d):
        for m in range(d):
            if rho[n, m] == 0:
                continue
            total += rho[n, m] * (-1) ** n * _displacement_column(m, n, gamma)[0]
    return float(np.real(total) / math.pi)


def wigner(rho_field, x=None, p=None, check_normalization: bool = True) -> WignerGrid:
    """Wigner function of a single-mode field state on a rectangular grid.

    Default grid: x, p in [-4, 4] with 161 points each.  Raises when the
    grid is too small for the state (Riemann sum departs from 1 by more
    than 1e-3), which guards against silently clipped phase-space support.
    """
    rho = _field_density_matrix(rho_field)
    d = rho.shape[0]
    if x is None:
        x = np.linspace(-DEFAULT_EXTENT, DEFAULT_EXTENT, DEFAULT_POINTS)
    if p is None:
        p = np.linspace(-DEFAULT_EXTENT, DEFAULT_EXTENT, DEFAULT_POINTS)
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    xs, ps = np.meshgrid(x, p, indexing="ij")
    gamma = (2.0 * (xs + 1j * ps) / math.sqrt(2.0)).ravel()
    total = np.zeros(gamma.shape, dtype=complex)
    for n in range(d):
        for m in range(d):
            if rho[n, m] == 0:
                continue
            total += rho[n, m] * (-1) ** n * _displacement_column(m, n, gamma)
    W = np.real(total).reshape(xs.shape) / math.pi
    grid = WignerGrid(x=x, p=p, W=W)
    if check_normalization and abs(grid.integral() - 1.0) > NORMALIZATION_TOL:
        raise ToleranceNotMetError(
            f"Wigner grid integral {grid.integral():.6f} != 1; grid too small for the state"
        )
    return grid


def negativity_volume(grid: WignerGrid) -> float:
    """Integrated negative part: sum of max(-W, 0) * dx * dp."""
    return float(np.sum(np.maximum(-grid.W, 0.0)) * grid.dx * grid.dp)


def write_csv(grid: WignerGrid, path, header_comment: str | None = None) -> None:
    """Deterministic x-major CSV with columns x, p, W."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write("x,p,W\n")
        for i, xv in enumerate(grid.x):
            for j, pv in enumerate(grid.p):
                fh.write(f"{xv:.12g},{pv:.12g},{grid.W[i, j]:.12g}\n")
