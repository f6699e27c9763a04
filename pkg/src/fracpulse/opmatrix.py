"""Operational matrices of fractional-order integration in the block-pulse basis.

In the image domain, integrating a signal to order beta >= 0 is multiplication
of its spectrum by a lower-triangular Toeplitz matrix P^beta whose first
column is

    g[0]   = h^beta / Gamma(beta + 2)
    g[k]   = g[0] * ((k+1)^(beta+1) - 2 k^(beta+1) + (k-1)^(beta+1)),  k >= 1

i.e. scaled second differences of the convex map k -> k^(beta+1). beta = 1
reproduces the classical (h/2)-banded integration matrix and beta = 0 the
identity, so integer, fractional, and zero-order terms all flow through the
same code path. Only the first column is stored; the dense matrix is
materialized on explicit request.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import GridConfig, Spectrum

# Lanczos approximation of the gamma function, g = 7, 9 coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_fn(x: float) -> float:
    """Euler gamma function for real x > 0 (Lanczos, g=7, 9 coefficients).

    Arguments below 0.5 take one recurrence step Gamma(x) = Gamma(x+1)/x to
    stay inside the kernel's accurate range; no reflection is needed because
    the domain is restricted to positive x.
    """
    if not (isinstance(x, (int, float, np.floating)) and math.isfinite(x) and x > 0):
        raise ValueError(f"gamma_fn requires finite x > 0, got {x!r}")
    x = float(x)
    if x < 0.5:
        return gamma_fn(x + 1.0) / x
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for k in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


@dataclass(frozen=True, eq=False)
class OpMatrix:
    """Lower-triangular Toeplitz integration matrix, stored by its first column.

    entry(i, j) = first_col[i - j] for i >= j (0-based), 0 above the diagonal.
    ``beta`` records the integration order the matrix realizes (for a product
    of matrices, the sum of the factors' orders, which the discrete product
    only approximates).
    """

    beta: float
    grid: GridConfig
    first_col: np.ndarray

    def __post_init__(self) -> None:
        col = np.array(self.first_col, dtype=float)
        if col.shape != (self.grid.m,):
            raise ValueError(
                f"first_col length {col.shape} does not match grid with m={self.grid.m}"
            )
        if not np.all(np.isfinite(col)):
            raise ValueError("operational matrix entries must all be finite")
        col.setflags(write=False)
        object.__setattr__(self, "first_col", col)

    def dense(self) -> np.ndarray:
        """Materialize the full m x m matrix (for dumps and tests)."""
        m = self.grid.m
        out = np.zeros((m, m))
        for k in range(m):
            rows = np.arange(k, m)
            out[rows, rows - k] = self.first_col[k]
        return out

    def apply(self, x: Spectrum) -> Spectrum:
        """Spectrum of the order-beta integral of ``x``.

        Direct truncated convolution of the first column with the input
        coefficients (the lower-triangular Toeplitz matrix-vector product).
        """
        if x.grid != self.grid:
            raise ValueError(
                f"grid mismatch: matrix on m={self.grid.m}, T={self.grid.T} "
                f"but spectrum on m={x.grid.m}, T={x.grid.T}"
            )
        y = np.convolve(self.first_col, x.coeffs)[: self.grid.m]
        return Spectrum(y, self.grid)


def frac_integration_matrix(beta: float, grid: GridConfig) -> OpMatrix:
    """Operational integration matrix P^beta for beta >= 0.

    beta = 0 returns the identity; beta = 1 the classical banded integration
    matrix. For beta > 0 every first-column entry is strictly positive.
    """
    if not (isinstance(beta, (int, float, np.floating)) and math.isfinite(beta) and beta >= 0):
        raise ValueError(f"integration order must be finite and >= 0, got {beta!r}")
    beta = float(beta)
    if beta == 0.0:
        # the degenerate order must be the exact identity, not identity to
        # within the accuracy of the gamma approximation
        col = np.zeros(grid.m)
        col[0] = 1.0
        return OpMatrix(0.0, grid, col)
    h = grid.h
    scale = h**beta / gamma_fn(beta + 2.0)
    col = np.empty(grid.m)
    col[0] = 1.0
    if grid.m > 1:
        k = np.arange(1, grid.m, dtype=float)
        col[1:] = (k + 1.0) ** (beta + 1.0) - 2.0 * k ** (beta + 1.0) + (k - 1.0) ** (beta + 1.0)
    col *= scale
    if not np.all(np.isfinite(col)):
        raise ValueError(f"non-finite matrix entries for beta={beta}, h={h}")
    return OpMatrix(beta, grid, col)


def compose(a: OpMatrix, b: OpMatrix) -> OpMatrix:
    """Matrix product a @ b, still lower-triangular Toeplitz.

    The first column of the product is the truncated convolution of the
    factors' first columns. The product approximates the single matrix of
    order a.beta + b.beta; the two agree only in the m -> infinity limit.
    """
    if a.grid != b.grid:
        raise ValueError("cannot compose operational matrices on different grids")
    col = np.convolve(a.first_col, b.first_col)[: a.grid.m]
    return OpMatrix(a.beta + b.beta, a.grid, col)
