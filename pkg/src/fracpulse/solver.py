"""Reduction of a linear Caputo problem to a triangular system and its solution.

The equation

    sum_k phi_k(t) * D^(beta_k) x(t) = f(t),    Caputo orders beta_1 > beta_2 > ...

with initial values x(0), x'(0), ..., x^(n-1)(0), n = ceil(beta_1), is solved
by substituting u = x^(n). Each Caputo term is a fractional integral of an
integer derivative of x, and each integer derivative of x is its Taylor data
plus a repeated integral of u, so in the image domain the equation becomes a
single lower-triangular linear system A u = psi in the spectrum of u:

    A   = sum_k D(Phi_k) P^(n - beta_k)
    psi = F - sum_k D(Phi_k) P^(ceil_k - beta_k) (IC polynomial of x^(ceil_k))

where D(Phi_k) is the diagonal matrix of the coefficient's spectrum (the
image-domain form of multiplying two signals in this basis). Forward
substitution then yields u, and the solution and its derivatives are
recovered by integrating back with the integer-order matrices.

The leading coefficient must be identically 1 (callers pre-divide); that
keeps the diagonal of A dominated by the leading h^(n-beta_1) term and leaves
no division policy inside the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .basis import (
    GridConfig,
    Spectrum,
    bp_spectrum,
    monomial_spectrum,
    reconstruct,
)
from .opmatrix import OpMatrix, compose, frac_integration_matrix
from .oracle import rl_integral_of_spectrum

CompositionMode = Literal["single", "composed"]

# Pivot guard for forward substitution, relative to the largest matrix entry.
_PIVOT_RTOL = 1e-12

# Where the leading coefficient is spot-checked for normalization.
_NORMALIZATION_FRACTIONS = (0.0, 0.137, 0.31, 0.5, 0.73, 0.94)


class NumericalError(ArithmeticError):
    """The reduction or solve produced non-finite numbers or lost a pivot."""


class SingularSystemError(NumericalError):
    """Forward substitution met a pivot below the singularity tolerance."""

    def __init__(self, row: int, pivot: float):
        self.row = row
        self.pivot = pivot
        super().__init__(f"near-zero pivot {pivot:.6e} in row {row} of the triangular system")


@dataclass(frozen=True)
class FDETerm:
    """One term phi(t) * D^beta x(t); beta = 0 means plain phi(t) * x(t)."""

    beta: float
    coeff: Callable[[float], float]

    def __post_init__(self) -> None:
        if not (isinstance(self.beta, (int, float, np.floating)) and math.isfinite(self.beta) and self.beta >= 0):
            raise ValueError(f"term order must be finite and >= 0, got {self.beta!r}")
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def ceil_order(self) -> int:
        """Smallest integer >= beta (0 for a zero-order term)."""
        return math.ceil(self.beta)


@dataclass(frozen=True, eq=False)
class FDEProblem:
    """Cauchy problem sum_k phi_k(t) D^(beta_k) x = f(t) on a block-pulse grid.

    ``terms`` must be sorted by strictly descending order with the leading
    coefficient identically 1; ``ics`` holds x(0), x'(0), ...,
    x^(n-1)(0) with n = ceil of the leading order.
    """

    terms: tuple[FDETerm, ...]
    rhs: Callable[[float], float]
    ics: tuple[float, ...]
    grid: GridConfig

    def __post_init__(self) -> None:
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("problem must have at least one term")
        betas = [term.beta for term in terms]
        if any(b1 <= b2 for b1, b2 in zip(betas, betas[1:])):
            raise ValueError(f"term orders must be strictly descending, got {betas}")
        if betas[0] <= 0:
            raise ValueError("leading term must have positive order")
        ics = tuple(float(v) for v in self.ics)
        if len(ics) != math.ceil(betas[0]):
            raise ValueError(
                f"expected {math.ceil(betas[0])} initial values for leading order "
                f"{betas[0]}, got {len(ics)}"
            )
        if not all(math.isfinite(v) for v in ics):
            raise ValueError("initial values must all be finite")
        for frac in _NORMALIZATION_FRACTIONS:
            t = frac * self.grid.T
            if abs(float(terms[0].coeff(t)) - 1.0) > 1e-12:
                raise ValueError(
                    "leading term coefficient must be identically 1 "
                    f"(found {terms[0].coeff(t)!r} at t={t}); divide the equation through first"
                )
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "ics", ics)

    @property
    def order(self) -> int:
        """n = ceil of the leading Caputo order; the number of initial values."""
        return len(self.ics)


@dataclass(frozen=True, eq=False)
class FDESolution:
    """Spectra of u = x^(n) and of x^(j) for j = 0..n-1, with reconstruction."""

    u_spectrum: Spectrum
    deriv_spectra: tuple[Spectrum, ...]
    grid: GridConfig

    @property
    def order(self) -> int:
        return len(self.deriv_spectra)

    def spectrum_of(self, derivative: int) -> Spectrum:
        """Spectrum of x^(derivative); derivative = n returns u itself."""
        if not 0 <= derivative <= self.order:
            raise ValueError(f"derivative {derivative} outside 0..{self.order}")
        if derivative == self.order:
            return self.u_spectrum
        return self.deriv_spectra[derivative]

    def value(self, t: float, derivative: int = 0) -> float:
        """Reconstructed x^(derivative) at time t (piecewise constant)."""
        return reconstruct(self.spectrum_of(derivative), t)


def _lhs_matrix(term: FDETerm, n: int, grid: GridConfig, mode: CompositionMode) -> OpMatrix:
    """Integration matrix multiplying u in the image of this term."""
    if mode == "single":
        return frac_integration_matrix(n - term.beta, grid)
    mk = term.ceil_order
    fractional = frac_integration_matrix(mk - term.beta, grid)
    if n == mk:
        return fractional
    return compose(fractional, frac_integration_matrix(float(n - mk), grid))


def _ic_polynomial_spectrum(ics: Sequence[float], mk: int, grid: GridConfig) -> np.ndarray:
    """Spectrum of the Taylor part of x^(mk): sum of ics[l] t^(l-mk)/(l-mk)!."""
    acc = np.zeros(grid.m)
    for l in range(mk, len(ics)):
        if ics[l] != 0.0:
            acc += ics[l] / math.factorial(l - mk) * monomial_spectrum(float(l - mk), grid).coeffs
    return acc


def assemble_system(
    problem: FDEProblem, composition_mode: CompositionMode = "single"
) -> tuple[np.ndarray, np.ndarray]:
    """Image-domain system (A, psi) with A lower triangular.

    ``composition_mode`` selects how the matrix acting on u is built for a
    term of order beta with ceiling c: "single" uses the one matrix of order
    n - beta; "composed" uses the product P^(c-beta) P^(n-c). The two are
    equal for the continuous operators; discretely they differ by O(h).
    """
    if composition_mode not in ("single", "composed"):
        raise ValueError(f"composition_mode must be 'single' or 'composed', got {composition_mode!r}")
    grid = problem.grid
    m = grid.m
    n = problem.order
    A = np.zeros((m, m))
    psi = bp_spectrum(problem.rhs, grid).coeffs.copy()
    for term in problem.terms:
        phibar = bp_spectrum(term.coeff, grid).coeffs
        A += phibar[:, None] * _lhs_matrix(term, n, grid, composition_mode).dense()
        mk = term.ceil_order
        ic_spec = _ic_polynomial_spectrum(problem.ics, mk, grid)
        if ic_spec.any():
            forcing = frac_integration_matrix(mk - term.beta, grid)
            psi -= phibar * np.convolve(forcing.first_col, ic_spec)[:m]
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(psi))):
        raise NumericalError("assembled system contains non-finite entries")
    return A, psi


def solve_triangular(A: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Forward substitution for a lower-triangular system A u = psi.

    Pivots with magnitude at or below 1e-12 * max|A| raise
    :class:`SingularSystemError` carrying the offending (1-based) row.
    """
    A = np.asarray(A, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    m = A.shape[0]
    if psi.shape != (m,):
        raise ValueError(f"right-hand side shape {psi.shape} does not match m={m}")
    tol = _PIVOT_RTOL * np.abs(A).max()
    u = np.zeros(m)
    for i in range(m):
        pivot = A[i, i]
        if abs(pivot) <= tol:
            raise SingularSystemError(i + 1, float(pivot))
        u[i] = (psi[i] - A[i, :i] @ u[:i]) / pivot
    return u


def derivative_spectra(u: Spectrum, ics: Sequence[float]) -> list[Spectrum]:
    """Spectra of x^(j), j = 0..n-1, from the spectrum of u = x^(n).

    X_j = sum_{l=j}^{n-1} ics[l] t^(l-j)/(l-j)!  +  P^(n-j) u,
    the image-domain form of integrating u down n - j times and adding the
    Taylor data. Element [0] of the result is the solution spectrum itself.
    """
    grid = u.grid
    n = len(ics)
    out = []
    for j in range(n):
        acc = _ic_polynomial_spectrum(ics, j, grid)
        P = frac_integration_matrix(float(n - j), grid)
        acc = acc + np.convolve(P.first_col, u.coeffs)[: grid.m]
        if not np.all(np.isfinite(acc)):
            raise NumericalError(f"derivative {j} spectrum contains non-finite entries")
        out.append(Spectrum(acc, grid))
    return out


def solve(
    problem: FDEProblem, composition_mode: CompositionMode = "single"
) -> FDESolution:
    """Full pipeline: assemble, forward-substitute, and integrate back."""
    A, psi = assemble_system(problem, composition_mode)
    u_vec = solve_triangular(A, psi)
    if not np.all(np.isfinite(u_vec)):
        raise NumericalError("solution spectrum contains non-finite entries")
    u = Spectrum(u_vec, problem.grid)
    derivs = derivative_spectra(u, problem.ics)
    return FDESolution(u, tuple(derivs), problem.grid)


def residual(
    sol: FDESolution, problem: FDEProblem, points: Sequence[float]
) -> np.ndarray:
    """Signed equation residuals of the reconstructed solution at ``points``.

    Each Caputo term is evaluated exactly from the block-pulse expansion of
    the relevant integer derivative via the closed-form fractional integral,
    so the residual reflects the method's approximation error alone.
    Integer-order terms (beta equal to its ceiling) reduce to direct
    reconstruction.
    """
    grid = problem.grid
    out = np.empty(len(points))
    for idx, t in enumerate(points):
        t = float(t)
        if not 0.0 <= t < grid.T:
            raise ValueError(f"residual point t={t!r} outside [0, {grid.T})")
        acc = 0.0
        for term in problem.terms:
            mk = term.ceil_order
            spec = sol.spectrum_of(mk)
            gap = mk - term.beta
            if gap == 0.0:
                value = reconstruct(spec, t)
            else:
                value = rl_integral_of_spectrum(spec, gap, t)
            acc += float(term.coeff(t)) * value
        out[idx] = acc - float(problem.rhs(t))
    return out
