"""Block-pulse basis functions, spectra, and least-squares projection.

A signal x(t) on [0, T) is approximated by a generalized polynomial over a
basis of m functions; the coefficient vector of that polynomial is the
signal's approximating spectrum. For the block-pulse basis (disjoint unit
rectangles of width h = T/m tiling [0, T)) the normal equations collapse and
the spectrum is simply the vector of per-subinterval means, which is what
:func:`bp_spectrum` computes. :func:`project_general` keeps the generic
Gram-matrix route for arbitrary bases; the rest of the library only ever
uses the block-pulse fast path.

All types here are immutable values and all operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

Signal = Callable[[float], float]

# 16-point Gauss-Legendre on [-1, 1]: exact through polynomial degree 31,
# fixed cost, no adaptive-recursion edge cases.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)

# project_general refuses Gram matrices with a condition estimate above this.
_GRAM_COND_LIMIT = 1e12


class SignalEvaluationError(ValueError):
    """A signal produced a non-finite value at a quadrature sample."""


class ProjectionError(ValueError):
    """The Gram matrix of the basis is singular or too ill-conditioned."""


@dataclass(frozen=True)
class GridConfig:
    """Uniform partition of [0, T) into ``m`` subintervals of width h = T/m.

    ``h`` is always derived from ``m`` and ``T``; it is never stored
    separately, so the three can never disagree.
    """

    m: int
    T: float

    def __post_init__(self) -> None:
        if not isinstance(self.m, (int, np.integer)):
            raise TypeError(f"m must be an integer, got {type(self.m).__name__}")
        object.__setattr__(self, "m", int(self.m))
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if not (isinstance(self.T, (int, float, np.floating)) and math.isfinite(self.T) and self.T > 0):
            raise ValueError(f"T must be a positive finite real, got {self.T!r}")
        object.__setattr__(self, "T", float(self.T))

    @property
    def h(self) -> float:
        return self.T / self.m

    def midpoints(self) -> np.ndarray:
        """Midpoints of the m subintervals, where the reconstruction is most meaningful."""
        return (np.arange(self.m) + 0.5) * self.h


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Block-pulse expansion coefficients of a signal on ``grid``.

    ``coeffs[i]`` is the mean of the signal over the (i+1)-th subinterval.
    The coefficient array is copied on construction and frozen; every entry
    must be finite.
    """

    coeffs: np.ndarray
    grid: GridConfig

    def __post_init__(self) -> None:
        arr = np.array(self.coeffs, dtype=float)
        if arr.shape != (self.grid.m,):
            raise ValueError(
                f"spectrum length {arr.shape} does not match grid with m={self.grid.m}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("spectrum coefficients must all be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def __len__(self) -> int:
        return self.grid.m


def bp_value(grid: GridConfig, i: int, t: float) -> float:
    """Value of the i-th block pulse (1-based): 1 on [(i-1)h, ih), else 0.

    A subinterval boundary belongs to the interval on its right.
    """
    if not 1 <= i <= grid.m:
        raise IndexError(f"pulse index {i} outside 1..{grid.m}")
    h = grid.h
    return 1.0 if (i - 1) * h <= t < i * h else 0.0


def _subinterval_samples(grid: GridConfig, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature points and weights for the (i+1)-th subinterval (0-based i)."""
    h = grid.h
    a = i * h
    return a + 0.5 * h * (_GL_NODES + 1.0), 0.5 * h * _GL_WEIGHTS


def bp_spectrum(f: Signal, grid: GridConfig) -> Spectrum:
    """Project a signal onto the block-pulse basis.

    Each coefficient is the mean of ``f`` over one subinterval, evaluated by
    16-point Gauss-Legendre quadrature on that subinterval. Raises
    :class:`SignalEvaluationError` naming the offending time if ``f`` returns
    NaN or infinity at any sample.
    """
    h = grid.h
    coeffs = np.empty(grid.m)
    for i in range(grid.m):
        ts, ws = _subinterval_samples(grid, i)
        acc = 0.0
        for w, t in zip(ws, ts):
            v = float(f(t))
            if not math.isfinite(v):
                raise SignalEvaluationError(
                    f"signal evaluated to non-finite value {v!r} at t={t!r}"
                )
            acc += w * v
        coeffs[i] = acc / h
    return Spectrum(coeffs, grid)


def monomial_spectrum(p: float, grid: GridConfig) -> Spectrum:
    """Exact block-pulse spectrum of t**p for p >= 0 (closed form, no quadrature).

    coeffs[i] = ((i h)^(p+1) - ((i-1) h)^(p+1)) / (h (p+1)).
    """
    if not (p >= 0 and math.isfinite(p)):
        raise ValueError(f"monomial power must be >= 0 and finite, got {p!r}")
    h = grid.h
    edges = np.arange(grid.m + 1) * h
    primitives = edges ** (p + 1.0)
    return Spectrum(np.diff(primitives) / (h * (p + 1.0)), grid)


def reconstruct(spec: Spectrum, t: float) -> float:
    """Piecewise-constant reconstruction: the coefficient of the subinterval holding t.

    Defined on [0, T) only; t = T is a range error because the basis tiles a
    half-open interval.
    """
    grid = spec.grid
    if not 0.0 <= t < grid.T:
        raise ValueError(f"t={t!r} outside the approximation interval [0, {grid.T})")
    i = min(int(t / grid.h), grid.m - 1)
    return float(spec.coeffs[i])


def project_general(
    f: Signal, basis: Sequence[Signal], grid: GridConfig
) -> np.ndarray:
    """Least-squares coefficients of ``f`` in an arbitrary function basis on [0, T).

    Solves the normal equations W X = Q with w_ij = integral of s_i s_j and
    q_i = integral of f s_i over [0, T), every integral evaluated by the same
    per-subinterval 16-point Gauss-Legendre rule as :func:`bp_spectrum`.
    Exists for generality and cross-checking; the solver itself only uses the
    block-pulse fast path.
    """
    n = len(basis)
    if n == 0:
        raise ValueError("basis must contain at least one function")
    ts = np.concatenate([_subinterval_samples(grid, i)[0] for i in range(grid.m)])
    ws = np.concatenate([_subinterval_samples(grid, i)[1] for i in range(grid.m)])

    def sample(fn: Signal, label: str) -> np.ndarray:
        vals = np.empty(ts.size)
        for k, t in enumerate(ts):
            vals[k] = float(fn(t))
            if not math.isfinite(vals[k]):
                raise SignalEvaluationError(
                    f"{label} evaluated to non-finite value at t={t!r}"
                )
        return vals

    S = np.empty((n, ts.size))
    for j, s in enumerate(basis):
        S[j] = sample(s, f"basis function {j + 1}")
    fv = sample(f, "signal")

    W = (S * ws) @ S.T
    Q = (S * ws) @ fv
    cond = np.linalg.cond(W)
    if not math.isfinite(cond) or cond > _GRAM_COND_LIMIT:
        raise ProjectionError(
            f"Gram matrix condition estimate {cond:.3e} exceeds {_GRAM_COND_LIMIT:.0e}"
        )
    return np.linalg.solve(W, Q)
