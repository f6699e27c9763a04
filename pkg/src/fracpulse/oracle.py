"""Direct evaluators of the Riemann-Liouville integral and the Caputo derivative.

These are the non-operational references that residual checks and the test
suite are built on; nothing here touches the operational matrices.

The weakly singular kernel (t - tau)^(beta-1) is removed by the substitution
w = (t - tau)^beta, which turns the integral into

    I^beta f(t) = 1/Gamma(beta+1) * integral_0^(t^beta) f(t - w^(1/beta)) dw

with a bounded integrand. The transformed integrand is generally only
Hoelder-continuous at the endpoints (w^(1/beta) is not smooth at w = 0 for
non-integer 1/beta), so the 64-point Gauss-Legendre rule is applied on a
fixed set of panels geometrically graded toward both endpoints rather than
on a single panel; that restores near machine-precision accuracy for every
order at fixed cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import Spectrum
from .opmatrix import gamma_fn

_QUAD_NODES, _QUAD_WEIGHTS = np.polynomial.legendre.leggauss(64)

# Panels per half-interval and grading ratio; 2*levels + 2 panels in total.
_GRADING_LEVELS = 12
_GRADING_RATIO = 0.15


@dataclass(frozen=True)
class FracOrder:
    """Fractional order beta > 0 with its integer ceiling n, n-1 < beta <= n."""

    beta: float

    def __post_init__(self) -> None:
        if not (isinstance(self.beta, (int, float, np.floating)) and math.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"fractional order must be finite and > 0, got {self.beta!r}")
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def n(self) -> int:
        return math.ceil(self.beta)


def _graded_edges(length: float) -> list[float]:
    """Panel edges on [0, length], geometrically refined toward both ends."""
    half = 0.5 * length
    left = [half * _GRADING_RATIO**j for j in range(_GRADING_LEVELS, 0, -1)]
    right = [length - half * _GRADING_RATIO**j for j in range(1, _GRADING_LEVELS + 1)]
    return [0.0, *left, half, *right, length]


def rl_integral(f: Callable[[float], float], beta: float, t: float) -> float:
    """Riemann-Liouville integral of order beta > 0 at time t >= 0.

    Evaluates 1/Gamma(beta) * integral_0^t (t-tau)^(beta-1) f(tau) dtau via
    the singularity-removing substitution described in the module docstring.
    Raises ValueError if ``f`` returns a non-finite value at a sample point.
    """
    if not (isinstance(beta, (int, float, np.floating)) and math.isfinite(beta) and beta > 0):
        raise ValueError(f"integration order must be finite and > 0, got {beta!r}")
    if not (isinstance(t, (int, float, np.floating)) and math.isfinite(t) and t >= 0):
        raise ValueError(f"time must be finite and >= 0, got {t!r}")
    t = float(t)
    if t == 0.0:
        return 0.0
    length = t**float(beta)
    inv_beta = 1.0 / float(beta)
    edges = _graded_edges(length)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        scale = 0.5 * (b - a)
        for node, weight in zip(_QUAD_NODES, _QUAD_WEIGHTS):
            w = a + scale * (node + 1.0)
            # rounding in w**inv_beta can push tau a few ulp below zero
            tau = max(t - w**inv_beta, 0.0)
            v = float(f(tau))
            if not math.isfinite(v):
                raise ValueError(f"integrand evaluated to non-finite value at tau={tau!r}")
            total += scale * weight * v
    return total / gamma_fn(float(beta) + 1.0)


def rl_integral_of_spectrum(x: Spectrum, beta: float, t: float) -> float:
    """Exact order-beta Riemann-Liouville integral of a block-pulse expansion.

    The fractional integral of a piecewise-constant signal has the closed form

        sum_i coeffs[i] * ((t - (i-1)h)_+^beta - (t - ih)_+^beta) / Gamma(beta+1)

    with (z)_+ = max(z, 0); no quadrature is involved, which is what makes
    this the primary cross-check for the operational matrices.
    """
    if not (isinstance(beta, (int, float, np.floating)) and math.isfinite(beta) and beta > 0):
        raise ValueError(f"integration order must be finite and > 0, got {beta!r}")
    grid = x.grid
    if not 0.0 <= t < grid.T:
        raise ValueError(f"t={t!r} outside the approximation interval [0, {grid.T})")
    edges = np.arange(grid.m + 1) * grid.h
    upper = np.maximum(t - edges[:-1], 0.0) ** float(beta)
    lower = np.maximum(t - edges[1:], 0.0) ** float(beta)
    return float(x.coeffs @ (upper - lower)) / gamma_fn(float(beta) + 1.0)


def caputo_derivative(
    dnf: Callable[[float], float], order: FracOrder, t: float
) -> float:
    """Caputo derivative of order beta at t, from the analytic n-th derivative.

    ``dnf`` must be the caller-supplied n-th derivative of the underlying
    signal, n = ceil(beta); differentiating numerically here would contaminate
    the oracle. For beta < n this is the (n - beta)-order Riemann-Liouville
    integral of ``dnf``; for integer beta it is ``dnf`` itself.
    """
    if not (isinstance(t, (int, float, np.floating)) and math.isfinite(t) and t >= 0):
        raise ValueError(f"time must be finite and >= 0, got {t!r}")
    if order.beta == order.n:
        return float(dnf(float(t)))
    return rl_integral(dnf, order.n - order.beta, float(t))
