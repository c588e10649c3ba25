"""Conductor-conductor capacitances, electrostatic forces and the alpha V^2 calibration.

Forces are reported with attraction positive: for a capacitance profile
``C(d)`` at voltage ``V`` the force is ``-C'(d) V^2 / 2 >= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .core import EPS0, ConvergenceError, OutOfRangeError

__all__ = [
    "ParallelPlateProfile",
    "SpherePlaneProfile",
    "SampledProfile",
    "parallel_plate_capacitance",
    "sphere_plane_capacitance",
    "sphere_plane_capacitance_derivative",
    "force_from_capacitance",
    "calibration_alpha",
    "distance_from_alpha",
    "hemisphere_repulsion",
    "richardson_derivative",
]

_MAX_TERMS = 2_000_000


def parallel_plate_capacitance(A: float, d: float) -> float:
    if A < 0 or not d > 0:
        raise ValueError("need A >= 0 and d > 0")
    return EPS0 * A / d


def _series_terms(beta: float, tol: float):
    """Image-charge series partial sums of 1/sinh(n b) and n cosh(n b)/sinh^2(n b)."""
    s0 = 0.0
    s1 = 0.0
    n = 0
    # Work in blocks so the stopping test runs on the newest term.
    block = max(64, int(40.0 / beta) // 8 + 1)
    while n < _MAX_TERMS:
        k = np.arange(n + 1, n + block + 1, dtype=float)
        x = k * beta
        with np.errstate(over="ignore"):
            inv = 1.0 / np.sinh(x)
            # n cosh / sinh^2 = n coth / sinh
            der = k / np.tanh(x) * inv
        c0 = np.cumsum(inv) + s0
        below = np.nonzero(inv < tol * c0)[0]
        if below.size:
            j = below[0]
            return c0[j], s1 + float(np.sum(der[: j + 1])), n + j + 1
        s0 = float(c0[-1])
        s1 += float(np.sum(der))
        n += block
    raise ConvergenceError(
        f"sphere-plane series not converged to tol={tol:g} in {_MAX_TERMS} terms", partial=s0
    )


def sphere_plane_capacitance(R: float, d: float, tol: float = 1e-12) -> float:
    """Exact sphere-plane capacitance (F) from the image-charge series.

    ``C = 4 pi eps0 R sinh(b) sum_{n>=1} 1/sinh(n b)``, ``cosh(b) = 1 + d/R``.
    Summation stops at the first term smaller than ``tol`` times the partial sum.
    """
    if not (R > 0 and d > 0):
        raise ValueError("R and d must be positive")
    beta = math.acosh(1.0 + d / R)
    s0, _, _ = _series_terms(beta, tol)
    return 4.0 * math.pi * EPS0 * R * math.sinh(beta) * s0


def sphere_plane_capacitance_derivative(R: float, d: float, tol: float = 1e-12) -> float:
    """dC/dd of the image-charge series, differentiated term by term (F/m)."""
    if not (R > 0 and d > 0):
        raise ValueError("R and d must be positive")
    beta = math.acosh(1.0 + d / R)
    s0, s1, _ = _series_terms(beta, tol)
    dc_dbeta = 4.0 * math.pi * EPS0 * R * (math.cosh(beta) * s0 - math.sinh(beta) * s1)
    return dc_dbeta / (R * math.sinh(beta))


def richardson_derivative(f, x: float, h: float) -> float:
    """Central difference with one Richardson step (error O(h^4))."""
    d1 = (f(x + h) - f(x - h)) / (2.0 * h)
    d2 = (f(x + 2 * h) - f(x - 2 * h)) / (4.0 * h)
    return (4.0 * d1 - d2) / 3.0


def _fd_step(d: float) -> float:
    return max(1e-4 * d, 1e-12)


@dataclass(frozen=True)
class ParallelPlateProfile:
    A: float

    def capacitance(self, d: float) -> float:
        return parallel_plate_capacitance(self.A, d)

    def derivative(self, d: float) -> float:
        return -EPS0 * self.A / d**2

    def second_derivative(self, d: float) -> float:
        return 2.0 * EPS0 * self.A / d**3


@dataclass(frozen=True)
class SpherePlaneProfile:
    R: float
    tol: float = 1e-12

    def capacitance(self, d: float) -> float:
        return sphere_plane_capacitance(self.R, d, self.tol)

    def derivative(self, d: float) -> float:
        return sphere_plane_capacitance_derivative(self.R, d, self.tol)


@dataclass(frozen=True, eq=False)
class SampledProfile:
    """Tabulated ``(d, C)`` with cubic-spline interpolation.

    Derivatives are taken numerically (central difference plus one
    Richardson step) rather than from the spline, with the stencil pulled
    inside the table near its ends.
    """

    d: np.ndarray
    C: np.ndarray
    _spline: CubicSpline = field(init=False, repr=False)

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        c = np.asarray(self.C, dtype=float)
        if d.ndim != 1 or d.shape != c.shape or d.size < 4:
            raise ValueError("sampled profile needs >= 4 matching (d, C) points")
        if np.any(np.diff(d) <= 0) or d[0] <= 0:
            raise ValueError("d must be positive and strictly increasing")
        if np.any(c <= 0):
            raise ValueError("capacitance must be positive")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "_spline", CubicSpline(d, c))

    def _check(self, d: float) -> None:
        if not self.d[0] <= d <= self.d[-1]:
            raise OutOfRangeError(
                f"d={d:.4g} m outside sampled profile [{self.d[0]:.4g}, {self.d[-1]:.4g}]"
            )

    def capacitance(self, d: float) -> float:
        self._check(d)
        return float(self._spline(d))

    def derivative(self, d: float) -> float:
        self._check(d)
        h = min(_fd_step(d), (d - self.d[0]) / 2.0, (self.d[-1] - d) / 2.0)
        if h <= 0:
            return float(self._spline(d, 1))
        return richardson_derivative(lambda x: float(self._spline(x)), d, h)


def force_from_capacitance(profile, d: float, V: float) -> float:
    """Electrostatic force ``-C'(d) V^2 / 2`` (N), attraction positive."""
    return -0.5 * profile.derivative(d) * V * V


def calibration_alpha(R: float, d: float) -> float:
    """PFA coefficient ``alpha = pi eps0 R / d`` in ``F = alpha V^2`` (N/V^2)."""
    if not (R > 0 and d > 0):
        raise ValueError("R and d must be positive")
    return math.pi * EPS0 * R / d


def distance_from_alpha(alpha: float, R: float) -> float:
    if not (alpha > 0 and R > 0):
        raise ValueError("alpha and R must be positive")
    return math.pi * EPS0 * R / alpha


def hemisphere_repulsion(q: float, R: float) -> float:
    """Repulsion between the halves of a bisected sphere of charge ``q`` (N).

    SI form ``q^2 / (32 pi eps0 R^2)`` of the Gaussian ``q^2 / (8 R^2)``.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    return q * q / (32.0 * math.pi * EPS0 * R * R)
