"""Patch-potential electrostatics between a sphere and a plane.

A surface-potential spectrum ``S(k)`` (V^2 m^2) is normalised so that
``int_0^inf k S(k) dk`` is the mean-square patch potential. The PFA
sphere-plane force with the constant far-field term removed is

    F(d) = pi eps0 R int_0^inf k^2 (coth(kd) - 1) S(k) dk,

which tends to ``pi eps0 R V_rms^2 / d`` for patches much larger than d.
(Written with prefactor ``2 pi eps0 R`` in terms of ``e^-kd / sinh(kd)``,
that form would be twice the short-distance limit; the prefactor here is
pinned by that limit.)

A single cosine mode ``V0 cos(k0 y)`` has ``V_rms^2 = V0^2 / 2`` and acts as
a line ``S(k) = V0^2 / (2 k0) delta(k - k0)``, which makes the force equal
to ``2 pi R`` times :func:`single_mode_energy_per_area`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy.integrate import quad
from scipy.special import j1

from .core import EPS0, ConvergenceError, DataFormatError, OutOfRangeError

__all__ = [
    "SingleMode",
    "TopHatCorrelation",
    "TabulatedSpectrum",
    "PatchSpectrum",
    "spectrum_eval",
    "single_mode_energy_per_area",
    "patch_force_sphere_plane",
    "read_spectrum_csv",
]

_MAX_PANELS = 100_000


@dataclass(frozen=True)
class SingleMode:
    V0: float
    k: float

    def __post_init__(self):
        if self.V0 < 0 or not self.k > 0:
            raise ValueError("need V0 >= 0 and k > 0")


@dataclass(frozen=True)
class TopHatCorrelation:
    """Autocorrelation ``V0^2`` for separations below ``lambda_patch``, zero beyond."""

    V0: float
    lambda_patch: float

    def __post_init__(self):
        if self.V0 < 0 or not self.lambda_patch > 0:
            raise ValueError("need V0 >= 0 and lambda_patch > 0")


@dataclass(frozen=True, eq=False)
class TabulatedSpectrum:
    """Sampled ``S(k)``, linearly interpolated, zero outside the samples."""

    k: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        s = np.asarray(self.S, dtype=float)
        if k.ndim != 1 or k.shape != s.shape or k.size < 2:
            raise DataFormatError("tabulated spectrum needs >= 2 matching (k, S) samples")
        if np.any(k <= 0) or np.any(np.diff(k) <= 0):
            raise DataFormatError("k must be positive and strictly increasing")
        if np.any(s < 0):
            raise DataFormatError("S(k) must be non-negative")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "S", s)


PatchSpectrum = Union[SingleMode, TopHatCorrelation, TabulatedSpectrum]


def _j1_over_x(x: float) -> float:
    if x < 1e-4:
        return 0.5 - x * x / 16.0
    return float(j1(x)) / x


def spectrum_eval(spec: PatchSpectrum, k: float) -> float:
    """``S(k)`` in V^2 m^2. Not defined for the line spectrum of a single mode."""
    if not k > 0:
        raise ValueError("k must be positive")
    if isinstance(spec, TopHatCorrelation):
        lam = spec.lambda_patch
        return spec.V0**2 * lam * lam * _j1_over_x(lam * k)
    if isinstance(spec, TabulatedSpectrum):
        if not spec.k[0] <= k <= spec.k[-1]:
            raise OutOfRangeError(
                f"k={k:.4g} outside tabulated spectrum [{spec.k[0]:.4g}, {spec.k[-1]:.4g}]"
            )
        return float(np.interp(k, spec.k, spec.S))
    if isinstance(spec, SingleMode):
        raise ValueError(
            "SingleMode is a line spectrum (weight V0^2 / 2k at k); it has no pointwise value"
        )
    raise TypeError(f"unknown spectrum {spec!r}")


def _coth_minus_one(x: float) -> float:
    return 2.0 / math.expm1(2.0 * x)


def single_mode_energy_per_area(V0: float, k: float, d: float) -> float:
    """Field energy per area of one cosine mode, far-field constant removed (J/m^2)."""
    if not (k > 0 and d > 0):
        raise ValueError("k and d must be positive")
    return 0.25 * EPS0 * k * V0 * V0 * _coth_minus_one(k * d)


def _panel_integral(f, width: float, decay: float, envelope, tol: float) -> float:
    """Integrate ``f`` over [0, inf) in panels of fixed width.

    Stops once ``envelope(u)`` (an upper bound on the remaining tail) drops
    below ``tol`` times the running total.
    """
    acc = 0.0
    a = 0.0
    for _ in range(_MAX_PANELS):
        b = a + width
        val = quad(f, a, b, epsrel=0.1 * tol, epsabs=0.0, limit=200)[0]
        acc += val
        a = b
        if a * decay > 1.0 and envelope(a) <= tol * abs(acc):
            return acc
    raise ConvergenceError(f"patch quadrature not converged after {_MAX_PANELS} panels", acc)


def patch_force_sphere_plane(
    spec: PatchSpectrum, R: float, d: float, tol: float = 1e-8
) -> float:
    """PFA patch force between a sphere of radius ``R`` and a plane (N, attractive > 0)."""
    if not (R > 0 and d > 0):
        raise ValueError("R and d must be positive")
    if isinstance(spec, SingleMode):
        return 2.0 * math.pi * R * single_mode_energy_per_area(spec.V0, spec.k, d)
    if isinstance(spec, TopHatCorrelation):
        if spec.V0 == 0:
            return 0.0
        lam = spec.lambda_patch
        a = 2.0 * d / lam  # coth(u d/lam) - 1 = 2 / expm1(a u)

        def f(u):
            if u == 0.0:
                return 0.0
            return u * float(j1(u)) * 2.0 / math.expm1(a * u)

        def envelope(u):
            # |u J1(u)| <= sqrt(u); int_U^inf sqrt(u) 2 e^{-a u} du <= 2 sqrt(U) e^{-aU} (1/a + 1/(2 a^2 U))
            # times 1/(1 - e^{-aU}) for the expm1 denominator.
            return 2.0 * math.sqrt(u) * math.exp(-a * u) * (1.0 / a + 0.5 / (a * a * u)) / (
                -math.expm1(-a * u)
            )

        integral = _panel_integral(f, math.pi, a, envelope, tol)
        return math.pi * EPS0 * R * spec.V0**2 / lam * integral
    if isinstance(spec, TabulatedSpectrum):
        k, s = spec.k, spec.S
        # u = k d over the sampled support only
        u_lo, u_hi = k[0] * d, k[-1] * d

        def g(u):
            return u * u * _coth_minus_one(u) * float(np.interp(u / d, k, s))

        breaks = np.unique(np.clip(k * d, u_lo, min(u_hi, u_lo + 60.0)))
        total = 0.0
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            total += quad(g, lo, hi, epsrel=tol, epsabs=0.0, limit=200)[0]
        return math.pi * EPS0 * R * total / d**3
    raise TypeError(f"unknown spectrum {spec!r}")


def read_spectrum_csv(path: str | Path) -> TabulatedSpectrum:
    """Read ``k_rad_m,S_V2m2`` rows into a :class:`TabulatedSpectrum`."""
    ks, ss = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["k_rad_m", "S_V2m2"]:
            raise DataFormatError(f"{path}: expected header 'k_rad_m,S_V2m2', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            try:
                ks.append(float(row[0]))
                ss.append(float(row[1]))
            except (ValueError, IndexError) as exc:
                raise DataFormatError(f"{path}:{lineno}: bad row {row!r}") from exc
    return TabulatedSpectrum(np.array(ks), np.array(ss))
