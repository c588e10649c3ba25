"""Debye-Hueckel field penetration into semiconductor plates.

Two thick plates at potentials +V/2 and -V/2 on their back faces, gap d.
Inside each plate the potential relaxes exponentially over the screening
length lambda; matching D across the surface fixes the surface potential,
and the total field energy per area is

    E = (eps0 V^2 / 2d) * (y + y^2) / (y + 2)^2,   y = eps d / lambda.

For large y this is an ideal capacitor at ``d + 3 lambda / eps``, i.e. an
apparent distance offset of ``3 lambda / eps``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .core import E_CHARGE, EPS0, K_B, RegimeWarning

__all__ = [
    "SemiconductorPlate",
    "OffsetResult",
    "debye_length",
    "screened_surface_potential",
    "screened_energy_per_area",
    "screened_capacitance_per_area",
    "apparent_distance_offset",
    "nonlinear_shielding_factor",
]


@dataclass(frozen=True)
class SemiconductorPlate:
    eps_static: float
    c_t: float  # total carrier density c_h + c_e, m^-3
    T: float

    def __post_init__(self):
        for name in ("eps_static", "c_t", "T"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive, got {v!r}")

    @classmethod
    def intrinsic(cls, eps_static: float, n_i: float, T: float) -> "SemiconductorPlate":
        """Intrinsic material: electrons and holes both at ``n_i``."""
        return cls(eps_static, 2.0 * n_i, T)


def debye_length(plate: SemiconductorPlate) -> float:
    """``sqrt(eps eps0 k_B T / (e^2 c_t))`` in metres."""
    return math.sqrt(plate.eps_static * EPS0 * K_B * plate.T / (E_CHARGE**2 * plate.c_t))


def screened_surface_potential(V: float, d: float, lam: float, eps: float) -> float:
    return 0.5 * V / (1.0 + 2.0 * lam / (eps * d))


def _shape(y):
    return (y + y * y) / (y + 2.0) ** 2


def screened_energy_per_area(V: float, d: float, lam: float, eps: float) -> float:
    """Field energy per area (J/m^2) including the penetration into both plates."""
    if lam == 0:
        return 0.5 * EPS0 * V * V / d
    y = eps * d / lam
    return 0.5 * EPS0 * V * V / d * _shape(y)


def screened_capacitance_per_area(d, lam: float, eps: float):
    """Effective capacitance per area ``2 E / V^2`` (F/m^2); accepts arrays."""
    d = np.asarray(d, dtype=float)
    if lam == 0:
        return EPS0 / d
    return EPS0 / d * _shape(eps * d / lam)


@dataclass(frozen=True)
class OffsetResult:
    offset: float  # fitted apparent offset, m
    expansion: float  # 3 lambda / eps
    quoted_scale: float  # lambda / eps
    min_y: float
    in_regime: bool


def apparent_distance_offset(
    lam: float, eps: float, d_range: tuple[float, float], n_points: int = 64
) -> OffsetResult:
    """Fit ``C_eff(d)`` to ``eps0 / (d + delta)`` on a log grid over ``d_range``.

    Residuals are relative, so every decade of the range carries equal weight.
    Emits a :class:`RegimeWarning` when ``eps d / lambda < 3`` anywhere.
    """
    d_lo, d_hi = d_range
    if not 0 < d_lo < d_hi:
        raise ValueError("d_range must satisfy 0 < d_lo < d_hi")
    if lam < 0 or eps <= 0:
        raise ValueError("need lambda >= 0 and eps > 0")
    if lam == 0:
        return OffsetResult(0.0, 0.0, 0.0, math.inf, True)
    y_min = eps * d_lo / lam
    ok = y_min >= 3.0
    if not ok:
        warnings.warn(
            f"eps d / lambda = {y_min:.2f} < 3 at the near end; offset is not a small correction",
            RegimeWarning,
            stacklevel=2,
        )
    d = np.geomspace(d_lo, d_hi, n_points)
    c_eff = screened_capacitance_per_area(d, lam, eps)
    scale = lam / eps

    def resid(p):
        return EPS0 / (d + p[0] * scale) / c_eff - 1.0

    sol = least_squares(resid, x0=[3.0], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return OffsetResult(
        offset=float(sol.x[0] * scale),
        expansion=3.0 * scale,
        quoted_scale=scale,
        min_y=y_min,
        in_regime=ok,
    )


def nonlinear_shielding_factor(Phi: float) -> float:
    """Effective screening length ratio ``|Phi| / sqrt(e^Phi + e^-Phi - 2)``.

    ``Phi`` is the potential drop in units of ``k_B T / e``. Uses
    ``e^x + e^-x - 2 = 4 sinh^2(x/2)``; the limit at ``Phi = 0`` is 1.
    """
    if not math.isfinite(Phi):
        raise ValueError("Phi must be finite")
    h = 0.5 * abs(Phi)
    if h < 1e-8:
        return 1.0 - h * h / 6.0
    if h > 700:
        return 0.0
    return h / math.sinh(h)
