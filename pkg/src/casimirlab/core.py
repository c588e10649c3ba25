"""Physical constants, shared exceptions and the distance error budget.

Everything in the package works in SI units: metres, volts, newtons,
rad/s for angular frequencies. Constants are CODATA 2018 values; they are
written out here rather than imported from :mod:`scipy.constants`, whose
values follow whatever CODATA release the installed SciPy ships.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Constants:
    hbar: float = 1.054571817e-34  # J s
    c: float = 299792458.0  # m/s
    k_b: float = 1.380649e-23  # J/K
    eps0: float = 8.8541878128e-12  # F/m
    e_charge: float = 1.602176634e-19  # C


CONST = Constants()

HBAR = CONST.hbar
C_LIGHT = CONST.c
K_B = CONST.k_b
EPS0 = CONST.eps0
E_CHARGE = CONST.e_charge


class CasimirLabError(Exception):
    """Base class for errors raised by this package."""


class ConvergenceError(CasimirLabError, RuntimeError):
    """A series, quadrature or iteration did not reach its tolerance.

    ``partial`` carries whatever had been accumulated when the budget ran
    out, so callers can judge how far off the answer is.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class StiffnessError(ConvergenceError):
    """Adaptive ODE step size collapsed below the representable minimum."""


class InsufficientDataError(CasimirLabError, ValueError):
    pass


class DataFormatError(CasimirLabError, ValueError):
    pass


class OutOfRangeError(CasimirLabError, ValueError):
    pass


class UnsupportedModelError(CasimirLabError, TypeError):
    pass


class FitError(CasimirLabError, ValueError):
    pass


class IdentifiabilityError(FitError):
    """The data only constrain a combination of the requested parameters."""


class ExtrapolationWarning(UserWarning):
    pass


class RegimeWarning(UserWarning):
    """A formula was used outside the regime where it is accurate."""


def error_budget(n: float, d: float, force_fraction: float) -> float:
    """Distance accuracy needed to hold a power-law force to a given accuracy.

    For ``F ~ d**n`` a relative distance error propagates as
    ``|dF/F| = |n| |dd/d|``, so the tolerable distance error is
    ``force_fraction * d / |n|``.

    >>> round(error_budget(-3, 100e-9, 0.005) * 1e9, 3)
    0.167
    """
    if n == 0:
        raise ValueError("exponent n = 0: force does not depend on distance")
    if d <= 0:
        raise ValueError(f"separation must be positive, got {d!r}")
    if force_fraction <= 0:
        raise ValueError(f"force_fraction must be positive, got {force_fraction!r}")
    return force_fraction * d / abs(n)


def ideal_energy_per_area(d: float) -> float:
    """Zero-temperature Casimir energy per area for perfect mirrors (J/m^2)."""
    return -(math.pi**2) * HBAR * C_LIGHT / (720.0 * d**3)


def ideal_pressure(d: float) -> float:
    """Zero-temperature Casimir pressure for perfect mirrors, attraction positive."""
    return math.pi**2 * HBAR * C_LIGHT / (240.0 * d**4)


class ConfigError(CasimirLabError, ValueError):
    """Malformed or physically invalid configuration."""
