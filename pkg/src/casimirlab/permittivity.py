"""Dielectric response models on the real and imaginary frequency axes.

Models are small frozen dataclasses. ``eval_imaginary`` gives eps(i xi),
which is what the Lifshitz machinery consumes; ``eval_real`` gives the
complex eps(omega) for the analytic models only.

The conductor model is the SI form ``eps = 1 + i sigma / (eps0 omega)``;
the Gaussian ``4 pi i sigma / omega`` maps onto it with
``4 pi sigma_G -> sigma_SI / eps0``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.integrate import quad, trapezoid

from .core import (
    EPS0,
    DataFormatError,
    ExtrapolationWarning,
    InsufficientDataError,
    UnsupportedModelError,
)

__all__ = [
    "PerfectConductor",
    "ConstantEps",
    "Plasma",
    "Drude",
    "GeneralizedPlasma",
    "Conductor",
    "Tabulated",
    "PermittivityModel",
    "VACUUM",
    "eval_imaginary",
    "eval_real",
    "build_tabulated",
    "read_optical_csv",
]


def _positive(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class PerfectConductor:
    """Ideal mirror; eps(i xi) is infinite at every frequency."""


@dataclass(frozen=True)
class ConstantEps:
    eps: float

    def __post_init__(self):
        # Liquid gap media may be any positive constant; plates are checked
        # for eps >= 1 by the Lifshitz problem.
        _positive("eps", self.eps)


@dataclass(frozen=True)
class Plasma:
    omega_p: float

    def __post_init__(self):
        _positive("omega_p", self.omega_p)


@dataclass(frozen=True)
class Drude:
    omega_p: float
    gamma: float

    def __post_init__(self):
        _positive("omega_p", self.omega_p)
        _positive("gamma", self.gamma)


@dataclass(frozen=True)
class Conductor:
    sigma: float  # S/m

    def __post_init__(self):
        _positive("sigma", self.sigma)


@dataclass(frozen=True, eq=False)
class Tabulated:
    """eps(i xi) sampled on an increasing grid.

    Interpolation is linear in ``log xi`` vs ``log(eps - 1)``, which keeps
    power-law tails exact. Outside the grid the end segments are extended
    the same way and an :class:`ExtrapolationWarning` is issued.
    """

    xi: np.ndarray
    eps: np.ndarray
    _log_xi: np.ndarray = field(init=False, repr=False)
    _log_chi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        eps = np.asarray(self.eps, dtype=float)
        if xi.ndim != 1 or xi.shape != eps.shape:
            raise DataFormatError("xi and eps must be 1-D arrays of equal length")
        if xi.size < 2:
            raise InsufficientDataError("tabulated grid needs at least two points")
        if np.any(xi <= 0) or np.any(np.diff(xi) <= 0):
            raise DataFormatError("xi grid must be positive and strictly increasing")
        if np.any(eps < 1):
            raise DataFormatError("tabulated eps(i xi) must be >= 1")
        if np.any(np.diff(eps) > 1e-12 * eps[:-1]):
            raise DataFormatError("tabulated eps(i xi) must be non-increasing in xi")
        chi = np.maximum(eps - 1.0, 1e-300)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "_log_xi", np.log(xi))
        object.__setattr__(self, "_log_chi", np.log(chi))

    @property
    def low_slope(self) -> float:
        """d log(eps-1) / d log xi on the first grid segment."""
        lx, lc = self._log_xi, self._log_chi
        return float((lc[1] - lc[0]) / (lx[1] - lx[0]))

    def evaluate(self, xi: float) -> tuple[float, bool]:
        """Return ``(eps, extrapolated)`` at imaginary frequency ``xi``."""
        lx, lc = self._log_xi, self._log_chi
        t = math.log(xi)
        if lx[0] <= t <= lx[-1]:
            return 1.0 + math.exp(float(np.interp(t, lx, lc))), False
        if t < lx[0]:
            i0, i1 = 0, 1
        else:
            i0, i1 = -2, -1
        slope = (lc[i1] - lc[i0]) / (lx[i1] - lx[i0])
        return 1.0 + math.exp(lc[i0] + slope * (t - lx[i0])), True


@dataclass(frozen=True)
class GeneralizedPlasma:
    """Base response plus a free-electron ``omega_p**2 / xi**2`` term."""

    base: Union[Drude, Tabulated]
    omega_p: float

    def __post_init__(self):
        if not isinstance(self.base, (Drude, Tabulated)):
            raise TypeError("GeneralizedPlasma base must be Drude or Tabulated")
        _positive("omega_p", self.omega_p)


PermittivityModel = Union[
    PerfectConductor, ConstantEps, Plasma, Drude, GeneralizedPlasma, Conductor, Tabulated
]

VACUUM = ConstantEps(1.0)


def eval_imaginary(model: PermittivityModel, xi: float) -> float:
    """eps(i xi) for ``xi > 0``. Real, >= 1 for plate models.

    ``PerfectConductor`` returns ``inf``. The xi = 0 limit is not defined
    here; the Lifshitz code handles it explicitly.
    """
    if not xi > 0:
        raise ValueError(f"imaginary frequency must be positive, got {xi!r}")
    if isinstance(model, ConstantEps):
        return model.eps
    if isinstance(model, Drude):
        return 1.0 + model.omega_p**2 / (xi * (xi + model.gamma))
    if isinstance(model, Plasma):
        return 1.0 + (model.omega_p / xi) ** 2
    if isinstance(model, Conductor):
        return 1.0 + model.sigma / (EPS0 * xi)
    if isinstance(model, GeneralizedPlasma):
        return eval_imaginary(model.base, xi) + (model.omega_p / xi) ** 2
    if isinstance(model, Tabulated):
        value, extrapolated = model.evaluate(xi)
        if extrapolated:
            warnings.warn(
                f"xi={xi:.3e} rad/s outside tabulated grid "
                f"[{model.xi[0]:.3e}, {model.xi[-1]:.3e}]; power-law extrapolation used",
                ExtrapolationWarning,
                stacklevel=2,
            )
        return value
    if isinstance(model, PerfectConductor):
        return math.inf
    raise UnsupportedModelError(f"unknown permittivity model {model!r}")


def eval_real(model: PermittivityModel, omega: float) -> complex:
    """Complex eps(omega) on the real axis (analytic models only)."""
    if not omega > 0:
        raise ValueError(f"frequency must be positive, got {omega!r}")
    if isinstance(model, ConstantEps):
        return complex(model.eps)
    if isinstance(model, Plasma):
        return complex(1.0 - (model.omega_p / omega) ** 2)
    if isinstance(model, Drude):
        return 1.0 - model.omega_p**2 / (omega * (omega + 1j * model.gamma))
    if isinstance(model, Conductor):
        return 1.0 + 1j * model.sigma / (EPS0 * omega)
    if isinstance(model, GeneralizedPlasma) and isinstance(model.base, Drude):
        return eval_real(model.base, omega) - (model.omega_p / omega) ** 2
    raise UnsupportedModelError(
        f"real-axis evaluation is only defined for analytic models, not {type(model).__name__}"
    )


def _drude_tail(w1: float, e1: float, w2: float, e2: float):
    """Fit eps'' = wp2 * g / (w (w^2 + g^2)) through the two lowest samples."""
    rho = (e1 * w1) / (e2 * w2)
    if rho <= 1.0:
        return None
    g2 = (w2**2 - rho * w1**2) / (rho - 1.0)
    if g2 <= 0:
        return None
    g = math.sqrt(g2)
    wp2 = e1 * w1 * (w1**2 + g2) / g
    return wp2, g


def _cubic_tail(t: float) -> float:
    """``a**3 * int_a^inf dx / (x^2 (x^2 + xi^2))`` as a function of ``t = xi/a``."""
    if t < 1e-3:
        return 1.0 / 3.0 - t * t / 5.0
    return (1.0 - math.atan(t) / t) / (t * t)


def build_tabulated(
    data: Iterable[Sequence[float]],
    points_per_decade: int = 20,
) -> Tabulated:
    """Transform sampled eps''(omega) to eps(i xi) with the dispersion relation.

    ``eps(i xi) = 1 + (2/pi) int_0^inf omega eps''(omega) / (omega^2 + xi^2) d omega``

    Inside the data range the integral is a trapezoid rule in ``log omega``
    over the samples themselves. Below the first sample a Drude tail fitted
    to the two lowest points is integrated (falling back to a ``1/omega``
    conductor tail if no Drude curve passes through them); above the last
    sample eps'' is continued as ``omega**-3``. The result is tabulated on a
    log-spaced xi grid spanning the data range.
    """
    arr = np.asarray(list(data), dtype=float)
    if arr.size == 0 or arr.ndim != 2 or arr.shape[0] < 8:
        n = 0 if arr.ndim != 2 else arr.shape[0]
        raise InsufficientDataError(f"need at least 8 optical samples, got {n}")
    if arr.shape[1] != 2:
        raise DataFormatError("optical data rows must be (omega, eps2)")
    w, e2 = arr[:, 0], arr[:, 1]
    if np.any(w <= 0) or np.any(np.diff(w) <= 0):
        raise DataFormatError("omega must be positive and strictly increasing")
    if np.any(e2 <= 0):
        raise DataFormatError("eps'' must be positive")

    lw = np.log(w)
    tail = _drude_tail(w[0], e2[0], w[1], e2[1])
    w_hi, e_hi = w[-1], e2[-1]

    n_dec = math.log10(w[-1] / w[0])
    n_grid = max(int(math.ceil(n_dec * points_per_decade)) + 1, 2)
    xi_grid = np.geomspace(w[0], w[-1], n_grid)
    eps_grid = np.empty_like(xi_grid)
    for i, xi in enumerate(xi_grid):
        body = trapezoid(w**2 * e2 / (w**2 + xi**2), lw)
        if tail is not None:
            wp2, g = tail
            low = quad(
                lambda x: wp2 * g / ((x * x + g * g) * (x * x + xi * xi)),
                0.0, w[0], epsrel=1e-12, epsabs=0.0,
            )[0]
        else:
            low = e2[0] * w[0] * math.atan(w[0] / xi) / xi
        high = e_hi * _cubic_tail(xi / w_hi)
        eps_grid[i] = 1.0 + (2.0 / math.pi) * (body + low + high)
    # Trapezoid noise can leave 1-ulp increases; the grid must be monotone.
    eps_grid = np.minimum.accumulate(eps_grid)
    return Tabulated(xi_grid, eps_grid)


def read_optical_csv(path: str | Path) -> list[tuple[float, float]]:
    """Read ``omega_rad_s,eps2`` rows (header required, ascending omega)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["omega_rad_s", "eps2"]:
            raise DataFormatError(f"{path}: expected header 'omega_rad_s,eps2', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError) as exc:
                raise DataFormatError(f"{path}:{lineno}: bad row {row!r}") from exc
    return rows
