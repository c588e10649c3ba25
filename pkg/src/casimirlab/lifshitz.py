"""Lifshitz free energy, pressure and PFA sphere-plane force.

Conventions
-----------
* Imaginary-frequency Fresnel coefficients for non-magnetic half-spaces,
  signed so an ideal mirror gives ``(r_TE, r_TM) = (-1, +1)``.
* Energies are negative for attraction (physical sign). Pressures and
  forces are reported with attraction positive.
* Matsubara frequencies ``xi_n = 2 pi n k_B T / hbar`` (poles of
  ``coth(hbar omega / 2 k_B T)``), with the n = 0 term weighted 1/2.

For every Matsubara frequency the transverse wavevector integral is
rewritten in ``y = 2 q d`` where ``q = sqrt(k^2 + eps_gap xi^2 / c^2)`` is
the gap decay constant, so it runs over ``[2 sqrt(eps_gap) xi d / c, inf)``
with an ``exp(-y)`` envelope::

    E = k_B T / (8 pi d^2) sum'_n int y  ln(1 - r_a r_b e^-y) dy
    P = k_B T / (8 pi d^3) sum'_n int y^2 r_a r_b e^-y / (1 - r_a r_b e^-y) dy

summed over both polarisations. ``P`` is the d-derivative of ``E`` taken
analytically under the integral (reflection coefficients depend on ``q``,
not on ``d``). At T = 0 the sum becomes ``hbar c / (32 pi^2 d^3)`` times an
integral over ``2 xi d / c``, done by composite Gauss-Legendre.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .core import C_LIGHT, HBAR, K_B, ConvergenceError, RegimeWarning
from .permittivity import (
    VACUUM,
    ConstantEps,
    Conductor,
    Drude,
    GeneralizedPlasma,
    PerfectConductor,
    PermittivityModel,
    Plasma,
    Tabulated,
    eval_imaginary,
)

__all__ = [
    "TEZeroPolicy",
    "Convergence",
    "LifshitzProblem",
    "matsubara_frequencies",
    "thermal_weight",
    "reflection_coefficients",
    "free_energy_per_area",
    "casimir_pressure",
    "sphere_plane_force",
    "eta_first_order",
    "repulsion_condition",
]

# Width of the y window integrated above the lower limit; exp(-80) ~ 2e-35.
_Y_WINDOW = 80.0
_N_AUTO_CAP = 200_000
# Panel edges in 2 xi d / c for the zero-temperature frequency integral.
_T0_EDGES = np.array(
    [0.0, 1e-4, 1e-3, 1e-2, 0.05, 0.15, 0.35, 0.7, 1.2, 2.0, 3.0, 4.5,
     6.5, 9.0, 13.0, 18.0, 25.0, 35.0, 50.0, 70.0, 100.0]
)


class TEZeroPolicy(str, Enum):
    FROM_MODEL = "FromModel"
    FORCE_INCLUDE = "ForceInclude"
    FORCE_EXCLUDE = "ForceExclude"


@dataclass(frozen=True)
class Convergence:
    """Truncation controls.

    ``n_max=None`` extends the Matsubara sum until the last term is below
    ``sum_tolerance`` of the accumulated value. ``kperp_tolerance`` is the
    relative tolerance of each transverse-wavevector quadrature.
    """

    n_max: int | None = None
    kperp_tolerance: float = 1e-8
    sum_tolerance: float = 1e-9
    gauss_order: int = 16

    def __post_init__(self):
        if self.n_max is not None and self.n_max < 0:
            raise ValueError("n_max must be >= 0")
        if not 0 < self.kperp_tolerance < 1:
            raise ValueError("kperp_tolerance must lie in (0, 1)")


@dataclass(frozen=True)
class LifshitzProblem:
    plate_a: PermittivityModel
    plate_b: PermittivityModel
    d: float
    T: float
    gap: ConstantEps = VACUUM
    te_zero_policy: TEZeroPolicy = TEZeroPolicy.FROM_MODEL
    convergence: Convergence = field(default_factory=Convergence)

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError(f"separation d must be positive, got {self.d!r}")
        if not self.T >= 0:
            raise ValueError(f"temperature must be >= 0, got {self.T!r}")
        if not isinstance(self.gap, ConstantEps):
            raise TypeError("gap medium must be ConstantEps")
        for plate in (self.plate_a, self.plate_b):
            if isinstance(plate, ConstantEps) and plate.eps < 1:
                raise ValueError("plate permittivity must be >= 1")
        object.__setattr__(self, "te_zero_policy", TEZeroPolicy(self.te_zero_policy))


def matsubara_frequencies(T: float, n_max: int) -> np.ndarray:
    """``xi_n = 2 pi n k_B T / hbar`` for ``n = 0..n_max`` (rad/s)."""
    if T <= 0:
        raise ValueError("Matsubara frequencies need T > 0; use the T = 0 integral path")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    return 2.0 * math.pi * K_B * T / HBAR * np.arange(n_max + 1, dtype=float)


def thermal_weight(omega: float, T: float) -> float:
    """Mean occupation plus zero point, ``N(omega) + 1/2 = coth(x)/2``."""
    if not (omega > 0 and T > 0):
        raise ValueError("omega and T must be positive")
    x = HBAR * omega / (2.0 * K_B * T)
    if x > 20.0:
        # coth(x) - 1 = 2 e^-2x / (1 - e^-2x)
        return 0.5 + math.exp(-2.0 * x) / -math.expm1(-2.0 * x)
    return 0.5 / math.tanh(x)


def _is_divergent(model: PermittivityModel) -> bool:
    return not isinstance(model, ConstantEps)


def _static_response(model: PermittivityModel) -> tuple[float, float]:
    """Zero-frequency limits ``(eps(0), lim xi^2 eps(i xi))``.

    The second number, in (rad/s)^2, decides whether the TE n=0 mode is
    reflected: it vanishes when eps diverges slower than xi^-2.
    """
    if isinstance(model, PerfectConductor):
        return math.inf, math.inf
    if isinstance(model, ConstantEps):
        return model.eps, 0.0
    if isinstance(model, Plasma):
        return math.inf, model.omega_p**2
    if isinstance(model, GeneralizedPlasma):
        return math.inf, model.omega_p**2
    if isinstance(model, (Drude, Conductor)):
        return math.inf, 0.0
    if isinstance(model, Tabulated):
        slope = model.low_slope
        eps_static = math.inf if slope < 0 else float(model.eps[0])
        if slope < -2.0 - 1e-9:
            return eps_static, math.inf
        if slope <= -2.0 + 1e-9:
            return eps_static, float((model.eps[0] - 1.0) * model.xi[0] ** 2)
        return eps_static, 0.0
    raise TypeError(f"unknown permittivity model {model!r}")


def _te_zero_kappa2(model: PermittivityModel, policy: TEZeroPolicy) -> float:
    if policy is TEZeroPolicy.FORCE_EXCLUDE:
        return 0.0
    k2 = _static_response(model)[1]
    if policy is TEZeroPolicy.FORCE_INCLUDE and k2 == 0.0:
        # Drude-like plate forced to reflect TE at zero frequency: use its
        # own plasma frequency when it has one, otherwise an ideal mirror.
        if isinstance(model, Drude):
            return model.omega_p**2
        return math.inf
    return k2


def _r_te(y: float, dp: float) -> float:
    # (y - s)/(y + s) with s = sqrt(y^2 + dp), written without cancellation
    if dp == math.inf:
        return -1.0
    s = math.sqrt(y * y + dp)
    return -dp / (y + s) ** 2


def _r_tm(y: float, dp: float, eps_p: float, eps_g: float) -> float:
    if eps_p == math.inf:
        return 1.0
    s = math.sqrt(y * y + dp)
    return (eps_p * y - eps_g * s) / (eps_p * y + eps_g * s)


def reflection_coefficients(
    plate: PermittivityModel, gap: PermittivityModel, xi: float, kperp: float
) -> tuple[float, float]:
    """Fresnel ``(r_TE, r_TM)`` at imaginary frequency ``xi`` and wavevector ``kperp``.

    ``xi = 0`` is only accepted for non-dispersive plate and gap models; for
    conductors the zero-frequency TE term depends on the chosen policy and
    is dealt with inside the energy and pressure routines.
    """
    if not kperp > 0:
        raise ValueError("kperp must be positive")
    if xi < 0:
        raise ValueError("xi must be >= 0")
    if isinstance(plate, PerfectConductor):
        return -1.0, 1.0
    if xi == 0:
        if _is_divergent(plate) or _is_divergent(gap):
            raise ValueError(
                "xi = 0 reflection of a dispersive model is policy dependent; "
                "use free_energy_per_area / casimir_pressure"
            )
        ep, eg = plate.eps, gap.eps
        return 0.0, (ep - eg) / (ep + eg)
    ep = eval_imaginary(plate, xi)
    eg = eval_imaginary(gap, xi)
    # Scale-free form: y = 2 q_gap d with an arbitrary unit length d = 1/kperp.
    q_g = math.sqrt(kperp**2 + eg * (xi / C_LIGHT) ** 2)
    y = q_g / kperp
    dp = (ep - eg) * (xi / (C_LIGHT * kperp)) ** 2
    return _r_te(y, dp), _r_tm(y, dp, ep, eg)


class _Integrands:
    """Per-frequency y-integrands for a fixed problem."""

    def __init__(self, problem: LifshitzProblem):
        self.p = problem
        self.eps_g = problem.gap.eps
        self.tol = problem.convergence.kperp_tolerance

    def _coefficients(self, xi_t: float):
        """Return (y_min, reflection-product function) at ``xi_t = 2 xi d / c``."""
        p, eg = self.p, self.eps_g
        if xi_t == 0.0:
            out = []
            for plate in (p.plate_a, p.plate_b):
                es, _ = _static_response(plate)
                k2 = _te_zero_kappa2(plate, p.te_zero_policy)
                dp = k2 * (2.0 * p.d / C_LIGHT) ** 2 if k2 != math.inf else math.inf
                rtm = 1.0 if es == math.inf else (es - eg) / (es + eg)
                out.append((dp, rtm))
            (da, rtm_a), (db, rtm_b) = out
            rtm = rtm_a * rtm_b

            def products(y):
                return _r_te(y, da) * _r_te(y, db), rtm

            return 0.0, products

        xi = xi_t * C_LIGHT / (2.0 * p.d)
        ea = eval_imaginary(p.plate_a, xi)
        eb = eval_imaginary(p.plate_b, xi)
        da = (ea - eg) * xi_t**2 if ea != math.inf else math.inf
        db = (eb - eg) * xi_t**2 if eb != math.inf else math.inf

        def products(y):
            rte = _r_te(y, da) * _r_te(y, db)
            rtm = _r_tm(y, da, ea, eg) * _r_tm(y, db, eb, eg)
            return rte, rtm

        return math.sqrt(eg) * xi_t, products

    def _integrate(self, f: Callable[[float], float], y0: float) -> float:
        val, err, info = quad(
            f, y0, y0 + _Y_WINDOW, epsrel=self.tol, epsabs=0.0, limit=400, full_output=1
        )[:3]
        if abs(err) > max(10.0 * self.tol * abs(val), 1e-300) and info.get("last", 0) >= 400:
            raise ConvergenceError(
                f"k-perp quadrature did not converge (estimate {val!r}, error {err!r})",
                partial=val,
            )
        return val

    def energy(self, xi_t: float) -> float:
        y0, products = self._coefficients(xi_t)

        def f(y):
            e = math.exp(-y)
            rte, rtm = products(y)
            return y * (math.log1p(-rte * e) + math.log1p(-rtm * e))

        return self._integrate(f, y0)

    def pressure(self, xi_t: float) -> float:
        y0, products = self._coefficients(xi_t)

        def f(y):
            e = math.exp(-y)
            rte, rtm = products(y)
            return y * y * (rte * e / (1.0 - rte * e) + rtm * e / (1.0 - rtm * e))

        return self._integrate(f, y0)


def _matsubara_sum(problem: LifshitzProblem, term: Callable[[float], float]) -> float:
    """Sum' over n of term(2 xi_n d / c); returns the bare (unscaled) sum."""
    conv = problem.convergence
    step = 4.0 * math.pi * K_B * problem.T * problem.d / (HBAR * C_LIGHT)
    acc = 0.5 * term(0.0)
    n_cap = conv.n_max if conv.n_max is not None else _N_AUTO_CAP
    last = acc
    for n in range(1, n_cap + 1):
        last = term(n * step)
        acc += last
        if conv.n_max is None and abs(last) <= conv.sum_tolerance * abs(acc):
            return acc
    if abs(last) > conv.sum_tolerance * abs(acc):
        raise ConvergenceError(
            f"Matsubara sum not converged after n = {n_cap} "
            f"(last term {last:.3e}, sum {acc:.3e})",
            partial=acc,
        )
    return acc


def _frequency_integral(problem: LifshitzProblem, term: Callable[[float], float]) -> float:
    x, w = np.polynomial.legendre.leggauss(problem.convergence.gauss_order)
    acc = 0.0
    for a, b in zip(_T0_EDGES[:-1], _T0_EDGES[1:]):
        half, mid = 0.5 * (b - a), 0.5 * (b + a)
        for xk, wk in zip(x, w):
            acc += half * wk * term(mid + half * xk)
    return acc


def free_energy_per_area(problem: LifshitzProblem) -> float:
    """Casimir free energy per unit area between two half-spaces (J/m^2)."""
    ints = _Integrands(problem)
    d = problem.d
    if problem.T == 0:
        return HBAR * C_LIGHT / (32.0 * math.pi**2 * d**3) * _frequency_integral(
            problem, ints.energy
        )
    pref = K_B * problem.T / (8.0 * math.pi * d**2)
    try:
        return pref * _matsubara_sum(problem, ints.energy)
    except ConvergenceError as exc:
        exc.partial = pref * exc.partial
        raise


def casimir_pressure(problem: LifshitzProblem) -> float:
    """Casimir pressure (N/m^2), positive when the plates attract."""
    ints = _Integrands(problem)
    d = problem.d
    if problem.T == 0:
        return HBAR * C_LIGHT / (32.0 * math.pi**2 * d**4) * _frequency_integral(
            problem, ints.pressure
        )
    pref = K_B * problem.T / (8.0 * math.pi * d**3)
    try:
        return pref * _matsubara_sum(problem, ints.pressure)
    except ConvergenceError as exc:
        exc.partial = pref * exc.partial
        raise


def sphere_plane_force(problem: LifshitzProblem, R: float) -> float:
    """PFA sphere-plane force ``2 pi R |E(d)|`` (N), positive when attractive.

    Only meaningful for ``d << R``; this is not checked.
    """
    if not R > 0:
        raise ValueError("radius must be positive")
    return -2.0 * math.pi * R * free_energy_per_area(problem)


def eta_first_order(omega_p: float, d: float) -> float:
    """Leading plasma-model correction to the ideal-mirror parallel-plate force."""
    if not (omega_p > 0 and d > 0):
        raise ValueError("omega_p and d must be positive")
    eta = 1.0 - 16.0 / 3.0 * C_LIGHT / (omega_p * d)
    if eta < 0:
        warnings.warn(
            f"eta = {eta:.3f} < 0: first-order expansion used far outside c/(omega_p d) << 1",
            RegimeWarning,
            stacklevel=2,
        )
    return eta


def repulsion_condition(
    eps1: PermittivityModel,
    eps2: PermittivityModel,
    gap: PermittivityModel,
    xi_grid: Sequence[float],
) -> bool:
    """True when ``eps1 > eps_gap > eps2`` at every imaginary frequency of the grid."""
    grid = list(xi_grid)
    if not grid:
        raise ValueError("xi_grid must not be empty")
    for xi in grid:
        e1 = eval_imaginary(eps1, xi)
        e2 = eval_imaginary(eps2, xi)
        e3 = eval_imaginary(gap, xi)
        if not e1 > e3 > e2:
            return False
    return True
