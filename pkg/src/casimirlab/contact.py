"""Distance-dependent minimizing potentials and the residual electrostatic force.

Covers the ``V_a(d) = a ln d + b`` fit, the contact-potential ODE that
follows from requiring ``V_a`` to minimise the force at every distance,
the force left over at the minimizing potential, the two-capacitor toy
model, and the sphere-plane residual-force model

    F_res(d) = pi eps0 R [(V_m(d) + V1)^2 + V_rms^2] / d

with its least-squares fitter.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import least_squares

from .core import (
    EPS0,
    DataFormatError,
    FitError,
    IdentifiabilityError,
    InsufficientDataError,
    StiffnessError,
)
from .electrostatics import richardson_derivative

__all__ = [
    "MinimizingPotentialSamples",
    "LogPotentialFit",
    "ContactPotentialSolution",
    "ToyModelResult",
    "ResidualFitResult",
    "fit_log_potential",
    "solve_contact_ode",
    "minimized_force",
    "toy_model_eval",
    "residual_force_model",
    "fit_residual",
    "read_minimizing_csv",
    "log_log_slope",
]


@dataclass(frozen=True, eq=False)
class MinimizingPotentialSamples:
    d: np.ndarray
    V_a: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        v = np.asarray(self.V_a, dtype=float)
        if d.ndim != 1 or d.shape != v.shape:
            raise DataFormatError("d and V_a must be 1-D arrays of equal length")
        if np.any(d <= 0) or np.any(np.diff(d) <= 0):
            raise DataFormatError("d must be positive and strictly increasing")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "V_a", v)
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float)
            if s.shape != d.shape or np.any(s <= 0):
                raise DataFormatError("sigma must be positive and match d")
            object.__setattr__(self, "sigma", s)


class LogPotentialFit(NamedTuple):
    a: float
    b: float
    covariance: np.ndarray
    chi2: float


def fit_log_potential(samples: MinimizingPotentialSamples) -> LogPotentialFit:
    """Weighted least squares of ``V_a = a ln(d / 1 m) + b``.

    ``b`` depends on the length unit; with d in metres it is the value at 1 m.
    Without sigmas the fit is unweighted and the covariance is scaled by
    the residual variance.
    """
    d = np.asarray(samples.d, dtype=float)
    v = np.asarray(samples.V_a, dtype=float)
    if d.size < 3:
        raise InsufficientDataError("need at least 3 samples for the log fit")
    sigma = samples.sigma
    w = np.ones_like(d) if sigma is None else 1.0 / np.asarray(sigma, dtype=float)
    X = np.column_stack([np.log(d), np.ones_like(d)])
    Xw = X * w[:, None]
    coef, _, rank, _ = np.linalg.lstsq(Xw, v * w, rcond=None)
    if rank < 2:
        raise FitError("log fit is rank deficient (all distances equal?)")
    resid = (v - X @ coef) * w
    chi2 = float(resid @ resid)
    cov = np.linalg.inv(Xw.T @ Xw)
    if sigma is None:
        dof = max(d.size - 2, 1)
        cov = cov * chi2 / dof
    return LogPotentialFit(float(coef[0]), float(coef[1]), cov, chi2)


@dataclass(frozen=True, eq=False)
class ContactPotentialSolution:
    """Sampled ``V_c(d)`` from :func:`solve_contact_ode`, ascending in d.

    Calling the object interpolates with a cubic Hermite spline in ``ln d``
    built from the ODE right-hand side at every accepted step.
    """

    d: np.ndarray
    V_c: np.ndarray
    dVc_dd: np.ndarray
    local_error: np.ndarray  # relative error estimate of each accepted step
    V_a: Callable[[float], float]
    profile: object

    def __post_init__(self):
        s = np.log(self.d)
        spline = CubicHermiteSpline(s, self.V_c, self.dVc_dd * self.d)
        object.__setattr__(self, "_spline", spline)

    def __call__(self, d):
        return self._spline(np.log(d))

    def derivative(self, d: float) -> float:
        """dV_c/dd from the ODE itself at the interpolated V_c."""
        vc = float(self(d))
        return -self.profile.derivative(d) / self.profile.capacitance(d) * (self.V_a(d) + vc)


def _rk4(f, s, y, h):
    k1 = f(s, y)
    k2 = f(s + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(s + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(s + h, y + h * k3)
    return y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def solve_contact_ode(
    V_a: Callable[[float], float],
    profile,
    d_far: float,
    d_near: float,
    rtol: float = 1e-9,
    v_far: float | None = None,
    max_steps: int = 100_000,
) -> ContactPotentialSolution:
    """Integrate ``dV_c/dd = -(C'/C)(V_a + V_c)`` inward from ``d_far`` to ``d_near``.

    The start value is ``V_c(d_far) = -V_a(d_far)`` unless ``v_far`` is given;
    ``d_far`` should sit well outside the analysis range (at least ten times
    the largest distance, more if ``V_a`` keeps drifting there). Steps are
    classical RK4 in ``s = ln d`` with step-doubling error control.
    """
    if not 0 < d_near < d_far:
        raise ValueError("need 0 < d_near < d_far")

    def rhs(s, vc):
        d = math.exp(s)
        return -d * profile.derivative(d) / profile.capacitance(d) * (V_a(d) + vc)

    s = math.log(d_far)
    s_end = math.log(d_near)
    y = -V_a(d_far) if v_far is None else float(v_far)
    h = -min(0.05, s - s_end)
    h_min = 1e-13 * max(1.0, abs(s))
    ss, ys, errs = [s], [y], [0.0]
    steps = 0
    while s > s_end:
        if steps >= max_steps:
            raise StiffnessError(f"contact ODE exceeded {max_steps} steps at d={math.exp(s):.4g} m", partial=y)
        steps += 1
        if s + h < s_end:
            h = s_end - s
        full = _rk4(rhs, s, y, h)
        half = _rk4(rhs, s, y, 0.5 * h)
        two = _rk4(rhs, s + 0.5 * h, half, 0.5 * h)
        scale = max(abs(two), abs(V_a(math.exp(s + h))), 1e-15)
        err = abs(two - full) / 15.0 / scale
        if err <= rtol:
            s += h
            y = two + (two - full) / 15.0
            ss.append(s)
            ys.append(y)
            errs.append(err)
        factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * (rtol / err) ** 0.2))
        h *= factor
        if abs(h) < h_min and s > s_end:
            raise StiffnessError(
                f"step size underflow (|h|={abs(h):.3g} in ln d) at d={math.exp(s):.4g} m, "
                f"last error estimate {err:.3g}",
                partial=y,
            )
    s_arr = np.array(ss[::-1])
    d_arr = np.exp(s_arr)
    d_arr[0] = d_near
    vc = np.array(ys[::-1])
    dvc = np.array([rhs(si, yi) for si, yi in zip(s_arr, vc)]) / d_arr
    return ContactPotentialSolution(d_arr, vc, dvc, np.array(errs[::-1]), V_a, profile)


def _derivative_of(fn, d: float) -> float:
    der = getattr(fn, "derivative", None)
    if der is not None:
        return float(der(d))
    return richardson_derivative(lambda x: float(fn(x)), d, max(1e-4 * d, 1e-12))


def minimized_force(profile, V_a, V_c, d: float) -> float:
    """Force at the minimizing potential, ``-(1/2) d/dd [C (V_a + V_c)^2]`` (N).

    Same sign convention as :func:`~casimirlab.electrostatics.force_from_capacitance`
    (attraction positive). The value is returned signed: once ``V_a + V_c``
    varies with d the ``C W W'`` term competes with ``-C' W^2 / 2`` and the
    total can come out repulsive.
    """
    w = float(V_a(d)) + float(V_c(d))
    dw = _derivative_of(V_a, d) + _derivative_of(V_c, d)
    return -0.5 * profile.derivative(d) * w * w - profile.capacitance(d) * w * dw


@dataclass(frozen=True)
class ToyModelResult:
    F: float  # force at the supplied V0
    V_m: float  # minimizing potential
    F_res: float  # force at V_m
    F_res_from_vm: float  # same, written in terms of V_m


def toy_model_eval(d: float, Delta: float, A: float, V0: float, Vc: float) -> ToyModelResult:
    """Two parallel-plate capacitors of area ``A`` at gaps ``d`` and ``d + Delta``.

    The near one sits at potential ``V0``, the far one at ``V0 + Vc``; both
    pull on a common lower plate.
    """
    if not (d > 0 and Delta >= 0 and A > 0):
        raise ValueError("need d > 0, Delta >= 0, A > 0")
    D = d + Delta
    ca = -EPS0 * A / d**2
    cb = -EPS0 * A / D**2
    force = -0.5 * ca * V0**2 - 0.5 * cb * (V0 + Vc) ** 2
    ssum = d * d + D * D
    vm = -Vc * d * d / ssum
    fres = 0.5 * EPS0 * A * Vc * Vc / ssum
    fres_vm = 0.5 * EPS0 * A * vm * vm * ssum / d**4
    return ToyModelResult(force, vm, fres, fres_vm)


def residual_force_model(d, V_m, V1: float, V_rms: float, R: float):
    """``pi eps0 R [(V_m + V1)^2 + V_rms^2] / d``; d and V_m may be arrays.

    Intended for ``|V1| >> |V_m|``; the formula itself is evaluated anywhere.
    """
    d = np.asarray(d, dtype=float)
    out = math.pi * EPS0 * R * ((np.asarray(V_m) + V1) ** 2 + V_rms**2) / d
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class ResidualFitResult:
    V1: float
    V_rms: float
    covariance: np.ndarray  # of (V1, V_rms)
    residual_norm: float  # N
    chi2: float
    dof: int
    vrms_clamped: bool = False
    covariance_vrms2: np.ndarray | None = None  # of (V1, V_rms^2)

    @property
    def V1_err(self) -> float:
        return math.sqrt(self.covariance[0, 0])

    @property
    def V_rms_err(self) -> float:
        return math.sqrt(self.covariance[1, 1])


def _vm_at(vm_curve, d: np.ndarray) -> np.ndarray:
    if callable(vm_curve):
        return np.array([float(vm_curve(x)) for x in d])
    arr = np.asarray(vm_curve, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DataFormatError("vm samples must be rows of (d, V_m)")
    order = np.argsort(arr[:, 0])
    dv, vv = arr[order, 0], arr[order, 1]
    lo, hi = dv[0] * (1 - 1e-12), dv[-1] * (1 + 1e-12)
    if np.any(d < lo) or np.any(d > hi):
        raise DataFormatError("V_m samples do not cover every force-curve distance")
    return np.interp(np.log(d), np.log(dv), vv)


def fit_residual(
    force_curve: Sequence[Sequence[float]],
    vm_curve,
    R: float,
    casimir_model: Callable[[float], float] | None = None,
) -> ResidualFitResult:
    """Fit ``(V1, V_rms)`` of the residual-force model to a force curve.

    ``force_curve`` rows are ``(d, F, sigma)``. ``casimir_model(d)``, when
    given, is subtracted first. The fit runs in ``(V1, V_rms^2)`` with
    Levenberg-Marquardt; a negative ``V_rms^2`` is clamped to zero (and V1
    refitted) with ``vrms_clamped`` set. Because the model is linear in
    ``V_rms^2``, the starting point is the better of the median-based guess
    and a profile scan over V1, which avoids the mirror minimum at
    ``V1 -> -2 V_m - V1``.
    """
    fc = np.asarray(force_curve, dtype=float)
    if fc.ndim != 2 or fc.shape[1] != 3:
        raise DataFormatError("force curve rows must be (d, F, sigma)")
    if fc.shape[0] < 5:
        raise InsufficientDataError("need at least 5 force-curve points")
    d, F, sig = fc[:, 0], fc[:, 1], fc[:, 2]
    if np.any(d <= 0) or np.any(sig <= 0):
        raise DataFormatError("distances and sigmas must be positive")
    vm = _vm_at(vm_curve, d)
    if np.ptp(vm) <= 1e-12 + 1e-9 * np.max(np.abs(vm)):
        raise IdentifiabilityError(
            "V_m is constant across the curve; only (V_m + V1)^2 + V_rms^2 is determined"
        )
    if casimir_model is not None:
        F = F - np.array([casimir_model(x) for x in d])
    g = math.pi * EPS0 * R / d  # N / V^2
    w = 1.0 / sig

    def resid(p):
        return (F - g * ((vm + p[0]) ** 2 + p[1])) * w

    def jac(p):
        return np.column_stack([-2.0 * g * (vm + p[0]) * w, -g * w])

    def best_s(v1):
        # weighted linear LSQ for V_rms^2 at fixed V1
        y = F - g * (vm + v1) ** 2
        return float(np.sum(w * w * g * y) / np.sum(w * w * g * g))

    # median-based start
    reduced = F / g
    v1_med = float(np.median(np.sqrt(np.clip(reduced, 0.0, None)) - vm))
    s_med = max(0.0, float(np.min(reduced - (vm + v1_med) ** 2)))
    # profile scan
    span = math.sqrt(max(float(np.max(np.abs(reduced))), 0.0)) + float(np.max(np.abs(vm)))
    grid = np.linspace(-span - np.max(np.abs(vm)), span + np.max(np.abs(vm)), 4001)
    y_grid = F[None, :] - g * (vm[None, :] + grid[:, None]) ** 2
    s_grid = (y_grid * (w * w * g)).sum(axis=1) / np.sum(w * w * g * g)
    costs = (((y_grid - g * s_grid[:, None]) * w) ** 2).sum(axis=1)
    v1_scan = float(grid[int(np.argmin(costs))])
    starts = [(v1_med, s_med), (v1_scan, best_s(v1_scan))]

    best = None
    for p0 in starts:
        sol = least_squares(resid, p0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if best is None or sol.cost < best.cost:
            best = sol
    v1, s2 = float(best.x[0]), float(best.x[1])
    clamped = False
    J = jac(best.x)
    if s2 < 0:
        clamped = True
        s2 = 0.0
        sol = least_squares(
            lambda p: resid((p[0], 0.0)), [v1], jac=lambda p: jac((p[0], 0.0))[:, :1],
            method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
        )
        v1 = float(sol.x[0])
        J = jac((v1, 0.0))
    JtJ = J.T @ J
    if np.linalg.cond(JtJ) > 1e14:
        raise IdentifiabilityError("residual-fit Jacobian is singular; V1 and V_rms are degenerate")
    cov_s = np.linalg.inv(JtJ)
    vrms = math.sqrt(s2)
    if vrms > 0:
        T = np.array([[1.0, 0.0], [0.0, 0.5 / vrms]])
        cov = T @ cov_s @ T.T
    else:
        cov = np.array([[cov_s[0, 0], 0.0], [0.0, math.sqrt(cov_s[1, 1])]])
    r = resid((v1, s2))
    return ResidualFitResult(
        V1=v1,
        V_rms=vrms,
        covariance=0.5 * (cov + cov.T),
        residual_norm=float(np.linalg.norm(r / w)),
        chi2=float(r @ r),
        dof=int(d.size - 2),
        vrms_clamped=clamped,
        covariance_vrms2=0.5 * (cov_s + cov_s.T),
    )


def log_log_slope(d, F) -> float:
    """Least-squares exponent m of ``F ~ d^m``, a diagnostic only."""
    d = np.asarray(d, dtype=float)
    F = np.asarray(F, dtype=float)
    if np.any(F <= 0):
        raise ValueError("log-log slope needs positive forces")
    return float(np.polyfit(np.log(d), np.log(F), 1)[0])


def read_minimizing_csv(path: str | Path) -> MinimizingPotentialSamples:
    """Read ``d_m,V_a_V[,sigma_V]`` rows."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in (next(reader, None) or [])]
        if header not in (["d_m", "V_a_V"], ["d_m", "V_a_V", "sigma_V"]):
            raise DataFormatError(f"{path}: expected header 'd_m,V_a_V[,sigma_V]', got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            try:
                rows.append([float(x) for x in row[: len(header)]])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: bad row {row!r}") from exc
            if len(rows[-1]) != len(header):
                raise DataFormatError(f"{path}:{lineno}: expected {len(header)} columns")
    arr = np.array(rows, dtype=float).reshape(-1, len(header))
    sigma = arr[:, 2] if len(header) == 3 else None
    return MinimizingPotentialSamples(arr[:, 0], arr[:, 1], sigma)
