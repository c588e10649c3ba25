"""Acceptance criteria, each checked at its stated tolerance and runtime budget."""

import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from casimirlab.contact import log_log_slope, minimized_force, solve_contact_ode, toy_model_eval
from casimirlab.core import C_LIGHT, EPS0, HBAR, error_budget
from casimirlab.electrostatics import ParallelPlateProfile, sphere_plane_capacitance_derivative
from casimirlab.lifshitz import LifshitzProblem, casimir_pressure, free_energy_per_area
from casimirlab.patches import TopHatCorrelation, patch_force_sphere_plane
from casimirlab.permittivity import Drude, PerfectConductor, Plasma
from casimirlab.screening import SemiconductorPlate, apparent_distance_offset, debye_length
from casimirlab.simkit import ExperimentConfig, run_analysis, simulate_dataset

GOLD = Drude(1.37e16, 5.3e13)
GOLD_PLASMA = Plasma(1.37e16)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def tag(record_property, name, detail=""):
    record_property("criterion", name)
    record_property("detail", detail)


def test_c01_ideal_mirror_limit(record_property):
    tag(record_property, "1. ideal-mirror pressure at 1 um")
    d = 1e-6
    with Timer() as t:
        P = casimir_pressure(LifshitzProblem(PerfectConductor(), PerfectConductor(), d, 0.0))
    exact = math.pi**2 * HBAR * C_LIGHT / (240 * d**4)
    record_property("detail", f"P={P * 1e3:.4f} mPa, {t.elapsed:.2f}s")
    assert P == pytest.approx(exact, rel=1e-3)
    assert P == pytest.approx(1.30e-3, abs=0.005e-3)
    assert t.elapsed < 1.0


def test_c02_plasma_force_correction(record_property):
    tag(record_property, "2. plasma correction factor at c/(omega_p d)=0.005")
    d = 1e-6
    omega_p = C_LIGHT / (0.005 * d)
    with Timer() as t:
        P = casimir_pressure(LifshitzProblem(Plasma(omega_p), Plasma(omega_p), d, 0.0))
        P_id = casimir_pressure(LifshitzProblem(PerfectConductor(), PerfectConductor(), d, 0.0))
    ratio = P / P_id
    target = 1 - 16 / 3 * 0.005
    record_property("detail", f"ratio={ratio:.5f} vs {target:.5f}, {t.elapsed:.2f}s")
    assert ratio == pytest.approx(target, rel=0.02)
    assert t.elapsed < 10.0


def _drude_over_plasma(d):
    e_d = free_energy_per_area(LifshitzProblem(GOLD, GOLD, d, 300.0))
    e_p = free_energy_per_area(LifshitzProblem(GOLD_PLASMA, GOLD_PLASMA, d, 300.0))
    return e_d / e_p


def test_c03_factor_of_two(record_property):
    tag(record_property, "3. Drude/plasma sphere-plane force ratio at 30 and 10 um")
    with Timer() as t:
        r30 = _drude_over_plasma(30e-6)
        r10 = _drude_over_plasma(10e-6)
    record_property("detail", f"30um {r30:.4f}, 10um {r10:.4f}, {t.elapsed:.2f}s")
    assert abs(r30 - 0.50) <= 0.03
    assert 0.45 <= r10 <= 0.65
    assert t.elapsed < 30.0


def test_c04_thermal_correction_at_1um(record_property):
    tag(record_property, "4. Drude-vs-plasma reduction at 1 um")
    with Timer() as t:
        reduction = 1 - _drude_over_plasma(1e-6)
    record_property("detail", f"reduction={100 * reduction:.1f}%, {t.elapsed:.2f}s")
    assert 0.10 <= reduction <= 0.35
    assert t.elapsed < 10.0


def test_c05_patch_asymptotics(record_property):
    tag(record_property, "5. top-hat patch force limits")
    lam, V0, R = 1e-6, 0.01, 100e-6
    spec = TopHatCorrelation(V0, lam)
    with Timer() as t:
        d = 0.005 * lam
        near = patch_force_sphere_plane(spec, R, d) * d / (math.pi * EPS0 * R * V0**2)
        ds = np.geomspace(2 * lam, 20 * lam, 12)
        slope = log_log_slope(ds, [patch_force_sphere_plane(spec, R, x) for x in ds])
    record_property("detail", f"near={near:.4f}, slope={slope:.3f}, {t.elapsed:.2f}s")
    assert near == pytest.approx(1.0, abs=0.01)
    assert slope == pytest.approx(-3.0, abs=0.3)
    assert t.elapsed < 10.0


def test_c06_screening(record_property):
    tag(record_property, "6. germanium Debye length and distance offset")
    with Timer() as t:
        eps = 16.0
        lam = debye_length(SemiconductorPlate.intrinsic(eps, 2.35e19, 300.0))
        y_min = 30.0
        off = apparent_distance_offset(lam, eps, (y_min * lam / eps, 100 * y_min * lam / eps))
    record_property(
        "detail", f"lambda={lam * 1e6:.3f} um, offset={off.offset * 1e6:.4f} um vs 3lambda/eps={off.expansion * 1e6:.4f} um"
    )
    assert 0.55e-6 <= lam <= 0.75e-6
    assert off.min_y >= 30 and off.in_regime
    assert off.offset == pytest.approx(3 * lam / eps, rel=0.05)
    assert t.elapsed < 5.0


def test_c07_contact_closed_forms(record_property):
    tag(record_property, "7. contact-potential closed forms")
    a, b, area = 2e-3, -5e-3, 1e-6
    v_a = lambda d: a * np.log(d) + b
    prof = ParallelPlateProfile(area)
    with Timer() as t:
        d_lo, d_hi = 1e-6, 1e-4
        sol = solve_contact_ode(v_a, prof, 1e7 * d_hi, d_lo)
        d = np.geomspace(d_lo, d_hi, 60)
        exact = -v_a(d) - a
        ode_err = float(np.max(np.abs(sol(d) - exact) / np.abs(exact)))
        force_err = max(
            abs(abs(minimized_force(prof, v_a, sol, x)) / (EPS0 * area * a * a / (2 * x * x)) - 1) for x in d[5:-5]
        )
        dd, delta, vc = 1e-6, 0.7e-6, 0.1
        f = lambda v: toy_model_eval(dd, delta, area, v, vc).F
        h = 1e-3
        v_num = brentq(lambda v: (f(v + h) - f(v - h)) / (2 * h), -vc, vc, xtol=1e-18, rtol=1e-15)
        v_closed = toy_model_eval(dd, delta, area, 0.0, vc).V_m
        argmin_err = abs(v_num / v_closed - 1)
    record_property("detail", f"ode {ode_err:.1e}, force {force_err:.1e}, argmin {argmin_err:.1e}, {t.elapsed:.2f}s")
    assert ode_err < 1e-6
    assert force_err < 1e-6
    assert argmin_err < 1e-10
    assert t.elapsed < 5.0


def test_c08_round_trip(record_property):
    tag(record_property, "8. simulate-analyze round trip")
    base = dict(
        R=100e-6, T=300.0, plate_model=GOLD, sphere_model=GOLD, contact={"a": 2e-3, "b": -5e-3}, V1=30e-3,
        V_rms=10e-3, d0=150e-9, z_grid=np.geomspace(1e-6, 20e-6, 12), v_sweep=np.linspace(-0.1, 0.1, 11),
    )
    with Timer() as t:
        clean = run_analysis(simulate_dataset(ExperimentConfig(**base, sigma_F=0.0, seed=0)), 100e-6, 300.0, GOLD, GOLD)
        sigma = 0.02 * float(np.median(clean.F0_curve[:, 1]))
        cfg = ExperimentConfig(**base, sigma_F=sigma, seed=20260418)
        res = run_analysis(simulate_dataset(cfg), 100e-6, 300.0, GOLD, GOLD)
    rf = res.residual_fit
    record_property(
        "detail",
        f"d0 {res.d0_est * 1e9:.2f} nm, a {res.log_fit[0] * 1e3:.3f} mV, b {res.log_fit[1] * 1e3:.3f} mV, "
        f"V1 {rf.V1 * 1e3:.2f} mV, Vrms {rf.V_rms * 1e3:.2f} mV, {t.elapsed:.2f}s",
    )
    assert abs(res.d0_est - 150e-9) < 2e-9
    assert res.log_fit[0] == pytest.approx(2e-3, rel=0.05)
    assert res.log_fit[1] == pytest.approx(-5e-3, rel=0.05)
    assert rf.V1 == pytest.approx(30e-3, rel=0.05)
    assert rf.V_rms == pytest.approx(10e-3, rel=0.05)
    assert t.elapsed < 60.0


def test_c09_error_budget(record_property):
    tag(record_property, "9. distance error budget")
    with Timer() as t:
        delta = error_budget(-3, 100e-9, 0.005)
    record_property("detail", f"{delta * 1e9:.4f} nm")
    assert round(delta * 1e9, 3) == 0.167
    assert t.elapsed < 0.1


def test_c10_exact_vs_pfa(record_property):
    tag(record_property, "10. sphere-plane series vs PFA")
    R, V = 100e-6, 1.0
    with Timer() as t:
        def dev(x, tol):
            F = -0.5 * sphere_plane_capacitance_derivative(R, x * R, tol) * V**2
            return abs(F / (math.pi * EPS0 * R * V**2 / (x * R)) - 1)

        at_1e3 = dev(1e-3, 1e-12)
        ratios = np.geomspace(1e-4, 1e-2, 9)
        devs = np.array([dev(x, 1e-12) for x in ratios])
        devs_tight = np.array([dev(x, 1e-14) for x in ratios])
    record_property("detail", f"deviation at d/R=1e-3: {at_1e3:.2e}, {t.elapsed:.2f}s")
    assert at_1e3 < 0.02
    assert np.all(np.diff(devs) > 0)  # shrinks monotonically as d/R falls
    assert np.allclose(devs, devs_tight, rtol=1e-3, atol=1e-9)
    assert t.elapsed < 5.0
