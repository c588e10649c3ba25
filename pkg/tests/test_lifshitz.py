import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from casimirlab.core import C_LIGHT, HBAR, K_B, ConvergenceError, RegimeWarning, ideal_energy_per_area, ideal_pressure
from casimirlab.lifshitz import (
    Convergence,
    LifshitzProblem,
    TEZeroPolicy,
    casimir_pressure,
    eta_first_order,
    free_energy_per_area,
    matsubara_frequencies,
    reflection_coefficients,
    repulsion_condition,
    sphere_plane_force,
    thermal_weight,
)
from casimirlab.permittivity import VACUUM, ConstantEps, Drude, PerfectConductor, Plasma

GOLD = Drude(1.37e16, 5.3e13)
GOLD_PLASMA = Plasma(1.37e16)
PC = PerfectConductor()


def test_matsubara_frequencies():
    xi = matsubara_frequencies(300.0, 3)
    assert xi[0] == 0.0
    assert xi[1] == pytest.approx(2.468e14, rel=1e-3)
    assert np.allclose(matsubara_frequencies(600.0, 3), 2 * xi, rtol=1e-15)
    with pytest.raises(ValueError):
        matsubara_frequencies(0.0, 3)


def test_thermal_weight():
    T = 300.0
    assert thermal_weight(1e17, T) == pytest.approx(0.5, rel=1e-12)
    w = 2 * K_B * T / HBAR
    assert thermal_weight(w, T) == pytest.approx(0.5 / math.tanh(1.0), rel=1e-12)
    assert thermal_weight(w, T) == pytest.approx(0.6565, abs=1e-4)
    small = 1e-6 * w
    assert thermal_weight(small, T) == pytest.approx(K_B * T / (HBAR * small), rel=1e-9)


def test_reflection_trivial_cases():
    assert reflection_coefficients(VACUUM, VACUUM, 1e14, 1e6) == pytest.approx((0.0, 0.0), abs=1e-15)
    assert reflection_coefficients(ConstantEps(3.0), ConstantEps(3.0), 1e14, 1e6) == pytest.approx((0, 0), abs=1e-15)
    assert reflection_coefficients(PC, VACUUM, 1e14, 1e6) == (-1.0, 1.0)
    with pytest.raises(ValueError):
        reflection_coefficients(GOLD, VACUUM, 0.0, 1e6)


def _fresnel_mp(eps_p, eps_g, xi, k):
    mpmath.mp.dps = 40
    xi, k = mpmath.mpf(xi), mpmath.mpf(k)
    c = mpmath.mpf(C_LIGHT)
    qg = mpmath.sqrt(k**2 + eps_g * xi**2 / c**2)
    qp = mpmath.sqrt(k**2 + eps_p * xi**2 / c**2)
    return float((qg - qp) / (qg + qp)), float((eps_p * qg - eps_g * qp) / (eps_p * qg + eps_g * qp))


@pytest.mark.parametrize("xi,k", [(1e14, 1e6), (1e15, 3e6), (3e13, 1e5), (1e16, 1e4)])
def test_reflection_constant_eps_against_mpmath(xi, k):
    te, tm = reflection_coefficients(ConstantEps(16.0), VACUUM, xi, k)
    te_ref, tm_ref = _fresnel_mp(16, 1, xi, k)
    assert te == pytest.approx(te_ref, rel=1e-12, abs=1e-15)
    assert tm == pytest.approx(tm_ref, rel=1e-12, abs=1e-15)


@given(
    xi=st.floats(1e10, 1e17),
    k=st.floats(1e2, 1e9),
    eps_p=st.floats(1.0, 1e4),
    eps_g=st.floats(1.0, 10.0),
)
def test_reflection_bounded(xi, k, eps_p, eps_g):
    te, tm = reflection_coefficients(ConstantEps(eps_p), ConstantEps(eps_g), xi, k)
    assert abs(te) <= 1 + 1e-12 and abs(tm) <= 1 + 1e-12


def test_ideal_mirror_zero_temperature():
    p = LifshitzProblem(PC, PC, 1e-6, 0.0)
    assert free_energy_per_area(p) == pytest.approx(ideal_energy_per_area(1e-6), rel=1e-6)
    assert free_energy_per_area(p) == pytest.approx(-4.34e-10, rel=2e-3)
    assert casimir_pressure(p) == pytest.approx(ideal_pressure(1e-6), rel=1e-6)
    assert sphere_plane_force(p, 100e-6) == pytest.approx(2.73e-13, rel=2e-3)
    assert sphere_plane_force(p, 200e-6) == pytest.approx(2 * sphere_plane_force(p, 100e-6), rel=1e-14)


def test_no_mirrors_no_energy():
    p = LifshitzProblem(VACUUM, VACUUM, 1e-6, 300.0)
    assert free_energy_per_area(p) == 0.0
    assert casimir_pressure(p) == 0.0


def test_pressure_decreases_with_distance():
    vals = [casimir_pressure(LifshitzProblem(GOLD, GOLD, d, 300.0)) for d in (0.5e-6, 1e-6, 2e-6, 4e-6)]
    assert all(a > b > 0 for a, b in zip(vals, vals[1:]))


def test_thermal_pressure_matches_derivative_of_energy():
    d, h = 2e-6, 1e-10
    e = lambda x: free_energy_per_area(LifshitzProblem(GOLD, GOLD, x, 300.0))
    slope = (e(d + h) - e(d - h)) / (2 * h)
    assert casimir_pressure(LifshitzProblem(GOLD, GOLD, d, 300.0)) == pytest.approx(slope, rel=1e-5)


def test_drude_plasma_factor_two_at_30um():
    r = free_energy_per_area(LifshitzProblem(GOLD, GOLD, 30e-6, 300.0)) / free_energy_per_area(
        LifshitzProblem(GOLD_PLASMA, GOLD_PLASMA, 30e-6, 300.0)
    )
    assert r == pytest.approx(0.5, abs=0.03)


def test_te_zero_policy():
    d, T = 3e-6, 300.0
    e = {
        pol: free_energy_per_area(LifshitzProblem(GOLD, GOLD, d, T, te_zero_policy=pol))
        for pol in TEZeroPolicy
    }
    assert e[TEZeroPolicy.FROM_MODEL] == e[TEZeroPolicy.FORCE_EXCLUDE]
    assert abs(e[TEZeroPolicy.FORCE_EXCLUDE]) < abs(e[TEZeroPolicy.FORCE_INCLUDE])
    # plasma keeps the term under FromModel
    ep = free_energy_per_area(LifshitzProblem(GOLD_PLASMA, GOLD_PLASMA, d, T))
    ep_ex = free_energy_per_area(LifshitzProblem(GOLD_PLASMA, GOLD_PLASMA, d, T, te_zero_policy="ForceExclude"))
    assert abs(ep_ex) < abs(ep)


def test_excluded_over_included_falls_towards_half():
    ratios = []
    for d in (1e-6, 3e-6, 10e-6, 30e-6):
        inc = free_energy_per_area(LifshitzProblem(GOLD_PLASMA, GOLD_PLASMA, d, 300.0))
        exc = free_energy_per_area(
            LifshitzProblem(GOLD_PLASMA, GOLD_PLASMA, d, 300.0, te_zero_policy=TEZeroPolicy.FORCE_EXCLUDE)
        )
        ratios.append(exc / inc)
    assert all(1 >= a > b >= 0.5 - 1e-3 for a, b in zip(ratios, ratios[1:]))


def test_plasma_frequency_moves_towards_ideal():
    d = 0.5e-6
    vals = [abs(free_energy_per_area(LifshitzProblem(Plasma(wp), Plasma(wp), d, 0.0))) for wp in (3e15, 1e16, 3e16, 1e17)]
    ideal = abs(ideal_energy_per_area(d))
    assert all(a < b < ideal for a, b in zip(vals, vals[1:]))


def test_plasma_ratio_tracks_first_order_eta():
    wp = 1.37e16
    for x in (0.005, 0.01):
        d = C_LIGHT / (wp * x)
        ratio = casimir_pressure(LifshitzProblem(Plasma(wp), Plasma(wp), d, 0.0)) / ideal_pressure(d)
        assert ratio == pytest.approx(eta_first_order(wp, d), rel=0.02)


def test_matsubara_cutoff_stable():
    d = 5e-6
    a = free_energy_per_area(LifshitzProblem(GOLD, GOLD, d, 300.0, convergence=Convergence(n_max=20)))
    b = free_energy_per_area(LifshitzProblem(GOLD, GOLD, d, 300.0, convergence=Convergence(n_max=40)))
    assert abs(a - b) <= 1e-8 * abs(b)
    auto = free_energy_per_area(LifshitzProblem(GOLD, GOLD, d, 300.0))
    assert auto == pytest.approx(b, rel=1e-8)


def test_non_convergence_carries_partial_sum():
    p = LifshitzProblem(GOLD, GOLD, 0.2e-6, 300.0, convergence=Convergence(n_max=2))
    with pytest.raises(ConvergenceError) as info:
        free_energy_per_area(p)
    assert info.value.partial < 0


def test_problem_validation():
    with pytest.raises(ValueError):
        LifshitzProblem(GOLD, GOLD, 0.0, 300.0)
    with pytest.raises(ValueError):
        LifshitzProblem(GOLD, GOLD, 1e-6, -1.0)
    with pytest.raises(TypeError):
        LifshitzProblem(GOLD, GOLD, 1e-6, 300.0, gap=GOLD)


def test_eta_first_order():
    wp = 1e16
    assert eta_first_order(wp, 1e3) == pytest.approx(1.0, abs=1e-9)
    assert eta_first_order(wp, C_LIGHT / (wp * 0.01)) == pytest.approx(0.94667, abs=1e-5)
    assert eta_first_order(wp, C_LIGHT / (wp * 0.05)) == pytest.approx(0.73333, abs=1e-5)
    with pytest.warns(RegimeWarning):
        assert eta_first_order(wp, C_LIGHT / (wp * 0.5)) < 0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        eta_first_order(wp, 1e-6)


def test_repulsion_condition():
    grid = np.geomspace(1e13, 1e16, 20)
    bromobenzene, silica = ConstantEps(2.4), ConstantEps(2.1)
    assert repulsion_condition(GOLD, silica, bromobenzene, grid)
    assert not repulsion_condition(GOLD, GOLD, bromobenzene, grid)
    assert not repulsion_condition(GOLD, silica, VACUUM, grid)
    with pytest.raises(ValueError):
        repulsion_condition(GOLD, silica, bromobenzene, [])
