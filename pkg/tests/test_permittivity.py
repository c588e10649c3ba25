import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from casimirlab.core import (
    EPS0,
    DataFormatError,
    ExtrapolationWarning,
    InsufficientDataError,
    UnsupportedModelError,
)
from casimirlab.permittivity import (
    ConstantEps,
    Conductor,
    Drude,
    GeneralizedPlasma,
    PerfectConductor,
    Plasma,
    Tabulated,
    build_tabulated,
    eval_imaginary,
    eval_real,
    read_optical_csv,
)

WP, GAMMA = 1.37e16, 5.3e13


def drude_eps2(w, wp=WP, g=GAMMA):
    return wp**2 * g / (w * (w * w + g * g))


def test_closed_forms():
    assert eval_imaginary(Plasma(WP), WP) == pytest.approx(2.0)
    assert eval_imaginary(Drude(WP, GAMMA), 1e15) == pytest.approx(179.243, rel=1e-5)
    assert eval_imaginary(ConstantEps(16.0), 3e14) == 16.0
    assert eval_imaginary(Conductor(1e6), 1e12) == pytest.approx(1 + 1e6 / (EPS0 * 1e12))
    gp = GeneralizedPlasma(Drude(1e15, 1e13), WP)
    assert eval_imaginary(gp, 2e14) == pytest.approx(
        eval_imaginary(Drude(1e15, 1e13), 2e14) + (WP / 2e14) ** 2
    )
    assert math.isinf(eval_imaginary(PerfectConductor(), 1e14))


@pytest.mark.parametrize("xi", [0.0, -1.0])
def test_eval_imaginary_domain(xi):
    with pytest.raises(ValueError):
        eval_imaginary(Drude(WP, GAMMA), xi)


def test_parameter_validation():
    for bad in (lambda: Plasma(0.0), lambda: Drude(WP, -1.0), lambda: Conductor(0.0), lambda: ConstantEps(0.0)):
        with pytest.raises(ValueError):
            bad()
    with pytest.raises(TypeError):
        GeneralizedPlasma(Plasma(WP), WP)


def test_eval_real():
    assert eval_real(Plasma(WP), WP) == pytest.approx(0.0, abs=1e-15)
    assert eval_real(Plasma(WP), WP / math.sqrt(2)).real == pytest.approx(-1.0)
    eps = eval_real(Conductor(5e7), 1e12)
    assert eps.imag == pytest.approx(5e7 / (EPS0 * 1e12))
    assert eps.real == 1.0
    w = 2e14
    assert eval_real(Drude(WP, GAMMA), w) == pytest.approx(1 - WP**2 / (w * (w + 1j * GAMMA)))
    for model in (Tabulated([1e12, 1e13], [5.0, 2.0]), PerfectConductor()):
        with pytest.raises(UnsupportedModelError):
            eval_real(model, 1e13)


ANALYTIC = [Plasma(WP), Drude(WP, GAMMA), Conductor(3e7), ConstantEps(11.7), GeneralizedPlasma(Drude(3e15, 1e14), WP)]


@pytest.mark.parametrize("model", ANALYTIC, ids=lambda m: type(m).__name__)
@given(xi1=st.floats(1e9, 1e18), ratio=st.floats(1.0, 1e3))
def test_analytic_models_real_ge1_nonincreasing(model, xi1, ratio):
    e1 = eval_imaginary(model, xi1)
    e2 = eval_imaginary(model, xi1 * ratio)
    assert math.isfinite(e1) and e1 >= 1.0
    assert e2 <= e1 * (1 + 1e-14)


@given(xi=st.floats(1e10, 1e18))
def test_generalized_plasma_dominates_base(xi):
    base = Drude(2e15, 8e13)
    assert eval_imaginary(GeneralizedPlasma(base, 9e15), xi) >= eval_imaginary(base, xi)


@given(xi=st.floats(1e12, 1e17))
def test_drude_tends_to_plasma(xi):
    plasma = eval_imaginary(Plasma(WP), xi)
    assert eval_imaginary(Drude(WP, 1e-6 * xi), xi) == pytest.approx(plasma, rel=2e-6)


def test_build_tabulated_matches_analytic_drude():
    # eps'' sampled over 1e11 .. 1e17 rad/s, compared over the central four decades
    w = np.geomspace(1e11, 1e17, 6 * 40 + 1)
    tab = build_tabulated(np.column_stack([w, drude_eps2(w)]))
    for xi in np.geomspace(1e12, 1e16, 41):
        exact = eval_imaginary(Drude(WP, GAMMA), xi)
        assert eval_imaginary(tab, xi) == pytest.approx(exact, rel=0.01)


def test_build_tabulated_errors():
    with pytest.raises(InsufficientDataError):
        build_tabulated([])
    with pytest.raises(InsufficientDataError):
        build_tabulated([(1e13, 2.0), (1e14, 1.0)])
    w = np.geomspace(1e12, 1e16, 10)
    with pytest.raises(DataFormatError):
        build_tabulated(np.column_stack([w[::-1], drude_eps2(w)]))


def test_tabulated_validation_and_extrapolation():
    with pytest.raises(DataFormatError):
        Tabulated([1e13, 1e12], [3.0, 2.0])
    with pytest.raises(DataFormatError):
        Tabulated([1e12, 1e13], [2.0, 3.0])
    with pytest.raises(DataFormatError):
        Tabulated([1e12, 1e13], [0.5, 0.4])
    # a pure power law eps - 1 = A xi^-2 is reproduced exactly, inside and outside
    xi = np.geomspace(1e12, 1e15, 7)
    tab = Tabulated(xi, 1 + 1e30 / xi**2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert eval_imaginary(tab, 3.3e13) == pytest.approx(1 + 1e30 / 3.3e13**2, rel=1e-12)
    with pytest.warns(ExtrapolationWarning):
        val = eval_imaginary(tab, 1e16)
    assert val == pytest.approx(1 + 1e30 / 1e32, rel=1e-10)
    assert tab.evaluate(1e11)[1] is True


def test_read_optical_csv(tmp_path):
    p = tmp_path / "gold.csv"
    w = np.geomspace(1e12, 1e16, 12)
    p.write_text("omega_rad_s,eps2\n" + "".join(f"{a:.17g},{b:.17g}\n" for a, b in zip(w, drude_eps2(w))))
    rows = read_optical_csv(p)
    assert len(rows) == 12 and rows[0][0] == w[0]
    bad = tmp_path / "bad.csv"
    bad.write_text("omega,eps\n1,2\n")
    with pytest.raises(DataFormatError):
        read_optical_csv(bad)
