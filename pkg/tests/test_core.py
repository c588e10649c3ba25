import math

import pytest
from hypothesis import given, strategies as st

from casimirlab import core
from casimirlab.core import CONST, error_budget, ideal_energy_per_area, ideal_pressure


def test_codata_2018_values():
    assert CONST.hbar == 1.054571817e-34
    assert CONST.c == 299792458.0
    assert CONST.k_b == 1.380649e-23
    assert CONST.eps0 == 8.8541878128e-12
    assert CONST.e_charge == 1.602176634e-19


def test_constants_are_immutable():
    with pytest.raises(AttributeError):
        CONST.hbar = 1.0


def test_error_budget_examples():
    assert error_budget(-3, 100e-9, 0.005) == pytest.approx(0.1667e-9, rel=1e-3)
    assert error_budget(-1, 2e-6, 0.03) == pytest.approx(0.03 * 2e-6)
    assert error_budget(-4, 1e-6, 0.01) == pytest.approx(2.5e-9)


@pytest.mark.parametrize("args", [(0, 1e-6, 0.01), (-3, 0.0, 0.01), (-3, 1e-6, 0.0), (-3, -1e-6, 0.01)])
def test_error_budget_domain(args):
    with pytest.raises(ValueError):
        error_budget(*args)


@given(
    n=st.floats(0.1, 10) | st.floats(-10, -0.1),
    d=st.floats(1e-9, 1e-3),
    f=st.floats(1e-6, 0.5),
    s=st.floats(0.1, 10),
)
def test_error_budget_linearity(n, d, f, s):
    base = error_budget(n, d, f)
    assert error_budget(n, s * d, f) == pytest.approx(s * base, rel=1e-12)
    assert error_budget(n, d, s * f) == pytest.approx(s * base, rel=1e-12)
    assert error_budget(n / 2, d, f) == pytest.approx(2 * base, rel=1e-12)


def test_ideal_mirror_closed_forms():
    d = 1e-6
    assert ideal_energy_per_area(d) == pytest.approx(-4.3338e-10, rel=1e-4)
    assert ideal_pressure(d) == pytest.approx(1.3001e-3, rel=1e-4)
    # attraction positive: P = +dE/dd because E rises towards zero with d
    h = 1e-12
    slope = (ideal_energy_per_area(d + h) - ideal_energy_per_area(d - h)) / (2 * h)
    assert slope == pytest.approx(ideal_pressure(d), rel=1e-6)


def test_exception_hierarchy():
    assert issubclass(core.StiffnessError, core.ConvergenceError)
    assert issubclass(core.IdentifiabilityError, core.FitError)
    for exc in (core.InsufficientDataError, core.DataFormatError, core.OutOfRangeError, core.ConfigError):
        assert issubclass(exc, ValueError) and issubclass(exc, core.CasimirLabError)
    err = core.ConvergenceError("x", partial=1.5)
    assert err.partial == 1.5
