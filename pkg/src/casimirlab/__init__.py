"""Casimir-force and electrostatic-calibration toolkit.

Lifshitz forces between dispersive plates, sphere-plane electrostatics,
semiconductor screening, patch potentials, contact-potential modelling and
a synthetic-experiment analysis pipeline. All quantities are SI.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .core import (
    CONST,
    CasimirLabError,
    ConfigError,
    ConvergenceError,
    DataFormatError,
    ExtrapolationWarning,
    FitError,
    IdentifiabilityError,
    InsufficientDataError,
    OutOfRangeError,
    RegimeWarning,
    StiffnessError,
    UnsupportedModelError,
    error_budget,
)
from .permittivity import (
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
)
from .lifshitz import (
    Convergence,
    LifshitzProblem,
    TEZeroPolicy,
    casimir_pressure,
    free_energy_per_area,
    sphere_plane_force,
)

__all__ = [
    "__version__",
    "CONST",
    "CasimirLabError",
    "ConfigError",
    "ConvergenceError",
    "DataFormatError",
    "ExtrapolationWarning",
    "FitError",
    "IdentifiabilityError",
    "InsufficientDataError",
    "OutOfRangeError",
    "RegimeWarning",
    "StiffnessError",
    "UnsupportedModelError",
    "error_budget",
    "ConstantEps",
    "Conductor",
    "Drude",
    "GeneralizedPlasma",
    "PerfectConductor",
    "Plasma",
    "Tabulated",
    "build_tabulated",
    "eval_imaginary",
    "eval_real",
    "Convergence",
    "LifshitzProblem",
    "TEZeroPolicy",
    "casimir_pressure",
    "free_energy_per_area",
    "sphere_plane_force",
]
