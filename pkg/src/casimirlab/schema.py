"""JSON <-> model conversion shared by the simulator and the command line.

Objects are plain dicts with a ``"type"`` tag naming the model class and
keys equal to its field names. Unknown keys are rejected so that a typo in
a physics parameter cannot silently fall back to a default.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .core import ConfigError
from .lifshitz import Convergence, LifshitzProblem, TEZeroPolicy
from .patches import SingleMode, TabulatedSpectrum, TopHatCorrelation, read_spectrum_csv
from .permittivity import (
    ConstantEps,
    Conductor,
    Drude,
    GeneralizedPlasma,
    PerfectConductor,
    Plasma,
    Tabulated,
    build_tabulated,
    read_optical_csv,
)


def check_keys(obj: Mapping[str, Any], required: set, optional: set = frozenset(), where: str = "") -> None:
    if not isinstance(obj, Mapping):
        raise ConfigError(f"{where or 'value'}: expected a JSON object, got {type(obj).__name__}")
    keys = set(obj)
    unknown = keys - required - optional
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - keys
    if missing:
        raise ConfigError(f"{where}: missing key(s) {sorted(missing)}")


def _num(obj, key, where):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


def _build(cls, kwargs, where):
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def permittivity_from_json(obj, where="model", base_dir: Path | None = None):
    if not isinstance(obj, Mapping) or "type" not in obj:
        raise ConfigError(f"{where}: permittivity model needs a 'type' key")
    kind = obj["type"]
    if kind == "PerfectConductor":
        check_keys(obj, {"type"}, where=where)
        return PerfectConductor()
    if kind == "ConstantEps":
        check_keys(obj, {"type", "eps"}, where=where)
        return _build(ConstantEps, {"eps": _num(obj, "eps", where)}, where)
    if kind == "Plasma":
        check_keys(obj, {"type", "omega_p"}, where=where)
        return _build(Plasma, {"omega_p": _num(obj, "omega_p", where)}, where)
    if kind == "Drude":
        check_keys(obj, {"type", "omega_p", "gamma"}, where=where)
        return _build(
            Drude, {"omega_p": _num(obj, "omega_p", where), "gamma": _num(obj, "gamma", where)}, where
        )
    if kind == "Conductor":
        check_keys(obj, {"type", "sigma"}, where=where)
        return _build(Conductor, {"sigma": _num(obj, "sigma", where)}, where)
    if kind == "GeneralizedPlasma":
        check_keys(obj, {"type", "base", "omega_p"}, where=where)
        base = permittivity_from_json(obj["base"], f"{where}.base", base_dir)
        return _build(GeneralizedPlasma, {"base": base, "omega_p": _num(obj, "omega_p", where)}, where)
    if kind == "Tabulated":
        check_keys(obj, {"type"}, {"xi", "eps", "optical_data", "optical_csv"}, where=where)
        if "xi" in obj or "eps" in obj:
            return _build(Tabulated, {"xi": np.asarray(obj["xi"]), "eps": np.asarray(obj["eps"])}, where)
        if "optical_data" in obj:
            return _build(build_tabulated, {"data": obj["optical_data"]}, where)
        if "optical_csv" in obj:
            path = Path(obj["optical_csv"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return _build(build_tabulated, {"data": read_optical_csv(path)}, where)
        raise ConfigError(f"{where}: Tabulated needs xi/eps, optical_data or optical_csv")
    raise ConfigError(f"{where}: unknown permittivity type {kind!r}")


def permittivity_to_json(model) -> dict:
    if isinstance(model, PerfectConductor):
        return {"type": "PerfectConductor"}
    if isinstance(model, ConstantEps):
        return {"type": "ConstantEps", "eps": model.eps}
    if isinstance(model, Plasma):
        return {"type": "Plasma", "omega_p": model.omega_p}
    if isinstance(model, Drude):
        return {"type": "Drude", "omega_p": model.omega_p, "gamma": model.gamma}
    if isinstance(model, Conductor):
        return {"type": "Conductor", "sigma": model.sigma}
    if isinstance(model, GeneralizedPlasma):
        return {"type": "GeneralizedPlasma", "base": permittivity_to_json(model.base), "omega_p": model.omega_p}
    if isinstance(model, Tabulated):
        return {"type": "Tabulated", "xi": model.xi.tolist(), "eps": model.eps.tolist()}
    raise TypeError(f"cannot serialise {model!r}")


def spectrum_from_json(obj, where="patch_spec", base_dir: Path | None = None):
    if not isinstance(obj, Mapping) or "type" not in obj:
        raise ConfigError(f"{where}: spectrum needs a 'type' key")
    kind = obj["type"]
    if kind == "SingleMode":
        check_keys(obj, {"type", "V0", "k"}, where=where)
        return _build(SingleMode, {"V0": _num(obj, "V0", where), "k": _num(obj, "k", where)}, where)
    if kind == "TopHatCorrelation":
        check_keys(obj, {"type", "V0", "lambda_patch"}, where=where)
        return _build(
            TopHatCorrelation,
            {"V0": _num(obj, "V0", where), "lambda_patch": _num(obj, "lambda_patch", where)},
            where,
        )
    if kind == "TabulatedSpectrum":
        check_keys(obj, {"type"}, {"k", "S", "csv"}, where=where)
        if "csv" in obj:
            path = Path(obj["csv"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return read_spectrum_csv(path)
        return _build(TabulatedSpectrum, {"k": np.asarray(obj["k"]), "S": np.asarray(obj["S"])}, where)
    raise ConfigError(f"{where}: unknown spectrum type {kind!r}")


def spectrum_to_json(spec) -> dict:
    if isinstance(spec, SingleMode):
        return {"type": "SingleMode", "V0": spec.V0, "k": spec.k}
    if isinstance(spec, TopHatCorrelation):
        return {"type": "TopHatCorrelation", "V0": spec.V0, "lambda_patch": spec.lambda_patch}
    if isinstance(spec, TabulatedSpectrum):
        return {"type": "TabulatedSpectrum", "k": spec.k.tolist(), "S": spec.S.tolist()}
    raise TypeError(f"cannot serialise {spec!r}")


def convergence_from_json(obj, where="convergence") -> Convergence:
    check_keys(obj, set(), {"n_max", "kperp_tolerance", "sum_tolerance", "gauss_order"}, where=where)
    kw = dict(obj)
    if kw.get("n_max") == "auto":
        kw["n_max"] = None
    return _build(Convergence, kw, where)


def lifshitz_from_json(obj, d: float, where="problem", base_dir: Path | None = None) -> LifshitzProblem:
    """Build a problem at separation ``d`` from the JSON keys other than ``d``."""
    kw = {
        "plate_a": permittivity_from_json(obj["plate_a"], f"{where}.plate_a", base_dir),
        "plate_b": permittivity_from_json(obj["plate_b"], f"{where}.plate_b", base_dir),
        "d": d,
        "T": _num(obj, "T", where),
    }
    if "gap" in obj:
        kw["gap"] = permittivity_from_json(obj["gap"], f"{where}.gap", base_dir)
    if "te_zero_policy" in obj:
        try:
            kw["te_zero_policy"] = TEZeroPolicy(obj["te_zero_policy"])
        except ValueError as exc:
            raise ConfigError(f"{where}.te_zero_policy: {exc}") from exc
    if "convergence" in obj:
        kw["convergence"] = convergence_from_json(obj["convergence"], f"{where}.convergence")
    return _build(LifshitzProblem, kw, where)
