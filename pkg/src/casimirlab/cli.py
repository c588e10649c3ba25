"""Command-line front end: ``casimirlab <subcommand> INPUT... [--out PATH]``.

Every subcommand reads its inputs completely and validates them before any
computation, and writes the output file only once everything succeeded.
Exit codes: 0 success, 1 usage/configuration/data error, 2 numerical
non-convergence, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__, schema
from .contact import fit_residual, read_minimizing_csv
from .core import CasimirLabError, ConfigError, ConvergenceError, DataFormatError
from .electrostatics import (
    calibration_alpha,
    parallel_plate_capacitance,
    sphere_plane_capacitance,
    sphere_plane_capacitance_derivative,
)
from .lifshitz import TEZeroPolicy, casimir_pressure, free_energy_per_area
from .patches import patch_force_sphere_plane
from .screening import (
    SemiconductorPlate,
    apparent_distance_offset,
    debye_length,
    screened_capacitance_per_area,
    screened_energy_per_area,
    screened_surface_potential,
)
from .simkit import (
    AnalysisError,
    AnalysisOptions,
    config_from_json,
    read_dataset_csv,
    residual_fit_to_json,
    result_to_json,
    run_analysis,
    simulate_dataset,
    write_dataset_csv,
)

EXIT_OK, EXIT_USAGE, EXIT_CONVERGENCE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class Table:
    """Column table plus scalar metadata; CSV shows the table, JSON shows both."""

    def __init__(self, columns, rows, meta=None):
        self.columns = list(columns)
        self.rows = [list(map(float, r)) for r in rows]
        self.meta = meta or {}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for r in self.rows:
            buf.write(",".join("%.17g" % x for x in r) + "\n")
        return buf.getvalue()

    def to_json(self) -> dict:
        out = dict(self.meta)
        out["columns"] = self.columns
        out["rows"] = self.rows
        return out


# ---------------------------------------------------------------- helpers

def _load_json(path: str):
    with open(path) as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None


def _grid(obj, key, where):
    v = obj[key]
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = [v]
    if not isinstance(v, list) or not v or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    ):
        raise ConfigError(f"{where}.{key}: expected a number or a non-empty list of numbers")
    arr = np.asarray(v, dtype=float)
    if np.any(arr <= 0):
        raise ConfigError(f"{where}.{key}: separations must be positive")
    return arr


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent if str(target.parent) else ".", prefix=".casimirlab-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _render(result, fmt: str) -> str:
    if isinstance(result, Table):
        if fmt == "csv":
            return result.to_csv()
        result = result.to_json()
    elif fmt == "csv":
        raise UsageError("this subcommand only produces JSON output; use --format json")
    return json.dumps(result, indent=2) + "\n"


# ---------------------------------------------------------------- subcommands

def _prepare_force(args):
    obj = _load_json(args.input)
    where = "problem"
    schema.check_keys(
        obj, {"plate_a", "plate_b", "d", "T"}, {"gap", "te_zero_policy", "convergence", "R"}, where=where
    )
    if args.tol is not None:
        conv = dict(obj.get("convergence", {}))
        conv["sum_tolerance"] = args.tol
        obj = {**obj, "convergence": conv}
    grid = _grid(obj, "d", where)
    problems = [schema.lifshitz_from_json(obj, float(x), where, Path(args.input).parent) for x in grid]
    R = schema._num(obj, "R", where) if "R" in obj else None
    if R is not None and R <= 0:
        raise ConfigError("problem.R must be positive")

    def run():
        cols = ["d_m", "energy_J_m2", "pressure_Pa"] + (["force_N"] if R else [])
        rows = []
        for p in problems:
            e = free_energy_per_area(p)
            row = [p.d, e, casimir_pressure(p)]
            if R:
                row.append(-2.0 * np.pi * R * e)
            rows.append(row)
        return Table(cols, rows, {"T": problems[0].T, "R": R})

    return run


def _prepare_electrostatic(args):
    obj = _load_json(args.input)
    where = "geometry"
    schema.check_keys(obj, {"R", "d"}, {"V", "A", "tol"}, where=where)
    R = schema._num(obj, "R", where)
    if R <= 0:
        raise ConfigError("geometry.R must be positive")
    grid = _grid(obj, "d", where)
    V = schema._num(obj, "V", where) if "V" in obj else 1.0
    A = schema._num(obj, "A", where) if "A" in obj else None
    tol = args.tol if args.tol is not None else (schema._num(obj, "tol", where) if "tol" in obj else 1e-12)
    if not 0 < tol < 1:
        raise ConfigError("tol must lie in (0, 1)")
    if A is not None and A <= 0:
        raise ConfigError("geometry.A must be positive")

    def run():
        cols = ["d_m", "C_sphere_F", "dC_dd_F_m", "F_exact_N", "F_pfa_N", "alpha_pfa_N_V2"]
        if A is not None:
            cols += ["C_plates_F", "F_plates_N"]
        rows = []
        for d in grid:
            c = sphere_plane_capacitance(R, d, tol)
            dc = sphere_plane_capacitance_derivative(R, d, tol)
            alpha = calibration_alpha(R, d)
            row = [d, c, dc, -0.5 * dc * V * V, alpha * V * V, alpha]
            if A is not None:
                row += [parallel_plate_capacitance(A, d), 0.5 * parallel_plate_capacitance(A, d) * V * V / d]
            rows.append(row)
        return Table(cols, rows, {"R": R, "V": V, "A": A, "tol": tol})

    return run


def _prepare_screening(args):
    obj = _load_json(args.input)
    where = "plate"
    schema.check_keys(obj, {"eps_static", "T"}, {"c_t", "n_i", "V", "d", "d_range"}, where=where)
    if ("c_t" in obj) == ("n_i" in obj):
        raise ConfigError("plate: give exactly one of c_t (total carriers) or n_i (intrinsic density)")
    eps = schema._num(obj, "eps_static", where)
    T = schema._num(obj, "T", where)
    try:
        plate = (
            SemiconductorPlate(eps, schema._num(obj, "c_t", where), T)
            if "c_t" in obj
            else SemiconductorPlate.intrinsic(eps, schema._num(obj, "n_i", where), T)
        )
    except ValueError as exc:
        raise ConfigError(f"plate: {exc}") from exc
    V = schema._num(obj, "V", where) if "V" in obj else 1.0
    grid = _grid(obj, "d", where) if "d" in obj else np.array([])
    d_range = None
    if "d_range" in obj:
        d_range = obj["d_range"]
        if not (isinstance(d_range, list) and len(d_range) == 2 and 0 < d_range[0] < d_range[1]):
            raise ConfigError("plate.d_range must be [d_lo, d_hi] with 0 < d_lo < d_hi")

    def run():
        lam = debye_length(plate)
        rows = [
            [
                d,
                screened_surface_potential(V, d, lam, eps),
                screened_energy_per_area(V, d, lam, eps),
                float(screened_capacitance_per_area(d, lam, eps)),
            ]
            for d in grid
        ]
        meta: dict[str, Any] = {"debye_length_m": lam, "V": V}
        if d_range is not None:
            off = apparent_distance_offset(lam, eps, (float(d_range[0]), float(d_range[1])))
            meta["offset"] = {
                "offset_m": off.offset,
                "expansion_3lambda_over_eps_m": off.expansion,
                "lambda_over_eps_m": off.quoted_scale,
                "min_y": off.min_y,
                "in_regime": off.in_regime,
            }
        return Table(["d_m", "surface_potential_V", "energy_J_m2", "C_eff_F_m2"], rows, meta)

    return run


def _prepare_patch(args):
    obj = _load_json(args.input)
    where = "patch"
    schema.check_keys(obj, {"spectrum", "R", "d"}, {"tol"}, where=where)
    spec = schema.spectrum_from_json(obj["spectrum"], "patch.spectrum", Path(args.input).parent)
    R = schema._num(obj, "R", where)
    if R <= 0:
        raise ConfigError("patch.R must be positive")
    grid = _grid(obj, "d", where)
    tol = args.tol if args.tol is not None else (schema._num(obj, "tol", where) if "tol" in obj else 1e-8)

    def run():
        return Table(["d_m", "F_N"], [[d, patch_force_sphere_plane(spec, R, d, tol)] for d in grid], {"R": R})

    return run


def _prepare_simulate(args):
    obj = _load_json(args.input)
    if args.seed is None and not (isinstance(obj, dict) and "seed" in obj):
        raise UsageError("simulate needs a seed: pass --seed or put 'seed' in the config")
    config = config_from_json(obj, seed=args.seed, base_dir=Path(args.input).parent)

    def run():
        ds = simulate_dataset(config)
        if args.format == "json":
            return {
                "provenance": ds.provenance,
                "columns": ["z_nominal_m", "V_applied_V", "F_N", "sigma_N"],
                "rows": ds.records.tolist(),
            }
        buf = io.StringIO()
        write_dataset_csv(ds, buf)
        return _Raw(buf.getvalue())

    return run


class _Raw(str):
    pass


_MODEL_REQUIRED = {"R", "T", "plate_model", "sphere_model"}
_MODEL_OPTIONAL = {"casimir", "te_zero_policy"}


def _prepare_analyze(args):
    if args.format == "csv":
        raise UsageError("analyze produces JSON; use --format json")
    dataset = read_dataset_csv(args.dataset)
    obj = _load_json(args.model)
    schema.check_keys(obj, _MODEL_REQUIRED, _MODEL_OPTIONAL, where="model")
    R = schema._num(obj, "R", "model")
    T = schema._num(obj, "T", "model")
    if R <= 0 or T < 0:
        raise ConfigError("model: need R > 0 and T >= 0")
    base = Path(args.model).parent
    models = [
        None if obj[k] is None else schema.permittivity_from_json(obj[k], f"model.{k}", base)
        for k in ("plate_model", "sphere_model")
    ]
    casimir = obj.get("casimir", "model")
    if casimir not in ("model", "none"):
        raise ConfigError("model.casimir must be 'model' or 'none'")
    if casimir == "model" and None in models:
        raise ConfigError("model: casimir='model' needs both plate_model and sphere_model")
    try:
        policy = TEZeroPolicy(obj.get("te_zero_policy", TEZeroPolicy.FROM_MODEL.value))
    except ValueError as exc:
        raise ConfigError(f"model.te_zero_policy: {exc}") from exc
    options = AnalysisOptions(casimir=casimir, te_zero_policy=policy)

    def run():
        res = run_analysis(dataset, R, T, models[0], models[1], options)
        out = result_to_json(res)
        out["provenance"] = dataset.provenance | {"source": Path(args.dataset).name}
        return out

    return run


def _read_force_csv(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in (next(reader, None) or [])]
        if header != ["d_m", "F_N", "sigma_N"]:
            raise DataFormatError(f"{path}: expected header 'd_m,F_N,sigma_N', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            try:
                vals = [float(x) for x in row]
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: bad number in {row!r}") from exc
            if len(vals) != 3:
                raise DataFormatError(f"{path}:{lineno}: expected 3 columns")
            rows.append(vals)
    return np.array(rows, dtype=float).reshape(-1, 3)


def _prepare_fit_residual(args):
    if args.format == "csv":
        raise UsageError("fit-residual produces JSON; use --format json")
    if not args.radius or args.radius <= 0:
        raise UsageError("fit-residual needs a positive --radius (sphere radius in metres)")
    force = _read_force_csv(args.force)
    vm = read_minimizing_csv(args.vm)
    vm_rows = np.column_stack([vm.d, vm.V_a])

    def run():
        return residual_fit_to_json(fit_residual(force, vm_rows, args.radius))

    return run


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="casimirlab", description="Casimir-force and electrostatic-calibration toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)
    sub.required = True

    def common(sp, default_fmt="csv", tol=True):
        sp.add_argument("--out", "-o", help="output file (default: standard output)")
        sp.add_argument("--format", choices=["csv", "json"], default=default_fmt)
        if tol:
            sp.add_argument("--tol", type=float, help="override the numerical tolerance")

    sp = sub.add_parser("force", help="Lifshitz energy/pressure (and PFA sphere force) over a distance grid")
    sp.add_argument("input", help="problem JSON (plate_a, plate_b, d, T, ...)")
    common(sp)
    sp.set_defaults(prepare=_prepare_force)

    sp = sub.add_parser("electrostatic", help="sphere-plane capacitance, force and alpha tables")
    sp.add_argument("input", help="geometry JSON (R, d, optional V, A, tol)")
    common(sp)
    sp.set_defaults(prepare=_prepare_electrostatic)

    sp = sub.add_parser("screening", help="Debye length, surface potential, energy and distance offset")
    sp.add_argument("input", help="plate JSON (eps_static, T, c_t or n_i, ...)")
    common(sp, default_fmt="json", tol=False)
    sp.set_defaults(prepare=_prepare_screening)

    sp = sub.add_parser("patch", help="patch-potential force curve F(d)")
    sp.add_argument("input", help="JSON with spectrum, R and d")
    common(sp)
    sp.set_defaults(prepare=_prepare_patch)

    sp = sub.add_parser("simulate", help="synthetic sphere-plane dataset from an experiment config")
    sp.add_argument("input", help="experiment config JSON")
    sp.add_argument("--seed", type=int, help="64-bit seed (overrides the config)")
    common(sp, tol=False)
    sp.set_defaults(prepare=_prepare_simulate)

    sp = sub.add_parser("analyze", help="five-stage calibration analysis of a dataset")
    sp.add_argument("dataset", help="dataset CSV (z_nominal_m,V_applied_V,F_N,sigma_N)")
    sp.add_argument("model", help="model JSON (R, T, plate_model, sphere_model, ...)")
    common(sp, default_fmt="json", tol=False)
    sp.set_defaults(prepare=_prepare_analyze)

    sp = sub.add_parser("fit-residual", help="fit (V1, V_rms) to a residual force curve")
    sp.add_argument("force", help="force CSV (d_m,F_N,sigma_N)")
    sp.add_argument("vm", help="minimizing-potential CSV (d_m,V_a_V[,sigma_V])")
    sp.add_argument("--radius", type=float, required=True, help="sphere radius R in metres")
    common(sp, default_fmt="json", tol=False)
    sp.set_defaults(prepare=_prepare_fit_residual)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
            raise UsageError("--seed must be a 64-bit unsigned integer")
        job = args.prepare(args)
        result = job()
        text = result if isinstance(result, _Raw) else _render(result, args.format)
        _write(text, args.out)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"casimirlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AnalysisError as exc:
        print(f"casimirlab: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE if isinstance(exc.__cause__, ConvergenceError) else EXIT_USAGE
    except ConvergenceError as exc:
        print(f"casimirlab: not converged: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"casimirlab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CasimirLabError, ValueError, TypeError, KeyError) as exc:
        print(f"casimirlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
