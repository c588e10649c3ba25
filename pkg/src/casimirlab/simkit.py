"""Synthetic sphere-plane experiments and the end-to-end analysis pipeline.

:func:`simulate_dataset` builds a force table over a grid of nominal
positions ``z`` and applied voltages ``V``. The true separation is
``d = z + d0`` and each record is

    F = pi eps0 R (V - V_m(d))^2 / d + F_res(d) + F_casimir(d) + noise,

with ``V_m(d) = a ln d + b`` and ``F_res`` the residual-force model.
:func:`run_analysis` inverts that chain in five stages: parabola fits at
every position, absolute distance from ``1/alpha``, the log fit of
``V_m(d)``, Casimir subtraction and the residual fit for ``(V1, V_rms)``.

Noise is drawn from a counter-based Philox stream keyed by
``(seed, record index)``, so any subset of records can be regenerated
independently and the result does not depend on generation order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .contact import (
    MinimizingPotentialSamples,
    ResidualFitResult,
    fit_log_potential,
    fit_residual,
    residual_force_model,
)
from .core import EPS0, CasimirLabError, ConfigError, DataFormatError, FitError, InsufficientDataError
from .electrostatics import SpherePlaneProfile
from .lifshitz import LifshitzProblem, TEZeroPolicy, sphere_plane_force
from .patches import PatchSpectrum, patch_force_sphere_plane
from .permittivity import PermittivityModel
from . import schema

__all__ = [
    "ExperimentConfig",
    "SyntheticDataset",
    "ParabolaFit",
    "DistanceCalibration",
    "AnalysisOptions",
    "CalibrationResult",
    "AnalysisError",
    "simulate_dataset",
    "fit_voltage_parabola",
    "calibrate_distance",
    "run_analysis",
    "casimir_force_curve",
    "config_from_json",
    "config_to_json",
    "load_config",
    "write_dataset_csv",
    "read_dataset_csv",
    "result_to_json",
]

DATASET_HEADER = ["z_nominal_m", "V_applied_V", "F_N", "sigma_N"]


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Everything needed to synthesise one dataset.

    ``plate_model`` / ``sphere_model`` set the Casimir term; pass ``None``
    for both to leave it out. ``V_rms`` defaults to zero when a
    ``patch_spec`` is supplied, because the patch term then carries the
    patch force and counting it again in ``F_res`` would double it.
    ``electrostatics`` selects the PFA parabola (``"pfa"``) or the exact
    sphere-plane series (``"exact"``) for bias studies.
    """

    R: float
    T: float
    plate_model: PermittivityModel | None
    sphere_model: PermittivityModel | None
    contact: Mapping[str, float]
    V1: float
    d0: float
    z_grid: Sequence[float]
    v_sweep: Sequence[float]
    sigma_F: float
    seed: int
    V_rms: float | None = None
    patch_spec: PatchSpectrum | None = None
    te_zero_policy: TEZeroPolicy = TEZeroPolicy.FROM_MODEL
    electrostatics: str = "pfa"

    def __post_init__(self):
        z = np.asarray(self.z_grid, dtype=float)
        v = np.asarray(self.v_sweep, dtype=float)
        if z.ndim != 1 or z.size < 1 or v.ndim != 1:
            raise ConfigError("z_grid and v_sweep must be non-empty 1-D sequences")
        object.__setattr__(self, "z_grid", z)
        object.__setattr__(self, "v_sweep", v)
        if not (self.R > 0 and math.isfinite(self.R)):
            raise ConfigError(f"R must be positive, got {self.R!r}")
        if self.T < 0:
            raise ConfigError(f"T must be non-negative, got {self.T!r}")
        if np.any(z + self.d0 <= 0):
            raise ConfigError("z_grid + d0 must be positive everywhere (a separation d <= 0 was requested)")
        if np.unique(v).size < 5 or not (np.any(v > 0) and np.any(v < 0)):
            raise ConfigError("v_sweep needs at least 5 distinct values of both signs")
        if not self.sigma_F >= 0:
            raise ConfigError(f"sigma_F must be >= 0, got {self.sigma_F!r}")
        if set(self.contact) != {"a", "b"}:
            raise ConfigError("contact must have exactly the keys 'a' and 'b'")
        if (self.plate_model is None) != (self.sphere_model is None):
            raise ConfigError("give both plate_model and sphere_model, or neither")
        if self.electrostatics not in ("pfa", "exact"):
            raise ConfigError(f"electrostatics must be 'pfa' or 'exact', got {self.electrostatics!r}")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= int(self.seed) < 2**64):
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.V_rms is None:
            if self.patch_spec is None:
                raise ConfigError("V_rms is required when no patch_spec is given")
            object.__setattr__(self, "V_rms", 0.0)
        elif self.patch_spec is not None and self.V_rms != 0:
            raise ConfigError("V_rms and patch_spec both describe patch forces; set V_rms to 0 or omit it")

    @property
    def distances(self) -> np.ndarray:
        return self.z_grid + self.d0

    def v_m(self, d):
        return self.contact["a"] * np.log(d) + self.contact["b"]


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    """Records ``(z_nominal, V_applied, F, sigma)`` sorted by ``(z, V)``."""

    records: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        rec = np.asarray(self.records, dtype=float)
        if rec.ndim != 2 or rec.shape[1] != 4:
            raise DataFormatError("records must be rows of (z, V, F, sigma)")
        order = np.lexsort((rec[:, 1], rec[:, 0]))
        object.__setattr__(self, "records", rec[order])

    @property
    def positions(self) -> np.ndarray:
        return np.unique(self.records[:, 0])


def _noise(seed: int, n: int) -> np.ndarray:
    out = np.empty(n)
    for i in range(n):
        ss = np.random.SeedSequence(int(seed), spawn_key=(i,))
        out[i] = np.random.Generator(np.random.Philox(ss)).standard_normal()
    return out


def casimir_force_curve(
    d: np.ndarray, plate_model, sphere_model, T: float, policy: TEZeroPolicy, R: float
) -> np.ndarray:
    """PFA Casimir force ``2 pi R |E(d)|`` (attraction positive) at each d."""
    if plate_model is None:
        return np.zeros_like(np.asarray(d, dtype=float))
    return np.array(
        [
            sphere_plane_force(
                LifshitzProblem(sphere_model, plate_model, float(x), T, te_zero_policy=policy), R
            )
            for x in d
        ]
    )


def _config_hash(config: ExperimentConfig) -> str:
    text = json.dumps(config_to_json(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _electrostatic_alpha(config: ExperimentConfig, d: np.ndarray) -> np.ndarray:
    if config.electrostatics == "pfa":
        return math.pi * EPS0 * config.R / d
    prof = SpherePlaneProfile(config.R)
    return np.array([-0.5 * prof.derivative(float(x)) for x in d])


def simulate_dataset(config: ExperimentConfig) -> SyntheticDataset:
    """Generate the noisy force table described by ``config``."""
    d_pos = config.distances
    alpha = _electrostatic_alpha(config, d_pos)
    vm = config.v_m(d_pos)
    background = residual_force_model(d_pos, vm, config.V1, config.V_rms, config.R)
    background = np.atleast_1d(background) + casimir_force_curve(
        d_pos, config.plate_model, config.sphere_model, config.T, config.te_zero_policy, config.R
    )
    if config.patch_spec is not None:
        background = background + np.array(
            [patch_force_sphere_plane(config.patch_spec, config.R, float(x)) for x in d_pos]
        )
    z_idx, v_idx = np.meshgrid(np.arange(d_pos.size), np.arange(config.v_sweep.size), indexing="ij")
    z_idx, v_idx = z_idx.ravel(), v_idx.ravel()
    V = config.v_sweep[v_idx]
    F = alpha[z_idx] * (V - vm[z_idx]) ** 2 + background[z_idx]
    if config.sigma_F > 0:
        F = F + config.sigma_F * _noise(config.seed, F.size)
    records = np.column_stack(
        [config.z_grid[z_idx], V, F, np.full(F.size, float(config.sigma_F))]
    )
    return SyntheticDataset(records, {"config_sha256": _config_hash(config), "seed": int(config.seed)})


@dataclass(frozen=True, eq=False)
class ParabolaFit:
    alpha: float
    V_m: float
    F0: float
    covariance: np.ndarray  # of (alpha, V_m, F0)
    chi2: float
    dof: int

    @property
    def V_m_err(self) -> float:
        return math.sqrt(self.covariance[1, 1])

    def V_m_interval(self, level: float = 0.95) -> tuple[float, float]:
        from scipy.stats import norm

        half = norm.ppf(0.5 + 0.5 * level) * self.V_m_err
        return self.V_m - half, self.V_m + half


def fit_voltage_parabola(V, F, sigma=None) -> ParabolaFit:
    """Least squares of ``F = alpha (V - V_m)^2 + F0`` at one position.

    Solved as the linear problem ``F = A V^2 + B V + C`` and mapped to
    ``(alpha, V_m, F0)`` with the Jacobian of that map. With ``sigma``
    missing (or all zero) the covariance is scaled by the residual
    variance instead.
    """
    V = np.asarray(V, dtype=float)
    F = np.asarray(F, dtype=float)
    if V.shape != F.shape or V.ndim != 1:
        raise DataFormatError("V and F must be 1-D arrays of equal length")
    if np.unique(V).size < 5:
        raise InsufficientDataError("need at least 5 distinct voltages")
    if not (np.any(V > 0) and np.any(V < 0)):
        raise FitError("voltage sweep must span both signs")
    known = sigma is not None and np.all(np.asarray(sigma) > 0)
    w = 1.0 / np.asarray(sigma, dtype=float) if known else np.ones_like(V)
    # centre and scale V for conditioning
    vs = float(np.max(np.abs(V)))
    u = V / vs
    X = np.column_stack([u * u, u, np.ones_like(u)])
    Xw = X * w[:, None]
    coef, _, rank, _ = np.linalg.lstsq(Xw, F * w, rcond=None)
    if rank < 3:
        raise FitError("voltage sweep is rank deficient")
    r = (F - X @ coef) * w
    chi2 = float(r @ r)
    dof = V.size - 3
    cov_c = np.linalg.inv(Xw.T @ Xw)
    if not known:
        cov_c = cov_c * (chi2 / dof if dof > 0 else 0.0)
    A, B, C = coef[0] / vs**2, coef[1] / vs, coef[2]
    S = np.diag([1.0 / vs**2, 1.0 / vs, 1.0])
    cov_abc = S @ cov_c @ S
    if A == 0:
        raise FitError("fitted curvature is zero")
    vm = -B / (2.0 * A)
    f0 = C - B * B / (4.0 * A)
    J = np.array(
        [
            [1.0, 0.0, 0.0],
            [B / (2.0 * A * A), -1.0 / (2.0 * A), 0.0],
            [B * B / (4.0 * A * A), -B / (2.0 * A), 1.0],
        ]
    )
    cov = J @ cov_abc @ J.T
    return ParabolaFit(float(A), float(vm), float(f0), 0.5 * (cov + cov.T), chi2, dof)


@dataclass(frozen=True, eq=False)
class DistanceCalibration:
    d0: float
    d0_err: float
    pi_eps0_R: float  # 1 / slope of alpha^-1 against z
    R: float
    chi2: float
    dof: int


def calibrate_distance(alpha_samples, R: float | None = None) -> DistanceCalibration:
    """Fit ``1/alpha = (z + d0) / (pi eps0 R)`` to ``(z, alpha[, sigma_alpha])`` rows.

    The slope gives ``pi eps0 R`` and the intercept over the slope gives
    ``d0``. If ``R`` is passed the slope is still fitted; the argument is
    only used to flag a slope wildly inconsistent with it.
    """
    arr = np.asarray(alpha_samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] not in (2, 3):
        raise DataFormatError("alpha samples must be rows of (z, alpha[, sigma])")
    if arr.shape[0] < 3:
        raise InsufficientDataError("need at least 3 positions")
    z, alpha = arr[:, 0], arr[:, 1]
    if np.any(alpha <= 0):
        raise DataFormatError("alpha must be positive at every position")
    inv = 1.0 / alpha
    known = arr.shape[1] == 3 and np.all(arr[:, 2] > 0)
    w = alpha * alpha / arr[:, 2] if known else np.ones_like(z)
    X = np.column_stack([z, np.ones_like(z)])
    Xw = X * w[:, None]
    coef, _, rank, _ = np.linalg.lstsq(Xw, inv * w, rcond=None)
    if rank < 2:
        raise FitError("distance calibration is rank deficient (repeated positions?)")
    r = (inv - X @ coef) * w
    chi2 = float(r @ r)
    dof = z.size - 2
    cov = np.linalg.inv(Xw.T @ Xw)
    if not known:
        cov = cov * (chi2 / dof if dof > 0 else 0.0)
    m, c = coef
    if m <= 0:
        raise FitError("1/alpha does not increase with z")
    d0 = c / m
    g = np.array([-c / (m * m), 1.0 / m])
    d0_var = float(g @ cov @ g)
    pe = 1.0 / m
    R_est = pe / (math.pi * EPS0)
    if R is not None and not 0.1 < R_est / R < 10:
        raise FitError(f"fitted radius {R_est:.3g} m is inconsistent with R={R:.3g} m")
    return DistanceCalibration(float(d0), math.sqrt(max(d0_var, 0.0)), float(pe), float(R_est), chi2, dof)


@dataclass(frozen=True)
class AnalysisOptions:
    """``casimir`` selects the subtracted model: ``"model"`` uses the given
    permittivities, ``"none"`` subtracts nothing."""

    casimir: str = "model"
    te_zero_policy: TEZeroPolicy = TEZeroPolicy.FROM_MODEL


@dataclass(frozen=True)
class StageRecord:
    name: str
    chi2: float
    dof: int


@dataclass(frozen=True, eq=False)
class CalibrationResult:
    d0_est: float
    d0_err: float
    alpha_curve: np.ndarray  # rows (z, alpha, sigma_alpha)
    vm_curve: np.ndarray  # rows (d, V_m, sigma_V_m)
    F0_curve: np.ndarray  # rows (d, F0, sigma_F0)
    log_fit: tuple  # (a, b)
    log_fit_covariance: np.ndarray
    pi_eps0_R: float
    casimir_curve: np.ndarray  # rows (d, F_casimir) subtracted in stage 4
    residual_fit: ResidualFitResult
    stages: tuple  # StageRecord, in execution order

    @property
    def goodness(self) -> dict:
        return {s.name: s.chi2 for s in self.stages}


class AnalysisError(CasimirLabError):
    """A pipeline stage failed; ``stage`` names it and ``partial`` holds earlier results."""

    def __init__(self, stage: str, message: str, partial: dict):
        super().__init__(f"stage '{stage}' failed: {message}")
        self.stage = stage
        self.partial = partial


def run_analysis(
    dataset: SyntheticDataset,
    R: float,
    T: float,
    plate_model=None,
    sphere_model=None,
    options: AnalysisOptions | None = None,
) -> CalibrationResult:
    """Run the five-stage calibration pipeline on a force table."""
    opts = options or AnalysisOptions()
    rec = dataset.records
    positions = np.unique(rec[:, 0])
    if positions.size < 3:
        raise InsufficientDataError("need at least 3 positions")
    partial: dict[str, Any] = {}
    stages: list[StageRecord] = []

    def fail(stage, exc):
        raise AnalysisError(stage, str(exc), dict(partial)) from exc

    # (1) parabola at each position
    fits = []
    try:
        for z in positions:
            rows = rec[rec[:, 0] == z]
            rows = rows[np.argsort(rows[:, 1], kind="stable")]
            fits.append(fit_voltage_parabola(rows[:, 1], rows[:, 2], rows[:, 3]))
    except (CasimirLabError, ValueError, np.linalg.LinAlgError) as exc:
        fail("parabola", exc)
    alpha_curve = np.array([[z, f.alpha, math.sqrt(f.covariance[0, 0])] for z, f in zip(positions, fits)])
    partial["parabola"] = fits
    stages.append(StageRecord("parabola", float(sum(f.chi2 for f in fits)), int(sum(f.dof for f in fits))))

    # (2) absolute distance
    try:
        cal = calibrate_distance(alpha_curve, R)
    except (CasimirLabError, ValueError, np.linalg.LinAlgError) as exc:
        fail("distance", exc)
    partial["distance"] = cal
    stages.append(StageRecord("distance", cal.chi2, cal.dof))
    d = positions + cal.d0

    # (3) log fit of V_m(d)
    vm = np.array([f.V_m for f in fits])
    vm_err = np.array([f.V_m_err for f in fits])
    vm_curve = np.column_stack([d, vm, vm_err])
    try:
        samples = MinimizingPotentialSamples(d, vm, vm_err if np.all(vm_err > 0) else None)
        lf = fit_log_potential(samples)
    except (CasimirLabError, ValueError, np.linalg.LinAlgError) as exc:
        fail("log_potential", exc)
    partial["log_potential"] = lf
    stages.append(StageRecord("log_potential", lf.chi2, d.size - 2))

    # (4) Casimir model at the calibrated distances
    try:
        if opts.casimir == "none":
            fc = np.zeros_like(d)
        elif opts.casimir == "model":
            fc = casimir_force_curve(d, plate_model, sphere_model, T, opts.te_zero_policy, R)
        else:
            raise ConfigError(f"unknown casimir option {opts.casimir!r}")
    except (CasimirLabError, ValueError) as exc:
        fail("casimir", exc)
    partial["casimir"] = fc
    f0 = np.array([f.F0 for f in fits])
    f0_err = np.array([math.sqrt(max(f.covariance[2, 2], 0.0)) for f in fits])
    if not np.all(f0_err > 0):
        # noiseless input: fall back to a relative scale so the fit is still defined
        f0_err = np.maximum(f0_err, 1e-12 * np.max(np.abs(f0)) + 1e-300)
    F0_curve = np.column_stack([d, f0, f0_err])
    lookup = dict(zip(d.tolist(), fc.tolist()))

    # (5) residual fit
    try:
        rf = fit_residual(F0_curve, np.column_stack([d, vm]), R, casimir_model=lookup.__getitem__)
    except (CasimirLabError, ValueError, np.linalg.LinAlgError) as exc:
        fail("residual", exc)
    stages.append(StageRecord("casimir", rf.chi2, rf.dof))
    stages.append(StageRecord("residual", rf.chi2, rf.dof))

    return CalibrationResult(
        d0_est=cal.d0,
        d0_err=cal.d0_err,
        alpha_curve=alpha_curve,
        vm_curve=vm_curve,
        F0_curve=F0_curve,
        log_fit=(lf.a, lf.b),
        log_fit_covariance=lf.covariance,
        pi_eps0_R=cal.pi_eps0_R,
        casimir_curve=np.column_stack([d, fc]),
        residual_fit=rf,
        stages=tuple(stages),
    )


# ----------------------------------------------------------------- file I/O

_CONFIG_REQUIRED = {"R", "T", "plate_model", "sphere_model", "contact", "V1", "d0", "z_grid", "v_sweep", "sigma_F"}
_CONFIG_OPTIONAL = {"seed", "V_rms", "patch_spec", "te_zero_policy", "electrostatics"}


def _number_list(obj, key):
    v = obj[key]
    if not isinstance(v, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        raise ConfigError(f"{key}: expected a list of numbers")
    return [float(x) for x in v]


def config_from_json(obj: Mapping[str, Any], seed: int | None = None, base_dir: Path | None = None) -> ExperimentConfig:
    """Build a config from its JSON form. ``seed`` overrides the document's seed."""
    schema.check_keys(obj, _CONFIG_REQUIRED, _CONFIG_OPTIONAL, where="config")
    if seed is None:
        seed = obj.get("seed")
    if seed is None:
        raise ConfigError("config: a seed is required (in the document or via --seed)")
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"config.seed: expected an integer, got {seed!r}")
    models = {}
    for key in ("plate_model", "sphere_model"):
        models[key] = None if obj[key] is None else schema.permittivity_from_json(obj[key], f"config.{key}", base_dir)
    schema.check_keys(obj["contact"], {"a", "b"}, where="config.contact")
    contact = {k: schema._num(obj["contact"], k, "config.contact") for k in ("a", "b")}
    kw: dict[str, Any] = {
        "R": schema._num(obj, "R", "config"),
        "T": schema._num(obj, "T", "config"),
        "contact": contact,
        "V1": schema._num(obj, "V1", "config"),
        "d0": schema._num(obj, "d0", "config"),
        "z_grid": _number_list(obj, "z_grid"),
        "v_sweep": _number_list(obj, "v_sweep"),
        "sigma_F": schema._num(obj, "sigma_F", "config"),
        "seed": seed,
        **models,
    }
    if obj.get("V_rms") is not None:
        kw["V_rms"] = schema._num(obj, "V_rms", "config")
    if obj.get("patch_spec") is not None:
        kw["patch_spec"] = schema.spectrum_from_json(obj["patch_spec"], "config.patch_spec", base_dir)
    if "te_zero_policy" in obj:
        try:
            kw["te_zero_policy"] = TEZeroPolicy(obj["te_zero_policy"])
        except ValueError as exc:
            raise ConfigError(f"config.te_zero_policy: {exc}") from exc
    if "electrostatics" in obj:
        kw["electrostatics"] = obj["electrostatics"]
    return ExperimentConfig(**kw)


def config_to_json(config: ExperimentConfig) -> dict:
    out = {
        "R": config.R,
        "T": config.T,
        "plate_model": None if config.plate_model is None else schema.permittivity_to_json(config.plate_model),
        "sphere_model": None if config.sphere_model is None else schema.permittivity_to_json(config.sphere_model),
        "patch_spec": None if config.patch_spec is None else schema.spectrum_to_json(config.patch_spec),
        "contact": {"a": config.contact["a"], "b": config.contact["b"]},
        "V1": config.V1,
        "V_rms": config.V_rms,
        "d0": config.d0,
        "z_grid": config.z_grid.tolist(),
        "v_sweep": config.v_sweep.tolist(),
        "sigma_F": config.sigma_F,
        "seed": int(config.seed),
        "te_zero_policy": config.te_zero_policy.value,
        "electrostatics": config.electrostatics,
    }
    return out


def load_config(path: str | Path, seed: int | None = None) -> ExperimentConfig:
    path = Path(path)
    with open(path) as fh:
        obj = json.load(fh)
    return config_from_json(obj, seed=seed, base_dir=path.parent)


def write_dataset_csv(dataset: SyntheticDataset, path_or_file) -> None:
    def _write(fh):
        fh.write(",".join(DATASET_HEADER) + "\n")
        for row in dataset.records:
            fh.write(",".join("%.17g" % x for x in row) + "\n")

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)


def read_dataset_csv(path: str | Path) -> SyntheticDataset:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in (next(reader, None) or [])]
        if header != DATASET_HEADER:
            raise DataFormatError(f"{path}: expected header {','.join(DATASET_HEADER)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 4:
                raise DataFormatError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            try:
                rows.append([float(x) for x in row])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: bad number in {row!r}") from exc
    if not rows:
        raise InsufficientDataError(f"{path}: no records")
    return SyntheticDataset(np.array(rows), {"source": str(path)})


def _arr(a):
    return np.asarray(a, dtype=float).tolist()


def result_to_json(res: CalibrationResult) -> dict:
    rf = res.residual_fit
    return {
        "d0_est": res.d0_est,
        "d0_err": res.d0_err,
        "pi_eps0_R": res.pi_eps0_R,
        "alpha_curve": _arr(res.alpha_curve),
        "vm_curve": _arr(res.vm_curve),
        "F0_curve": _arr(res.F0_curve),
        "log_fit": {
            "a": res.log_fit[0],
            "b": res.log_fit[1],
            "a_err": math.sqrt(max(res.log_fit_covariance[0, 0], 0.0)),
            "b_err": math.sqrt(max(res.log_fit_covariance[1, 1], 0.0)),
            "covariance": _arr(res.log_fit_covariance),
        },
        "casimir_curve": _arr(res.casimir_curve),
        "residual_fit": residual_fit_to_json(rf),
        "goodness": [{"stage": s.name, "chi2": s.chi2, "dof": s.dof} for s in res.stages],
    }


def residual_fit_to_json(rf: ResidualFitResult) -> dict:
    return {
        "V1": rf.V1,
        "V_rms": rf.V_rms,
        "V1_err": rf.V1_err,
        "V_rms_err": rf.V_rms_err,
        "covariance": _arr(rf.covariance),
        "residual_norm": rf.residual_norm,
        "chi2": rf.chi2,
        "dof": rf.dof,
        "vrms_clamped": rf.vrms_clamped,
    }
