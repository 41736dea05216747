"""Error metrics, mode-field extraction and multi-variant comparison runs."""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import projections
from .dmd import (
    DEFAULT_RANK_POLICY,
    DmdModel,
    RankPolicy,
    SpectrumEntry,
    dmd_projected,
    dmd_tdc,
    predict,
    spectrum,
)
from .errors import DelayDmdError, InvalidParameterError, ShapeMismatchError
from .problems import DoubleGyreParams, SignalParams, generate_double_gyre, generate_signal
from .snapshots import GridMeta, SnapshotMatrix, train_test_split

# Norms below this floor count as zero when normalizing per-snapshot errors,
# so an identically-zero snapshot cannot divide by zero.
ERROR_NORM_FLOOR = 1e-12

VARIANT_NAMES = ("classic", "sampling", "gaussian", "achlioptas", "krylov")


@dataclass(frozen=True)
class ErrorSeries:
    """Per-snapshot relative prediction error over a time window."""

    times: np.ndarray
    rel_error: np.ndarray
    n_train: int

    def mean_test_error(self) -> float:
        if self.n_train >= self.rel_error.size:
            raise InvalidParameterError("no test window beyond n_train")
        return float(np.mean(self.rel_error[self.n_train:]))

    def max_train_error(self) -> float:
        return float(np.max(self.rel_error[: self.n_train]))


def relative_error_series(model: DmdModel, x_true: SnapshotMatrix,
                          n_train: int = 0) -> ErrorSeries:
    """Relative 2-norm error of the model against every column of x_true.

    Each entry is ||truth - prediction|| / max(||truth||, floor). The truth
    window may start later than the model's origin as long as the offset is
    a whole number of steps.
    """
    if model.base_m != x_true.m:
        raise ShapeMismatchError(
            f"model predicts {model.base_m}-dim states, truth has {x_true.m} rows"
        )
    if abs(model.dt - x_true.dt) > 1e-12 * max(model.dt, x_true.dt):
        raise ShapeMismatchError(f"time steps differ: {model.dt} vs {x_true.dt}")
    offset = int(round((x_true.t0 - model.t0) / model.dt))
    errors = np.empty(x_true.n)
    for k in range(x_true.n):
        truth = x_true.data[:, k]
        pred = predict(model, k + offset)
        errors[k] = (np.linalg.norm(truth - pred)
                     / max(np.linalg.norm(truth), ERROR_NORM_FLOOR))
    return ErrorSeries(times=x_true.times(), rel_error=errors, n_train=n_train)


def mode_field(model: DmdModel, k: int, grid: GridMeta, part: str) -> np.ndarray:
    """Reshape mode column k to the grid as a (ny, nx) array of the chosen part."""
    if model.modes is None:
        raise InvalidParameterError("model carries no modes")
    if not 0 <= k < model.rank:
        raise InvalidParameterError(f"mode index {k} outside 0..{model.rank - 1}")
    if grid.size != model.base_m:
        raise ShapeMismatchError(
            f"grid has nx*ny = {grid.size} but modes have {model.base_m} raw rows"
        )
    column = model.modes[: model.base_m, k]
    if part == "real":
        flat = column.real
    elif part == "imag":
        flat = column.imag
    elif part == "abs":
        flat = np.abs(column)
    else:
        raise InvalidParameterError(f"part must be real, imag or abs, got {part!r}")
    return flat.reshape(grid.ny, grid.nx)


@dataclass(frozen=True)
class VariantSpec:
    """One fit to run: a variant name, its measurement budget and sparsity."""

    name: str
    measurements: int | None = None
    sparsity_s: int = 3

    def __post_init__(self):
        if self.name not in VARIANT_NAMES:
            raise InvalidParameterError(
                f"unknown variant {self.name!r}; choose from {VARIANT_NAMES}"
            )
        if self.name != "classic":
            if self.measurements is None or self.measurements < 1:
                raise InvalidParameterError(f"variant {self.name} needs measurements >= 1")
        if self.sparsity_s not in (1, 3):
            raise InvalidParameterError("sparsity_s must be 1 or 3")


def default_variant_specs(problem_name: str) -> list[VariantSpec]:
    """The stock five-variant configurations for the built-in benchmarks."""
    if problem_name == "double-gyre":
        counts = {"sampling": 100, "gaussian": 200, "achlioptas": 100, "krylov": 100}
    elif problem_name == "signal-2d":
        counts = {"sampling": 100, "gaussian": 50, "achlioptas": 50, "krylov": 50}
    else:
        raise InvalidParameterError(f"no default variants for problem {problem_name!r}")
    specs = [VariantSpec("classic")]
    specs += [VariantSpec(name, measurements=a) for name, a in counts.items()]
    return specs


@dataclass
class VariantResult:
    """Outcome of one variant fit inside a comparison run."""

    variant: str
    measurements: int | None
    spectrum: list[SpectrumEntry] = field(default_factory=list)
    errors: ErrorSeries | None = None
    gram_deviation: float | None = None
    wall_time: float = 0.0
    error_message: str | None = None
    model: DmdModel | None = None

    @property
    def failed(self) -> bool:
        return self.error_message is not None


@dataclass
class ExperimentReport:
    """Everything one comparison run produced, ready to serialize."""

    problem: str
    variants: list[VariantResult]
    config: dict
    seeds: dict

    def variant(self, name: str) -> VariantResult:
        for v in self.variants:
            if v.variant == name:
                return v
        raise KeyError(name)

    def to_dict(self) -> dict:
        out_variants = []
        for v in self.variants:
            entry = {
                "variant": v.variant,
                "measurements": v.measurements,
                "gram_deviation": v.gram_deviation,
                "wall_time": v.wall_time,
                "error_message": v.error_message,
                "spectrum": [
                    {
                        "re_mu": e.mu.real, "im_mu": e.mu.imag,
                        "re_omega": e.omega.real, "im_omega": e.omega.imag,
                        "amp": e.amp_abs, "circle": e.circle,
                    }
                    for e in v.spectrum
                ],
                "errors": None if v.errors is None else {
                    "times": v.errors.times.tolist(),
                    "rel_error": v.errors.rel_error.tolist(),
                    "n_train": v.errors.n_train,
                },
            }
            out_variants.append(entry)
        return {
            "problem": self.problem,
            "config": self.config,
            "seeds": self.seeds,
            "variants": out_variants,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        variants = []
        for v in d["variants"]:
            entries = [
                SpectrumEntry(
                    mu=complex(e["re_mu"], e["im_mu"]),
                    omega=complex(e["re_omega"], e["im_omega"]),
                    amp_abs=e["amp"], circle=e["circle"],
                )
                for e in v["spectrum"]
            ]
            errors = None
            if v["errors"] is not None:
                errors = ErrorSeries(
                    times=np.asarray(v["errors"]["times"]),
                    rel_error=np.asarray(v["errors"]["rel_error"]),
                    n_train=int(v["errors"]["n_train"]),
                )
            variants.append(VariantResult(
                variant=v["variant"],
                measurements=v["measurements"],
                spectrum=entries,
                errors=errors,
                gram_deviation=v["gram_deviation"],
                wall_time=v["wall_time"],
                error_message=v["error_message"],
            ))
        return cls(problem=d["problem"], variants=variants,
                   config=d["config"], seeds=d["seeds"])


def derive_seed(master_seed: int, component: str) -> int:
    """Stable 64-bit sub-seed from (master seed, component name).

    Hash-based so each component's stream depends only on its own name;
    adding or dropping a variant never shifts the randomness of the others.
    """
    digest = hashlib.blake2b(f"{master_seed}:{component}".encode(),
                             digest_size=8).digest()
    return int.from_bytes(digest, "big")


def _generate_problem(problem, master_seed: int):
    if isinstance(problem, DoubleGyreParams):
        return "double-gyre", generate_double_gyre(problem)
    if isinstance(problem, SignalParams):
        return "signal-2d", generate_signal(problem, rng_seed=derive_seed(master_seed, "data"))
    if isinstance(problem, SnapshotMatrix):
        return "file", problem
    raise InvalidParameterError(f"unsupported problem object {type(problem).__name__}")


def _build_operator(spec: VariantSpec, state_dim: int, seed: int):
    if spec.name == "sampling":
        return projections.sampling_operator(state_dim, spec.measurements, seed)
    if spec.name == "gaussian":
        return projections.gaussian_operator(state_dim, spec.measurements, seed)
    if spec.name == "achlioptas":
        return projections.achlioptas_operator(state_dim, spec.measurements,
                                               spec.sparsity_s, seed)
    if spec.name == "krylov":
        # The operator row count is the start vector plus one row per step.
        if spec.measurements < 2:
            raise InvalidParameterError("krylov variant needs measurements >= 2")
        return projections.krylov_operator(state_dim, spec.measurements - 1, seed)
    raise InvalidParameterError(f"no operator for variant {spec.name!r}")


def run_comparison(problem, variant_specs, master_seed: int = 0, *,
                   q: int = 2, n_train: int,
                   rank_policy: RankPolicy = DEFAULT_RANK_POLICY,
                   project_before_augment: bool = False,
                   strict: bool = False) -> ExperimentReport:
    """Generate the data once, fit every requested variant on the training
    window, and score each model against the full window.

    Per-variant failures are captured in the report unless ``strict``, in
    which case the first failure propagates.
    """
    if not variant_specs:
        raise InvalidParameterError("at least one variant is required")
    problem_name, data = _generate_problem(problem, master_seed)
    train, _ = train_test_split(data, n_train)
    state_dim = data.m if project_before_augment else q * data.m

    results = []
    for spec in variant_specs:
        result = VariantResult(variant=spec.name, measurements=spec.measurements)
        started = time.perf_counter()
        try:
            if spec.name == "classic":
                model = dmd_tdc(train, q, rank_policy)
                result.measurements = data.m
            else:
                op = _build_operator(spec, state_dim, derive_seed(master_seed, spec.name))
                result.gram_deviation = projections.gram_deviation(op)
                result.measurements = op.a
                model = dmd_projected(train, q, op, rank_policy,
                                      project_before_augment=project_before_augment)
            result.wall_time = time.perf_counter() - started
            result.model = model
            result.spectrum = spectrum(model)
            result.errors = relative_error_series(model, data, n_train=n_train)
        except DelayDmdError as exc:
            if strict:
                raise
            result.wall_time = time.perf_counter() - started
            result.error_message = f"{type(exc).__name__}: {exc}"
        results.append(result)

    config = {
        "q": q,
        "n_train": n_train,
        "rank": rank_policy.describe(),
        "project_before_augment": project_before_augment,
        "variants": [
            {"name": s.name, "measurements": s.measurements, "sparsity_s": s.sparsity_s}
            for s in variant_specs
        ],
    }
    seeds = {"master": master_seed}
    seeds.update({s.name: derive_seed(master_seed, s.name)
                  for s in variant_specs if s.name != "classic"})
    if problem_name == "signal-2d":
        seeds["data"] = derive_seed(master_seed, "data")
    return ExperimentReport(problem=problem_name, variants=results,
                            config=config, seeds=seeds)


def write_error_csv(series: ErrorSeries, path) -> None:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("time,rel_error\n")
        for t, e in zip(series.times, series.rel_error):
            fh.write(f"{t:.17g},{e:.17g}\n")


def write_spectrum_csv(entries, path) -> None:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("re_mu,im_mu,re_omega,im_omega,amp,circle\n")
        for e in entries:
            fh.write(f"{e.mu.real:.17g},{e.mu.imag:.17g},"
                     f"{e.omega.real:.17g},{e.omega.imag:.17g},"
                     f"{e.amp_abs:.17g},{e.circle}\n")
