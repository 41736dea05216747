"""The three DMD fitting pipelines and model evaluation.

``dmd_classic`` fits a best-fit linear map between the before/after column
pairs of a data matrix. ``dmd_tdc`` first stacks q consecutive snapshots per
column (delay embedding), which lets purely oscillatory data carry complex
eigenvalue pairs a raw state cannot. ``dmd_projected`` additionally sketches
the embedded pair through a measurement-reduction operator and recovers
full-space modes from the unprojected shifted matrix, so the model still
predicts in the original state space.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateDataError,
    InsufficientMeasurementsError,
    InvalidParameterError,
    ShapeMismatchError,
    ZeroInitialConditionError,
)
from .numerics import eig_dense, pseudoinverse_apply, thin_svd
from .projections import ProjectionOperator, apply as apply_operator
from .snapshots import SnapshotMatrix, hankel_augment

# Discrete eigenvalues below this modulus cannot be mapped to a finite
# continuous exponent; they are dropped with a warning.
_ZERO_EIGENVALUE_CUTOFF = 1e-12

# Half-width of the |mu| band classified as sitting on the unit circle.
_UNIT_CIRCLE_TOL = 1e-6


@dataclass(frozen=True)
class RankPolicy:
    """How many singular values to keep when truncating the pencil.

    Either a fixed rank or every singular value above a relative threshold.
    """

    mode: str
    r: int | None = None
    tol: float | None = None

    def __post_init__(self):
        if self.mode == "fixed":
            if self.r is None or self.r < 1:
                raise InvalidParameterError("fixed rank must be >= 1")
        elif self.mode == "tol":
            if self.tol is None or not 0.0 < self.tol < 1.0:
                raise InvalidParameterError("relative threshold must lie in (0, 1)")
        else:
            raise InvalidParameterError(f"unknown rank policy mode {self.mode!r}")

    @classmethod
    def fixed(cls, r: int) -> "RankPolicy":
        return cls(mode="fixed", r=r)

    @classmethod
    def relative_threshold(cls, tol: float) -> "RankPolicy":
        return cls(mode="tol", tol=tol)

    def resolve(self, singular_values: np.ndarray) -> int:
        """Nominal truncation rank for a descending singular-value profile."""
        if self.mode == "fixed":
            return self.r
        if singular_values.size == 0 or singular_values[0] <= 0.0:
            return 0
        return int(np.sum(singular_values > self.tol * singular_values[0]))

    def describe(self) -> str:
        return f"fixed:{self.r}" if self.mode == "fixed" else f"tol:{self.tol:g}"

    @classmethod
    def parse(cls, text: str) -> "RankPolicy":
        """Parse ``fixed:R`` or ``tol:T``."""
        kind, _, value = text.partition(":")
        try:
            if kind == "fixed":
                return cls.fixed(int(value))
            if kind == "tol":
                return cls.relative_threshold(float(value))
        except ValueError:
            pass
        raise InvalidParameterError(f"cannot parse rank policy {text!r}")


DEFAULT_RANK_POLICY = RankPolicy.relative_threshold(1e-10)


@dataclass(frozen=True)
class DmdModel:
    """A fitted linear model: spatial modes with per-step multipliers.

    ``eigenvalues_discrete`` are the per-step multipliers mu,
    ``exponents`` their continuous counterparts ln(mu)/dt, and
    ``amplitudes`` the coordinates of the first snapshot in the mode basis.
    ``modes`` may be None for models reloaded from a spectrum-only file.
    """

    modes: np.ndarray | None
    eigenvalues_discrete: np.ndarray
    exponents: np.ndarray
    amplitudes: np.ndarray
    rank: int
    q: int
    base_m: int
    dt: float
    t0: float = 0.0
    variant: str = "classic"
    measurements: int | None = None

    def __post_init__(self):
        r = self.eigenvalues_discrete.shape[0]
        if self.exponents.shape != (r,) or self.amplitudes.shape != (r,):
            raise InvalidParameterError("eigenvalues, exponents and amplitudes must align")
        if self.modes is not None and self.modes.shape[1] != r:
            raise InvalidParameterError("modes must have one column per eigenvalue")
        if self.rank != r:
            raise InvalidParameterError("rank must equal the number of retained eigenvalues")


def _truncated_pencil(x1, x2, policy, aq_limit=None):
    """SVD-truncate x1, form the low-rank map U* x2 V / sigma, eigendecompose.

    ``aq_limit`` caps the nominal truncation rank; exceeding it means the
    sketch cannot support the requested rank.
    """
    svd = thin_svd(x1)
    sigma = svd.singular_values
    r_nominal = policy.resolve(sigma)
    if r_nominal < 1:
        raise DegenerateDataError("no singular values above the truncation threshold")
    if aq_limit is not None and r_nominal > aq_limit:
        raise InsufficientMeasurementsError(
            f"truncation rank {r_nominal} exceeds measurements*q = {aq_limit}; "
            f"the sketch needs a*q >= r"
        )
    r = min(r_nominal, int(np.count_nonzero(sigma > 0.0)))
    if r < 1:
        raise DegenerateDataError("data matrix is numerically zero")
    u = svd.u[:, :r]
    sigma_r = sigma[:r]
    v = svd.v[:, :r]
    low_rank_map = (u.T @ x2 @ v) / sigma_r
    eig = eig_dense(low_rank_map)
    return u, sigma_r, v, eig


def _drop_zero_eigenvalues(mu, modes):
    keep = np.abs(mu) > _ZERO_EIGENVALUE_CUTOFF
    if not np.all(keep):
        warnings.warn(
            f"dropping {int(np.sum(~keep))} eigenvalue(s) with modulus below "
            f"{_ZERO_EIGENVALUE_CUTOFF:g}; they have no finite continuous exponent",
            RuntimeWarning,
        )
        mu = mu[keep]
        modes = modes[:, keep]
    if mu.size == 0:
        raise DegenerateDataError("every eigenvalue collapsed to zero")
    return mu, modes


def _finish_model(modes, mu, first_column, dt, *, q, base_m, t0, variant,
                  measurements=None) -> DmdModel:
    mu, modes = _drop_zero_eigenvalues(mu, modes)
    exponents = np.log(mu) / dt
    amplitudes = pseudoinverse_apply(modes, first_column)
    return DmdModel(
        modes=modes,
        eigenvalues_discrete=mu,
        exponents=exponents,
        amplitudes=amplitudes,
        rank=mu.size,
        q=q,
        base_m=base_m,
        dt=dt,
        t0=t0,
        variant=variant,
        measurements=measurements,
    )


def dmd_classic(x1, x2, dt: float, policy: RankPolicy = DEFAULT_RANK_POLICY,
                *, t0: float = 0.0) -> DmdModel:
    """Fit the best-fit linear map taking the columns of x1 to those of x2.

    Modes are the truncated left singular vectors rotated by the low-rank
    eigenvectors; amplitudes solve the least-squares projection of the first
    column of x1 onto the modes.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape != x2.shape:
        raise ShapeMismatchError(f"x1 {x1.shape} and x2 {x2.shape} must match")
    if x1.ndim != 2 or x1.shape[1] < 1:
        raise ShapeMismatchError("x1 must be a matrix with at least one column")
    first = x1[:, 0]
    if not np.any(first != 0.0):
        raise ZeroInitialConditionError(
            "first snapshot is zero, so every mode amplitude would vanish; "
            "start the fit at a nonzero sample"
        )
    u, _, _, eig = _truncated_pencil(x1, x2, policy)
    modes = u.astype(complex) @ eig.eigenvectors
    return _finish_model(modes, eig.eigenvalues, first, dt,
                         q=1, base_m=x1.shape[0], t0=t0, variant="classic")


def dmd_tdc(x: SnapshotMatrix, q: int, policy: RankPolicy = DEFAULT_RANK_POLICY) -> DmdModel:
    """Delay-embed the snapshots to depth q, then fit as in dmd_classic.

    With q = 1 this reduces exactly to the classic fit on the split pair.
    The model remembers q and the raw state size so predictions can be cut
    back down to the original state.
    """
    pair = hankel_augment(x, q)
    first = pair.x1_aug[:, 0]
    if not np.any(first != 0.0):
        raise ZeroInitialConditionError(
            "first embedded snapshot is zero; start the fit at a nonzero sample"
        )
    u, _, _, eig = _truncated_pencil(pair.x1_aug, pair.x2_aug, policy)
    modes = u.astype(complex) @ eig.eigenvectors
    return _finish_model(modes, eig.eigenvalues, first, x.dt,
                         q=q, base_m=x.m, t0=x.t0, variant="tdc")


def dmd_projected(x: SnapshotMatrix, q: int, op: ProjectionOperator,
                  policy: RankPolicy = DEFAULT_RANK_POLICY,
                  *, project_before_augment: bool = False) -> DmdModel:
    """Sketch the delay-embedded pair through ``op``, fit in sketch space,
    and recover full-space modes from the unprojected shifted matrix.

    By default the operator acts on the embedded state (its column count
    must be q*M). With ``project_before_augment`` the raw snapshots are
    sketched first and the embedding applied to the sketch, which is a
    different factorization; the operator then acts on M-dimensional states.

    The nominal truncation rank must not exceed a*q, where a is the
    operator's measurement count; the sketch cannot support more.
    """
    pair = hankel_augment(x, q)
    first = pair.x1_aug[:, 0]
    if not np.any(first != 0.0):
        raise ZeroInitialConditionError(
            "first embedded snapshot is zero; start the fit at a nonzero sample"
        )
    if project_before_augment:
        if op.d != x.m:
            raise ShapeMismatchError(
                f"operator acts on {op.d}-dim states but snapshots have {x.m} rows"
            )
        sketched = SnapshotMatrix(apply_operator(op, x.data), dt=x.dt, t0=x.t0)
        sketch_pair = hankel_augment(sketched, q)
        z1, z2 = sketch_pair.x1_aug, sketch_pair.x2_aug
    else:
        if op.d != pair.x1_aug.shape[0]:
            raise ShapeMismatchError(
                f"operator acts on {op.d}-dim states but the embedded pair has "
                f"{pair.x1_aug.shape[0]} rows"
            )
        z1 = apply_operator(op, pair.x1_aug)
        z2 = apply_operator(op, pair.x2_aug)
    u_z, sigma_z, v_z, eig = _truncated_pencil(z1, z2, policy, aq_limit=op.a * q)
    # Full-space modes from the unprojected shifted matrix, exact-DMD style.
    modes = pair.x2_aug.astype(complex) @ ((v_z / sigma_z) @ eig.eigenvectors)
    return _finish_model(modes, eig.eigenvalues, first, x.dt,
                         q=q, base_m=x.m, t0=x.t0,
                         variant=f"projected({op.kind})", measurements=op.a)


def predict(model: DmdModel, k: int) -> np.ndarray:
    """State at step k (time t0 + k*dt), cut to the raw state size.

    Extrapolation beyond the training window is permitted; the caller
    decides how far to trust it.
    """
    if k < 0:
        raise InvalidParameterError(f"step index must be nonnegative, got {k}")
    if model.modes is None:
        raise InvalidParameterError("model carries no modes; refit or reload with modes")
    coeff = np.exp(model.exponents * (k * model.dt)) * model.amplitudes
    state = model.modes @ coeff
    return state.real[: model.base_m]


def pod_modes(x: SnapshotMatrix, policy: RankPolicy = DEFAULT_RANK_POLICY) -> np.ndarray:
    """Energy-optimal orthonormal basis: truncated left singular vectors of
    the full snapshot matrix, sign-fixed by the shared convention."""
    if x.n < 2:
        raise DegenerateDataError("need at least 2 snapshots for a basis")
    svd = thin_svd(x.data)
    r = min(policy.resolve(svd.singular_values),
            int(np.count_nonzero(svd.singular_values > 0.0)))
    if r < 1:
        raise DegenerateDataError("no singular values above the truncation threshold")
    return svd.u[:, :r]


@dataclass(frozen=True)
class SpectrumEntry:
    """One eigenvalue with its continuous exponent, amplitude magnitude and
    position relative to the unit circle."""

    mu: complex
    omega: complex
    amp_abs: float
    circle: str


def spectrum(model: DmdModel) -> list[SpectrumEntry]:
    """Per-eigenvalue summary in the model's deterministic eigenvalue order.

    Eigenvalues with modulus within 1e-6 of 1 classify as "on" the unit
    circle; inside means decay, outside warns of long-run growth.
    """
    entries = []
    for mu, omega, b in zip(model.eigenvalues_discrete, model.exponents,
                            model.amplitudes):
        radius = abs(mu)
        if radius < 1.0 - _UNIT_CIRCLE_TOL:
            circle = "inside"
        elif radius > 1.0 + _UNIT_CIRCLE_TOL:
            circle = "outside"
        else:
            circle = "on"
        entries.append(SpectrumEntry(mu=complex(mu), omega=complex(omega),
                                     amp_abs=float(abs(b)), circle=circle))
    return entries


def _complex_list(values) -> list[dict]:
    return [{"re": float(v.real), "im": float(v.imag)} for v in values]


def _complex_array(items) -> np.ndarray:
    return np.array([complex(d["re"], d["im"]) for d in items], dtype=complex)


def model_to_dict(model: DmdModel) -> dict:
    """JSON-friendly view of a model, modes excluded (they go to CSV)."""
    return {
        "variant": model.variant,
        "rank": model.rank,
        "q": model.q,
        "base_m": model.base_m,
        "dt": model.dt,
        "t0": model.t0,
        "measurements": model.measurements,
        "eigenvalues_discrete": _complex_list(model.eigenvalues_discrete),
        "exponents": _complex_list(model.exponents),
        "amplitudes": _complex_list(model.amplitudes),
    }


def save_model(model: DmdModel, path, include_modes: bool = False) -> None:
    """Write the model JSON; with ``include_modes`` also write ``<path
    stem>.modes.csv`` holding 2*D rows per mode column (real block stacked
    on imaginary block)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")
    if include_modes:
        if model.modes is None:
            raise InvalidParameterError("model carries no modes to write")
        stacked = np.vstack([model.modes.real, model.modes.imag])
        np.savetxt(path.with_suffix(".modes.csv"), stacked,
                   fmt="%.17g", delimiter=",")


def load_model(path) -> DmdModel:
    """Reload a model JSON; picks up ``<stem>.modes.csv`` when present."""
    path = Path(path)
    with open(path) as fh:
        d = json.load(fh)
    modes = None
    modes_path = path.with_suffix(".modes.csv")
    if modes_path.exists():
        stacked = np.loadtxt(modes_path, delimiter=",", ndmin=2)
        half = stacked.shape[0] // 2
        modes = stacked[:half] + 1j * stacked[half:]
    return DmdModel(
        modes=modes,
        eigenvalues_discrete=_complex_array(d["eigenvalues_discrete"]),
        exponents=_complex_array(d["exponents"]),
        amplitudes=_complex_array(d["amplitudes"]),
        rank=int(d["rank"]),
        q=int(d["q"]),
        base_m=int(d["base_m"]),
        dt=float(d["dt"]),
        t0=float(d["t0"]),
        variant=d["variant"],
        measurements=d.get("measurements"),
    )
