"""Measurement-reduction operators and the Arnoldi process behind the
Krylov-based one.

Five operator kinds are supported: ``identity`` (no reduction), ``sampling``
(random row extraction without replacement), ``gaussian`` (dense random
projection, entry variance 1/a), ``achlioptas`` (sparse three-point random
projection) and ``krylov`` (orthonormal rows from an Arnoldi run on a seeded
random matrix). All constructors are pure functions of their arguments.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .errors import (
    InvalidParameterError,
    InvalidStartVectorError,
    ShapeMismatchError,
)

KINDS = ("identity", "sampling", "gaussian", "achlioptas", "krylov")


@dataclass(frozen=True)
class ProjectionOperator:
    """An a-by-D matrix that maps full states to a measurements.

    ``indices`` is populated for the sampling kind (sorted ascending) and
    ``sparsity_s`` for the Achlioptas kind.
    """

    kind: str
    matrix: np.ndarray
    a: int
    seed: int | None
    sparsity_s: int | None = None
    indices: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown operator kind {self.kind!r}")
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != self.a:
            raise InvalidParameterError(
                f"matrix must be {self.a}-by-D, got shape {m.shape}"
            )
        if self.a > m.shape[1]:
            raise InvalidParameterError(
                f"measurement count {self.a} exceeds state dimension {m.shape[1]}"
            )
        if not np.all(np.isfinite(m)):
            raise InvalidParameterError("operator matrix contains non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def d(self) -> int:
        """Dimension of the full state the operator accepts."""
        return self.matrix.shape[1]


@dataclass(frozen=True)
class ArnoldiResult:
    """Orthonormal Krylov basis and its companion Hessenberg matrix.

    Without breakdown after m steps, ``v_basis`` holds m+1 columns and
    ``hessenberg`` is (m+1)-by-m; on breakdown at step i the basis stops at
    i columns with an (i+1)-by-i Hessenberg whose last subdiagonal entry is
    below tolerance.
    """

    v_basis: np.ndarray
    hessenberg: np.ndarray
    steps_completed: int
    breakdown: bool


def identity_operator(d: int) -> ProjectionOperator:
    """The no-op operator; useful as the reduction-free reference."""
    if d < 1:
        raise InvalidParameterError(f"dimension must be positive, got {d}")
    return ProjectionOperator(kind="identity", matrix=np.eye(d), a=d, seed=None)


def sampling_operator(d: int, a: int, seed: int) -> ProjectionOperator:
    """Random sampling without replacement: a distinct canonical rows of I_d.

    Row indices are drawn uniformly without replacement from the seeded
    generator and sorted ascending, so the operator extracts a spatial
    traces in index order.
    """
    _check_count(d, a)
    rng = np.random.default_rng(seed)
    indices = np.sort(rng.choice(d, size=a, replace=False))
    matrix = np.zeros((a, d))
    matrix[np.arange(a), indices] = 1.0
    return ProjectionOperator(kind="sampling", matrix=matrix, a=a, seed=seed,
                              indices=indices)


def gaussian_operator(d: int, a: int, seed: int) -> ProjectionOperator:
    """Dense Gaussian projection with entry variance 1/a.

    The scaling makes the expected column gram E[R* R] the identity, so
    projected vectors keep their length on average.
    """
    _check_count(d, a)
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((a, d)) / np.sqrt(a)
    return ProjectionOperator(kind="gaussian", matrix=matrix, a=a, seed=seed)


def achlioptas_operator(d: int, a: int, s: int, seed: int) -> ProjectionOperator:
    """Sparse three-point random projection.

    Entries are ``sqrt(s)`` times -1, 0, +1 with probabilities 1/(2s),
    1 - 1/s, 1/(2s), then the whole matrix is scaled by 1/sqrt(a) so the
    expected column gram is the identity. With s = 3 about two thirds of
    the entries are exactly zero; :func:`apply` exploits that sparsity.
    """
    if s not in (1, 3):
        raise InvalidParameterError(f"sparsity s must be 1 or 3, got {s}")
    _check_count(d, a)
    rng = np.random.default_rng(seed)
    probs = [1.0 / (2 * s), 1.0 - 1.0 / s, 1.0 / (2 * s)]
    matrix = rng.choice(np.array([-1.0, 0.0, 1.0]), size=(a, d), p=probs)
    matrix *= np.sqrt(s) / np.sqrt(a)
    return ProjectionOperator(kind="achlioptas", matrix=matrix, a=a, seed=seed,
                              sparsity_s=s)


def arnoldi(a_matrix, b, m: int, tol: float | None = None) -> ArnoldiResult:
    """Modified Gram-Schmidt Arnoldi iteration on (a_matrix, b) for m steps.

    Builds an orthonormal basis of the Krylov subspace
    span{b, A b, ..., A^(m-1) b} column by column; entry (j, i) of the
    Hessenberg matrix records the component of A v_i along v_j and entry
    (i+1, i) the norm of what remains. If that norm falls to ``tol`` or
    below, the subspace is invariant and the iteration stops early with
    ``breakdown = True``.

    ``tol`` defaults to 1e-12 times the Frobenius norm of ``a_matrix``.
    """
    a_matrix = np.asarray(a_matrix, dtype=float)
    if a_matrix.ndim != 2 or a_matrix.shape[0] != a_matrix.shape[1]:
        raise InvalidParameterError(f"a_matrix must be square, got shape {a_matrix.shape}")
    n = a_matrix.shape[0]
    b = np.asarray(b, dtype=float)
    if b.shape != (n,):
        raise InvalidParameterError(f"b must have length {n}, got shape {b.shape}")
    if not 1 <= m <= n:
        raise InvalidParameterError(f"steps must satisfy 1 <= m <= n = {n}, got {m}")
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        raise InvalidStartVectorError("start vector is zero")
    if tol is None:
        tol = 1e-12 * np.linalg.norm(a_matrix)

    v = np.empty((n, m + 1))
    h = np.zeros((m + 1, m))
    v[:, 0] = b / b_norm
    for i in range(m):
        w = a_matrix @ v[:, i]
        for j in range(i + 1):
            h[j, i] = v[:, j] @ w
            w -= h[j, i] * v[:, j]
        w_norm = np.linalg.norm(w)
        h[i + 1, i] = w_norm
        if w_norm <= tol:
            steps = i + 1
            return ArnoldiResult(v_basis=v[:, :steps].copy(),
                                 hessenberg=h[:steps + 1, :steps].copy(),
                                 steps_completed=steps, breakdown=True)
        v[:, i + 1] = w / w_norm
    return ArnoldiResult(v_basis=v, hessenberg=h, steps_completed=m, breakdown=False)


def krylov_operator(d: int, a: int, seed: int) -> ProjectionOperator:
    """Orthonormal-row operator built from an Arnoldi run on a seeded random matrix.

    Runs ``a`` Arnoldi steps on a d-by-d standard-normal matrix with the
    all-ones start vector and transposes the basis, giving a + 1 rows (the
    normalized start vector plus one vector per step). If the iteration
    breaks down early the operator has fewer rows and a warning reports how
    many steps completed.
    """
    if a < 1:
        raise InvalidParameterError(f"subspace dimension must be positive, got {a}")
    if a + 1 > d:
        raise InvalidParameterError(
            f"subspace dimension {a} needs a + 1 <= d = {d} basis vectors"
        )
    rng = np.random.default_rng(seed)
    random_matrix = rng.standard_normal((d, d))
    result = arnoldi(random_matrix, np.ones(d), a)
    del random_matrix
    if result.breakdown:
        warnings.warn(
            f"Arnoldi broke down after {result.steps_completed} of {a} steps; "
            f"operator has {result.v_basis.shape[1]} rows",
            RuntimeWarning,
        )
    basis = result.v_basis
    return ProjectionOperator(kind="krylov", matrix=basis.T.copy(),
                              a=basis.shape[1], seed=seed)


def apply(op: ProjectionOperator, x) -> np.ndarray:
    """Project the columns of ``x`` down to measurement space.

    Sampling extracts rows directly and the Achlioptas kind multiplies in
    sparse form; the other kinds use a dense product.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ShapeMismatchError(f"x must be 2-d, got shape {x.shape}")
    if x.shape[0] != op.d:
        raise ShapeMismatchError(
            f"operator expects {op.d} rows, data has {x.shape[0]}"
        )
    if op.kind == "identity":
        return x
    if op.kind == "sampling":
        return x[op.indices, :]
    if op.kind == "achlioptas":
        return scipy.sparse.csr_matrix(op.matrix) @ x
    return op.matrix @ x


def gram_deviation(op: ProjectionOperator) -> float:
    """Row-gram departure from orthonormality: ||R R* - I||_F / sqrt(a).

    Exactly zero for sampling and identity, below 1e-10 for the Krylov kind,
    and order D/a for the dense random kinds (their normalization targets
    the column gram instead).
    """
    gram = op.matrix @ op.matrix.T
    return float(np.linalg.norm(gram - np.eye(op.a)) / np.sqrt(op.a))


def _check_count(d: int, a: int) -> None:
    if d < 1:
        raise InvalidParameterError(f"state dimension must be positive, got {d}")
    if not 1 <= a <= d:
        raise InvalidParameterError(
            f"measurement count must satisfy 1 <= a <= {d}, got {a}"
        )
