"""Dense linear-algebra kernels with deterministic sign and ordering conventions.

Every fitting pipeline goes through these three kernels. They delegate the
factorizations to LAPACK (via numpy) and pin down the conventions LAPACK
leaves arbitrary, so identical inputs always produce identical outputs:

* singular vectors are sign-fixed so the largest-magnitude entry of each
  left singular vector is positive,
* eigenvalues are sorted by descending modulus, ties broken by descending
  imaginary part (conjugate pairs come out ``+i`` first).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModesError, InvalidParameterError, NumericalFailureError

# Relative cutoff below which singular values are treated as exact zeros
# when solving least-squares systems.
PINV_CUTOFF = 1e-12


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``A = U @ diag(singular_values) @ V*``.

    ``u`` is m-by-k and ``v`` is n-by-k with k = min(m, n); both have
    orthonormal columns and ``singular_values`` is descending.
    """

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class EigResult:
    """Eigendecomposition ``A @ eigenvectors[:, k] = eigenvalues[k] * eigenvectors[:, k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_finite_matrix(a, name):
    a = np.asarray(a)
    if np.iscomplexobj(a):
        raise InvalidParameterError(f"{name} must be real")
    a = a.astype(float, copy=False)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidParameterError(f"{name} must be a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidParameterError(f"{name} contains non-finite entries")
    return a


def thin_svd(a) -> SvdResult:
    """Thin SVD of a real matrix with a deterministic sign convention.

    The sign of each singular-vector pair is fixed so that the entry of
    largest absolute value in each column of ``u`` is positive (the
    corresponding column of ``v`` is flipped along with it).

    Raises
    ------
    NumericalFailureError
        If the underlying iteration does not converge.
    """
    a = _as_finite_matrix(a, "a")
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError("svd", a.shape[0], a.shape[1]) from exc
    v = vh.T.copy()
    # Sign convention: largest-|entry| of each U column made positive.
    lead = np.argmax(np.abs(u), axis=0)
    flip = u[lead, np.arange(u.shape[1])] < 0
    u[:, flip] *= -1.0
    v[:, flip] *= -1.0
    return SvdResult(u=u, singular_values=s, v=v)


def eig_dense(a) -> EigResult:
    """Eigendecomposition of a small square matrix, deterministically ordered.

    Eigenvalues are sorted by descending modulus, ties broken by descending
    imaginary part; eigenvector columns are permuted along with them.

    Raises
    ------
    NumericalFailureError
        If the QR iteration does not converge.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidParameterError(f"a must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidParameterError("a contains non-finite entries")
    try:
        w, vec = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError("eig", a.shape[0], a.shape[1]) from exc
    w = w.astype(complex, copy=False)
    vec = vec.astype(complex, copy=False)
    # lexsort uses the last key as the primary one.
    order = np.lexsort((-w.imag, -np.abs(w)))
    return EigResult(eigenvalues=w[order], eigenvectors=vec[:, order])


def pseudoinverse_apply(phi, x) -> np.ndarray:
    """Least-squares solution ``b`` minimizing ``||phi @ b - x||_2``.

    Solved through the SVD of ``phi``; singular values below
    ``PINV_CUTOFF`` times the largest are treated as zero.

    Raises
    ------
    DegenerateModesError
        If every singular value falls below the cutoff.
    """
    phi = np.asarray(phi)
    x = np.asarray(x)
    if phi.ndim != 2:
        raise InvalidParameterError(f"phi must be 2-d, got shape {phi.shape}")
    if x.shape != (phi.shape[0],):
        raise InvalidParameterError(
            f"x must be a vector of length {phi.shape[0]}, got shape {x.shape}"
        )
    try:
        u, s, vh = np.linalg.svd(phi, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError("svd", phi.shape[0], phi.shape[1]) from exc
    if s.size == 0 or s[0] <= 0.0:
        raise DegenerateModesError("mode matrix is numerically zero")
    keep = s > PINV_CUTOFF * s[0]
    if not np.any(keep):
        raise DegenerateModesError(
            f"all {s.size} singular values below {PINV_CUTOFF:g} * sigma_1"
        )
    coeffs = (u[:, keep].conj().T @ x) / s[keep]
    return vh[keep, :].conj().T @ coeffs
