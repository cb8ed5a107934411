"""Small dense linear algebra kernels.

Everything here operates on little matrices (M <= ~16): characteristic
matrices, path-averaged coupling matrices, and the stacked over-determined
jump-condition systems solved at every cell face.  The heavy lifting is done
by LAPACK through numpy/scipy; this module adds the dimension checks, the
rank/condition reporting, and the biorthonormalization contracts the solver
layers rely on.

Tolerances are module constants and can be overridden per call.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

# Pivot smaller than this times the matrix norm counts as singular.
SINGULAR_PIVOT_RTOL = 1e-14
# Singular values below this times the largest are truncated in least squares.
LSTSQ_RCOND = 1e-10
# Imaginary parts above this times the spectral radius violate hyperbolicity.
EIG_IMAG_RTOL = 1e-8


class SingularMatrixError(np.linalg.LinAlgError):
    """Linear solve hit a pivot too small to trust."""


class HyperbolicityError(np.linalg.LinAlgError):
    """Eigendecomposition produced a complex or defective spectrum."""


@dataclass
class LeastSquaresReport:
    """Outcome of an over-determined solve.

    solution minimizes the 2-norm residual; when the effective rank is below
    the column count the minimum-norm minimizer is returned instead of
    raising.
    """

    solution: np.ndarray
    residual_norm: float
    effective_rank: int
    condition_estimate: float


def as_matrix(a) -> np.ndarray:
    """Validate and return a 2D float array with finite entries."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a 2D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def mat_vec(a, x) -> np.ndarray:
    """Matrix-vector product with an explicit dimension check."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if a.ndim != 2 or x.ndim != 1 or a.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {x.shape}")
    return a @ x


def linear_solve(a, b, pivot_rtol: float = SINGULAR_PIVOT_RTOL) -> np.ndarray:
    """Solve the square system a x = b by LU factorization.

    Raises SingularMatrixError when any pivot falls below
    pivot_rtol * ||a||_inf, rather than returning garbage.
    """
    a = as_matrix(a)
    b = np.asarray(b, dtype=float)
    n = a.shape[0]
    if a.shape[1] != n or b.shape != (n,):
        raise ValueError(f"dimension mismatch: {a.shape} vs rhs {b.shape}")
    lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    norm = np.abs(a).sum(axis=1).max()
    if np.abs(np.diag(lu)).min() < pivot_rtol * max(norm, 1e-300):
        raise SingularMatrixError(
            f"pivot below {pivot_rtol:g} * ||A||: matrix is singular to working precision"
        )
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


# Cached LAPACK workspace sizes for the tiny shapes hit in face loops.
_gelsd_work = {}


def least_squares(a, b, rcond: float = LSTSQ_RCOND) -> LeastSquaresReport:
    """Minimize ||a x - b||_2 for a tall (rows >= cols) matrix.

    Backed by the SVD-based LAPACK driver: singular values below rcond times
    the largest are truncated, and rank deficiency is reported through the
    effective_rank field (with the minimum-norm minimizer returned), never
    raised.
    """
    a = as_matrix(a)
    b = np.asarray(b, dtype=float)
    m, n = a.shape
    if m < n:
        raise ValueError(f"need rows >= cols, got shape {a.shape}")
    if b.shape != (m,):
        raise ValueError(f"rhs length {b.shape} does not match {m} rows")
    key = (m, n)
    if key not in _gelsd_work:
        work = scipy.linalg.lapack.dgelsd_lwork(m, n, 1, rcond)
        _gelsd_work[key] = (int(work[0].real), int(work[1]))
    lwork, iwork = _gelsd_work[key]
    x, sv, rank, info = scipy.linalg.lapack.dgelsd(a, b, lwork, iwork, cond=rcond)
    if info != 0:  # pragma: no cover - LAPACK failure path
        xx, _, rank, sv = np.linalg.lstsq(a, b, rcond=rcond)
        x = np.concatenate([xx, np.zeros(m - n)])
    x = x[:n]
    if sv[-1] > 0.0:
        cond = float(sv[0] / sv[-1])
    else:
        cond = np.inf
    r = a @ x - b
    resid = float(np.sqrt(r @ r))
    return LeastSquaresReport(x, resid, int(rank), cond)


def eigen_general(a, imag_rtol: float = EIG_IMAG_RTOL):
    """Real eigendecomposition of a general square matrix.

    Returns (eigenvalues, right, left) with eigenvalues sorted ascending,
    right eigenvectors in the columns of `right`, left eigenvectors in the
    rows of `left`, rescaled so that left[p] @ right[:, q] = delta_pq.

    Intended for characteristic matrices of hyperbolic systems: any
    eigenvalue with imaginary part above imag_rtol times the spectral radius
    raises HyperbolicityError, as does a defective (non-diagonalizable)
    matrix.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"matrix must be square, got {a.shape}")
    w, vr = np.linalg.eig(a)
    radius = max(np.abs(w).max(), 1e-300)
    if np.abs(w.imag).max() > imag_rtol * radius:
        raise HyperbolicityError(
            f"complex eigenvalues (max imag {np.abs(w.imag).max():.3e}, "
            f"spectral radius {radius:.3e})"
        )
    order = np.argsort(w.real, kind="stable")
    lam = w.real[order]
    right = vr.real[:, order]
    # Left eigenvectors as the inverse of the right-eigenvector matrix; this
    # biorthonormalizes degenerate clusters in one shot.  A defective matrix
    # makes `right` numerically singular and is rejected.
    try:
        left = linear_solve_matrix(right, np.eye(n))
    except SingularMatrixError as err:
        raise HyperbolicityError(
            "eigenvector matrix is singular: matrix is defective or too "
            "ill-conditioned to diagonalize"
        ) from err
    return lam, right, left


def linear_solve_matrix(a, b, pivot_rtol: float = SINGULAR_PIVOT_RTOL) -> np.ndarray:
    """Multi-RHS variant of linear_solve (solves a X = b column by column)."""
    a = as_matrix(a)
    b = np.asarray(b, dtype=float)
    lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    norm = np.abs(a).sum(axis=1).max()
    if np.abs(np.diag(lu)).min() < pivot_rtol * max(norm, 1e-300):
        raise SingularMatrixError("matrix is singular to working precision")
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
