"""Dense complex-matrix primitives shared by the Bloch-equation machinery.

Everything here works on plain ``numpy`` arrays of ``complex128``.  The
largest Hilbert space in this package has dimension 8, so the superoperators
are at most 64x64 and dense direct methods are always the right tool.

Vectorization convention (used consistently everywhere): ``vec`` stacks
*columns*, so ``vec(A X B) == kron(B.T, A) @ vec(X)``.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from .errors import DegenerateKernelError, DimensionError, SingularMatrixError

# Tolerances fixed in one place.
SOLVE_RESIDUAL_RTOL = 1e-9     # ||m x - rhs|| <= rtol * (||m|| ||x|| + ||rhs||)
SINGULAR_PIVOT_RTOL = 1e-13    # pivot below rtol * ||m|| counts as singular
KERNEL_RESIDUAL_RTOL = 1e-8    # ||m v|| <= rtol * ||m|| ||v|| for a null vector


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={a.ndim}")
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conjugate(a).T


def hermiticity_defect(a: np.ndarray) -> float:
    """max |A - A^dagger|, zero for an exactly Hermitian matrix."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"hermiticity is defined for square matrices, got {a.shape}")
    return float(np.max(np.abs(a - dagger(a)), initial=0.0))


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def vec(x) -> np.ndarray:
    """Column-stacking vectorization of a square matrix."""
    return as_matrix(x).reshape(-1, order="F")


def unvec(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    n = round(len(v) ** 0.5)
    if n * n != len(v):
        raise DimensionError(f"vector of length {len(v)} is not a vectorized square matrix")
    return v.reshape((n, n), order="F")


def solve_linear(m, rhs) -> np.ndarray:
    """Solve ``m x = rhs`` by pivoted LU, rejecting numerically singular systems."""
    m = as_matrix(m)
    rhs = np.asarray(rhs, dtype=complex).reshape(-1)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"solve_linear needs a square matrix, got {m.shape}")
    if len(rhs) != m.shape[0]:
        raise DimensionError(f"rhs length {len(rhs)} does not match matrix size {m.shape[0]}")
    scale = np.linalg.norm(m)
    if scale == 0.0:
        raise SingularMatrixError("singular pivot at index 0 (zero matrix)")
    with warnings.catch_warnings():
        # exact-zero pivots are diagnosed below via our own threshold
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    pivots = np.abs(np.diag(lu))
    bad = np.nonzero(pivots < SINGULAR_PIVOT_RTOL * scale)[0]
    if bad.size:
        raise SingularMatrixError(f"singular pivot at index {int(bad[0])} "
                                  f"(|pivot|={pivots[bad[0]]:.3e}, ||m||={scale:.3e})")
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def null_vector(m) -> np.ndarray:
    """Extract the (unique) null vector of a rank-deficient square matrix.

    Raises :class:`DegenerateKernelError` unless exactly one singular value
    sits below the kernel threshold.  Normalization is left to the caller.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"null_vector needs a square matrix, got {m.shape}")
    n = m.shape[0]
    if n == 1:
        if abs(m[0, 0]) > 0:
            raise DegenerateKernelError("kernel dimension 0: matrix is nonsingular")
        return np.ones(1, dtype=complex)
    _, s, vh = np.linalg.svd(m)
    tol = KERNEL_RESIDUAL_RTOL * s[0] if s[0] > 0 else np.inf
    if s[-1] > tol:
        raise DegenerateKernelError(
            f"kernel dimension 0: smallest singular value {s[-1]:.3e} exceeds {tol:.3e}")
    if s[-2] < tol:
        raise DegenerateKernelError(
            f"kernel dimension >= 2 (two singular values below {tol:.3e}); "
            "add an infinitesimal mixing rate to make the steady state unique")
    return np.conjugate(vh[-1])
