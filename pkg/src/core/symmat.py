"""Dense linear algebra on small symmetric and skew-symmetric matrices.

All matrix functions go through an eigendecomposition of a symmetric argument,
never a series expansion. Arrays returned from this module are read-only so that
values stay immutable once constructed.

Typical usage:
    S = sym([[2.0, 1.0], [1.0, 3.0]])
    values, vectors = sym_eig(S)
    root = sqrtm_spd(spd(S))
"""

from typing import Literal, NamedTuple, TypeAlias

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import InstanceValidationError, IterationError

Matrix: TypeAlias = NDArray[np.float64]
SymMatrix: TypeAlias = Matrix
SpdMatrix: TypeAlias = Matrix
TracelessSym: TypeAlias = Matrix
SkewMatrix: TypeAlias = Matrix

EigMethod = Literal["lapack", "jacobi"]

# Tolerances for the type invariants
SPD_EPS = 1e-12  # lambda_min > SPD_EPS * lambda_max
TRACE_EPS = 1e-12  # |tr| <= TRACE_EPS * (1 + ||.||_F)
ORTHO_EPS = 1e-10
RECON_EPS = 1e-10

# Cyclic Jacobi settings
JACOBI_MAX_SWEEPS = 100
JACOBI_TOL = 1e-14  # off-diagonal Frobenius norm relative to ||S||_F

DEFAULT_EIG_METHOD: EigMethod = "lapack"


class EigenDecomp(NamedTuple):
    """Eigendecomposition of a symmetric matrix.

    Attributes:
        values: Eigenvalues in ascending order
        vectors: Orthogonal matrix, column i paired with values[i]
    """

    values: NDArray[np.float64]
    vectors: Matrix


class SplitParts(NamedTuple):
    """Decomposition G = sym + skew + trace_scalar * I."""

    sym: TracelessSym
    skew: SkewMatrix
    trace_scalar: float


def _frozen(a: NDArray[np.float64]) -> NDArray[np.float64]:
    a.setflags(write=False)
    return a


def _as_square(values: ArrayLike, what: str) -> Matrix:
    a = np.array(values, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InstanceValidationError(f"{what} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InstanceValidationError(f"{what} must be finite-valued")
    return a


def frobenius(a: ArrayLike) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(np.asarray(a, dtype=np.float64), "fro"))


def relative_error(actual: ArrayLike, expected: ArrayLike) -> float:
    """Relative Frobenius error ||actual - expected|| / max(||expected||, 1e-300)."""
    expected_arr = np.asarray(expected, dtype=np.float64)
    diff = np.asarray(actual, dtype=np.float64) - expected_arr
    return frobenius(diff) / max(frobenius(expected_arr), 1e-300)


def sym(values: ArrayLike) -> SymMatrix:
    """Construct a symmetric matrix as (V + V^T) / 2."""
    a = _as_square(values, "symmetric matrix")
    return _frozen(0.5 * (a + a.T))


def skew(values: ArrayLike) -> SkewMatrix:
    """Construct a skew-symmetric matrix as (V - V^T) / 2."""
    a = _as_square(values, "skew matrix")
    return _frozen(0.5 * (a - a.T))


def traceless(values: ArrayLike, trace_eps: float = TRACE_EPS) -> TracelessSym:
    """Construct a traceless symmetric matrix by removing (tr/n) I from the symmetric part.

    Raises:
        InstanceValidationError: If the projected trace still exceeds the tolerance
            (only possible for non-finite scale)
    """
    a = _as_square(values, "traceless matrix")
    n = a.shape[0]
    s = 0.5 * (a + a.T)
    s -= (np.trace(s) / n) * np.eye(n)
    if abs(np.trace(s)) > trace_eps * (1.0 + frobenius(s)):
        raise InstanceValidationError("traceless invariant violated after projection")
    return _frozen(s)


def spd(values: ArrayLike, spd_eps: float = SPD_EPS) -> SpdMatrix:
    """Construct a symmetric positive definite matrix.

    Raises:
        InstanceValidationError: If lambda_min <= spd_eps * lambda_max
    """
    s = sym(values)
    check_spd(s, spd_eps=spd_eps)
    return s


def check_spd(s: SymMatrix, spd_eps: float = SPD_EPS, what: str = "matrix") -> EigenDecomp:
    """Verify positive definiteness and return the eigendecomposition used for it."""
    decomp = sym_eig(s)
    lo, hi = float(decomp.values[0]), float(decomp.values[-1])
    if hi <= 0.0 or lo <= spd_eps * hi:
        raise InstanceValidationError(
            f"{what} is not SPD: eigenvalues span [{lo:.3e}, {hi:.3e}] "
            f"(require lambda_min > {spd_eps:g} * lambda_max)"
        )
    return decomp


def _fix_signs(vectors: Matrix) -> Matrix:
    # Largest-magnitude component of each eigenvector is made positive
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def jacobi_eigh(
    s: SymMatrix, max_sweeps: int = JACOBI_MAX_SWEEPS, tol: float = JACOBI_TOL
) -> tuple[NDArray[np.float64], Matrix]:
    """Cyclic Jacobi eigenvalue iteration for a symmetric matrix.

    Sweeps over (p, q) pairs in row order and annihilates each off-diagonal
    entry with a plane rotation. Converges when the off-diagonal Frobenius norm
    drops below ``tol * ||S||_F``.

    Args:
        s: Symmetric matrix
        max_sweeps: Maximum number of full sweeps
        tol: Relative off-diagonal tolerance

    Returns:
        Tuple of (unsorted eigenvalues, eigenvector matrix)

    Raises:
        IterationError: If not converged within max_sweeps
    """
    a = np.array(s, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    scale = frobenius(a)
    if scale == 0.0 or n == 1:
        return np.diag(a).copy(), v

    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off < tol * scale:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                sn = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - sn * col_q
                a[:, q] = sn * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - sn * row_q
                a[q, :] = sn * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - sn * vq
                v[:, q] = sn * vp + c * vq

    raise IterationError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def sym_eig(s: SymMatrix, method: EigMethod | None = None) -> EigenDecomp:
    """Eigendecomposition of a symmetric matrix.

    Eigenvalues are returned ascending; each eigenvector is sign-normalized so
    that its largest-magnitude entry is positive, which makes the output a
    deterministic function of the input.

    Args:
        s: Symmetric matrix (finite)
        method: "jacobi" for cyclic Jacobi, "lapack" for numpy.linalg.eigh.
            Defaults to DEFAULT_EIG_METHOD.

    Returns:
        EigenDecomp with ascending values and matching orthonormal vectors

    Raises:
        IterationError: If the selected eigensolver fails to converge
    """
    a = np.asarray(s, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise InstanceValidationError("eigendecomposition input must be finite-valued")
    method = method or DEFAULT_EIG_METHOD

    if method == "jacobi":
        values, vectors = jacobi_eigh(a)
        order = np.argsort(values, kind="stable")
        values, vectors = values[order], vectors[:, order]
    else:
        try:
            values, vectors = np.linalg.eigh(0.5 * (a + a.T))
        except np.linalg.LinAlgError as e:
            raise IterationError(f"LAPACK eigensolver failed: {e}") from e

    return EigenDecomp(_frozen(np.array(values)), _frozen(_fix_signs(vectors)))


def _from_eig(vectors: Matrix, values: NDArray[np.float64]) -> Matrix:
    out = (vectors * values) @ vectors.T
    return _frozen(0.5 * (out + out.T))


def expm_sym(s: SymMatrix) -> SpdMatrix:
    """Matrix exponential of a symmetric matrix, V diag(e^lambda) V^T."""
    values, vectors = sym_eig(s)
    return _from_eig(vectors, np.exp(values))


def logm_spd(p: SpdMatrix) -> SymMatrix:
    """Principal matrix logarithm of an SPD matrix.

    Raises:
        InstanceValidationError: If p is not SPD
    """
    values, vectors = check_spd(np.asarray(p, dtype=np.float64), what="logm argument")
    return _from_eig(vectors, np.log(values))


def sqrtm_spd(p: SpdMatrix) -> SpdMatrix:
    """Principal square root of an SPD matrix."""
    values, vectors = check_spd(np.asarray(p, dtype=np.float64), what="sqrtm argument")
    return _from_eig(vectors, np.sqrt(values))


def invsqrtm_spd(p: SpdMatrix) -> SpdMatrix:
    """Inverse principal square root of an SPD matrix."""
    values, vectors = check_spd(np.asarray(p, dtype=np.float64), what="invsqrtm argument")
    return _from_eig(vectors, 1.0 / np.sqrt(values))


def split(g: ArrayLike) -> SplitParts:
    """Split a general square matrix into traceless-symmetric, skew and trace parts.

    sym + skew + trace_scalar * I reconstructs g up to rounding.
    """
    a = _as_square(g, "split argument")
    n = a.shape[0]
    trace_scalar = float(np.trace(a)) / n
    sym_part = 0.5 * (a + a.T) - trace_scalar * np.eye(n)
    skew_part = 0.5 * (a - a.T)
    return SplitParts(_frozen(sym_part), _frozen(skew_part), trace_scalar)


def characteristic_coefficients(g: ArrayLike) -> NDArray[np.float64]:
    """Coefficients of det(lambda I - G) by the Faddeev-LeVerrier recursion.

    Returns:
        Array [c_{n-1}, ..., c_0] so that
        det(lambda I - G) = lambda^n + c_{n-1} lambda^{n-1} + ... + c_0
    """
    a = _as_square(g, "characteristic polynomial argument")
    n = a.shape[0]
    eye = np.eye(n)
    m_k = np.zeros((n, n))
    c_prev = 1.0
    coeffs = np.empty(n)
    for k in range(1, n + 1):
        m_k = a @ m_k + c_prev * eye
        c_prev = -float(np.trace(a @ m_k)) / k
        coeffs[k - 1] = c_prev
    return _frozen(coeffs)


def symmetrize(a: ArrayLike) -> tuple[SymMatrix, float]:
    """Symmetrize and report the Frobenius norm of the correction applied."""
    arr = np.asarray(a, dtype=np.float64)
    s = 0.5 * (arr + arr.T)
    return _frozen(s), frobenius(s - arr)
