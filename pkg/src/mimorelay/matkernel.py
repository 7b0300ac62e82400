"""
Small dense complex linear algebra kernel.

Matrices are plain 2-D ``complex128`` numpy arrays. The kernel only relies on
numpy for storage and elementwise/product arithmetic; the factorizations
(partial-pivot LU for linear solves, one-sided Jacobi for the SVD) are
implemented here. Sizes are tiny (K x K with K <= ~8), so robustness and
accuracy matter more than speed.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (ConvergenceError, DomainError, NonFiniteError,
                     ShapeError, SingularMatrixError)

__all__ = [
    'SvdResult', 'as_matrix', 'identity', 'mul', 'adjoint', 'solve',
    'inverse', 'det', 'svd', 'trace', 'frobenius_norm', 'logdet_hermitian',
    'PIVOT_RTOL', 'SVD_MAX_SWEEPS',
]

# Pivots smaller than PIVOT_RTOL * max|a_ij| are treated as exact zeros.
PIVOT_RTOL = 1e-12
SVD_MAX_SWEEPS = 100
_JACOBI_TOL = 1e-15


@dataclass(frozen=True)
class SvdResult:
    """Factorization ``a = u @ diag(sigma) @ v^H`` with unitary ``u``, ``v``."""
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.conj().T


def as_matrix(a) -> np.ndarray:
    """Return `a` as a finite 2-D complex128 array (scalars become 1x1)."""
    if type(a) is np.ndarray and a.dtype == np.complex128 and a.ndim == 2:
        m = a
    else:
        m = np.asarray(a, dtype=np.complex128)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        elif m.ndim == 1:
            m = m.reshape(-1, 1)
        elif m.ndim != 2:
            raise ShapeError(f"expected a 2-D matrix, got {m.ndim} dimensions")
    if not np.isfinite(m).all():
        raise NonFiniteError("matrix has non-finite entries")
    return m


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def mul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(a).conj().T.copy()


def trace(a) -> complex:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"trace of non-square matrix {a.shape}")
    return complex(np.sum(np.diag(a)))


def frobenius_norm(a) -> float:
    a = as_matrix(a)
    return float(np.sqrt(np.sum(a.real ** 2 + a.imag ** 2)))


def _lu_factor(a: np.ndarray):
    """In-place partial-pivot LU of a copy of `a`.

    Returns the packed factors, the row permutation and the permutation sign.
    """
    n = a.shape[0]
    lu = a.copy()
    perm = np.arange(n)
    sign = 1
    scale = np.max(np.abs(lu)) if lu.size else 0.0
    threshold = PIVOT_RTOL * scale
    for k in range(n):
        col = np.abs(lu[k:, k])
        p = k + int(np.argmax(col))
        if col[p - k] <= threshold or scale == 0.0:
            raise SingularMatrixError(k)
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        if k + 1 < n:
            lu[k + 1:, k] /= lu[k, k]
            lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, perm, sign


def solve(a, b) -> np.ndarray:
    """
    Solve ``a @ x = b`` by partial-pivot LU.

    Parameters
    ----------
    a : array_like
        Square coefficient matrix.
    b : array_like
        Right-hand side with ``a.shape[0]`` rows (any number of columns).

    Returns
    -------
    np.ndarray
        Solution `x` with the same shape as `b`.

    Raises
    ------
    SingularMatrixError
        If a pivot magnitude falls below ``PIVOT_RTOL`` times the largest
        entry of `a`. The error carries the elimination step.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    n = a.shape[0]
    if a.shape[1] != n:
        raise ShapeError(f"solve needs a square matrix, got {a.shape}")
    if b.shape[0] != n:
        raise ShapeError(f"right-hand side has {b.shape[0]} rows, expected {n}")
    lu, perm, _ = _lu_factor(a)
    x = b[perm].copy()
    # forward substitution, unit lower triangle
    for k in range(1, n):
        x[k] -= lu[k, :k] @ x[:k]
    # back substitution
    for k in range(n - 1, -1, -1):
        if k + 1 < n:
            x[k] -= lu[k, k + 1:] @ x[k + 1:]
        x[k] /= lu[k, k]
    return x


def inverse(a) -> np.ndarray:
    a = as_matrix(a)
    return solve(a, identity(a.shape[0]))


def det(a) -> complex:
    """Determinant from the LU pivots; zero for a singular matrix."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"determinant of non-square matrix {a.shape}")
    try:
        lu, _, sign = _lu_factor(a)
    except SingularMatrixError:
        return 0j
    return complex(sign * np.prod(np.diag(lu)))


def logdet_hermitian(a) -> float:
    """
    Base-2 log-determinant of a Hermitian positive definite matrix.

    Raises
    ------
    DomainError
        If the determinant is not strictly positive.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"determinant of non-square matrix {a.shape}")
    d = det(a)
    if not d.real > 0.0:
        raise DomainError(f"log-determinant of a matrix with determinant {d}")
    return float(np.log2(d.real))


def _complete_unitary(u: np.ndarray, filled: np.ndarray) -> np.ndarray:
    """Replace the columns of `u` not flagged in `filled` by an orthonormal
    completion, using Gram-Schmidt on the standard basis."""
    n = u.shape[0]
    basis = [u[:, j] for j in range(u.shape[1]) if filled[j]]
    candidates = iter(identity(n).T)
    for j in range(u.shape[1]):
        if filled[j]:
            continue
        while True:
            e = next(candidates)
            w = e.copy()
            for q in basis:
                w -= (q.conj() @ w) * q
            norm = np.linalg.norm(w)
            if norm > 1e-8:
                break
        u[:, j] = w / norm
        basis.append(u[:, j])
    return u


def svd(a, max_sweeps: int = SVD_MAX_SWEEPS) -> SvdResult:
    """
    Singular value decomposition by one-sided (Hestenes) Jacobi rotations.

    Columns of a working copy of `a` are orthogonalized pairwise with complex
    plane rotations that are accumulated into `v`. At convergence the column
    norms are the singular values and the normalized columns form `u`.

    Parameters
    ----------
    a : array_like
        Square complex matrix.
    max_sweeps : int
        Cap on full sweeps over all column pairs.

    Returns
    -------
    SvdResult
        With ``sigma`` sorted non-increasing.

    Raises
    ------
    ConvergenceError
        If the columns are not orthogonal after `max_sweeps` sweeps.
    """
    a = as_matrix(a)
    m, n = a.shape
    if m != n:
        raise ShapeError(f"svd supports square matrices only, got {a.shape}")
    w = a.copy()
    v = identity(n)
    norms2 = np.sum(w.real ** 2 + w.imag ** 2, axis=0)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = norms2[p]
                beta = norms2[q]
                gamma = np.vdot(w[:, p], w[:, q])
                g_abs = abs(gamma)
                if g_abs <= _JACOBI_TOL * np.sqrt(alpha * beta) or g_abs == 0.0:
                    continue
                rotated = True
                phase = gamma / g_abs
                zeta = (beta - alpha) / (2.0 * g_abs)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                # unitary column transform [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                wq = w[:, q] * phase.conjugate()
                wp = w[:, p]
                w[:, p], w[:, q] = c * wp - s * wq, s * wp + c * wq
                vq = v[:, q] * phase.conjugate()
                vp = v[:, p]
                v[:, p], v[:, q] = c * vp - s * vq, s * vp + c * vq
                # recomputed rather than updated: the update formula cancels for tiny columns
                norms2[p] = np.vdot(w[:, p], w[:, p]).real
                norms2[q] = np.vdot(w[:, q], w[:, q]).real
        if not rotated:
            break
    else:
        raise ConvergenceError(f"Jacobi SVD did not converge in {max_sweeps} sweeps")

    sigma = np.sqrt(np.sum(w.real ** 2 + w.imag ** 2, axis=0))
    order = np.argsort(-sigma, kind='stable')
    sigma = sigma[order]
    w = w[:, order]
    v = v[:, order]
    scale = sigma[0] if n else 0.0
    filled = sigma > 1e-14 * scale if scale > 0 else np.zeros(n, dtype=bool)
    u = np.zeros_like(w)
    u[:, filled] = w[:, filled] / sigma[filled]
    if not np.all(filled):
        sigma = np.where(filled, sigma, 0.0)
        u = _complete_unitary(u, filled)
    return SvdResult(u=u, sigma=sigma, v=v)
