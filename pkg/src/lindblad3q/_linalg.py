"""Dense linear-algebra kernels shared by the bosonic and fermionic pipelines."""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .errors import DefectiveMatrixError

TAU_DEG = 1e-8
COND_MAX = 1e8


def solve_lyapunov(Heff, N):
    """Solve ``Heff X - X Heff^dagger + i N = 0`` for X.

    Complex Schur form ``Heff = Z T Z^dagger`` turns the equation into a
    triangular one, ``T Y - Y T^dagger = -i Z^dagger N Z``, solved entry by
    entry from the bottom-right corner. Diagonalizability is not needed; the
    only requirement is ``T_ii != conj(T_jj)``, which holds whenever every
    eigenvalue has a strictly negative imaginary part.
    """
    Heff = np.asarray(Heff, dtype=complex)
    T, Z = sla.schur(Heff, output="complex")
    R = -1j * (Z.conj().T @ np.asarray(N, dtype=complex) @ Z)
    M = T.shape[0]
    Y = np.zeros((M, M), dtype=complex)
    Tc = T.conj()
    diag = np.diag(T)
    for i in range(M - 1, -1, -1):
        for j in range(M - 1, -1, -1):
            acc = R[i, j]
            acc -= T[i, i + 1:] @ Y[i + 1:, j]
            acc += Y[i, j + 1:] @ Tc[j, j + 1:]
            Y[i, j] = acc / (diag[i] - np.conj(diag[j]))
    X = Z @ Y @ Z.conj().T
    return 0.5 * (X + X.conj().T)


def lyapunov_residual(Heff, X, N):
    return float(np.linalg.norm(Heff @ X - X @ Heff.conj().T + 1j * N))


def driven_integral(Heff, N, t):
    """Return ``exp(-i Heff t)`` and ``int_0^t exp(-i Heff s) N exp(i Heff^dagger s) ds``.

    Short times use the block-exponential identity of Van Loan, which needs
    neither stability nor an eigenbasis. Its lower block grows like
    ``exp(max|Im E| t)``, so once that factor exceeds ``e`` for a stable
    ``Heff`` the integral is taken as ``X - U X U^dagger`` with ``X`` the
    Lyapunov solution.
    """
    A = -1j * np.asarray(Heff, dtype=complex)
    N = np.asarray(N, dtype=complex)
    M = A.shape[0]
    eig = np.linalg.eigvals(Heff)
    if eig.imag.max() < -1e-12 and t * np.abs(eig.imag).max() > 1.0:
        prop = sla.expm(A * t)
        X = solve_lyapunov(Heff, N)
        integral = X - prop @ X @ prop.conj().T
        return prop, 0.5 * (integral + integral.conj().T)
    block = np.zeros((2 * M, 2 * M), dtype=complex)
    block[:M, :M] = A
    block[:M, M:] = N
    block[M:, M:] = -A.conj().T
    F = sla.expm(block * t)
    prop = F[:M, :M]
    integral = F[:M, M:] @ prop.conj().T
    return prop, 0.5 * (integral + integral.conj().T)


def biorthogonal_eig(Heff):
    """Eigenvalues with right (columns) and left (rows) eigenvectors, ``PsiL @ PsiR = 1``.

    Eigenvalues are ordered by real part, then imaginary part. Within a
    cluster of nearly equal eigenvalues the left vectors are replaced by the
    inverse of the cluster Gram matrix applied to them.

    Returns
    -------
    E, PsiR, PsiL, condition
        ``condition`` is the largest eigenvector-conditioning number met; a
        value above ``1e8`` marks the matrix as numerically defective.
    """
    Heff = np.asarray(Heff, dtype=complex)
    E, vl, vr = sla.eig(Heff, left=True, right=True)
    order = np.lexsort((E.imag.round(12), E.real.round(12)))
    E, vl, vr = E[order], vl[:, order], vr[:, order]
    PsiR = vr / np.linalg.norm(vr, axis=0)
    PsiL = vl.conj().T
    M = len(E)
    condition = 1.0
    done = np.zeros(M, dtype=bool)
    for s in range(M):
        if done[s]:
            continue
        cluster = [k for k in range(M) if not done[k] and abs(E[k] - E[s]) < TAU_DEG]
        done[cluster] = True
        gram = PsiL[cluster] @ PsiR[:, cluster]
        cond = np.linalg.cond(gram)
        scale = np.linalg.norm(PsiL[cluster], axis=1).max() * np.linalg.norm(PsiR[:, cluster], axis=0).max()
        condition = max(condition, cond, scale / np.abs(np.linalg.eigvals(gram)).min())
        if np.isfinite(cond):
            PsiL[cluster] = np.linalg.solve(gram, PsiL[cluster])
    return E, PsiR, PsiL, condition


def require_diagonalizable(condition):
    if not np.isfinite(condition) or condition > COND_MAX:
        raise DefectiveMatrixError(
            f"dynamical matrix is defective within tolerance (eigenvector conditioning {condition:.2e})"
        )
