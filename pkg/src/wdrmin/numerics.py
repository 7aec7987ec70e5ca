"""Small dense symmetric linear algebra: Cholesky, bordered updates, Jacobi."""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import kernels
from .errors import NotPositiveDefiniteError

PIVOT_TOL = 1e-12


def symmetric(M, atol=1e-12) -> np.ndarray:
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if not np.allclose(M, M.T, rtol=0.0, atol=atol * scale):
        raise ValueError("matrix is not symmetric")
    return 0.5 * (M + M.T)


def chol_factor(M) -> np.ndarray:
    """Lower-triangular L with L L^T = M.

    A pivot at or below 1e-12 times the largest diagonal entry raises
    NotPositiveDefiniteError carrying the pivot index.
    """
    M = symmetric(M)
    n = M.shape[0]
    L = np.zeros_like(M)
    floor = PIVOT_TOL * max(float(np.max(np.diag(M))), 0.0) if n else 0.0
    for j in range(n):
        piv = M[j, j] - L[j, :j] @ L[j, :j]
        if piv <= floor or piv <= 0.0:
            raise NotPositiveDefiniteError(f"pivot {j} is {piv:.3e}", pivot=j)
        L[j, j] = np.sqrt(piv)
        L[j + 1:, j] = (M[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def chol_solve(L, b) -> np.ndarray:
    z = solve_triangular(L, b, lower=True)
    return solve_triangular(L.T, z, lower=False)


@dataclass
class CholChain:
    """Cholesky factor of M[S, S] grown one element at a time."""

    elements: list = field(default_factory=list)
    factor: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    @property
    def size(self):
        return len(self.elements)

    def solve(self, b):
        return chol_solve(self.factor, b)


def chol_extend(chain: CholChain, i: int, border, diag: float) -> CholChain:
    """Append element i with M[S, i] = border and M[i, i] = diag.

    O(|S|^2): one triangular solve for the new row.
    """
    if i in chain.elements:
        raise ValueError(f"element {i} already in chain")
    r = chain.size
    border = np.asarray(border, dtype=float).reshape(r)
    if r:
        w = solve_triangular(chain.factor, border, lower=True)
        schur = diag - w @ w
    else:
        w = np.zeros(0)
        schur = diag
    if schur <= PIVOT_TOL * abs(diag) or schur <= 0.0:
        raise NotPositiveDefiniteError(f"Schur complement {schur:.3e} for element {i}", pivot=r)
    L = np.zeros((r + 1, r + 1))
    L[:r, :r] = chain.factor
    L[r, :r] = w
    L[r, r] = np.sqrt(schur)
    return CholChain(chain.elements + [i], L)


def chain_gains(M, B, perm, skip_dependent=False, rel_tol=PIVOT_TOL):
    """sum_j ||L_S^{-1} B[S, j]||^2 on every prefix S of perm (compiled kernel).

    Returns an array of length d+1.  Without ``skip_dependent`` a lost pivot
    raises NotPositiveDefiniteError.
    """
    gains, status = kernels.chol_chain_gain(M, B, np.asarray(perm, dtype=np.int64),
                                            rel_tol, skip_dependent)
    if status:
        raise NotPositiveDefiniteError(f"pivot lost at chain position {status - 1}",
                                       pivot=status - 1)
    return gains


def eigenvalues(M, rel_tol=1e-12, max_sweeps=100) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi, ascending."""
    M = symmetric(M)
    if M.shape[0] > 512:
        raise ValueError("Jacobi path is for n <= 512")
    ev, _ = kernels.jacobi_eigenvalues(M, rel_tol, max_sweeps)
    return np.sort(ev)


def eigen_extremes(M, rel_tol=1e-12):
    ev = eigenvalues(M, rel_tol)
    return float(ev[0]), float(ev[-1])
