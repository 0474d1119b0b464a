"""Batched preconditioned conjugate gradients for the symmetric forms.

Columns of a block right-hand side are iterated in lockstep with per-column
step sizes, which is arithmetically identical to running plain CG on each
column separately.  Jacobi (diagonal) preconditioning is used throughout.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse


class SolverError(RuntimeError):
    """Iterative solve exceeded its iteration cap."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def default_iteration_cap(n: int) -> int:
    return int(np.ceil(50.0 * np.sqrt(n)))


def cg_solve(
    matrix: sparse.csr_matrix,
    rhs: np.ndarray,
    tol: float = 1e-10,
    max_iter: int | None = None,
) -> tuple[np.ndarray, dict]:
    """Solve matrix @ X = rhs column by column to relative residual ``tol``.

    ``matrix`` must be symmetric positive definite.  Returns the solution in
    the shape of ``rhs`` and an info dict with iteration count and the worst
    relative residual.  Raises SolverError when the cap is exceeded.
    """
    n = matrix.shape[0]
    if max_iter is None:
        max_iter = default_iteration_cap(n)
    single = rhs.ndim == 1
    b = np.asarray(rhs, dtype=np.float64).reshape(n, -1)

    diag = matrix.diagonal()
    inv_diag = np.where(diag > 0, 1.0 / np.where(diag > 0, diag, 1.0), 1.0)

    x = np.zeros_like(b)
    r = b.copy()
    bnorm = np.linalg.norm(b, axis=0)
    # zero columns are solved by x = 0
    scale = np.where(bnorm > 0, bnorm, 1.0)

    z = inv_diag[:, None] * r
    p = z.copy()
    rz = np.einsum("ij,ij->j", r, z)
    # freeze columns once they reach the tolerance so a block solve runs the
    # exact same arithmetic as solving each column on its own
    active = np.linalg.norm(r, axis=0) / scale > tol
    iterations = 0
    worst = float((np.linalg.norm(r, axis=0) / scale).max())
    for iterations in range(1, max_iter + 1):
        if not active.any():
            break
        ap = matrix @ p
        pap = np.einsum("ij,ij->j", p, ap)
        # columns at the exact solution have pap == 0; freeze their step too
        step_ok = active & (pap > 0)
        alpha = np.where(step_ok, rz / np.where(pap > 0, pap, 1.0), 0.0)
        x += alpha * p
        r -= alpha * ap
        rel = np.linalg.norm(r, axis=0) / scale
        worst = float(rel.max())
        active = active & (rel > tol)
        if not active.any():
            break
        z = inv_diag[:, None] * r
        rz_new = np.einsum("ij,ij->j", r, z)
        beta = np.where(active & (rz > 0), rz_new / np.where(rz > 0, rz, 1.0), 0.0)
        p = z + beta * p
        rz = rz_new
    else:
        raise SolverError(
            f"conjugate gradients: residual {worst:.3e} > tol {tol:.1e} "
            f"after {max_iter} iterations",
            residual=worst,
        )
    info = {"iterations": iterations, "residual": worst}
    return (x.ravel() if single else x), info
