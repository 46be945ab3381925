"""Classical solvers used as ground truth for the quantum pipeline.

Desk-scale dense systems only: Gaussian elimination with partial pivoting
and a plain conjugate gradient iteration, both checked against each other
in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefinite, SingularMatrix
from .qcore import as_complex_matrix

PIVOT_THRESHOLD = 1e-12


def direct_solve(a, b) -> np.ndarray:
    """Solve A x = b by Gaussian elimination with partial pivoting.

    Raises SingularMatrix when a pivot magnitude falls below 1e-12.
    """
    m = as_complex_matrix(a).copy()
    rhs = np.asarray(b, dtype=complex).reshape(-1).copy()
    n = m.shape[0]
    if m.shape[1] != n or rhs.size != n:
        raise SingularMatrix(f"incompatible shapes {m.shape} and {rhs.shape}")
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(m[col:, col])))
        if abs(m[pivot_row, col]) < PIVOT_THRESHOLD:
            raise SingularMatrix(f"pivot magnitude {abs(m[pivot_row, col]):.3e} below 1e-12")
        if pivot_row != col:
            m[[col, pivot_row]] = m[[pivot_row, col]]
            rhs[[col, pivot_row]] = rhs[[pivot_row, col]]
        factors = m[col + 1 :, col] / m[col, col]
        m[col + 1 :, col:] -= np.outer(factors, m[col, col:])
        rhs[col + 1 :] -= factors * rhs[col]
    x = np.zeros(n, dtype=complex)
    for row in range(n - 1, -1, -1):
        x[row] = (rhs[row] - m[row, row + 1 :] @ x[row + 1 :]) / m[row, row]
    return x


@dataclass(frozen=True)
class CGReport:
    solution: np.ndarray
    iterations: int
    residual_norm: float


def conjugate_gradient(a, b, tol: float = 1e-10, max_iterations: int | None = None) -> CGReport:
    """Conjugate gradient for Hermitian positive definite systems.

    Converges in at most N steps in exact arithmetic; NotPositiveDefinite
    is raised when a search direction sees non-positive curvature p^† A p.
    """
    m = as_complex_matrix(a)
    rhs = np.asarray(b, dtype=complex).reshape(-1)
    n = m.shape[0]
    if max_iterations is None:
        max_iterations = 2 * n + 10
    x = np.zeros(n, dtype=complex)
    r = rhs - m @ x
    p = r.copy()
    rs = float(np.real(np.vdot(r, r)))
    iterations = 0
    while np.sqrt(rs) > tol and iterations < max_iterations:
        ap = m @ p
        curvature = float(np.real(np.vdot(p, ap)))
        if curvature <= 0.0:
            raise NotPositiveDefinite(f"direction with p^†Ap = {curvature:.3e} <= 0")
        alpha = rs / curvature
        x = x + alpha * p
        r = r - alpha * ap
        rs_new = float(np.real(np.vdot(r, r)))
        p = r + (rs_new / rs) * p
        rs = rs_new
        iterations += 1
    residual = float(np.linalg.norm(m @ x - rhs))
    return CGReport(solution=x, iterations=iterations, residual_norm=residual)
