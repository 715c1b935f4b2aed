"""Dense LU solve with partial pivoting and an explicit singularity guard."""

import warnings

import numpy as np
import scipy.linalg

PIVOT_RTOL = 1e-13


class SingularMatrix(np.linalg.LinAlgError):
    pass


def solve(A, b):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if b.shape != (A.shape[0],):
        raise ValueError(f"right-hand side shape {b.shape} does not match {A.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite entries in linear system")

    norm = np.linalg.norm(A, np.inf)
    if norm == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        # exact zero pivots are reported through SingularMatrix below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < PIVOT_RTOL * norm:
        k = int(np.argmin(pivots))
        raise SingularMatrix(f"pivot {k} has magnitude {pivots[k]:.3e} (|A|_inf = {norm:.3e})")
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def relative_residual(A, x, b) -> float:
    A, x, b = (np.asarray(v, dtype=float) for v in (A, x, b))
    num = np.linalg.norm(A @ x - b, np.inf)
    den = np.linalg.norm(A, np.inf) * np.linalg.norm(x, np.inf) + np.linalg.norm(b, np.inf)
    return float(num / den) if den else float(num)
