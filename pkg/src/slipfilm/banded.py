"""Banded linear algebra helpers for the implicit steps.

Systems are assembled by probing a linear operator with comb vectors
(unit spikes spaced one bandwidth apart), which guarantees the matrix is
exactly the operator used elsewhere in the step, and solved by direct
banded LU factorization.  Direct factorization keeps every solve
deterministic and O(n).
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = ["SolverError", "banded_from_apply", "solve_banded_system"]


class SolverError(RuntimeError):
    """A linear solve failed (singular or non-finite system)."""


def banded_from_apply(apply_fn, m: int, lower: int, upper: int) -> np.ndarray:
    """Extract the banded matrix of a linear operator on R^m.

    ``apply_fn`` must be linear with bandwidth (lower, upper).  Returns the
    matrix in the diagonal-ordered layout of ``scipy.linalg.solve_banded``:
    ab[upper + i - j, j] = A[i, j].
    """
    width = lower + upper + 1
    ab = np.zeros((width, m))
    for r in range(min(width, m)):
        comb = np.zeros(m)
        comb[r::width] = 1.0
        w = apply_fn(comb)
        cols = np.arange(r, m, width)
        for d in range(-upper, lower + 1):
            rows = cols + d
            ok = (rows >= 0) & (rows < m)
            ab[upper + d, cols[ok]] = w[rows[ok]]
    return ab


def solve_banded_system(lower: int, upper: int, ab: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve the banded system, wrapping failures as SolverError."""
    if not np.all(np.isfinite(ab)) or not np.all(np.isfinite(rhs)):
        raise SolverError("banded system contains non-finite entries")
    try:
        return scipy.linalg.solve_banded((lower, upper), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"banded solve failed: {exc}") from exc
