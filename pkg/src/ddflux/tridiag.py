"""Tridiagonal linear solves for the implicit relaxation operator.

Band convention: ``lower[i]`` multiplies ``x[i-1]``, ``diag[i]`` multiplies
``x[i]`` and ``upper[i]`` multiplies ``x[i+1]``.  In the periodic variant
``lower[0]`` couples to ``x[n-1]`` and ``upper[n-1]`` couples to ``x[0]``;
otherwise those two entries are ignored.

The elimination runs without pivoting, which is safe for strictly
diagonally dominant systems; ``solve_tridiagonal`` checks that property up
front and refuses anything else unless the caller explicitly opts out.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .core import BoundaryCondition
from .errors import DominanceViolation, SingularSystem, ValidationError


def _as_band(name, arr, n):
    out = np.ascontiguousarray(np.asarray(arr, dtype=np.float64))
    if out.shape != (n,):
        raise ValidationError(f"band '{name}' has shape {out.shape}, expected ({n},)")
    if not np.all(np.isfinite(out)):
        raise ValidationError(f"band '{name}' contains non-finite entries")
    return out


def check_dominance(lower, diag, upper, periodic=False):
    """Raise DominanceViolation unless |diag| strictly exceeds the row sum
    of off-diagonal magnitudes (corner entries included when periodic)."""
    n = diag.shape[0]
    off = np.abs(upper) + np.abs(lower)
    if not periodic:
        off = np.abs(np.concatenate(([0.0], lower[1:]))) + np.abs(
            np.concatenate((upper[:-1], [0.0]))
        )
    bad = np.abs(diag) <= off
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DominanceViolation(
            "matrix is not strictly diagonally dominant: row "
            f"{i} has |diag| = {abs(diag[i]):g} <= {off[i]:g}"
        )


def solve_tridiagonal(
    lower,
    diag,
    upper,
    rhs,
    bc: BoundaryCondition = BoundaryCondition.OUTFLOW,
    require_dominance=True,
):
    """Solve the (cyclic when ``bc`` is periodic) tridiagonal system.

    Raises DominanceViolation when ``require_dominance`` and the matrix is
    not strictly diagonally dominant, and SingularSystem when elimination
    hits a zero pivot.
    """
    periodic = bc is BoundaryCondition.PERIODIC
    rhs = np.ascontiguousarray(np.asarray(rhs, dtype=np.float64))
    n = rhs.shape[0]
    if n == 0:
        raise ValidationError("cannot solve an empty system")
    lower = _as_band("lower", lower, n)
    diag = _as_band("diag", diag, n)
    upper = _as_band("upper", upper, n)
    if not np.all(np.isfinite(rhs)):
        raise ValidationError("right-hand side contains non-finite entries")
    if require_dominance:
        check_dominance(lower, diag, upper, periodic=periodic)
    if not periodic:
        return _solve_plain(lower, diag, upper, rhs)
    return _solve_cyclic(lower, diag, upper, rhs)


def _solve_plain(lower, diag, upper, rhs):
    ok, x = _kernels.thomas(lower, diag, upper, rhs)
    if not ok:
        raise SingularSystem("tridiagonal elimination hit a zero pivot")
    return x


def _solve_cyclic(lower, diag, upper, rhs):
    n = rhs.shape[0]
    if n == 1:
        # 1x1 cyclic system: both corners fold onto the diagonal entry.
        d = diag[0] + lower[0] + upper[0]
        if d == 0.0:
            raise SingularSystem("tridiagonal elimination hit a zero pivot")
        return rhs / d
    if n == 2:
        # Corners overlap the regular bands; fall back to a dense solve.
        a = np.array(
            [
                [diag[0], upper[0] + lower[0]],
                [lower[1] + upper[1], diag[1]],
            ]
        )
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        if det == 0.0:
            raise SingularSystem("tridiagonal elimination hit a zero pivot")
        return np.linalg.solve(a, rhs)
    alpha = lower[0]
    beta = upper[n - 1]
    if alpha == 0.0 and beta == 0.0:
        return _solve_plain(lower, diag, upper, rhs)
    # Rank-one update: write the cyclic matrix as T + outer(w, v) with
    # w = (gamma, 0, ..., beta) and v = (1, 0, ..., alpha/gamma), so the
    # corners land at A[0, n-1] = alpha and A[n-1, 0] = beta, then apply
    # the Sherman-Morrison formula with two plain solves against T.
    gamma = -diag[0]
    d2 = diag.copy()
    d2[0] = diag[0] - gamma
    d2[n - 1] = diag[n - 1] - alpha * beta / gamma
    y = _solve_plain(lower, d2, upper, rhs)
    w = np.zeros(n)
    w[0] = gamma
    w[n - 1] = beta
    z = _solve_plain(lower, d2, upper, w)
    denom = 1.0 + z[0] + alpha * z[n - 1] / gamma
    if denom == 0.0 or not np.isfinite(denom):
        raise SingularSystem("cyclic correction is singular")
    factor = (y[0] + alpha * y[n - 1] / gamma) / denom
    return y - factor * z
