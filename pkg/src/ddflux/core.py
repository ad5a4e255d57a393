"""Grids, fields, piecewise data and the discrete difference calculus.

Cell-centered finite-volume layout on a uniform 1-D grid: cell ``j`` owns
``[x_left + j*dx, x_left + (j+1)*dx]`` and carries the exact cell average of
the initial data.  The spatial coefficient lives on the staggered grid: its
value at interface ``i`` is the exact average of ``k`` over the ``dx``-wide
interval centred on that interface (i.e. between the two neighbouring cell
centres).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import (
    InvalidCoefficient,
    InvalidInitialData,
    NonFiniteState,
    ValidationError,
)

__all__ = [
    "BoundaryCondition",
    "Grid1D",
    "Field",
    "PiecewiseFunction",
    "CoefficientK",
    "FluxModel",
    "SchemeParams",
    "project_initial",
    "average_k",
    "extend",
    "diff_forward",
    "diff_backward",
    "diff_forward_all",
    "diff_backward_all",
]

# 5-point Gauss-Legendre rule; exact for polynomials up to degree 9, which
# covers the piecewise-constant/linear data used by the built-in scenarios.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


class BoundaryCondition(Enum):
    PERIODIC = "periodic"
    OUTFLOW = "outflow"


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell-centered grid on ``[x_left, x_right]``.

    Parameters
    ----------
    x_left, x_right : float
        Domain endpoints, ``x_right > x_left``.
    n_cells : int
        Number of cells, at least 1.
    bc : BoundaryCondition
        Periodic wrap-around or outflow (zero-gradient ghost cells).
    """

    x_left: float
    x_right: float
    n_cells: int
    bc: BoundaryCondition = BoundaryCondition.OUTFLOW

    def __post_init__(self):
        if not (np.isfinite(self.x_left) and np.isfinite(self.x_right)):
            raise ValidationError("grid endpoints must be finite")
        if not self.x_right > self.x_left:
            raise ValidationError(
                f"grid requires x_right > x_left, got [{self.x_left}, {self.x_right}]"
            )
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ValidationError(f"n_cells must be a positive integer, got {self.n_cells}")

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def periodic(self) -> bool:
        return self.bc is BoundaryCondition.PERIODIC

    def centers(self) -> np.ndarray:
        """Cell-center coordinates, shape ``(n_cells,)``."""
        return self.x_left + (np.arange(self.n_cells) + 0.5) * self.dx

    def interfaces(self) -> np.ndarray:
        """Cell-boundary coordinates, shape ``(n_cells + 1,)``."""
        return self.x_left + np.arange(self.n_cells + 1) * self.dx

    @property
    def n_interfaces(self) -> int:
        """Number of distinct interfaces carrying a coefficient value."""
        return self.n_cells if self.periodic else self.n_cells + 1


@dataclass(frozen=True)
class Field:
    """Cell-averaged values of the unknown at one time level."""

    values: np.ndarray
    time: float
    grid: Grid1D

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.shape[0] != self.grid.n_cells:
            raise ValidationError(
                f"field length {vals.shape} does not match grid n_cells={self.grid.n_cells}"
            )
        if not np.all(np.isfinite(vals)):
            raise NonFiniteState(f"field at t={self.time} contains non-finite entries")

    def with_values(self, values: np.ndarray, time: float | None = None) -> "Field":
        return Field(values, self.time if time is None else time, self.grid)


class PiecewiseFunction:
    """Piecewise data: constants or callables separated by jump locations.

    ``breakpoints`` are strictly increasing; piece ``i`` applies on
    ``(breakpoints[i-1], breakpoints[i]]`` so a point sitting exactly on a
    jump evaluates to the left piece.  Integration splits at the breakpoints,
    handles constant pieces exactly and uses 5-point Gauss-Legendre per
    sub-interval otherwise.
    """

    def __init__(self, breakpoints: Sequence[float], pieces: Sequence[float | Callable]):
        bp = tuple(float(b) for b in breakpoints)
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ValidationError(f"breakpoints must be strictly increasing, got {bp}")
        if len(pieces) != len(bp) + 1:
            raise ValidationError(
                f"need {len(bp) + 1} pieces for {len(bp)} breakpoints, got {len(pieces)}"
            )
        self.breakpoints = bp
        self.pieces = tuple(pieces)

    @classmethod
    def constant(cls, value: float) -> "PiecewiseFunction":
        return cls((), (float(value),))

    @classmethod
    def step(cls, x0: float, left: float, right: float) -> "PiecewiseFunction":
        """Single jump at ``x0``: ``left`` for x <= x0, ``right`` beyond."""
        return cls((x0,), (float(left), float(right)))

    @classmethod
    def coerce(cls, data) -> "PiecewiseFunction":
        if isinstance(data, cls):
            return data
        if callable(data):
            return cls((), (data,))
        if isinstance(data, (int, float)):
            return cls.constant(data)
        raise ValidationError(f"cannot interpret {type(data).__name__} as piecewise data")

    def piece_at(self, x: float):
        return self.pieces[bisect.bisect_left(self.breakpoints, x)]

    def __call__(self, x):
        if np.ndim(x) == 0:
            p = self.piece_at(float(x))
            return p(float(x)) if callable(p) else p
        x = np.asarray(x, dtype=np.float64)
        out = np.empty_like(x)
        for i, xi in np.ndenumerate(x):
            out[i] = self(float(xi))
        return out

    def _piece_integral(self, piece, a: float, b: float) -> float:
        if not callable(piece):
            return piece * (b - a)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        vals = np.asarray([piece(mid + half * t) for t in _GL_NODES], dtype=np.float64)
        return half * float(np.dot(_GL_WEIGHTS, vals))

    def integrate(self, a: float, b: float) -> float:
        """Integral over ``[a, b]`` (``a <= b``), split at interior breakpoints."""
        if b < a:
            raise ValidationError("integration bounds out of order")
        cuts = [a] + [c for c in self.breakpoints if a < c < b] + [b]
        total = 0.0
        for lo, hi in zip(cuts, cuts[1:]):
            total += self._piece_integral(self.piece_at(hi), lo, hi)
        return total

    def average(self, a: float, b: float) -> float:
        if b == a:
            return float(self(a))
        return self.integrate(a, b) / (b - a)


def project_initial(u0, grid: Grid1D) -> Field:
    """Project initial data onto the grid by exact cell averaging.

    ``u0`` may be a constant, a callable, or a :class:`PiecewiseFunction`;
    jumps are split analytically so piecewise-constant data projects exactly.
    """
    try:
        pw = PiecewiseFunction.coerce(u0)
    except ValidationError as exc:
        raise InvalidInitialData(str(exc)) from exc
    faces = grid.interfaces()
    vals = np.empty(grid.n_cells)
    try:
        for j in range(grid.n_cells):
            vals[j] = pw.average(faces[j], faces[j + 1])
    except (ArithmeticError, ValueError) as exc:
        raise InvalidInitialData(f"initial data failed to evaluate: {exc}") from exc
    if not np.all(np.isfinite(vals)):
        raise InvalidInitialData("initial data projected to non-finite cell averages")
    return Field(vals, 0.0, grid)


@dataclass(frozen=True)
class CoefficientK:
    """Staggered-grid coefficient: one value per interface.

    ``interface_values[i]`` is the average of ``k`` over the ``dx``-wide
    interval centred on interface ``i`` (between cell centres ``i-1`` and
    ``i``).  Length is ``n_cells`` for periodic grids (interface 0 is
    identified with interface ``n_cells``) and ``n_cells + 1`` otherwise.
    """

    grid: Grid1D
    interface_values: np.ndarray
    jump_locations: tuple[float, ...] = ()
    pieces: PiecewiseFunction | None = None

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.interface_values, dtype=np.float64))
        object.__setattr__(self, "interface_values", vals)
        if vals.shape != (self.grid.n_interfaces,):
            raise InvalidCoefficient(
                f"expected {self.grid.n_interfaces} interface values, got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise InvalidCoefficient("coefficient has non-finite interface values")

    @property
    def k_min(self) -> float:
        return float(self.interface_values.min())

    @property
    def k_max(self) -> float:
        return float(self.interface_values.max())

    @property
    def sup_abs(self) -> float:
        return float(np.abs(self.interface_values).max())

    def padded(self) -> np.ndarray:
        """Values at interfaces ``0..n_cells`` (periodic wrap materialised)."""
        if self.grid.periodic:
            return np.concatenate([self.interface_values, self.interface_values[:1]])
        return self.interface_values

    def masked_cells(self, width: int = 3) -> np.ndarray:
        """Boolean mask of cells within ``width`` cells of a declared jump."""
        mask = np.zeros(self.grid.n_cells, dtype=bool)
        if not self.jump_locations:
            return mask
        centers = self.grid.centers()
        for xi in self.jump_locations:
            mask |= np.abs(centers - xi) <= width * self.grid.dx + 1e-12
        return mask


def average_k(k, grid: Grid1D, bounds: tuple[float, float] | None = None) -> CoefficientK:
    """Build the staggered coefficient by exact interface-interval averaging.

    ``k`` may be a constant, a callable, a :class:`PiecewiseFunction` or a
    raw ``(breakpoints, pieces)`` pair.  Outside the domain the coefficient is
    extended by its boundary value (outflow grids) or wrapped (periodic
    grids).  Declared ``bounds=(lo, hi)`` are enforced on the computed
    interface values.
    """
    if isinstance(k, tuple) and len(k) == 2 and not isinstance(k[0], (int, float)):
        try:
            pw = PiecewiseFunction(k[0], k[1])
        except ValidationError as exc:
            raise InvalidCoefficient(str(exc)) from exc
    else:
        try:
            pw = PiecewiseFunction.coerce(k)
        except ValidationError as exc:
            raise InvalidCoefficient(str(exc)) from exc
    for xi in pw.breakpoints:
        if not (grid.x_left <= xi <= grid.x_right):
            raise InvalidCoefficient(
                f"coefficient jump at {xi} lies outside the domain "
                f"[{grid.x_left}, {grid.x_right}]"
            )

    dx, xl, xr = grid.dx, grid.x_left, grid.x_right
    length = xr - xl
    n_if = grid.n_interfaces
    vals = np.empty(n_if)
    for i in range(n_if):
        lo = xl + i * dx - 0.5 * dx
        hi = lo + dx
        if grid.periodic:
            # wrap the straddling end interval back into the domain
            if lo < xl:
                total = pw.integrate(lo + length, xr) + pw.integrate(xl, hi)
            else:
                total = pw.integrate(lo, hi)
        else:
            total = 0.0
            if lo < xl:
                total += float(pw(xl)) * (xl - lo)
            if hi > xr:
                total += float(pw(xr)) * (hi - xr)
            total += pw.integrate(max(lo, xl), min(hi, xr))
        vals[i] = total / dx

    if bounds is not None:
        lo_b, hi_b = bounds
        if vals.min() < lo_b - 1e-12 or vals.max() > hi_b + 1e-12:
            raise InvalidCoefficient(
                f"coefficient range [{vals.min():.6g}, {vals.max():.6g}] violates "
                f"declared bounds [{lo_b}, {hi_b}]"
            )
    return CoefficientK(grid, vals, pw.breakpoints, pw)


@dataclass(frozen=True)
class FluxModel:
    """Flux ``f(k, u)`` together with the metadata the schemes need.

    For multiplicative models ``f(k, u) = k * f_tilde(u)``; ``eo_sign_changes``
    lists the roots of ``f_tilde'`` so the Engquist-Osher integral can be
    evaluated in closed form, and ``speed_extrema`` lists the interior
    critical points of ``f_tilde'`` used for exact local wave-speed bounds.
    Non-multiplicative models supply those per ``k`` via callables.

    ``diffusion_factor``/``relaxation_factor`` are the optional state-dependent
    weights of the generalized capillarity scheme (the second-order and the
    mixed space-time regularization terms respectively).
    """

    name: str
    f: Callable
    df_du: Callable
    u_bounds: tuple[float, float]
    k_multiplicative: bool = False
    f_tilde: Callable | None = None
    df_tilde: Callable | None = None
    eo_sign_changes: tuple[float, ...] | None = None
    speed_extrema: tuple[float, ...] | Callable | None = ()
    diffusion_factor: Callable | None = None
    relaxation_factor: Callable | None = None
    kernel_id: int = -1

    def __post_init__(self):
        lo, hi = self.u_bounds
        if not hi > lo:
            raise ValidationError(f"u_bounds must be increasing, got {self.u_bounds}")
        if self.k_multiplicative and (self.f_tilde is None or self.df_tilde is None):
            raise ValidationError("multiplicative models must supply f_tilde and df_tilde")

    def speed_points(self, k: float) -> tuple[float, ...]:
        """Interior critical points of ``u -> d_u f(k, u)`` within ``u_bounds``."""
        se = self.speed_extrema
        if se is None:
            return ()
        if callable(se):
            return tuple(se(k))
        return tuple(se)

    def max_speed(self, k_lo: float, k_hi: float, n_samples: int = 2049) -> float:
        """``max |d_u f(k, u)|`` over ``u_bounds`` and ``[k_lo, k_hi]``.

        Evaluated by dense sampling augmented with the declared critical
        points; for multiplicative models the k-dependence factors out.
        """
        us = np.linspace(self.u_bounds[0], self.u_bounds[1], n_samples)
        if self.k_multiplicative:
            kk = max(abs(k_lo), abs(k_hi))
            pts = np.concatenate([us, np.asarray(self.speed_points(1.0), dtype=float)])
            pts = pts[(pts >= self.u_bounds[0]) & (pts <= self.u_bounds[1])]
            return kk * float(np.max(np.abs(self.df_tilde(pts))))
        best = 0.0
        for k in np.linspace(k_lo, k_hi, 9):
            pts = np.concatenate([us, np.asarray(self.speed_points(k), dtype=float)])
            pts = pts[(pts >= self.u_bounds[0]) & (pts <= self.u_bounds[1])]
            best = max(best, float(np.max(np.abs(self.df_du(k, pts)))))
        return best

    def sup_f(self, k_lo: float, k_hi: float, n_samples: int = 2049) -> float:
        """``max |f(k, u)|`` over ``u_bounds`` and ``[k_lo, k_hi]``."""
        us = np.linspace(self.u_bounds[0], self.u_bounds[1], n_samples)
        if self.k_multiplicative:
            return max(abs(k_lo), abs(k_hi)) * float(np.max(np.abs(self.f_tilde(us))))
        best = 0.0
        for k in np.linspace(k_lo, k_hi, 9):
            best = max(best, float(np.max(np.abs(self.f(k, us)))))
        return best


@dataclass(frozen=True)
class SchemeParams:
    """Regularization strengths and time-step policy constants.

    ``mu(dx) = mu_constant * dx**mu_exponent`` scales the dispersive /
    relaxation term; exponent 2 keeps diffusion and dispersion balanced as
    the grid refines while exponents above 2 let dispersion vanish faster.
    ``delta`` is the slack used by the energy-stable time-step bounds;
    ``cfl_number`` drives the convective (practical) bound.
    """

    beta: float = 1.0
    gamma: float = 1.0
    mu_constant: float = 1.0
    mu_exponent: float = 2.0
    cfl_number: float = 0.3
    delta: float = 0.5

    def __post_init__(self):
        if self.beta < 0 or self.gamma < 0:
            raise ValidationError("beta and gamma must be non-negative")
        if self.mu_constant <= 0:
            raise ValidationError("mu_constant must be positive")
        if self.mu_exponent < 2:
            raise ValidationError(f"mu_exponent must be >= 2, got {self.mu_exponent}")
        if not (0 < self.cfl_number < 1):
            raise ValidationError(f"cfl_number must lie in (0, 1), got {self.cfl_number}")
        if self.delta <= 0:
            raise ValidationError("delta must be positive")

    def mu(self, dx: float) -> float:
        return self.mu_constant * dx**self.mu_exponent


# ---------------------------------------------------------------------------
# discrete difference calculus


def extend(values: np.ndarray, bc: BoundaryCondition, width: int = 1) -> np.ndarray:
    """Pad with ghost cells: periodic wrap or zero-gradient end copies."""
    if width < 1:
        return np.asarray(values)
    if bc is BoundaryCondition.PERIODIC:
        return np.concatenate([values[-width:], values, values[:width]])
    left = np.full(width, values[0])
    right = np.full(width, values[-1])
    return np.concatenate([left, values, right])


def diff_forward_all(field: Field) -> np.ndarray:
    """Forward difference ``(u[j+1] - u[j]) / dx`` for every cell."""
    ext = extend(field.values, field.grid.bc, 1)
    return (ext[2:] - ext[1:-1]) / field.grid.dx


def diff_backward_all(field: Field) -> np.ndarray:
    """Backward difference ``(u[j] - u[j-1]) / dx`` for every cell."""
    ext = extend(field.values, field.grid.bc, 1)
    return (ext[1:-1] - ext[:-2]) / field.grid.dx


def diff_forward(field: Field, j: int) -> float:
    return float(diff_forward_all(field)[j])


def diff_backward(field: Field, j: int) -> float:
    return float(diff_backward_all(field)[j])
