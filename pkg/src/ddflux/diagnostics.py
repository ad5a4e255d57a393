"""Solution diagnostics: norms, energy budgets, entropy residuals, and
plateau detection for classifying shock structures."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BoundaryCondition,
    CoefficientK,
    Field,
    FluxModel,
    Grid1D,
    SchemeParams,
    diff_backward_all,
    extend,
)
from .errors import ValidationError
from .fluxes import NumericalFlux, PreparedFlux


@dataclass(frozen=True)
class Norms:
    l1: float
    l2: float
    linf: float
    bv: float


@dataclass(frozen=True)
class StepDiagnostics:
    """One row of the per-step report."""

    n: int
    t: float
    mass: float
    l1: float
    l2: float
    linf: float
    bv: float
    energy: float
    entropy_residual_max: float


def norms(field: Field) -> Norms:
    u = field.values
    dx = field.grid.dx
    bv = float(np.sum(np.abs(np.diff(u))))
    if field.grid.periodic and u.size > 1:
        bv += abs(float(u[0] - u[-1]))
    return Norms(
        l1=float(dx * np.sum(np.abs(u))),
        l2=float(math.sqrt(dx * np.sum(u * u))),
        linf=float(np.max(np.abs(u))) if u.size else 0.0,
        bv=bv,
    )


def mass(field: Field) -> float:
    return float(field.grid.dx * np.sum(field.values))


def energy(field: Field, params: SchemeParams, scheme_kind: str) -> float:
    """Discrete energy: the explicit scheme tracks ``0.5*||u||^2``; the
    implicit scheme adds the gradient term weighted by the regularization
    coefficients."""
    dx = field.grid.dx
    u = field.values
    base = 0.5 * dx * float(np.sum(u * u))
    if scheme_kind == "dispersive":
        return base
    if scheme_kind != "capillarity":
        raise ValidationError(f"unknown scheme kind {scheme_kind!r}")
    du = diff_backward_all(field)
    weight = 0.5 * (params.gamma * params.mu(dx) + params.beta * dx * dx)
    return base + weight * dx * float(np.sum(du * du))


def kruzkov_constants(model: FluxModel, n: int = 21) -> np.ndarray:
    """Uniform grid of comparison constants spanning the state bounds."""
    lo, hi = model.u_bounds
    return np.linspace(lo, hi, n)


def entropy_residual(
    u_old: Field,
    u_new: Field,
    k: CoefficientK,
    nf: NumericalFlux,
    c: float,
    dt: float,
) -> np.ndarray:
    """Per-cell, per-step entropy production against the constant ``c``.

    The returned values are the undivided cell budgets

        |u^{n+1}_j - c| - |u^n_j - c| + lambda*(Phi_{j+1/2} - Phi_{j-1/2})
        + lambda*sgn(u^{n+1}_j - c)*(f(k_{j+1/2}, c) - f(k_{j-1/2}, c)),

    where Phi is the two-point entropy flux built from the scheme's own
    numerical flux evaluated at states clipped against ``c``.  Positive
    entries flag entropy production; cells within three cells of a
    coefficient jump are masked to NaN because the pointwise inequality
    only applies away from the jump set.
    """
    grid = u_old.grid
    if u_new.grid != grid:
        raise ValidationError("fields live on different grids")
    if not (dt > 0.0 and math.isfinite(dt)):
        raise ValidationError(f"dt must be positive and finite, got {dt!r}")
    prepared = PreparedFlux(nf, k)
    cs = np.asarray([float(c)], dtype=np.float64)
    res = _entropy_matrix(prepared, u_old.values, u_new.values, cs, dt / grid.dx)[0]
    masked = k.masked_cells(3)
    if masked.size:
        res = res.copy()
        res[masked] = np.nan
    return res


def _entropy_matrix(prepared: PreparedFlux, u_old, u_new, cs, lam) -> np.ndarray:
    u_ext = extend(u_old, prepared.grid.bc, 1)
    h = prepared.sweep(u_ext)
    fkc = prepared.constant_table(cs)
    return prepared.entropy(u_ext, u_new, h, fkc, np.asarray(cs, dtype=np.float64), lam)


def entropy_residual_max(
    u_old: Field,
    u_new: Field,
    k: CoefficientK,
    nf: NumericalFlux,
    dt: float,
    constants: np.ndarray | None = None,
    prepared: PreparedFlux | None = None,
    fkc: np.ndarray | None = None,
) -> float:
    """Largest unmasked residual over a sweep of comparison constants.

    ``prepared``/``fkc`` allow a caller stepping many times to reuse the
    kernel tables instead of rebuilding them each step.
    """
    grid = u_old.grid
    if prepared is None:
        prepared = PreparedFlux(nf, k)
    cs = kruzkov_constants(nf.model) if constants is None else np.asarray(constants, float)
    u_ext = extend(u_old.values, grid.bc, 1)
    h = prepared.sweep(u_ext)
    if fkc is None:
        fkc = prepared.constant_table(cs)
    res = prepared.entropy(u_ext, u_new.values, h, fkc, cs, dt / grid.dx)
    masked = k.masked_cells(3)
    if masked.size:
        keep = np.ones(grid.n_cells, dtype=bool)
        keep[masked] = False
        res = res[:, keep]
    if res.size == 0:
        return 0.0
    return float(np.max(res))


@dataclass(frozen=True)
class Plateau:
    """A maximal near-constant run of cells (inclusive index span)."""

    value: float
    start: int
    end: int

    @property
    def width(self) -> int:
        return self.end - self.start + 1


def classify_structure(
    field: Field | np.ndarray,
    tolerance: float | None = None,
    min_width: int | None = None,
) -> list[Plateau]:
    """Detect plateaus: maximal runs of at least ``min_width`` cells whose
    values stay within ``tolerance`` of the running mean.

    Defaults: tolerance is 1% of the data range, min_width 5% of the cell
    count.  Adjacent detected runs whose means agree within tolerance and
    whose gap is shorter than min_width are merged: decaying oscillations
    around a constant state would otherwise split it in two.  Two plateaus
    indicate a plain shock between two states; three indicate an
    intermediate state wedged between two fronts.
    """
    u = field.values if isinstance(field, Field) else np.asarray(field, dtype=np.float64)
    n = u.shape[0]
    if n == 0:
        return []
    rng = float(np.max(u) - np.min(u))
    tol = tolerance if tolerance is not None else max(0.01 * rng, 1e-12)
    if not (tol > 0.0):
        raise ValidationError(f"tolerance must be positive, got {tol!r}")
    width = min_width if min_width is not None else max(2, int(round(0.05 * n)))
    if width < 1:
        raise ValidationError(f"min_width must be at least 1, got {width!r}")

    plateaus: list[Plateau] = []
    start = 0
    while start < n:
        total = u[start]
        lo = hi = u[start]
        end = start + 1
        while end < n:
            cand_total = total + u[end]
            cand_lo = min(lo, u[end])
            cand_hi = max(hi, u[end])
            cand_mean = cand_total / (end - start + 1)
            if cand_hi - cand_mean < tol and cand_mean - cand_lo < tol:
                total, lo, hi = cand_total, cand_lo, cand_hi
                end += 1
            else:
                break
        if end - start >= width:
            plateaus.append(Plateau(value=total / (end - start), start=start, end=end - 1))
            start = end
        else:
            start += 1
    return _merge_close(plateaus, tol, width)


def _merge_close(plateaus: list[Plateau], tol: float, width: int) -> list[Plateau]:
    merged: list[Plateau] = []
    for p in plateaus:
        if merged:
            q = merged[-1]
            gap = p.start - q.end - 1
            if abs(p.value - q.value) < tol and gap <= width:
                w_q, w_p = q.width, p.width
                merged[-1] = Plateau(
                    value=(q.value * w_q + p.value * w_p) / (w_q + w_p),
                    start=q.start,
                    end=p.end,
                )
                continue
        merged.append(p)
    return merged


def restrict(values: np.ndarray, factor: int) -> np.ndarray:
    """Block-average a fine-cell profile onto a grid ``factor`` times coarser."""
    values = np.asarray(values, dtype=np.float64)
    if factor < 1 or values.shape[0] % factor != 0:
        raise ValidationError(
            f"cannot restrict {values.shape[0]} cells by a factor of {factor}"
        )
    return values.reshape(-1, factor).mean(axis=1)


def l1_restricted_difference(coarse: Field, fine: Field) -> float:
    """L1 gap between a coarse run and a finer run block-averaged onto it."""
    nc = coarse.grid.n_cells
    nf_cells = fine.grid.n_cells
    if nf_cells % nc != 0:
        raise ValidationError(
            f"fine resolution {nf_cells} is not a multiple of coarse {nc}"
        )
    projected = restrict(fine.values, nf_cells // nc)
    return float(coarse.grid.dx * np.sum(np.abs(coarse.values - projected)))


class APrioriAccumulator:
    """Tracks the scheme's scaled space-time sums across a run.

    The four capillarity-side quantities are the sup of ``dx*sum u^2`` and
    the accumulated ``dx^2*dt*sum (D-u)^2``, ``dx^2*dt*sum (Dt+u)^2`` and
    ``dt*dx^2*mu*sum (Dt+D-u)^2``; the explicit scheme replaces the last
    with ``dt*dx^2*mu*sum (D-^2 u)^2``.  Bounded-in-refinement behaviour of
    these totals is what the convergence theory rides on.
    """

    def __init__(self, grid: Grid1D, params: SchemeParams, scheme_kind: str):
        if scheme_kind not in ("capillarity", "dispersive"):
            raise ValidationError(f"unknown scheme kind {scheme_kind!r}")
        self.grid = grid
        self.params = params
        self.scheme_kind = scheme_kind
        self.mu = params.mu(grid.dx)
        self.sup_l2_sq = 0.0
        self.grad_sum = 0.0
        self.time_sum = 0.0
        self.mixed_sum = 0.0
        self._primed = False

    def _grad(self, values: np.ndarray) -> np.ndarray:
        ext = extend(values, self.grid.bc, 1)
        return (ext[1:-1] - ext[:-2]) / self.grid.dx

    def update(self, u_old: Field, u_new: Field, dt: float) -> None:
        dx = self.grid.dx
        if not self._primed:
            self.sup_l2_sq = dx * float(np.sum(u_old.values**2))
            self._primed = True
        self.sup_l2_sq = max(self.sup_l2_sq, dx * float(np.sum(u_new.values**2)))
        g_new = self._grad(u_new.values)
        self.grad_sum += dx * dx * dt * float(np.sum(g_new * g_new))
        du = (u_new.values - u_old.values) / dt
        self.time_sum += dx * dx * dt * float(np.sum(du * du))
        if self.scheme_kind == "capillarity":
            g_old = self._grad(u_old.values)
            mixed = (g_new - g_old) / dt
        else:
            mixed = self._grad(g_new)
        self.mixed_sum += dt * dx * dx * self.mu * float(np.sum(mixed * mixed))

    def totals(self) -> dict[str, float]:
        return {
            "sup_l2_sq": self.sup_l2_sq,
            "grad_sum": self.grad_sum,
            "time_sum": self.time_sum,
            "mixed_sum": self.mixed_sum,
        }


def shock_position(field: Field, u_left: float, u_right: float) -> float:
    """Shock location implied by conservation for a two-state profile."""
    if u_left == u_right:
        raise ValidationError("left and right states must differ")
    grid = field.grid
    excess = float(np.sum(field.values - u_right)) * grid.dx
    return grid.x_left + excess / (u_left - u_right)
