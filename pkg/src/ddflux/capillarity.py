"""Implicit-in-the-third-derivative stepping for the capillarity scheme.

One step solves

    (I - gamma*mu*D+D-) (u^{n+1} - u^n) = dt * (-D- h + beta*dx*D+D- u^n),

i.e. the convective and diffusive terms are explicit while the mixed
space-time capillarity term turns into a tridiagonal system for the time
increment.  ``step_general`` is the saturation-weighted variant in which
both regularization terms carry interface coefficients built from the
model's diffusion/relaxation factors.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    BoundaryCondition,
    CoefficientK,
    Field,
    FluxModel,
    Grid1D,
    SchemeParams,
    extend,
)
from .errors import CFLInfeasible, CoefficientDegeneracy, ValidationError
from .fluxes import NumericalFlux, PreparedFlux, max_wave_speed
from .tridiag import solve_tridiagonal


class CflMode(Enum):
    PRACTICAL = "practical"
    STRICT = "strict"


@dataclass(frozen=True)
class CflResult:
    """Chosen time step plus which bound produced it."""

    dt: float
    lam: float
    active: str
    mode: CflMode
    bounds: dict[str, float]


def _slack_margin(params: SchemeParams) -> float:
    m = min(1.0 - params.delta, params.beta - params.delta)
    if m <= 0.0:
        raise CFLInfeasible(
            f"delta={params.delta:g} leaves no slack: need delta < "
            f"min(1, beta) = {min(1.0, params.beta):g}"
        )
    return m


def _factor_bound(model: FluxModel, n_samples: int = 2049) -> float:
    """Largest diffusion/relaxation factor value over the state bounds."""
    lo, hi = model.u_bounds
    u = np.linspace(lo, hi, n_samples)
    top = 0.0
    for factor in (model.diffusion_factor, model.relaxation_factor):
        if factor is not None:
            top = max(top, float(np.max(np.abs(factor(u)))))
    return top


def _finalize(dt_bounds: dict[str, float], dx: float, mode: CflMode) -> CflResult:
    finite = {name: lam for name, lam in dt_bounds.items() if math.isfinite(lam)}
    if not finite or min(finite.values()) <= 0.0:
        raise CFLInfeasible("no positive time step satisfies the configured bounds")
    active = min(finite, key=finite.get)
    lam = finite[active]
    return CflResult(dt=lam * dx, lam=lam, active=active, mode=mode, bounds=dict(dt_bounds))


def cfl_dt(
    grid: Grid1D,
    k: CoefficientK,
    model: FluxModel,
    params: SchemeParams,
    mode: CflMode = CflMode.PRACTICAL,
) -> CflResult:
    """Time step for the capillarity scheme.

    Practical mode intersects the advective bound
    ``cfl_number * dx / max|df/du|`` with the relaxation-balance bound
    ``lambda <= 2m / (1 + beta*dx^2/(gamma*mu))`` where
    ``m = min(1-delta, beta-delta)``.  Strict mode replaces the advective
    bound by the smallness requirement ``2M + lambda/2 <= m`` with
    ``M = max(sup|f|, sup|df/du|, sup|k|)``; when that inequality rules out
    every positive step (which happens already for order-one data) the
    bound degrades gracefully to ``lambda <= 2m/(1+2M)`` with a warning.
    """
    m = _slack_margin(params)
    dx = grid.dx
    gm = params.gamma * params.mu(dx)
    bounds: dict[str, float] = {}

    if gm > 0.0:
        bounds["relaxation"] = 2.0 * m / (1.0 + params.beta * dx * dx / gm)
    elif params.beta > 0.0:
        # No implicit smoothing to lean on: limit the explicit diffusion.
        bounds["relaxation"] = m / (2.0 * params.beta)
    else:
        bounds["relaxation"] = math.inf

    speed = max_wave_speed(model, k)
    if mode is CflMode.PRACTICAL:
        bounds["advection"] = params.cfl_number / speed if speed > 0.0 else math.inf
    else:
        big_m = max(model.sup_f(k.k_min, k.k_max), speed, k.sup_abs, _factor_bound(model))
        lam1 = 2.0 * (m - 2.0 * big_m)
        if lam1 <= 0.0:
            lam1 = 2.0 * m / (1.0 + 2.0 * big_m)
            warnings.warn(
                "strict smallness bound 2M + lambda/2 <= m is infeasible for "
                f"M = {big_m:g}, m = {m:g}; using lambda = 2m/(1+2M) instead",
                RuntimeWarning,
                stacklevel=2,
            )
        bounds["smallness"] = lam1
    return _finalize(bounds, dx, mode)


class CapillarityStepper:
    """Owns the tridiagonal workspace for a fixed (grid, k, dt) run."""

    def __init__(
        self,
        grid: Grid1D,
        k: CoefficientK,
        nf: NumericalFlux,
        params: SchemeParams,
        dt: float,
    ):
        if not (dt > 0.0 and math.isfinite(dt)):
            raise ValidationError(f"dt must be positive and finite, got {dt!r}")
        if k.grid is not grid and k.grid != grid:
            raise ValidationError("coefficient was averaged on a different grid")
        self.grid = grid
        self.k = k
        self.nf = nf
        self.model = nf.model
        self.params = params
        self.dt = dt
        self.lam = dt / grid.dx
        self.gamma_mu = params.gamma * params.mu(grid.dx)
        self.diff_c = params.beta * dt / grid.dx
        self.prepared = PreparedFlux(nf, k)
        self._build_uniform_operator()

    def _build_uniform_operator(self) -> None:
        n = self.grid.n_cells
        c = self.gamma_mu / self.grid.dx**2
        lower = np.full(n, -c)
        upper = np.full(n, -c)
        diag = np.full(n, 1.0 + 2.0 * c)
        if not self.grid.periodic:
            # Ghost increments copy the boundary cell, so the end rows see
            # only their single interior neighbour.
            diag[0] = 1.0 + c
            diag[-1] = 1.0 + c
            lower[0] = 0.0
            upper[-1] = 0.0
        self._uniform_bands = (lower, diag, upper)

    def _solve(self, lower, diag, upper, rhs) -> np.ndarray:
        return solve_tridiagonal(
            lower,
            diag,
            upper,
            rhs,
            bc=self.grid.bc,
            require_dominance=False,
        )

    def _explicit_rhs(self, u_ext: np.ndarray, weights: np.ndarray | None) -> np.ndarray:
        h = self.prepared.sweep(u_ext)
        conv = -self.lam * (h[1:] - h[:-1])
        if weights is None:
            diff = self.diff_c * (u_ext[2:] - 2.0 * u_ext[1:-1] + u_ext[:-2])
        else:
            grad = u_ext[1:] - u_ext[:-1]
            flux = weights * grad
            diff = self.diff_c * (flux[1:] - flux[:-1])
        return conv + diff

    def step(self, field: Field) -> Field:
        """Advance one dt with unit regularization weights."""
        self._check(field)
        u = field.values
        u_ext = extend(u, self.grid.bc, 1)
        rhs = self._explicit_rhs(u_ext, None)
        if self.gamma_mu > 0.0:
            lower, diag, upper = self._uniform_bands
            w = self._solve(lower, diag, upper, rhs)
        else:
            w = rhs
        return Field(u + w, field.time + self.dt, self.grid)

    def step_general(self, field: Field) -> Field:
        """Advance one dt with interface weights from the model's
        diffusion and relaxation factors, frozen at time level n."""
        if self.model.diffusion_factor is None or self.model.relaxation_factor is None:
            raise ValidationError(
                f"model '{self.model.name}' does not define diffusion/relaxation factors"
            )
        self._check(field)
        u = field.values
        kpad = self.prepared.kpad
        g_ext = extend(np.asarray(self.model.diffusion_factor(u), dtype=np.float64), self.grid.bc, 1)
        h_ext = extend(np.asarray(self.model.relaxation_factor(u), dtype=np.float64), self.grid.bc, 1)
        g_w = kpad * 0.5 * (g_ext[:-1] + g_ext[1:])
        h_w = kpad * 0.5 * (h_ext[:-1] + h_ext[1:])
        if not (np.all(np.isfinite(g_w)) and np.all(np.isfinite(h_w))):
            raise CoefficientDegeneracy("regularization weights are not finite")
        if np.any(h_w < 0.0) or np.any(g_w < 0.0):
            raise CoefficientDegeneracy(
                "negative regularization weight: min diffusion "
                f"{float(np.min(g_w)):g}, min relaxation {float(np.min(h_w)):g}"
            )
        u_ext = extend(u, self.grid.bc, 1)
        rhs = self._explicit_rhs(u_ext, g_w)
        if self.gamma_mu > 0.0:
            c = (self.gamma_mu / self.grid.dx**2) * h_w
            n = self.grid.n_cells
            lower = -c[:n]
            upper = -c[1 : n + 1]
            diag = 1.0 + c[:n] + c[1 : n + 1]
            if not self.grid.periodic:
                diag = diag.copy()
                lower = lower.copy()
                upper = upper.copy()
                diag[0] = 1.0 + c[1]
                diag[-1] = 1.0 + c[n - 1]
                lower[0] = 0.0
                upper[-1] = 0.0
            w = self._solve(lower, diag, upper, rhs)
        else:
            w = rhs
        return Field(u + w, field.time + self.dt, self.grid)

    def advance(self, field: Field) -> Field:
        """General step when the model supplies weights, plain step otherwise."""
        if self.model.diffusion_factor is not None and self.model.relaxation_factor is not None:
            return self.step_general(field)
        return self.step(field)

    def _check(self, field: Field) -> None:
        if field.grid != self.grid:
            raise ValidationError("field lives on a different grid than the stepper")
