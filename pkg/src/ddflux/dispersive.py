"""Explicit stepping for the diffusive-dispersive scheme.

The update is fully explicit in time level n:

    u^{n+1}_j = u^n_j - dt*D-h + beta*dx*dt*D+D-u + gamma*mu*dt*D+D-^2 u,

where ``D+D-^2`` folds five neighbouring cells into the asymmetric
four-point stencil ``(u_{j+1} - 3u_j + 3u_{j-1} - u_{j-2}) / dx^3``.
Outflow boundaries copy the end cell into both ghost layers.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .core import CoefficientK, Field, FluxModel, Grid1D, SchemeParams, extend
from .errors import ValidationError
from .capillarity import CflMode, CflResult, _finalize, _slack_margin
from .fluxes import NumericalFlux, PreparedFlux, max_wave_speed


def cfl_dt_a(
    grid: Grid1D,
    k: CoefficientK,
    model: FluxModel,
    params: SchemeParams,
    mode: CflMode = CflMode.PRACTICAL,
) -> CflResult:
    """Time step for the explicit scheme.

    Both modes enforce the stability branch
    ``2*lambda*(beta^2*dx^2/(gamma*mu) + 2*gamma*mu/dx^2) <= m`` with
    ``m = min(1-delta, beta-delta)``.  Practical mode adds the advective
    bound ``cfl_number/max|df/du|``; strict mode instead adds the wave
    bound ``8*lambda*(sup|k|*sup|f'|)^2 <= m``.
    """
    m = _slack_margin(params)
    dx = grid.dx
    gm = params.gamma * params.mu(dx)
    bounds: dict[str, float] = {}

    if gm > 0.0:
        denom = params.beta**2 * dx * dx / gm + 2.0 * gm / (dx * dx)
        bounds["stability"] = m / (2.0 * denom) if denom > 0.0 else math.inf
    elif params.beta > 0.0:
        bounds["stability"] = m / (4.0 * params.beta)
    else:
        bounds["stability"] = math.inf

    if mode is CflMode.PRACTICAL:
        speed = max_wave_speed(model, k)
        bounds["advection"] = params.cfl_number / speed if speed > 0.0 else math.inf
    else:
        if model.k_multiplicative:
            wave = k.sup_abs * model.max_speed(1.0, 1.0)
        else:
            wave = max_wave_speed(model, k)
        bounds["wave"] = m / (8.0 * wave * wave) if wave > 0.0 else math.inf
    return _finalize(bounds, dx, mode)


class DispersiveStepper:
    """Explicit marcher for a fixed (grid, k, dt) run."""

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
        self.gamma_mu = params.gamma * params.mu(grid.dx)
        self.prepared = PreparedFlux(nf, k)

    def step(self, field: Field) -> Field:
        if field.grid != self.grid:
            raise ValidationError("field lives on a different grid than the stepper")
        u_ext = extend(field.values, self.grid.bc, 2)
        h = self.prepared.sweep(u_ext[1:-1])
        u_new = _kernels.dispersive_update(
            u_ext, h, self.dt, self.grid.dx, self.params.beta, self.gamma_mu
        )
        return Field(u_new, field.time + self.dt, self.grid)
