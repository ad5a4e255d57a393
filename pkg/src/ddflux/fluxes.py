"""Two-point monotone numerical fluxes at cell interfaces.

Three flavours are provided:

* Engquist-Osher, split in closed form when the sign changes of ``f'``
  are known, otherwise by adaptive quadrature of ``|f'|``;
* local Lax-Friedrichs, with the exact maximum wave speed over the
  convex hull of the two states;
* Lax-Friedrichs with one fixed global speed.

For fluxes of the form ``k * f(u)`` the two-point value is computed on the
``k``-free factor and scaled; a negative coefficient transposes the
argument order, which upwinds against the reversed characteristics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .core import BoundaryCondition, CoefficientK, FluxModel, extend
from .errors import FluxEvaluationError, ValidationError

_QUAD_TOL = 1.0e-12
_MAX_DEPTH = 60


class FluxKind(Enum):
    ENGQUIST_OSHER = "engquist_osher"
    LOCAL_LAX_FRIEDRICHS = "local_lax_friedrichs"
    GLOBAL_LAX_FRIEDRICHS = "global_lax_friedrichs"


_NF_CODE = {
    FluxKind.ENGQUIST_OSHER: 0,
    FluxKind.LOCAL_LAX_FRIEDRICHS: 1,
    FluxKind.GLOBAL_LAX_FRIEDRICHS: 2,
}


@dataclass(frozen=True)
class NumericalFlux:
    """A flux recipe: which two-point formula, for which flux model."""

    kind: FluxKind
    model: FluxModel
    global_speed: float | None = None

    def __post_init__(self) -> None:
        if self.kind is FluxKind.GLOBAL_LAX_FRIEDRICHS:
            if self.global_speed is None or not (self.global_speed > 0.0):
                raise ValidationError(
                    "global Lax-Friedrichs requires a positive global_speed"
                )


def _adaptive_simpson(g, a, b, tol):
    """Integrate g over [a, b] adaptively; raises FluxEvaluationError on
    failure to converge."""

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, eps, depth):
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl = g(xl)
        fr = g(xr)
        left = simpson(x0, xm, f0, fl, f1)
        right = simpson(xm, x2, f1, fr, f2)
        if depth > _MAX_DEPTH:
            raise FluxEvaluationError(
                "adaptive quadrature failed to converge to tolerance "
                f"{tol:g} on [{a:g}, {b:g}]"
            )
        if abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return recurse(x0, xm, f0, fl, f1, left, 0.5 * eps, depth + 1) + recurse(
            xm, x2, f1, fr, f2, right, 0.5 * eps, depth + 1
        )

    if a == b:
        return 0.0
    fa, fm, fb = g(a), g(0.5 * (a + b)), g(b)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)


def eo_flux(u, v, f_of, df_of, sign_changes=None, quad_tol=_QUAD_TOL):
    """Engquist-Osher value ``(f(u)+f(v))/2 - (1/2)\\int_u^v |f'|``.

    With ``sign_changes`` (the zeros of ``f'``) the integral telescopes into
    exact ``|f|`` differences; without it the integrand is handled by
    adaptive Simpson quadrature to ``quad_tol``.
    """
    u = float(u)
    v = float(v)
    lo, hi = (u, v) if u <= v else (v, u)
    if sign_changes is not None:
        total = 0.0
        prev = lo
        for root in sign_changes:
            c = min(max(float(root), lo), hi)
            total += abs(f_of(c) - f_of(prev))
            prev = c
        total += abs(f_of(hi) - f_of(prev))
    else:
        total = _adaptive_simpson(lambda x: abs(df_of(x)), lo, hi, quad_tol)
    sgn = 1.0 if v >= u else -1.0
    return 0.5 * (f_of(u) + f_of(v)) - 0.5 * sgn * total


def hull_speed(model: FluxModel, k: float, u, v) -> float:
    """Exact ``max |d f / d u|`` over the interval spanned by ``u`` and ``v``."""
    lo, hi = (u, v) if u <= v else (v, u)
    candidates = [lo, hi]
    for c in model.speed_points(k):
        if lo < c < hi:
            candidates.append(c)
    return max(abs(model.df_du(k, c)) for c in candidates)


def llf_flux(u, v, k, model: FluxModel) -> float:
    """Local Lax-Friedrichs with the exact hull wave speed."""
    a = hull_speed(model, k, u, v)
    return 0.5 * (model.f(k, u) + model.f(k, v)) - 0.5 * a * (v - u)


def interface_flux(k_half: float, u_left: float, u_right: float, nf: NumericalFlux) -> float:
    """Single-interface numerical flux honouring the coefficient sign rule."""
    model = nf.model
    if nf.kind is FluxKind.GLOBAL_LAX_FRIEDRICHS:
        a = float(nf.global_speed)
        return 0.5 * (model.f(k_half, u_left) + model.f(k_half, u_right)) - 0.5 * a * (
            u_right - u_left
        )
    if model.k_multiplicative:
        a, b = (u_left, u_right) if k_half >= 0.0 else (u_right, u_left)
        if nf.kind is FluxKind.ENGQUIST_OSHER:
            base = eo_flux(a, b, model.f_tilde, model.df_tilde, model.eo_sign_changes)
        else:
            speed = hull_speed(model, 1.0, a, b)
            base = 0.5 * (model.f_tilde(a) + model.f_tilde(b)) - 0.5 * speed * (b - a)
        return k_half * base
    if nf.kind is FluxKind.ENGQUIST_OSHER:
        return eo_flux(
            u_left,
            u_right,
            lambda w: model.f(k_half, w),
            lambda w: model.df_du(k_half, w),
            sign_changes=None,
        )
    return llf_flux(u_left, u_right, k_half, model)


class PreparedFlux:
    """Kernel-ready arrays for one (model, flux, coefficient) combination.

    Splitting preparation from evaluation keeps the per-step cost down to a
    single compiled sweep; everything shape- or coefficient-dependent is
    assembled once here.
    """

    def __init__(self, nf: NumericalFlux, k: CoefficientK, dt: float | None = None):
        self.nf = nf
        self.model = nf.model
        self.k = k
        self.grid = k.grid
        self.kpad = k.padded()
        self.nf_code = _NF_CODE[nf.kind]
        self.glf_a = float(nf.global_speed) if nf.global_speed is not None else 0.0
        self.roots = np.asarray(self.model.eo_sign_changes or (), dtype=np.float64)
        self._build_crit()
        self.kernel_ok = self.model.kernel_id >= 0 and not (
            nf.kind is FluxKind.ENGQUIST_OSHER and not self.model.k_multiplicative
        )

    def _build_crit(self) -> None:
        model = self.model
        pts = model.speed_extrema
        if pts is None:
            rows = [()]
        elif callable(pts):
            rows = [tuple(pts(float(kv))) for kv in self.kpad]
        else:
            rows = [tuple(pts)]
        width = max((len(r) for r in rows), default=0)
        crit = np.zeros((len(rows), max(width, 1)))
        counts = np.zeros(len(rows), dtype=np.int64)
        for i, r in enumerate(rows):
            counts[i] = len(r)
            for j, c in enumerate(r):
                crit[i, j] = c
        self.crit = crit
        self.crit_counts = counts

    def sweep(self, u_ext: np.ndarray) -> np.ndarray:
        """Interface fluxes from a one-ghost extended profile."""
        ul = u_ext[:-1]
        ur = u_ext[1:]
        if self.kernel_ok:
            return _kernels.flux_sweep(
                ul,
                ur,
                self.kpad,
                self.model.kernel_id,
                self.nf_code,
                self.glf_a,
                self.roots,
                self.crit,
                self.crit_counts,
            )
        out = np.empty(ul.shape[0])
        for i in range(ul.shape[0]):
            out[i] = interface_flux(self.kpad[i], ul[i], ur[i], self.nf)
        return out

    def f_at(self, c: float) -> np.ndarray:
        """``f(k_i, c)`` along the interfaces, for one constant state ``c``."""
        return np.asarray(
            [self.model.f(kv, c) for kv in self.kpad], dtype=np.float64
        )

    def constant_table(self, cs: np.ndarray) -> np.ndarray:
        return np.vstack([self.f_at(float(c)) for c in cs])

    def entropy(self, uo_ext, un, h, fkc, cs, lam) -> np.ndarray:
        """Per-cell entropy production against each constant in ``cs``."""
        if self.kernel_ok:
            return _kernels.entropy_sweep(
                uo_ext,
                un,
                self.kpad,
                h,
                fkc,
                cs,
                lam,
                self.model.kernel_id,
                self.nf_code,
                self.glf_a,
                self.roots,
                self.crit,
                self.crit_counts,
            )
        return self._entropy_generic(uo_ext, un, h, fkc, cs, lam)

    def _entropy_generic(self, uo_ext, un, h, fkc, cs, lam) -> np.ndarray:
        n = un.shape[0]
        out = np.empty((cs.shape[0], n))
        ul = uo_ext[:-1]
        ur = uo_ext[1:]
        for ci, c in enumerate(cs):
            phi = np.empty(n + 1)
            for i in range(n + 1):
                lo = min(ul[i], ur[i])
                hi = max(ul[i], ur[i])
                if c <= lo:
                    phi[i] = h[i] - fkc[ci, i]
                elif c >= hi:
                    phi[i] = fkc[ci, i] - h[i]
                else:
                    top = interface_flux(self.kpad[i], max(ul[i], c), max(ur[i], c), self.nf)
                    bot = interface_flux(self.kpad[i], min(ul[i], c), min(ur[i], c), self.nf)
                    phi[i] = top - bot
            sgn = np.sign(un - c)
            out[ci] = (
                np.abs(un - c)
                - np.abs(uo_ext[1 : n + 1] - c)
                + lam * (phi[1:] - phi[:-1])
                + lam * sgn * (fkc[ci, 1:] - fkc[ci, :-1])
            )
        return out


def interface_flux_profile(values, k: CoefficientK, nf: NumericalFlux) -> np.ndarray:
    """All interface fluxes for a cell-average profile.

    Returns ``n_cells`` values on a periodic grid (interface ``i`` sits left
    of cell ``i``) and ``n_cells + 1`` on an outflow grid.
    """
    values = np.asarray(values, dtype=np.float64)
    grid = k.grid
    if values.shape != (grid.n_cells,):
        raise ValidationError(
            f"profile has shape {values.shape}, expected ({grid.n_cells},)"
        )
    u_ext = extend(values, grid.bc, 1)
    prepared = PreparedFlux(nf, k)
    h = prepared.sweep(u_ext)
    if grid.bc is BoundaryCondition.PERIODIC:
        return h[: grid.n_cells]
    return h


def max_wave_speed(model: FluxModel, k: CoefficientK) -> float:
    """Largest ``|df/du|`` over the coefficient range and state bounds."""
    span = model.max_speed(k.k_min, k.k_max)
    if not math.isfinite(span):
        raise FluxEvaluationError("wave speed bound is not finite")
    return span
