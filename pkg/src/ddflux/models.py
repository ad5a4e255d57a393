"""Built-in flux models.

Three multiplicative fluxes (quadratic, cubic, linear) whose wave-speed
structure is known in closed form, plus the non-multiplicative two-phase
flow flux with its capillary diffusion/relaxation weights.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .core import FluxModel

__all__ = [
    "burgers",
    "cubic",
    "linear_advection",
    "two_phase_capillarity",
    "model_registry",
    "TWO_PHASE_CLAMP",
]

# kernel ids understood by the compiled sweeps
KERNEL_BURGERS = 0
KERNEL_CUBIC = 1
KERNEL_LINEAR = 2
KERNEL_TWO_PHASE = 3

_ROOT3 = 1.0 / np.sqrt(3.0)


def burgers(u_bounds: tuple[float, float] = (-2.5, 4.5)) -> FluxModel:
    """Quadratic flux ``f(k, u) = k * u**2 / 2``."""
    return FluxModel(
        name="burgers",
        f=lambda k, u: k * 0.5 * np.asarray(u) ** 2,
        df_du=lambda k, u: k * np.asarray(u),
        u_bounds=u_bounds,
        k_multiplicative=True,
        f_tilde=lambda u: 0.5 * np.asarray(u) ** 2,
        df_tilde=lambda u: np.asarray(u, dtype=np.float64) + 0.0,
        eo_sign_changes=(0.0,),
        speed_extrema=(),
        kernel_id=KERNEL_BURGERS,
    )


def cubic(u_bounds: tuple[float, float] = (-2.5, 4.5)) -> FluxModel:
    """Cubic flux ``f(k, u) = k * (u**3 - u)``; ``f_tilde'`` vanishes at ±1/sqrt(3)."""
    return FluxModel(
        name="cubic",
        f=lambda k, u: k * (np.asarray(u) ** 3 - np.asarray(u)),
        df_du=lambda k, u: k * (3.0 * np.asarray(u) ** 2 - 1.0),
        u_bounds=u_bounds,
        k_multiplicative=True,
        f_tilde=lambda u: np.asarray(u) ** 3 - np.asarray(u),
        df_tilde=lambda u: 3.0 * np.asarray(u) ** 2 - 1.0,
        eo_sign_changes=(-_ROOT3, _ROOT3),
        speed_extrema=(0.0,),
        kernel_id=KERNEL_CUBIC,
    )


def linear_advection(u_bounds: tuple[float, float] = (-2.0, 2.0)) -> FluxModel:
    """Linear flux ``f(k, u) = k * u``."""
    return FluxModel(
        name="linear",
        f=lambda k, u: k * np.asarray(u),
        df_du=lambda k, u: k * np.ones_like(np.asarray(u, dtype=np.float64)),
        u_bounds=u_bounds,
        k_multiplicative=True,
        f_tilde=lambda u: np.asarray(u, dtype=np.float64) + 0.0,
        df_tilde=lambda u: np.ones_like(np.asarray(u, dtype=np.float64)),
        eo_sign_changes=(),
        speed_extrema=(),
        kernel_id=KERNEL_LINEAR,
    )


# Two-phase flow.  Phase mobilities are quadratic in the saturation; the
# capillary pressure derivative blows up at the endpoints, so the
# state-dependent weights are evaluated on a clamped saturation range.
TWO_PHASE_CLAMP = (0.05, 0.95)


def _tp_f(k, u):
    u = np.asarray(u, dtype=np.float64)
    zw = u * u
    zo = (1.0 - u) ** 2
    return zw * (1.0 - k * zo) / (zw + zo)


def _tp_df_du(k, u):
    u = np.asarray(u, dtype=np.float64)
    zw = u * u
    zo = (1.0 - u) ** 2
    s = zw + zo
    num = zw * (1.0 - k * zo)
    dnum = 2.0 * u * (1.0 - k * zo) + zw * (2.0 * k * (1.0 - u))
    ds = 4.0 * u - 2.0
    return (dnum * s - num * ds) / (s * s)


def _tp_mobility(u):
    u = np.clip(np.asarray(u, dtype=np.float64), *TWO_PHASE_CLAMP)
    zw = u * u
    zo = (1.0 - u) ** 2
    return zw * zo / (zw + zo)


def _tp_pressure_slope(u):
    # |P'(u)| for P(u) = (u**(-4/3) - 1)**(1/4); the magnitude is what the
    # diffusion weight needs, and it stays finite on the clamped range.
    u = np.clip(np.asarray(u, dtype=np.float64), *TWO_PHASE_CLAMP)
    return (1.0 / 3.0) * u ** (-7.0 / 3.0) * (u ** (-4.0 / 3.0) - 1.0) ** (-0.75)


def _tp_diffusion_factor(u):
    return _tp_mobility(u) * _tp_pressure_slope(u)


@lru_cache(maxsize=64)
def _tp_speed_extrema(k_rounded: float) -> tuple[float, ...]:
    # interior extrema of u -> d_u f(k, u): bracket sign changes of its
    # derivative on a fine grid, then bisect.
    k = k_rounded
    lo, hi = TWO_PHASE_CLAMP
    us = np.linspace(lo, hi, 4097)
    h = 1e-7

    def d2(u):
        return (_tp_df_du(k, u + h) - _tp_df_du(k, u - h)) / (2 * h)

    vals = d2(us)
    roots = []
    sign = np.sign(vals)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in idx:
        a, b = us[i], us[i + 1]
        fa = d2(a)
        for _ in range(60):
            m = 0.5 * (a + b)
            fm = d2(m)
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
        roots.append(0.5 * (a + b))
    return tuple(roots)


def two_phase_capillarity() -> FluxModel:
    """Two-phase flow flux with capillary diffusion/relaxation weights."""
    return FluxModel(
        name="two_phase",
        f=_tp_f,
        df_du=_tp_df_du,
        u_bounds=TWO_PHASE_CLAMP,
        k_multiplicative=False,
        speed_extrema=lambda k: _tp_speed_extrema(round(float(k), 12)),
        diffusion_factor=_tp_diffusion_factor,
        relaxation_factor=_tp_mobility,
        kernel_id=KERNEL_TWO_PHASE,
    )


def model_registry() -> dict[str, FluxModel]:
    """Models addressable by name in config files."""
    return {
        "burgers": burgers(),
        "cubic": cubic(),
        "linear": linear_advection(),
        "two_phase": two_phase_capillarity(),
    }
