"""Hot numerical kernels, compiled with numba when available.

Every kernel exists twice: a loop version wrapped in ``@njit`` and a
vectorized pure-numpy version.  The active path is chosen at import time;
set ``DDFLUX_NO_NUMBA=1`` to force the numpy fallback.  ``benchmarks/``
times the two paths against each other.

Flux models are addressed by small integer codes (see ``models``):
0 quadratic ``u**2/2``, 1 cubic ``u**3 - u``, 2 linear ``u`` (all
multiplicative in ``k``), 3 two-phase (``k`` enters the flux directly).
Numerical flux codes: 0 Engquist-Osher, 1 local Lax-Friedrichs with exact
hull wave speed, 2 Lax-Friedrichs with a fixed global speed.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an install dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


USE_NUMBA = HAVE_NUMBA and os.environ.get("DDFLUX_NO_NUMBA", "0") != "1"


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# scalar primitives (numba side)


@njit(cache=True)
def _f_tilde(code, u):
    if code == 0:
        return 0.5 * u * u
    elif code == 1:
        return u * u * u - u
    return u


@njit(cache=True)
def _f_full(code, k, u):
    if code == 3:
        zw = u * u
        zo = (1.0 - u) * (1.0 - u)
        return zw * (1.0 - k * zo) / (zw + zo)
    return k * _f_tilde(code, u)


@njit(cache=True)
def _df_full(code, k, u):
    if code == 3:
        zw = u * u
        zo = (1.0 - u) * (1.0 - u)
        s = zw + zo
        num = zw * (1.0 - k * zo)
        dnum = 2.0 * u * (1.0 - k * zo) + zw * (2.0 * k * (1.0 - u))
        return (dnum * s - num * (4.0 * u - 2.0)) / (s * s)
    if code == 0:
        return k * u
    elif code == 1:
        return k * (3.0 * u * u - 1.0)
    return k


@njit(cache=True)
def _eo_tilde(code, a, b, roots):
    # 0.5*(f(a)+f(b)) - 0.5*int_a^b |f'|; the integral splits at the sign
    # changes of f', where it telescopes to |f| differences.
    lo = a if a < b else b
    hi = b if b > a else a
    total = 0.0
    prev = lo
    for i in range(roots.shape[0]):
        c = roots[i]
        if c < lo:
            c = lo
        elif c > hi:
            c = hi
        total += abs(_f_tilde(code, c) - _f_tilde(code, prev))
        prev = c
    total += abs(_f_tilde(code, hi) - _f_tilde(code, prev))
    sgn = 1.0 if b >= a else -1.0
    return 0.5 * (_f_tilde(code, a) + _f_tilde(code, b)) - 0.5 * sgn * total


@njit(cache=True)
def _hull_speed(code, k, a, b, crit, ncrit):
    lo = a if a < b else b
    hi = b if b > a else a
    m = abs(_df_full(code, k, lo))
    m2 = abs(_df_full(code, k, hi))
    if m2 > m:
        m = m2
    for i in range(ncrit):
        c = crit[i]
        if lo < c < hi:
            m3 = abs(_df_full(code, k, c))
            if m3 > m:
                m = m3
    return m


@njit(cache=True)
def _iface_flux(code, nf, k, ul, ur, glf_a, roots, crit, ncrit):
    if nf == 0:
        # Engquist-Osher on the k-free factor; a negative coefficient
        # transposes the upwinding direction.
        if k >= 0.0:
            return k * _eo_tilde(code, ul, ur, roots)
        return k * _eo_tilde(code, ur, ul, roots)
    if nf == 2:
        a = glf_a
    else:
        a = _hull_speed(code, k, ul, ur, crit, ncrit)
    return 0.5 * (_f_full(code, k, ul) + _f_full(code, k, ur)) - 0.5 * a * (ur - ul)


# ---------------------------------------------------------------------------
# array kernels (numba side)


@njit(cache=True)
def _flux_sweep_nb(ul, ur, kv, code, nf, glf_a, roots, crit, crit_counts, out):
    rows = crit.shape[0]
    for i in range(ul.shape[0]):
        r = i if rows > 1 else 0
        out[i] = _iface_flux(code, nf, kv[i], ul[i], ur[i], glf_a, roots, crit[r], crit_counts[r])


@njit(cache=True)
def _dispersive_update_nb(u_ext, h, dt, dx, beta, gamma_mu, out):
    # u_ext carries two ghost cells per side; cell j maps to u_ext[j + 2].
    n = out.shape[0]
    lam = dt / dx
    cd = beta * dt / dx
    cm = gamma_mu * dt / (dx * dx * dx)
    for j in range(n):
        um2 = u_ext[j]
        um1 = u_ext[j + 1]
        u0 = u_ext[j + 2]
        up1 = u_ext[j + 3]
        out[j] = (
            u0
            - lam * (h[j + 1] - h[j])
            + cd * (up1 - 2.0 * u0 + um1)
            + cm * (up1 - 3.0 * u0 + 3.0 * um1 - um2)
        )


@njit(cache=True)
def _thomas_nb(dl, d, du, b, cp, dp, x):
    n = d.shape[0]
    denom = d[0]
    if denom == 0.0:
        return False
    cp[0] = du[0] / denom
    dp[0] = b[0] / denom
    for i in range(1, n):
        denom = d[i] - dl[i] * cp[i - 1]
        if denom == 0.0:
            return False
        cp[i] = du[i] / denom
        dp[i] = (b[i] - dl[i] * dp[i - 1]) / denom
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return True


@njit(cache=True)
def _entropy_sweep_nb(
    uo_ext, un, kpad, h, fkc, cs, lam, code, nf, glf_a, roots, crit, crit_counts, out
):
    # uo_ext has one ghost per side; interface i pairs uo_ext[i], uo_ext[i+1].
    n = un.shape[0]
    rows = crit.shape[0]
    phi = np.empty(n + 1)
    for ci in range(cs.shape[0]):
        c = cs[ci]
        for i in range(n + 1):
            a = uo_ext[i]
            b = uo_ext[i + 1]
            lo = a if a < b else b
            hi = b if b > a else a
            if c <= lo:
                phi[i] = h[i] - fkc[ci, i]
            elif c >= hi:
                phi[i] = fkc[ci, i] - h[i]
            else:
                r = i if rows > 1 else 0
                top = _iface_flux(
                    code, nf, kpad[i], max(a, c), max(b, c), glf_a, roots, crit[r], crit_counts[r]
                )
                bot = _iface_flux(
                    code, nf, kpad[i], min(a, c), min(b, c), glf_a, roots, crit[r], crit_counts[r]
                )
                phi[i] = top - bot
        for j in range(n):
            d = un[j] - c
            sgn = 1.0 if d > 0.0 else (-1.0 if d < 0.0 else 0.0)
            out[ci, j] = (
                abs(d)
                - abs(uo_ext[j + 1] - c)
                + lam * (phi[j + 1] - phi[j])
                + lam * sgn * (fkc[ci, j + 1] - fkc[ci, j])
            )


# ---------------------------------------------------------------------------
# numpy fallback twins


def _f_tilde_np(code, u):
    if code == 0:
        return 0.5 * u * u
    elif code == 1:
        return u * u * u - u
    return np.asarray(u, dtype=np.float64) + 0.0


def _f_full_np(code, k, u):
    if code == 3:
        zw = u * u
        zo = (1.0 - u) ** 2
        return zw * (1.0 - k * zo) / (zw + zo)
    return k * _f_tilde_np(code, u)


def _df_full_np(code, k, u):
    if code == 3:
        zw = u * u
        zo = (1.0 - u) ** 2
        s = zw + zo
        num = zw * (1.0 - k * zo)
        dnum = 2.0 * u * (1.0 - k * zo) + zw * (2.0 * k * (1.0 - u))
        return (dnum * s - num * (4.0 * u - 2.0)) / (s * s)
    if code == 0:
        return k * u
    elif code == 1:
        return k * (3.0 * u * u - 1.0)
    return k * np.ones_like(np.asarray(u, dtype=np.float64))


def _eo_tilde_np(code, a, b, roots):
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    total = np.zeros_like(lo)
    prev = lo
    for r in roots:
        c = np.clip(r, lo, hi)
        total = total + np.abs(_f_tilde_np(code, c) - _f_tilde_np(code, prev))
        prev = c
    total = total + np.abs(_f_tilde_np(code, hi) - _f_tilde_np(code, prev))
    sgn = np.where(b >= a, 1.0, -1.0)
    return 0.5 * (_f_tilde_np(code, a) + _f_tilde_np(code, b)) - 0.5 * sgn * total


def _hull_speed_np(code, k, a, b, crit, crit_counts):
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    m = np.maximum(np.abs(_df_full_np(code, k, lo)), np.abs(_df_full_np(code, k, hi)))
    rows = crit.shape[0]
    for j in range(crit.shape[1]):
        if rows > 1:
            c = crit[:, j]
            valid = j < crit_counts
        else:
            c = crit[0, j]
            valid = j < crit_counts[0]
        inside = (lo < c) & (c < hi) & valid
        if np.any(inside):
            m = np.where(inside, np.maximum(m, np.abs(_df_full_np(code, k, c))), m)
    return m


def _flux_sweep_np(ul, ur, kv, code, nf, glf_a, roots, crit, crit_counts, out):
    if nf == 0:
        fwd = _eo_tilde_np(code, ul, ur, roots)
        rev = _eo_tilde_np(code, ur, ul, roots)
        out[:] = kv * np.where(kv >= 0.0, fwd, rev)
        return
    if nf == 2:
        a = glf_a
    else:
        a = _hull_speed_np(code, kv, ul, ur, crit, crit_counts)
    out[:] = 0.5 * (_f_full_np(code, kv, ul) + _f_full_np(code, kv, ur)) - 0.5 * a * (ur - ul)


def _dispersive_update_np(u_ext, h, dt, dx, beta, gamma_mu, out):
    lam = dt / dx
    cd = beta * dt / dx
    cm = gamma_mu * dt / dx**3
    um2 = u_ext[:-4]
    um1 = u_ext[1:-3]
    u0 = u_ext[2:-2]
    up1 = u_ext[3:-1]
    out[:] = (
        u0 - lam * (h[1:] - h[:-1]) + cd * (up1 - 2.0 * u0 + um1) + cm * (up1 - 3.0 * u0 + 3.0 * um1 - um2)
    )


def _thomas_np(dl, d, du, b, cp, dp, x):
    from scipy.linalg import solve_banded

    n = d.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = du[:-1]
    ab[1, :] = d
    ab[2, :-1] = dl[1:]
    try:
        x[:] = solve_banded((1, 1), ab, b)
    except Exception:
        return False
    return bool(np.all(np.isfinite(x)))


def _entropy_sweep_np(
    uo_ext, un, kpad, h, fkc, cs, lam, code, nf, glf_a, roots, crit, crit_counts, out
):
    n = un.shape[0]
    ul = uo_ext[:-1]
    ur = uo_ext[1:]
    lo = np.minimum(ul, ur)
    hi = np.maximum(ul, ur)
    uo = uo_ext[1 : n + 1]
    rows = crit.shape[0]
    for ci in range(cs.shape[0]):
        c = cs[ci]
        phi = np.where(c <= lo, h - fkc[ci], np.where(c >= hi, fkc[ci] - h, np.nan))
        idx = np.flatnonzero((c > lo) & (c < hi))
        if idx.size:
            sub_crit = crit[idx] if rows > 1 else crit
            sub_counts = crit_counts[idx] if rows > 1 else crit_counts
            top = np.empty(idx.size)
            bot = np.empty(idx.size)
            _flux_sweep_np(
                np.maximum(ul[idx], c), np.maximum(ur[idx], c), kpad[idx],
                code, nf, glf_a, roots, sub_crit, sub_counts, top,
            )
            _flux_sweep_np(
                np.minimum(ul[idx], c), np.minimum(ur[idx], c), kpad[idx],
                code, nf, glf_a, roots, sub_crit, sub_counts, bot,
            )
            phi[idx] = top - bot
        sgn = np.sign(un - c)
        out[ci] = (
            np.abs(un - c)
            - np.abs(uo - c)
            + lam * (phi[1:] - phi[:-1])
            + lam * sgn * (fkc[ci, 1:] - fkc[ci, :-1])
        )


# ---------------------------------------------------------------------------
# dispatch


def flux_sweep(ul, ur, kv, code, nf, glf_a, roots, crit, crit_counts):
    out = np.empty(ul.shape[0])
    if USE_NUMBA:
        _flux_sweep_nb(ul, ur, kv, code, nf, glf_a, roots, crit, crit_counts, out)
    else:
        _flux_sweep_np(ul, ur, kv, code, nf, glf_a, roots, crit, crit_counts, out)
    return out


def dispersive_update(u_ext, h, dt, dx, beta, gamma_mu):
    out = np.empty(u_ext.shape[0] - 4)
    if USE_NUMBA:
        _dispersive_update_nb(u_ext, h, dt, dx, beta, gamma_mu, out)
    else:
        _dispersive_update_np(u_ext, h, dt, dx, beta, gamma_mu, out)
    return out


def thomas(dl, d, du, b):
    """Tridiagonal solve; returns ``(ok, x)`` with ``ok`` False on zero pivot."""
    n = d.shape[0]
    x = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)
    if USE_NUMBA:
        ok = _thomas_nb(dl, d, du, b, cp, dp, x)
    else:
        ok = _thomas_np(dl, d, du, b, cp, dp, x)
    return ok, x


def entropy_sweep(uo_ext, un, kpad, h, fkc, cs, lam, code, nf, glf_a, roots, crit, crit_counts):
    out = np.empty((cs.shape[0], un.shape[0]))
    if USE_NUMBA:
        _entropy_sweep_nb(
            uo_ext, un, kpad, h, fkc, cs, lam, code, nf, glf_a, roots, crit, crit_counts, out
        )
    else:
        _entropy_sweep_np(
            uo_ext, un, kpad, h, fkc, cs, lam, code, nf, glf_a, roots, crit, crit_counts, out
        )
    return out
