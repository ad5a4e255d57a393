"""Implicit capillarity-regularized stepping and its time-step policy."""

import dataclasses
import warnings

import numpy as np
import pytest

from ddflux import (
    BoundaryCondition,
    CapillarityStepper,
    CFLInfeasible,
    CflMode,
    CoefficientDegeneracy,
    Field,
    FluxKind,
    Grid1D,
    NonFiniteState,
    NumericalFlux,
    SchemeParams,
    ValidationError,
    average_k,
    cfl_dt,
    extend,
    interface_flux,
    project_initial,
)
from ddflux.diagnostics import energy
from ddflux.models import burgers, linear_advection, two_phase_capillarity

PER = BoundaryCondition.PERIODIC
OUT = BoundaryCondition.OUTFLOW


def _stepper(grid, kval, model, params, dt, kind=FluxKind.ENGQUIST_OSHER):
    k = average_k(kval, grid)
    nf = NumericalFlux(kind, model)
    return CapillarityStepper(grid, k, nf, params, dt)


def dense_one_step(stepper, u):
    """Oracle: assemble the same step densely from scalar flux calls."""
    grid = stepper.grid
    n = grid.n_cells
    dx = grid.dx
    p = stepper.params
    gm = p.gamma * p.mu(dx)
    u_ext = extend(u, grid.bc, 1)
    kpad = stepper.k.padded()
    h = np.array(
        [
            interface_flux(kpad[i], u_ext[i], u_ext[i + 1], stepper.nf)
            for i in range(n + 1)
        ]
    )
    rhs = -(stepper.dt / dx) * (h[1:] - h[:-1]) + (
        p.beta * stepper.dt / dx
    ) * (u_ext[2:] - 2.0 * u_ext[1:-1] + u_ext[:-2])
    c = gm / dx**2
    a = np.eye(n) * (1.0 + 2.0 * c)
    for i in range(n):
        a[i, (i - 1) % n] -= c if (grid.periodic or i > 0) else 0.0
        a[i, (i + 1) % n] -= c if (grid.periodic or i < n - 1) else 0.0
    if not grid.periodic:
        a[0, 0] = 1.0 + c
        a[n - 1, n - 1] = 1.0 + c
    w = np.linalg.solve(a, rhs) if gm > 0 else rhs
    return u + w


# ---------------------------------------------------------------------------
# time-step selection


def test_practical_dt_advection_bound():
    # max |df/du| = 1 for the linear model with k = 1, so dt = 0.3 * dx
    grid = Grid1D(0.0, 1.0, 100, OUT)
    k = average_k(1.0, grid)
    params = SchemeParams(beta=6.0, gamma=36.0, mu_constant=1.0, mu_exponent=2.0,
                          cfl_number=0.3, delta=0.5)
    res = cfl_dt(grid, k, linear_advection(), params)
    assert res.dt == pytest.approx(0.003, rel=1e-12)
    assert res.lam == pytest.approx(0.3, rel=1e-12)
    assert res.active == "advection"
    assert res.mode is CflMode.PRACTICAL
    assert res.dt == pytest.approx(res.lam * grid.dx, rel=1e-15)


def test_practical_dt_relaxation_bound_binds_for_loose_cfl():
    # with mu = dx^2: lambda <= 2m / (1 + beta/gamma) = 12 m / 7 here
    grid = Grid1D(0.0, 1.0, 64, PER)
    k = average_k(1.0, grid)
    params = SchemeParams(beta=6.0, gamma=36.0, cfl_number=0.9, delta=0.5)
    res = cfl_dt(grid, k, linear_advection(), params)
    m = 0.5
    assert res.active == "relaxation"
    assert res.lam == pytest.approx(12.0 * m / 7.0, rel=1e-12)
    assert res.bounds["advection"] == pytest.approx(0.9, rel=1e-12)


def test_strict_dt_relaxation_bound_and_smallness_fallback():
    grid = Grid1D(0.0, 2.0, 128, OUT)
    k = average_k(1.0, grid)
    params = SchemeParams(beta=6.0, gamma=36.0, delta=0.5)
    model = burgers()
    with pytest.warns(RuntimeWarning, match="smallness"):
        res = cfl_dt(grid, k, model, params, mode=CflMode.STRICT)
    m = 0.5
    assert res.mode is CflMode.STRICT
    assert res.bounds["relaxation"] == pytest.approx(12.0 * m / 7.0, rel=1e-12)
    # M = sup
    big_m = max(model.sup_f(1.0, 1.0), model.max_speed(1.0, 1.0), 1.0)
    assert res.bounds["smallness"] == pytest.approx(2 * m / (1 + 2 * big_m), rel=1e-10)
    assert res.active == "smallness"


def test_strict_dt_smallness_feasible_for_small_data():
    grid = Grid1D(0.0, 1.0, 32, OUT)
    k = average_k(0.1, grid)
    params = SchemeParams(beta=6.0, gamma=36.0, delta=0.5)
    model = burgers(u_bounds=(-0.1, 0.1))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        res = cfl_dt(grid, k, model, params, mode=CflMode.STRICT)
    # M = max(0.1*0.005, 0.1*0.1, 0.1) = 0.1 -> lambda = 2(0.5 - 0.2) = 0.6
    assert res.bounds["smallness"] == pytest.approx(0.6, rel=1e-12)
    assert res.active == "smallness"


def test_dt_infeasible_slack():
    grid = Grid1D(0.0, 1.0, 16, OUT)
    k = average_k(1.0, grid)
    with pytest.raises(CFLInfeasible, match="delta"):
        cfl_dt(grid, k, burgers(), SchemeParams(beta=6.0, gamma=36.0, delta=1.0))
    # delta must also stay below beta
    with pytest.raises(CFLInfeasible):
        cfl_dt(grid, k, burgers(), SchemeParams(beta=0.3, gamma=1.0, delta=0.4))


def test_dt_no_dispersion_limits_explicit_diffusion():
    # gamma = 0 removes the implicit term; bound becomes m / (2 beta)
    grid = Grid1D(0.0, 1.0, 50, OUT)
    k = average_k(1.0, grid)
    params = SchemeParams(beta=2.0, gamma=0.0, cfl_number=0.9, delta=0.5)
    res = cfl_dt(grid, k, linear_advection(), params)
    assert res.bounds["relaxation"] == pytest.approx(0.5 / 4.0, rel=1e-12)
    assert res.active == "relaxation"


# ---------------------------------------------------------------------------
# stepper mechanics


def test_stepper_validation():
    grid = Grid1D(0.0, 1.0, 8, OUT)
    other = Grid1D(0.0, 1.0, 9, OUT)
    k = average_k(1.0, grid)
    nf = NumericalFlux(FluxKind.ENGQUIST_OSHER, burgers())
    params = SchemeParams(beta=1.0, gamma=1.0)
    with pytest.raises(ValidationError):
        CapillarityStepper(grid, k, nf, params, dt=0.0)
    with pytest.raises(ValidationError):
        CapillarityStepper(grid, k, nf, params, dt=np.inf)
    with pytest.raises(ValidationError):
        CapillarityStepper(other, k, nf, params, dt=1e-3)
    st = CapillarityStepper(grid, k, nf, params, dt=1e-3)
    with pytest.raises(ValidationError):
        st.step(Field(np.zeros(9), 0.0, other))


def test_constant_state_is_a_fixed_point():
    grid = Grid1D(0.0, 1.0, 24, PER)
    params = SchemeParams(beta=6.0, gamma=36.0)
    st = _stepper(grid, 1.3, burgers(), params, dt=1e-3)
    f = Field(np.full(24, 0.7), 0.0, grid)
    for _ in range(10):
        f = st.step(f)
    np.testing.assert_allclose(f.values, 0.7, atol=1e-13)
    assert f.time == pytest.approx(0.01)


@pytest.mark.parametrize("bc", [PER, OUT])
def test_single_step_matches_dense_oracle(bc):
    grid = Grid1D(0.0, 1.0, 3 if bc is PER else 5, bc)
    params = SchemeParams(beta=2.0, gamma=8.0, mu_constant=1.0, mu_exponent=2.0)
    st = _stepper(grid, 1.0, burgers(), params, dt=0.02)
    rng = np.random.default_rng(1)
    u = rng.uniform(-1.0, 1.0, grid.n_cells)
    got = st.step(Field(u, 0.0, grid))
    np.testing.assert_allclose(got.values, dense_one_step(st, u), atol=1e-13)
    assert got.time == pytest.approx(0.02)


def test_three_cell_periodic_step_by_hand():
    # Small enough to write every number down.  u = (1, 0, 0), k = 1,
    # quadratic flux, EO: h at the three interfaces (pairs wrap around):
    #   h(0,1) = 1/2, h(1,0) = 1/2, h(0,0) = 0
    grid = Grid1D(0.0, 1.0, 3, PER)
    dx = 1.0 / 3.0
    dt = 0.01
    params = SchemeParams(beta=1.0, gamma=1.0, mu_constant=1.0, mu_exponent=2.0)
    st = _stepper(grid, 1.0, burgers(), params, dt=dt)
    u = np.array([1.0, 0.0, 0.0])
    lam = dt / dx
    # interfaces 0..3: (u2,u0), (u0,u1), (u1,u2), (u2,u0) -> h = (0, .5, 0, 0)
    h = np.array([0.0, 0.5, 0.0, 0.0])
    conv = -lam * (h[1:] - h[:-1])
    diff = (1.0 * dt / dx) * np.array([0.0 - 2.0 + 0.0, 1.0 - 0.0 + 0.0, 0.0 - 0.0 + 1.0])
    rhs = conv + diff
    c = params.gamma * dx**2 / dx**2
    a = np.array([[1 + 2 * c, -c, -c], [-c, 1 + 2 * c, -c], [-c, -c, 1 + 2 * c]])
    oracle = u + np.linalg.solve(a, rhs)
    got = st.step(Field(u, 0.0, grid))
    np.testing.assert_allclose(got.values, oracle, atol=1e-14)


def test_zero_regularization_reduces_to_explicit_conservative_update():
    grid = Grid1D(0.0, 2.0, 40, PER)
    params = SchemeParams(beta=0.0, gamma=0.0)
    dt = 0.01
    st = _stepper(grid, 1.0, burgers(), params, dt=dt)
    rng = np.random.default_rng(4)
    u = rng.uniform(-1.0, 1.0, 40)
    got = st.step(Field(u, 0.0, grid)).values
    nf = st.nf
    u_ext = extend(u, PER, 1)
    h = np.array([interface_flux(1.0, u_ext[i], u_ext[i + 1], nf) for i in range(41)])
    oracle = u - (dt / grid.dx) * (h[1:] - h[:-1])
    np.testing.assert_allclose(got, oracle, atol=1e-14)


def test_monotone_configuration_obeys_maximum_principle_and_tvd():
    grid = Grid1D(0.0, 1.0, 50, PER)
    params = SchemeParams(beta=0.0, gamma=0.0)
    dt = 0.4 * grid.dx  # lambda max|f'| = 0.4 < 1 on data in [-1, 1]
    st = _stepper(grid, 1.0, burgers(), params, dt=dt)
    rng = np.random.default_rng(8)
    u = rng.uniform(-1.0, 1.0, 50)
    f = Field(u, 0.0, grid)
    tv_prev = np.abs(np.diff(np.append(u, u[0]))).sum()
    for _ in range(50):
        f = st.step(f)
        assert f.values.min() >= u.min() - 1e-12
        assert f.values.max() <= u.max() + 1e-12
        tv = np.abs(np.diff(np.append(f.values, f.values[0]))).sum()
        assert tv <= tv_prev + 1e-11
        tv_prev = tv


@pytest.mark.parametrize("bc", [PER, OUT])
def test_general_step_with_unit_factors_equals_plain_step(bc):
    grid = Grid1D(0.0, 1.0, 16, bc)
    ones = lambda u: np.ones_like(np.asarray(u, dtype=np.float64))
    model = dataclasses.replace(burgers(), diffusion_factor=ones, relaxation_factor=ones)
    params = SchemeParams(beta=3.0, gamma=5.0)
    st = _stepper(grid, 1.0, model, params, dt=5e-3)
    rng = np.random.default_rng(21)
    f = Field(rng.uniform(-1.0, 1.0, 16), 0.0, grid)
    a, b = f, f
    for _ in range(5):
        a = st.step(a)
        b = st.step_general(b)
    np.testing.assert_allclose(a.values, b.values, atol=1e-13)


def test_general_step_matches_dense_weighted_oracle():
    grid = Grid1D(0.0, 1.0, 12, PER)
    model = two_phase_capillarity()
    k = average_k(1.2, grid)
    nf = NumericalFlux(FluxKind.LOCAL_LAX_FRIEDRICHS, model)
    params = SchemeParams(beta=2.0, gamma=6.0)
    dt = 2e-3
    st = CapillarityStepper(grid, k, nf, params, dt)
    rng = np.random.default_rng(31)
    u = rng.uniform(0.2, 0.8, 12)

    # oracle with interface-averaged factors frozen at time n
    n, dx = 12, grid.dx
    kpad = k.padded()
    g = extend(model.diffusion_factor(u), PER, 1)
    hw = extend(model.relaxation_factor(u), PER, 1)
    G = kpad * 0.5 * (g[:-1] + g[1:])
    H = kpad * 0.5 * (hw[:-1] + hw[1:])
    u_ext = extend(u, PER, 1)
    hf = np.array([interface_flux(kpad[i], u_ext[i], u_ext[i + 1], nf) for i in range(13)])
    grad = u_ext[1:] - u_ext[:-1]
    rhs = -(dt / dx) * (hf[1:] - hf[:-1]) + (params.beta * dt / dx) * np.diff(G * grad)
    gm = params.gamma * params.mu(dx)
    a = np.zeros((n, n))
    for j in range(n):
        cl = gm / dx**2 * H[j]
        cr = gm / dx**2 * H[j + 1]
        a[j, j] = 1.0 + cl + cr
        a[j, (j - 1) % n] -= cl
        a[j, (j + 1) % n] -= cr
    oracle = u + np.linalg.solve(a, rhs)

    got = st.step_general(Field(u, 0.0, grid))
    np.testing.assert_allclose(got.values, oracle, atol=1e-13)


def test_general_step_requires_factors():
    grid = Grid1D(0.0, 1.0, 8, OUT)
    st = _stepper(grid, 1.0, burgers(), SchemeParams(), dt=1e-3)
    with pytest.raises(ValidationError, match="factors"):
        st.step_general(Field(np.zeros(8), 0.0, grid))
    # advance() falls back to the plain step for factor-less models
    out = st.advance(Field(np.zeros(8), 0.0, grid))
    assert out.time == pytest.approx(1e-3)


def test_general_step_rejects_degenerate_weights():
    grid = Grid1D(0.0, 1.0, 8, PER)
    bad = dataclasses.replace(
        burgers(),
        diffusion_factor=lambda u: np.asarray(u, dtype=np.float64),  # negative for u < 0
        relaxation_factor=lambda u: np.ones_like(np.asarray(u, dtype=np.float64)),
    )
    st = _stepper(grid, 1.0, bad, SchemeParams(), dt=1e-3)
    with pytest.raises(CoefficientDegeneracy):
        st.step_general(Field(np.full(8, -0.5), 0.0, grid))
    nan_model = dataclasses.replace(
        bad, diffusion_factor=lambda u: np.full_like(np.asarray(u, dtype=np.float64), np.nan)
    )
    st2 = _stepper(grid, 1.0, nan_model, SchemeParams(), dt=1e-3)
    with pytest.raises(CoefficientDegeneracy):
        st2.step_general(Field(np.full(8, 0.5), 0.0, grid))


def test_periodic_mass_conservation_plain_and_general():
    grid = Grid1D(0.0, 1.0, 48, PER)
    rng = np.random.default_rng(12)

    st = _stepper(grid, lambda x: 1.0 + 0.4 * np.sin(2 * np.pi * x), burgers(),
                  SchemeParams(beta=2.0, gamma=4.0), dt=2e-3)
    f = Field(rng.uniform(-1.0, 1.0, 48), 0.0, grid)
    m0 = f.values.sum() * grid.dx
    for _ in range(50):
        f = st.step(f)
    assert f.values.sum() * grid.dx == pytest.approx(m0, abs=1e-13 * max(1, abs(m0)))

    stg = _stepper(grid, 1.1, two_phase_capillarity(),
                   SchemeParams(beta=2.0, gamma=4.0), dt=1e-3,
                   kind=FluxKind.LOCAL_LAX_FRIEDRICHS)
    g = Field(rng.uniform(0.2, 0.8, 48), 0.0, grid)
    mg = g.values.sum() * grid.dx
    for _ in range(50):
        g = stg.step_general(g)
    assert g.values.sum() * grid.dx == pytest.approx(mg, abs=1e-13 * max(1, abs(mg)))


def test_energy_decays_under_strict_dt():
    grid = Grid1D(0.0, 1.0, 64, PER)
    k = average_k(1.0, grid)
    params = SchemeParams(beta=6.0, gamma=36.0, delta=0.5)
    model = burgers(u_bounds=(-1.0, 1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = cfl_dt(grid, k, model, params, mode=CflMode.STRICT)
    nf = NumericalFlux(FluxKind.ENGQUIST_OSHER, model)
    st = CapillarityStepper(grid, k, nf, params, res.dt)
    f = project_initial(lambda x: 0.8 * np.sin(2 * np.pi * x), grid)
    e_prev = energy(f, params, "capillarity")
    for _ in range(100):
        f = st.step(f)
        e = energy(f, params, "capillarity")
        assert e <= e_prev + 1e-12
        e_prev = e


def test_runaway_step_surfaces_nonfinite_state():
    grid = Grid1D(0.0, 1.0, 16, PER)
    st = _stepper(grid, 1.0, burgers(), SchemeParams(beta=0.0, gamma=0.0), dt=10.0)
    f = Field(np.linspace(-2.0, 2.0, 16), 0.0, grid)
    with pytest.raises(NonFiniteState):
        for _ in range(30):
            f = st.step(f)
