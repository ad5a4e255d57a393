"""Scenario presets, configuration parsing, run orchestration and CSV
emission.

A Scenario is a complete, serializable description of one simulation:
domain, resolution, initial data, coefficient, flux model, scheme choice
and regularization parameters.  ``run`` executes it and returns a
RunReport carrying per-step diagnostics, the final field, its plateau
classification and bookkeeping (time step, active CFL branch, wall time).
"""

from __future__ import annotations

import dataclasses
import math
import os
import time
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import numpy as np

from .capillarity import CapillarityStepper, CflMode, CflResult, cfl_dt
from .core import (
    BoundaryCondition,
    CoefficientK,
    Field,
    FluxModel,
    Grid1D,
    PiecewiseFunction,
    SchemeParams,
    average_k,
    project_initial,
)
from .diagnostics import (
    APrioriAccumulator,
    Plateau,
    StepDiagnostics,
    classify_structure,
    energy,
    entropy_residual_max,
    kruzkov_constants,
    l1_restricted_difference,
    mass,
    norms,
)
from .dispersive import DispersiveStepper, cfl_dt_a
from .errors import ParseError, ValidationError
from .fluxes import FluxKind, NumericalFlux
from .models import model_registry

STRICT_CFL_ENV = "DDFLUX_STRICT_CFL"

_SCHEMES = ("capillarity", "dispersive")
_BCS = {"outflow": BoundaryCondition.OUTFLOW, "periodic": BoundaryCondition.PERIODIC}
_FLUXES = {kind.value: kind for kind in FluxKind}


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one run."""

    name: str
    scheme: str
    model: str
    flux: str
    x_left: float
    x_right: float
    n_cells: int
    bc: str
    t_end: float
    params: SchemeParams
    u0: PiecewiseFunction
    k: PiecewiseFunction
    k_bounds: tuple[float, float] | None = None
    u_bounds: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.scheme not in _SCHEMES:
            raise ValidationError(
                f"unknown scheme {self.scheme!r}, expected one of {_SCHEMES}"
            )
        if self.model not in model_registry():
            raise ValidationError(
                f"unknown model {self.model!r}, expected one of "
                f"{tuple(model_registry())}"
            )
        if self.flux not in _FLUXES:
            raise ValidationError(
                f"unknown flux {self.flux!r}, expected one of {tuple(_FLUXES)}"
            )
        if self.bc not in _BCS:
            raise ValidationError(
                f"unknown boundary condition {self.bc!r}, expected one of {tuple(_BCS)}"
            )
        if not (math.isfinite(self.t_end) and self.t_end > 0.0):
            raise ValidationError(f"t_end must be positive, got {self.t_end!r}")
        # Delegates domain and resolution checks (including n_cells >= 1).
        self.grid()

    def grid(self) -> Grid1D:
        return Grid1D(self.x_left, self.x_right, self.n_cells, _BCS[self.bc])

    def flux_model(self) -> FluxModel:
        model = model_registry()[self.model]
        if self.u_bounds is not None:
            model = dataclasses.replace(model, u_bounds=tuple(self.u_bounds))
        return model


@dataclass(frozen=True)
class RunReport:
    scenario: Scenario
    diagnostics: list[StepDiagnostics]
    final: Field
    plateaus: list[Plateau]
    wall_time: float
    cfl: CflResult
    dt: float
    steps: int
    apriori: dict[str, float]


def presets() -> dict[str, Scenario]:
    """The shipped experiment definitions.

    The saturation (``cap_*``) presets run the implicit scheme with the
    two-phase flux on [0, 2] up to T = 0.6 with beta = 6, gamma = 36 and
    a step 0.8/0.2 at x = 0.25; the cubic (``dd_*``) presets run the
    explicit scheme on [-0.5, 0.5] up to T = 0.01 with beta = 5,
    gamma = 20 and a step 4/-2 at x = 0.  ``burgers_riemann`` is the
    entropy-regime convergence problem (single shock of speed 1/2).
    """
    cap_params = SchemeParams(
        beta=6.0, gamma=36.0, mu_constant=1.0, mu_exponent=2.0, cfl_number=0.3, delta=0.5
    )
    dd_params = SchemeParams(
        beta=5.0, gamma=20.0, mu_constant=1.0, mu_exponent=2.0, cfl_number=0.3, delta=0.5
    )
    burgers_params = SchemeParams(
        beta=1.0, gamma=10.0, mu_constant=1.0, mu_exponent=3.0, cfl_number=0.3, delta=0.1
    )
    table = {
        "cap_homogeneous": Scenario(
            name="cap_homogeneous",
            scheme="capillarity",
            model="two_phase",
            flux="local_lax_friedrichs",
            x_left=0.0,
            x_right=2.0,
            n_cells=1024,
            bc="outflow",
            t_end=0.6,
            params=cap_params,
            u0=PiecewiseFunction.step(0.25, 0.8, 0.2),
            k=PiecewiseFunction.constant(1.0),
            k_bounds=(1.0, 1.0),
        ),
        "cap_heterogeneous": Scenario(
            name="cap_heterogeneous",
            scheme="capillarity",
            model="two_phase",
            flux="local_lax_friedrichs",
            x_left=0.0,
            x_right=2.0,
            n_cells=1024,
            bc="outflow",
            t_end=0.6,
            params=cap_params,
            u0=PiecewiseFunction.step(0.25, 0.8, 0.2),
            k=PiecewiseFunction.step(0.6, 1.1, 1.4),
            k_bounds=(1.1, 1.4),
        ),
        "dd_homogeneous": Scenario(
            name="dd_homogeneous",
            scheme="dispersive",
            model="cubic",
            flux="engquist_osher",
            x_left=-0.5,
            x_right=0.5,
            n_cells=1024,
            bc="outflow",
            t_end=0.01,
            params=dd_params,
            u0=PiecewiseFunction.step(0.0, 4.0, -2.0),
            k=PiecewiseFunction.constant(1.0),
            k_bounds=(1.0, 1.0),
        ),
        "dd_heterogeneous": Scenario(
            name="dd_heterogeneous",
            scheme="dispersive",
            model="cubic",
            flux="engquist_osher",
            x_left=-0.5,
            x_right=0.5,
            n_cells=1024,
            bc="outflow",
            t_end=0.01,
            params=dd_params,
            u0=PiecewiseFunction.step(0.0, 4.0, -2.0),
            k=PiecewiseFunction.step(0.1, 1.1, 0.9),
            k_bounds=(0.9, 1.1),
        ),
        "burgers_riemann": Scenario(
            name="burgers_riemann",
            scheme="capillarity",
            model="burgers",
            flux="engquist_osher",
            x_left=0.0,
            x_right=2.0,
            n_cells=1024,
            bc="outflow",
            t_end=0.5,
            params=burgers_params,
            u0=PiecewiseFunction.step(0.5, 1.0, 0.0),
            k=PiecewiseFunction.constant(1.0),
            k_bounds=(1.0, 1.0),
            u_bounds=(-0.5, 1.5),
        ),
    }
    return table


def strict_mode_default() -> bool:
    return os.environ.get(STRICT_CFL_ENV, "0") == "1"


def _numerical_flux(scenario: Scenario, model: FluxModel, grid: Grid1D, dt: float) -> NumericalFlux:
    kind = _FLUXES[scenario.flux]
    speed = grid.dx / dt if kind is FluxKind.GLOBAL_LAX_FRIEDRICHS else None
    return NumericalFlux(kind, model, global_speed=speed)


def _select_dt(scenario, grid, kcoef, model, mode: CflMode) -> CflResult:
    if scenario.scheme == "capillarity":
        return cfl_dt(grid, kcoef, model, scenario.params, mode)
    return cfl_dt_a(grid, kcoef, model, scenario.params, mode)


def run(scenario: Scenario, strict: bool | None = None) -> RunReport:
    """Execute a scenario to its final time.

    The time step is fixed once from the CFL policy (strict when requested
    via the argument or the DDFLUX_STRICT_CFL environment variable); the
    final step is truncated so the run lands on t_end exactly.
    """
    t_start = time.perf_counter()
    grid = scenario.grid()
    model = scenario.flux_model()
    kcoef = average_k(scenario.k, grid, bounds=scenario.k_bounds)
    u = project_initial(scenario.u0, grid)

    lo, hi = float(np.min(u.values)), float(np.max(u.values))
    blo, bhi = model.u_bounds
    if lo < blo or hi > bhi:
        raise ValidationError(
            f"initial data range [{lo:g}, {hi:g}] outside flux model bounds "
            f"[{blo:g}, {bhi:g}]"
        )

    mode = CflMode.STRICT if (strict_mode_default() if strict is None else strict) else CflMode.PRACTICAL
    cfl = _select_dt(scenario, grid, kcoef, model, mode)
    dt = cfl.dt
    nf = _numerical_flux(scenario, model, grid, dt)

    n_full, remainder = _split_steps(scenario.t_end, dt)
    stepper = _make_stepper(scenario, grid, kcoef, nf, dt)
    tail_stepper = (
        _make_stepper(scenario, grid, kcoef, nf, remainder) if remainder > 0.0 else None
    )

    cs = kruzkov_constants(model)
    fkc = stepper.prepared.constant_table(cs)
    accumulator = APrioriAccumulator(grid, scenario.params, scenario.scheme)

    rows = [_diag_row(0, u, scenario, residual=0.0)]
    total_steps = n_full + (1 if tail_stepper is not None else 0)
    for i in range(total_steps):
        active = stepper if i < n_full else tail_stepper
        u_new = _advance(active, u)
        residual = entropy_residual_max(
            u,
            u_new,
            kcoef,
            nf,
            active.dt,
            constants=cs,
            prepared=stepper.prepared,
            fkc=fkc,
        )
        accumulator.update(u, u_new, active.dt)
        u = u_new
        rows.append(_diag_row(i + 1, u, scenario, residual=residual))

    u = Field(u.values, scenario.t_end, grid)
    report = RunReport(
        scenario=scenario,
        diagnostics=rows,
        final=u,
        plateaus=classify_structure(u),
        wall_time=time.perf_counter() - t_start,
        cfl=cfl,
        dt=dt,
        steps=total_steps,
        apriori=accumulator.totals(),
    )
    return report


def _advance(stepper, u: Field) -> Field:
    if isinstance(stepper, CapillarityStepper):
        return stepper.advance(u)
    return stepper.step(u)


def _make_stepper(scenario: Scenario, grid, kcoef, nf, dt):
    if scenario.scheme == "capillarity":
        return CapillarityStepper(grid, kcoef, nf, scenario.params, dt)
    return DispersiveStepper(grid, kcoef, nf, scenario.params, dt)


def _split_steps(t_end: float, dt: float) -> tuple[int, float]:
    n_full = int(math.floor(t_end / dt + 1e-9))
    remainder = t_end - n_full * dt
    if remainder <= 1e-12 * max(1.0, t_end):
        remainder = 0.0
    return n_full, remainder


def _diag_row(n: int, u: Field, scenario: Scenario, residual: float) -> StepDiagnostics:
    nm = norms(u)
    return StepDiagnostics(
        n=n,
        t=u.time,
        mass=mass(u),
        l1=nm.l1,
        l2=nm.l2,
        linf=nm.linf,
        bv=nm.bv,
        energy=energy(u, scenario.params, scenario.scheme),
        entropy_residual_max=residual,
    )


# ---------------------------------------------------------------------------
# configuration parsing


_PARAM_KEYS = {"beta", "gamma", "mu_constant", "mu_exponent", "cfl_number", "delta"}
_SCALAR_KEYS = {"x_left", "x_right", "t_end"}
_REQUIRED = (
    "scheme",
    "model",
    "flux",
    "x_left",
    "x_right",
    "n_cells",
    "bc",
    "t_end",
    "u0",
    "k",
)


def _parse_float(raw: str, line_no: int, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ParseError(f"key '{key}' expects a number, got {raw!r}", line_no) from None


def _parse_int(raw: str, line_no: int, key: str) -> int:
    try:
        return int(raw, 10)
    except ValueError:
        raise ParseError(f"key '{key}' expects an integer, got {raw!r}", line_no) from None


def _parse_pair(raw: str, line_no: int, key: str) -> tuple[float, float]:
    parts = raw.split(",")
    if len(parts) != 2:
        raise ParseError(f"key '{key}' expects 'lo,hi', got {raw!r}", line_no)
    return (
        _parse_float(parts[0], line_no, key),
        _parse_float(parts[1], line_no, key),
    )


def _parse_piecewise(raw: str, line_no: int, key: str) -> PiecewiseFunction:
    """Piecewise-constant profile syntax.

    ``const:V`` is a constant, ``step:X0,L,R`` a single jump at X0, and
    ``pw:x1,...|v0,...`` lists breakpoints and one more value than breaks.
    """
    head, sep, body = raw.partition(":")
    if not sep:
        raise ParseError(
            f"key '{key}' expects 'const:...', 'step:...' or 'pw:...', got {raw!r}",
            line_no,
        )
    if head == "const":
        return PiecewiseFunction.constant(_parse_float(body, line_no, key))
    if head == "step":
        parts = body.split(",")
        if len(parts) != 3:
            raise ParseError(f"key '{key}' step form expects 'x0,left,right'", line_no)
        x0, left, right = (_parse_float(p, line_no, key) for p in parts)
        return PiecewiseFunction.step(x0, left, right)
    if head == "pw":
        bits = body.split("|")
        if len(bits) != 2:
            raise ParseError(
                f"key '{key}' pw form expects 'breaks|values'", line_no
            )
        breaks = [_parse_float(p, line_no, key) for p in bits[0].split(",") if p]
        vals = [_parse_float(p, line_no, key) for p in bits[1].split(",")]
        if len(vals) != len(breaks) + 1:
            raise ParseError(
                f"key '{key}' needs one more value than breakpoints "
                f"(got {len(breaks)} breaks, {len(vals)} values)",
                line_no,
            )
        try:
            return PiecewiseFunction(tuple(breaks), tuple(vals))
        except ValidationError as exc:
            raise ParseError(f"key '{key}': {exc}", line_no) from None
    raise ParseError(f"key '{key}' has unknown form {head!r}", line_no)


def parse_config(text: str) -> Scenario:
    """Build a Scenario from flat ``key=value`` lines.

    ``#`` starts a comment; blank lines are skipped.  A ``preset=NAME``
    line seeds every field from the named preset, after which individual
    keys override it.  Unknown keys and malformed values raise ParseError
    with the offending line number; structural violations (bad ranges,
    inconsistent domains) surface as ValidationError.
    """
    pairs: list[tuple[int, str, str]] = []
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError(f"expected 'key=value', got {raw_line.strip()!r}", line_no)
        pairs.append((line_no, key.strip(), value.strip()))

    base: Scenario | None = None
    preset_line = None
    for line_no, key, value in pairs:
        if key == "preset":
            if preset_line is not None:
                raise ParseError("duplicate 'preset' key", line_no)
            preset_line = line_no
            try:
                base = presets()[value]
            except KeyError:
                raise ParseError(
                    f"unknown preset {value!r}, expected one of {tuple(presets())}",
                    line_no,
                ) from None

    fields: dict[str, object] = (
        {f.name: getattr(base, f.name) for f in dataclasses.fields(base)} if base else {}
    )
    param_overrides: dict[str, float] = {}

    for line_no, key, value in pairs:
        if key == "preset":
            continue
        if key == "name":
            fields["name"] = value
        elif key in ("scheme", "model", "flux", "bc"):
            fields[key] = value
        elif key in _SCALAR_KEYS:
            fields[key] = _parse_float(value, line_no, key)
        elif key == "n_cells":
            fields[key] = _parse_int(value, line_no, key)
        elif key in _PARAM_KEYS:
            param_overrides[key] = _parse_float(value, line_no, key)
        elif key in ("u0", "k"):
            fields[key] = _parse_piecewise(value, line_no, key)
        elif key in ("k_bounds", "u_bounds"):
            fields[key] = _parse_pair(value, line_no, key)
        else:
            raise ParseError(f"unknown key {key!r}", line_no)

    missing = [key for key in _REQUIRED if key not in fields]
    if missing:
        raise ValidationError(f"missing required key(s): {', '.join(missing)}")

    params = fields.get("params") or SchemeParams()
    if param_overrides:
        params = dataclasses.replace(params, **param_overrides)
    fields["params"] = params
    fields.setdefault("name", "custom")
    fields.setdefault("k_bounds", None)
    fields.setdefault("u_bounds", None)
    kb = fields["k_bounds"]
    ub = fields["u_bounds"]
    fields["k_bounds"] = tuple(kb) if kb is not None else None
    fields["u_bounds"] = tuple(ub) if ub is not None else None
    return Scenario(**fields)


# ---------------------------------------------------------------------------
# CSV emission


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def solution_csv_text(final: Field) -> str:
    lines = ["x,u"]
    for x, v in zip(final.grid.centers(), final.values):
        lines.append(f"{_fmt(x)},{_fmt(v)}")
    return "\n".join(lines) + "\n"


def diagnostics_csv_text(rows: list[StepDiagnostics]) -> str:
    lines = ["n,t,mass,l1,l2,linf,bv,energy,entropy_residual_max"]
    for r in rows:
        lines.append(
            ",".join(
                [
                    str(r.n),
                    _fmt(r.t),
                    _fmt(r.mass),
                    _fmt(r.l1),
                    _fmt(r.l2),
                    _fmt(r.linf),
                    _fmt(r.bv),
                    _fmt(r.energy),
                    _fmt(r.entropy_residual_max),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def emit_solution_csv(report: RunReport | Field, path) -> None:
    final = report.final if isinstance(report, RunReport) else report
    Path(path).write_text(solution_csv_text(final), encoding="utf-8", newline="\n")


def emit_diagnostics_csv(report: RunReport, path) -> None:
    Path(path).write_text(
        diagnostics_csv_text(report.diagnostics), encoding="utf-8", newline="\n"
    )


# ---------------------------------------------------------------------------
# refinement studies


@dataclass(frozen=True)
class RefinementRow:
    n_cells: int
    l1_diff_to_next: float
    rate: float | None


@dataclass(frozen=True)
class RefinementResult:
    rows: list[RefinementRow]
    reports: list[RunReport]

    @property
    def differences(self) -> list[float]:
        return [r.l1_diff_to_next for r in self.rows]


def refinement_study(
    scenario: Scenario, resolutions: list[int], strict: bool | None = None
) -> RefinementResult:
    """Run the scenario at each resolution and compare successive levels.

    Finer solutions are block-averaged down to the coarser grid; the table
    reports the restricted L1 differences and the observed convergence
    rates log2(d_i / d_{i+1}).
    """
    if len(resolutions) < 2:
        raise ValidationError("need at least two resolutions to compare")
    for a, b in zip(resolutions, resolutions[1:]):
        if b <= a:
            raise ValidationError(
                f"resolutions must be strictly increasing, got {a} before {b}"
            )
        if b % a != 0:
            raise ValidationError(
                f"each resolution must divide the next, got {a} then {b}"
            )
    reports = [
        run(dataclasses.replace(scenario, n_cells=n), strict=strict) for n in resolutions
    ]
    diffs = [
        l1_restricted_difference(coarse.final, fine.final)
        for coarse, fine in zip(reports, reports[1:])
    ]
    rows = []
    for i, (n, d) in enumerate(zip(resolutions, diffs)):
        if i + 1 < len(diffs) and diffs[i + 1] > 0.0:
            rate = math.log2(d / diffs[i + 1]) if d > 0.0 else None
        else:
            rate = None
        rows.append(RefinementRow(n_cells=n, l1_diff_to_next=d, rate=rate))
    return RefinementResult(rows=rows, reports=reports)
