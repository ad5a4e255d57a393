"""Command-line front end.

Subcommands:

* ``ddflux run --config FILE [--out DIR] [--strict]`` — execute one
  scenario and optionally write solution/diagnostics CSVs;
* ``ddflux preset --list`` / ``ddflux preset --show NAME`` — inspect the
  shipped scenarios;
* ``ddflux refine --config FILE --resolutions 256,512,...`` — run a
  refinement study and print the difference table.

Exit codes: 0 success, 1 validation/configuration error, 2 numerical
failure (infeasible CFL, blow-up, singular solve).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import DdfluxNumericalError, DdfluxValidationError
from .experiments import (
    RunReport,
    emit_diagnostics_csv,
    emit_solution_csv,
    parse_config,
    presets,
    refinement_study,
    run,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddflux",
        description="Finite-difference experiments for conservation laws with "
        "discontinuous coefficients and vanishing regularization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario from a config file")
    p_run.add_argument("--config", required=True, help="path to a key=value config file")
    p_run.add_argument("--out", help="directory for solution/diagnostics CSVs")
    p_run.add_argument(
        "--strict",
        action="store_true",
        help="use the strict (estimate-backed) CFL instead of the practical one",
    )

    p_preset = sub.add_parser("preset", help="inspect shipped scenarios")
    group = p_preset.add_mutually_exclusive_group(required=True)
    group.add_argument("--list", action="store_true", help="list preset names")
    group.add_argument("--show", metavar="NAME", help="print one preset's fields")

    p_refine = sub.add_parser("refine", help="run a refinement study")
    p_refine.add_argument("--config", required=True)
    p_refine.add_argument(
        "--resolutions",
        required=True,
        help="comma-separated increasing cell counts, e.g. 256,512,1024,2048",
    )
    p_refine.add_argument("--strict", action="store_true")
    return parser


def _read_config(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DdfluxValidationError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config(text)


def _print_report(report: RunReport) -> None:
    s = report.scenario
    print(f"scenario   {s.name} ({s.scheme}, {s.model}, {s.flux})")
    print(f"grid       [{s.x_left:g}, {s.x_right:g}] with {s.n_cells} cells, {s.bc}")
    print(
        f"time       t_end={s.t_end:g}  dt={report.dt:.6e}  steps={report.steps}  "
        f"cfl_branch={report.cfl.active} ({report.cfl.mode.value})"
    )
    last = report.diagnostics[-1]
    print(
        f"final      mass={last.mass:.10g}  l2={last.l2:.10g}  bv={last.bv:.6g}  "
        f"energy={last.energy:.10g}"
    )
    if report.plateaus:
        spans = ", ".join(
            f"{p.value:.5g} on cells [{p.start}..{p.end}]" for p in report.plateaus
        )
        print(f"plateaus   {len(report.plateaus)}: {spans}")
    else:
        print("plateaus   none detected")
    print(f"wall time  {report.wall_time:.3f} s")


def _cmd_run(args) -> int:
    scenario = _read_config(args.config)
    report = run(scenario, strict=True if args.strict else None)
    _print_report(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        sol = out / f"{scenario.name}_solution.csv"
        dia = out / f"{scenario.name}_diagnostics.csv"
        emit_solution_csv(report, sol)
        emit_diagnostics_csv(report, dia)
        print(f"wrote      {sol}")
        print(f"wrote      {dia}")
    return EXIT_OK


def _cmd_preset(args) -> int:
    table = presets()
    if args.list:
        for name in table:
            print(name)
        return EXIT_OK
    name = args.show
    if name not in table:
        raise DdfluxValidationError(
            f"unknown preset {name!r}, expected one of {tuple(table)}"
        )
    s = table[name]
    print(f"name={s.name}")
    print(f"scheme={s.scheme}")
    print(f"model={s.model}")
    print(f"flux={s.flux}")
    print(f"x_left={s.x_left:g}")
    print(f"x_right={s.x_right:g}")
    print(f"n_cells={s.n_cells}")
    print(f"bc={s.bc}")
    print(f"t_end={s.t_end:g}")
    p = s.params
    print(
        f"beta={p.beta:g}\ngamma={p.gamma:g}\nmu_constant={p.mu_constant:g}\n"
        f"mu_exponent={p.mu_exponent:g}\ncfl_number={p.cfl_number:g}\ndelta={p.delta:g}"
    )
    return EXIT_OK


def _cmd_refine(args) -> int:
    scenario = _read_config(args.config)
    try:
        resolutions = [int(tok) for tok in args.resolutions.split(",") if tok]
    except ValueError:
        raise DdfluxValidationError(
            f"--resolutions expects comma-separated integers, got {args.resolutions!r}"
        ) from None
    result = refinement_study(scenario, resolutions, strict=True if args.strict else None)
    print(f"{'N':>8}  {'l1_diff_to_next':>18}  {'rate':>8}")
    for row in result.rows:
        rate = f"{row.rate:.3f}" if row.rate is not None else "-"
        print(f"{row.n_cells:>8}  {row.l1_diff_to_next:>18.10e}  {rate:>8}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "preset": _cmd_preset, "refine": _cmd_refine}
    try:
        return handlers[args.command](args)
    except DdfluxValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DdfluxNumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
