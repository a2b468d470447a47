"""Command-line entry point: validate, solve-power, solve-rtn, couple, report.

Exit codes: 0 success, 1 invalid input or usage, 2 a model failed to solve.
Progress goes to standard error; data goes to files or standard output.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from .coupler import (
    FAILED, CouplingState, IterationRecord, aggregate_cells_to_regions,
    aggregate_to_slices, clamp_negative, electrified_mix, reconstruct_power_demands, run_coupled, write_snapshot,
)
from .power import build_power_model, summarise
from .rtn import (
    HydrogenPlan, build_rtn_model, extract_heat_mix, extract_hydrogen_plan, write_heat_mix_csv, write_plan_csvs,
)
from .scenario import (
    OutputExistsError, ScenarioLoadError, apply_calendar_file, load_scenario, prepare_output, read_prices_csv,
    reduce_calendar, validate, write_results,
)
from .solver import SolverConfig, solve_lp, solve_mip, to_lp_format

log = logging.getLogger("softlink")

OK, INVALID, SOLVE_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are input errors, not solve failures
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _non_negative(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--scenario", required=True, help="scenario directory (manifest.yaml + CSV tables)")
    common.add_argument("--solver", choices=("highs", "builtin"), default="highs", help="LP/MIP engine")
    common.add_argument("--reduced-calendar", metavar="FILE",
                        help="calendar CSV (day, season, weight) selecting profile days, or 'auto'")
    common.add_argument("--quiet", action="store_true", help="only warnings and errors on stderr")

    parser = _Parser(prog="softlink", description="Soft-linked power / hydrogen-heat investment planning.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("validate", parents=[common], help="check a scenario and print the report")

    p = sub.add_parser("solve-power", parents=[common], help="solve the power model with all heat electrified")
    p.add_argument("--period", type=int, help="one period (default: every period)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--force", action="store_true", help="overwrite a non-empty output directory")

    p = sub.add_parser("solve-rtn", parents=[common], help="solve the hydrogen/heat RTN for given prices")
    p.add_argument("--prices", help="slice price CSV (period, region, slice, retail), e.g. from solve-power")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--gap", type=_non_negative, default=1e-3, help="relative MIP gap")
    p.add_argument("--force", action="store_true", help="overwrite a non-empty output directory")

    p = sub.add_parser("couple", parents=[common], help="run the soft-linking loop")
    p.add_argument("--out", required=True, help="results directory")
    p.add_argument("--iterations", type=_positive_int, help="iteration cap (default from manifest)")
    p.add_argument("--threshold", type=_non_negative, help="convergence threshold (default from manifest)")
    p.add_argument("--gap", type=_non_negative, help="relative MIP gap (default from manifest)")
    p.add_argument("--force", action="store_true", help="overwrite a non-empty results directory")

    p = sub.add_parser("report", help="summarise a results directory")
    p.add_argument("--out", required=True, help="results directory written by couple")
    return parser


def _scenario(args):
    scenario = load_scenario(args.scenario)
    if args.reduced_calendar == "auto":
        scenario = reduce_calendar(scenario)
    elif args.reduced_calendar:
        scenario = apply_calendar_file(scenario, args.reduced_calendar)
    return scenario


def _check_valid(scenario) -> bool:
    report = validate(scenario)
    for issue in report.issues:
        log.log(logging.ERROR if issue.severity == "error" else logging.WARNING, "%s", issue)
    return report.ok


def cmd_validate(args) -> int:
    scenario = _scenario(args)
    report = validate(scenario)
    print(report)
    return OK if report.ok else INVALID


def cmd_solve_power(args) -> int:
    scenario = _scenario(args)
    if not _check_valid(scenario):
        return INVALID
    periods = [args.period] if args.period is not None else list(scenario.periods)
    unknown = [p for p in periods if p not in scenario.periods]
    if unknown:
        raise UsageError(f"period {unknown[0]} is not one of {list(scenario.periods)}")
    out = prepare_output(args.out, args.force)
    config = SolverConfig(backend=args.solver)
    inst_rtn = scenario.rtn_instance()
    _, mix = aggregate_cells_to_regions(HydrogenPlan(), electrified_mix(inst_rtn), scenario.region_mapping)
    power, hourly, wholesale, retail, demands = {}, {}, {}, {}, {}
    for p in periods:
        dem = reconstruct_power_demands(mix, HydrogenPlan(), scenario.hourly_heat_demand(p), scenario.hourly_cop(),
                                        scenario.calendar, p, scenario.boiler_efficiency)
        inst = scenario.power_instance(p, dem.heat_electric, dem.h2_electric)
        lp = build_power_model(inst, scenario.power_catalog)
        sol = solve_lp(lp, config)
        if not sol.optimal:
            (out / "failed_model.lp").write_text(to_lp_format(lp))
            log.error("power model %s is %s", p, sol.status)
            return SOLVE_FAILED
        s = summarise(sol, inst, scenario.power_catalog)
        log.info("power %s: mean price %.2f GBP/MWh, cost %.4g GBP", p, s.mean_price, s.total_cost)
        power[p], hourly[p], demands[p] = s, s.prices, dem
        wholesale[p] = {r: aggregate_to_slices(v, scenario.calendar) for r, v in s.prices.items()}
        retail[p] = {r: scenario.retail(aggregate_to_slices(clamp_negative(v), scenario.calendar))
                     for r, v in s.prices.items()}
    record = IterationRecord(0, hourly, wholesale, retail, power, demands, None, None)
    write_snapshot(record, out)
    rows = [(p, r, h, float(x)) for p in sorted(hourly) for r in sorted(hourly[p]) for h, x in enumerate(hourly[p][r])]
    pd.DataFrame(rows, columns=["period", "region", "hour", "price"]).to_csv(out / "hourly_prices.csv", index=False,
                                                                            float_format="%.6f")
    print(out / "slice_prices.csv")
    return OK


def cmd_solve_rtn(args) -> int:
    if not args.prices:
        raise UsageError("solve-rtn needs --prices FILE (slice prices, e.g. slice_prices.csv from solve-power)")
    scenario = _scenario(args)
    if not _check_valid(scenario):
        return INVALID
    prices = read_prices_csv(args.prices, scenario.periods, scenario.regions)
    missing = [(p, r) for p in prices for r, v in prices[p].items() if np.isnan(v).any()]
    if missing:
        raise UsageError(f"{args.prices}: incomplete slice prices for {missing[0][0]}/{missing[0][1]}")
    out = prepare_output(args.out, args.force)
    inst = scenario.rtn_instance()
    mip = build_rtn_model(inst, prices)
    sol = solve_mip(mip, args.gap, SolverConfig(backend=args.solver))
    if not sol.has_incumbent:
        (out / "failed_model.lp").write_text(to_lp_format(mip.lp, mip.integer))
        log.error("RTN model is %s", sol.status)
        return SOLVE_FAILED
    log.info("RTN objective %.6g GBPm, gap %.3g", sol.objective, sol.gap)
    write_heat_mix_csv(extract_heat_mix(sol, inst), out / "heat_mix.csv")
    write_plan_csvs(extract_hydrogen_plan(sol, inst, prices), out)
    summary = {"status": sol.status, "objective_gbp_m": sol.objective, "gap": sol.gap, "flagged": sol.flagged}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(out / "heat_mix.csv")
    return OK


def cmd_couple(args) -> int:
    scenario = _scenario(args)
    if not _check_valid(scenario):
        return INVALID
    settings = scenario.settings["coupling"]
    iterations = args.iterations if args.iterations is not None else int(settings["max_iterations"])
    threshold = args.threshold if args.threshold is not None else float(settings["threshold"])
    gap = args.gap if args.gap is not None else float(settings["gap"])
    out = Path(args.out)
    prepare_output(out, args.force)  # refuse early, before any solve
    state: CouplingState = run_coupled(scenario, iterations, threshold, SolverConfig(backend=args.solver), gap)
    manifest = write_results(state, out, force=True, scenario=scenario)
    for record in state.history:
        log.info("iteration %d: share change %.4g, price change %.4g", record.iteration, record.max_share_change,
                 record.max_price_change)
    print(manifest)
    if state.status == FAILED:
        log.error("coupling failed: %s", state.failure)
        return SOLVE_FAILED
    log.info("coupling finished: %s after %d iteration(s)", state.status, state.iteration)
    return OK


def cmd_report(args) -> int:
    path = Path(args.out) / "manifest.json"
    if not path.exists():
        raise UsageError(f"{path} not found; run couple first")
    manifest = json.loads(path.read_text())
    print(f"status: {manifest['status']}" + (f" ({manifest['failure']})" if manifest.get("failure") else ""))
    for it in manifest["iterations"]:
        print(f"iteration {it['iteration']}: RTN objective {it['rtn_objective_gbp_m']} GBPm, "
              f"share change {it['max_share_change']}, price change {it['max_price_change']}")
        for period, s in sorted(it["periods"].items()):
            caps = ", ".join(f"{k} {v:.1f}" for k, v in s["capacity_gw"].items() if v > 0.05)
            print(f"  {period}: mean price {s['mean_wholesale_price']:.2f} GBP/MWh, heat-electric "
                  f"{s['heat_electric_twh']:.1f} TWh, emissions {s['emissions_mt']:.2f} Mt; GW: {caps}")
    return OK


COMMANDS = {"validate": cmd_validate, "solve-power": cmd_solve_power, "solve-rtn": cmd_solve_rtn,
            "couple": cmd_couple, "report": cmd_report}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return INVALID
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING if getattr(args, "quiet", False) else logging.INFO,
                        stream=sys.stderr, format="%(levelname)s %(message)s", force=True)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"softlink {args.command}: error: {exc}", file=sys.stderr)
        return INVALID
    except ScenarioLoadError as exc:
        print(f"softlink {args.command}: invalid scenario:\n{exc}", file=sys.stderr)
        return INVALID
    except OutputExistsError as exc:
        print(f"softlink {args.command}: error: {exc}", file=sys.stderr)
        return INVALID
    except (OSError, ValueError, KeyError) as exc:
        print(f"softlink {args.command}: error: {exc}", file=sys.stderr)
        return INVALID


if __name__ == "__main__":
    sys.exit(main())
