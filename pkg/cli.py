from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from modules.checks import run_all_suites
from modules.config import OUTPUT_FORMATS, RunConfig, build_config, parse_config_file
from modules.dynamics import (
    critical_angles,
    event_times,
    general_event_times,
    general_scan,
    plateau,
    scan_frame,
    scan_grid,
    transfer_summary,
)
from modules.errors import ConvergenceError, InvariantViolation
from modules.export_pdf import export_report
from modules.figures import figure_frame
from modules.output import frame_to_records, to_json, write_table, write_text
from modules.reservoir import (
    ReservoirSpec,
    default_kappa_t_samples,
    flat_spectrum_deviations,
    phase_rotation_equivalence,
)
from modules.states import GeneralInitialState

logger = logging.getLogger("cli")

CONFIG_FLAGS = (
    "alpha",
    "beta",
    "gamma",
    "kappa",
    "t_min",
    "t_max",
    "t_steps",
    "gamma_min",
    "gamma_max",
    "gamma_steps",
    "output_format",
    "output_path",
    "seed",
    "samples",
    "n_modes",
    "bandwidth_over_kappa",
    "center_over_kappa",
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags win over its values")
    common.add_argument("--verbose", action="store_true", help="log progress at INFO")
    common.add_argument("--debug", action="store_true", help="log details at DEBUG")
    for name in ("alpha", "beta", "gamma", "kappa", "t-min", "t-max", "gamma-min", "gamma-max"):
        common.add_argument(f"--{name}", type=float, default=None)
    for name in ("t-steps", "gamma-steps", "seed", "samples", "n-modes"):
        common.add_argument(f"--{name}", type=int, default=None)
    common.add_argument("--bandwidth-over-kappa", type=float, default=None)
    common.add_argument("--center-over-kappa", type=float, default=None)
    common.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS, default=None)
    common.add_argument("--out", dest="output_path", default=None, help="output file (default: stdout)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="cavity-entanglement",
        description="Entanglement dynamics of two cavity photons leaking into independent reservoirs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("evolve", parents=[common], help="scan every entanglement measure over the (gamma, t) grid")
    sub.add_parser("times", parents=[common], help="ESD/ESB times, critical angles and plateau as JSON")

    figure = sub.add_parser("figure", parents=[common], help="data behind one surface or curve set")
    figure.add_argument("--id", dest="figure_id", required=True)

    check = sub.add_parser("check", parents=[common], help="run the seeded invariant suites")
    check.add_argument("--tolerance-scale", type=float, default=1.0, help=argparse.SUPPRESS)

    sub.add_parser("reservoir-validate", parents=[common], help="compare the finite-mode reservoir with the flat spectrum")

    report = sub.add_parser("report", parents=[common], help="PDF summary of one run")
    report.add_argument("--with-checks", action="store_true")

    general = sub.add_parser("general", parents=[common], help="events and curves for an arbitrary initial state")
    for name, default in (("a1", "0"), ("a2", "0"), ("a3", "0"), ("a4", "0")):
        general.add_argument(f"--{name}", default=default, help="complex amplitude, e.g. 0.5 or 0.5j")
    general.add_argument("--scan", action="store_true", help="also emit the oracle curves over the time grid")
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.debug else logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)


def load_config(args: argparse.Namespace) -> RunConfig:
    file_values = parse_config_file(args.config) if args.config else {}
    overrides = {name: getattr(args, name, None) for name in CONFIG_FLAGS}
    return build_config(file_values, overrides)


def _params_record(config: RunConfig) -> Dict[str, object]:
    return {"alpha": config.alpha, "beta": config.beta, "gamma": config.gamma, "kappa": config.kappa}


def cmd_evolve(config: RunConfig, args: argparse.Namespace) -> int:
    rows = scan_grid(config.effective_params(), config.t_values(), config.gamma_values())
    frame = scan_frame(rows)
    logger.info("evolve: %d rows", len(frame))
    write_table(frame, config.output_format, config.output_path, sheet_name="Scan", parameters=_params_record(config))
    return EXIT_OK


def times_payload(config: RunConfig) -> Dict[str, object]:
    p = config.effective_params()
    flat = plateau(p)
    return {
        "params": _params_record(config),
        "event_times": event_times(p).as_dict(),
        "critical_angles": critical_angles(p).as_dict(),
        "plateau": None if flat is None else flat.as_dict(),
        "transfer": transfer_summary(p),
    }


def cmd_times(config: RunConfig, args: argparse.Namespace) -> int:
    write_text(to_json(times_payload(config)), config.output_path)
    return EXIT_OK


def cmd_figure(config: RunConfig, args: argparse.Namespace) -> int:
    kappa_t = config.kappa * config.t_values() if config.sets_time_grid() else None
    gammas = config.gamma_values() if config.sets_gamma_grid() else None
    frame = figure_frame(args.figure_id, config.effective_params(), kappa_t, gammas)
    write_table(
        frame,
        config.output_format,
        config.output_path,
        sheet_name=f"Figure {args.figure_id}",
        parameters=_params_record(config),
    )
    return EXIT_OK


def cmd_check(config: RunConfig, args: argparse.Namespace) -> int:
    result = run_all_suites(seed=config.seed, samples=config.samples, tolerance_scale=args.tolerance_scale)
    suites_df = result["suites_df"]
    for suite, group in suites_df.groupby("suite", sort=False):
        status = "PASS" if bool(group["passed"].all()) else "FAIL"
        print(f"{status} {suite}", file=sys.stderr)
    write_table(suites_df, config.output_format, config.output_path, sheet_name="Checks")
    return EXIT_OK if result["passed"] else EXIT_FAILED


def reservoir_payload(config: RunConfig) -> Dict[str, object]:
    spec = ReservoirSpec.from_kappa(
        config.kappa, config.n_modes, config.bandwidth_over_kappa, config.center_over_kappa
    )
    samples = [x / spec.kappa for x in default_kappa_t_samples(config.kappa * config.t_max)]
    if not samples:
        raise ValueError("reservoir-validate needs kappa * t_max of at least 0.1.")
    amplitude_dev, population_dev = flat_spectrum_deviations(spec, samples)
    phase_dev = phase_rotation_equivalence(spec, config.eta, samples[-1])
    passed = (
        amplitude_dev <= config.amplitude_tol
        and population_dev <= config.population_tol
        and phase_dev <= config.phase_tol
    )
    return {
        "n_modes": spec.n_modes,
        "bandwidth_over_kappa": config.bandwidth_over_kappa,
        "kappa_t_max": config.kappa * config.t_max,
        "horizon_kappa_t": spec.horizon * spec.kappa,
        "amplitude_deviation": amplitude_dev,
        "population_deviation": population_dev,
        "phase_rotation_deviation": phase_dev,
        "bounds": {
            "amplitude": config.amplitude_tol,
            "population": config.population_tol,
            "phase_rotation": config.phase_tol,
        },
        "passed": passed,
    }


def cmd_reservoir_validate(config: RunConfig, args: argparse.Namespace) -> int:
    payload = reservoir_payload(config)
    write_text(to_json(payload), config.output_path)
    return EXIT_OK if payload["passed"] else EXIT_FAILED


def cmd_report(config: RunConfig, args: argparse.Namespace) -> int:
    if not config.output_path:
        raise ValueError("report needs --out PATH.pdf.")
    payload = times_payload(config)
    checks = None
    if args.with_checks:
        checks = run_all_suites(seed=config.seed, samples=config.samples)["suites_df"]
    pdf = export_report(
        payload["params"],
        payload["event_times"],
        payload["critical_angles"],
        payload["plateau"],
        payload["transfer"],
        checks,
    )
    Path(config.output_path).write_bytes(pdf.getvalue())
    logger.info("Wrote %s", config.output_path)
    return EXIT_OK


def _parse_amplitude(name: str, text: str) -> complex:
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError as exc:
        raise ValueError(f"--{name} is not a complex number: {text!r}.") from exc


def cmd_general(config: RunConfig, args: argparse.Namespace) -> int:
    init = GeneralInitialState(*(_parse_amplitude(n, getattr(args, n)) for n in ("a1", "a2", "a3", "a4")))
    times = general_event_times(init, config.kappa).as_dict()
    if not args.scan:
        write_text(to_json(times), config.output_path)
        return EXIT_OK

    frame = general_scan(init, config.kappa, config.t_values())
    if config.output_format == "json":
        write_text(to_json({"event_times": times, "scan": frame_to_records(frame)}), config.output_path)
    else:
        write_table(frame, config.output_format, config.output_path, sheet_name="General")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig, argparse.Namespace], int]] = {
    "evolve": cmd_evolve,
    "times": cmd_times,
    "figure": cmd_figure,
    "check": cmd_check,
    "reservoir-validate": cmd_reservoir_validate,
    "report": cmd_report,
    "general": cmd_general,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        config = load_config(args)
        return COMMANDS[args.command](config, args)
    except (InvariantViolation, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
