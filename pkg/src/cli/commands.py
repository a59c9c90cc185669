"""Command-line front end: analyze, sweep, simulate, optimize, presets."""
import argparse
import logging
import sys
from typing import List, Optional

from ..analysis.model import CodingConfig, ConfigError, MetricsRow, throughput
from ..simulation.montecarlo import (
    MODES,
    PACKET_ERASURE,
    EstimateRow,
    TrialCapExceeded,
    TrialPlan,
    ValidationRow,
    run,
    validate,
)
from ..storage.csv_table import CsvTable
from ..storage.preset_manager import PresetError, PresetManager
from ..sweep.sweep import (
    OBJECTIVES,
    PRECODE_FIXED_K,
    PRECODE_MODES,
    PRECODE_NONE,
    VARIABLES,
    SweepError,
    SweepSpec,
    build_grid,
    optimize,
    preset_base,
    preset_spec,
    run_sweep,
)
from ..utils.log import configure_logging
from ..utils.settings import Settings, SettingsError, load_settings

logger = logging.getLogger("Cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ABORT = 2


class UsageError(Exception):
    """Bad flags or flag combinations."""

    def __init__(self, message: str, usage: str = ""):
        super().__init__(message)
        self.usage = usage


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(message, self.format_usage())


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _add_config_flags(parser: argparse.ArgumentParser, required: bool):
    group = parser.add_argument_group("operating point")
    group.add_argument("--K", type=int, required=required, help="generation size")
    group.add_argument("--u", type=int, required=required, help="bits per symbol, q = 2^u")
    group.add_argument("--n", type=int, required=required, help="symbols per packet")
    group.add_argument("--snr-db", type=float, required=required, dest="snr_db",
                       help="SNR per bit in dB")
    group.add_argument("--precode-k", type=int, dest="precode_k",
                       help="information symbols per packet of the pre-code")
    group.add_argument("--eq4-literal", action="store_true", dest="eq4_literal",
                       help="evaluate the QAM Q-function argument without the square root")
    group.add_argument("--gv-literal", action="store_true", dest="gv_literal",
                       help="use the infimum form of the GV distance")
    group.add_argument("--const-epsilon", type=float, dest="const_epsilon",
                       help="fixed erasure probability replacing the length-dependent model")


def _add_output_flag(parser: argparse.ArgumentParser):
    parser.add_argument("--out", help="write CSV to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rlnc", allow_abbrev=False,
                     description="Random linear coding over GF(2^u): throughput model, "
                                 "sweeps and Monte Carlo validation.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    analyze = commands.add_parser("analyze", allow_abbrev=False, help="evaluate one operating point")
    _add_config_flags(analyze, required=True)
    _add_output_flag(analyze)

    sweep = commands.add_parser("sweep", allow_abbrev=False, help="sweep n, u or k")
    sweep.add_argument("--figure", help="figure preset (1, 2, 3, 4a, 4b)")
    _add_config_flags(sweep, required=False)
    sweep.add_argument("--var", choices=VARIABLES)
    sweep.add_argument("--from", type=int, dest="start")
    sweep.add_argument("--to", type=int, dest="stop")
    sweep.add_argument("--step", type=_positive_int, help="grid step (default 1)")
    sweep.add_argument("--geometric", type=_positive_int, metavar="NUM",
                       help="use NUM geometrically spaced points instead of --step")
    sweep.add_argument("--precode", choices=PRECODE_MODES, default=None)
    sweep.add_argument("--rate", type=float, help="pre-code rate for fixed-rate sweeps")
    sweep.add_argument("--workers", type=_positive_int)
    _add_output_flag(sweep)

    simulate = commands.add_parser("simulate", allow_abbrev=False, help="Monte Carlo simulation")
    _add_config_flags(simulate, required=True)
    simulate.add_argument("--trials", type=int, required=True)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--mode", choices=MODES, default=PACKET_ERASURE)
    simulate.add_argument("--validate", action="store_true",
                          help="run both modes and compare against the analytic model")
    simulate.add_argument("--trial-cap", type=_positive_int, dest="trial_cap")
    simulate.add_argument("--workers", type=_positive_int)
    _add_output_flag(simulate)

    optimize_cmd = commands.add_parser("optimize", allow_abbrev=False,
                                       help="exhaustive scan for the best n, u or k")
    optimize_cmd.add_argument("--figure", help="figure preset supplying the base config")
    _add_config_flags(optimize_cmd, required=False)
    optimize_cmd.add_argument("--var", choices=VARIABLES)
    optimize_cmd.add_argument("--from", type=int, dest="start", required=True)
    optimize_cmd.add_argument("--to", type=int, dest="stop", required=True)
    optimize_cmd.add_argument("--maximize", choices=OBJECTIVES, default="S")
    optimize_cmd.add_argument("--precode", choices=PRECODE_MODES, default=None)
    optimize_cmd.add_argument("--rate", type=float)
    optimize_cmd.add_argument("--workers", type=_positive_int)
    _add_output_flag(optimize_cmd)

    presets = commands.add_parser("presets", allow_abbrev=False, help="list figure presets")
    _add_output_flag(presets)
    return parser


def _toggles(args) -> dict:
    return dict(eq4_literal=args.eq4_literal, gv_literal=args.gv_literal,
                const_epsilon=args.const_epsilon)


def config_from_args(args) -> CodingConfig:
    missing = [flag for flag, value in (("--K", args.K), ("--u", args.u), ("--n", args.n),
                                        ("--snr-db", args.snr_db)) if value is None]
    if missing:
        raise UsageError(f"missing required flags: {', '.join(missing)}")
    return CodingConfig.from_u(K=args.K, u=args.u, n=args.n, gamma_b_db=args.snr_db,
                               precode_k=args.precode_k, **_toggles(args))


def _metrics_table(leading: List[str]) -> CsvTable:
    return CsvTable(leading + list(MetricsRow.FIELDS))


def _metrics_cells(row: MetricsRow) -> list:
    return [getattr(row, name) for name in MetricsRow.FIELDS]


def cmd_analyze(args, settings: Settings) -> CsvTable:
    row = throughput(config_from_args(args))
    table = _metrics_table([])
    table.add_row(_metrics_cells(row))
    return table


CONFIG_FLAGS = (("--K", "K"), ("--u", "u"), ("--n", "n"), ("--snr-db", "snr_db"),
                ("--precode-k", "precode_k"))
SWEEP_FLAGS = (("--var", "var"), ("--from", "start"), ("--to", "stop"), ("--step", "step"),
               ("--geometric", "geometric"), ("--precode", "precode"), ("--rate", "rate"))


def _reject_with_figure(args, flags):
    given = [flag for flag, dest in flags if getattr(args, dest) is not None]
    if given:
        raise UsageError(f"--figure cannot be combined with {', '.join(given)}")


def _pick(value, default):
    return default if value is None else value


def _sweep_spec_from_args(args, manager: PresetManager) -> SweepSpec:
    if args.figure:
        _reject_with_figure(args, CONFIG_FLAGS + SWEEP_FLAGS)
        return preset_spec(manager.get(args.figure), **_toggles(args))

    if args.var is None or args.start is None or args.stop is None:
        raise UsageError("sweep needs --figure, or --var with --from and --to")
    if args.geometric is not None and args.step is not None:
        raise UsageError("--step and --geometric are mutually exclusive")
    base = config_from_args(args)
    precode = args.precode or (PRECODE_FIXED_K if args.precode_k is not None else PRECODE_NONE)
    if args.geometric is not None:
        grid = build_grid(args.start, args.stop, num=args.geometric, spacing="geometric")
    else:
        grid = build_grid(args.start, args.stop, step=_pick(args.step, 1))
    return SweepSpec(base, args.var, grid, precode, args.rate)


def cmd_sweep(args, settings: Settings) -> CsvTable:
    spec = _sweep_spec_from_args(args, PresetManager(settings.presets_path))
    result = run_sweep(spec, workers=_pick(args.workers, settings.workers))
    table = _metrics_table([spec.variable])
    for value, row in zip(result.grid, result.rows):
        table.add_row([value] + _metrics_cells(row))
    table.add_comment(f"argmax_S={result.argmax_S} argmax_R={result.argmax_R}")
    return table


def cmd_simulate(args, settings: Settings) -> CsvTable:
    config = config_from_args(args)
    trial_cap = _pick(args.trial_cap, settings.trial_cap)
    workers = _pick(args.workers, settings.workers)

    if args.validate:
        report = validate(config, args.trials, args.seed, trial_cap=trial_cap, workers=workers)
        table = CsvTable(ValidationRow.FIELDS)
        for row in report.rows:
            table.add_row([getattr(row, name) for name in ValidationRow.FIELDS])
        table.add_comment(f"trials={report.trials} seed={report.base_seed} "
                          f"all_agree={'true' if report.all_agree else 'false'}")
        return table

    plan = TrialPlan(config=config, trials=args.trials, base_seed=args.seed, mode=args.mode,
                     trial_cap=trial_cap, workers=workers)
    estimate = run(plan)
    table = CsvTable(EstimateRow.FIELDS)
    table.add_row([getattr(estimate, name) for name in EstimateRow.FIELDS])
    table.add_comment(f"seed={args.seed}")
    return table


def cmd_optimize(args, settings: Settings) -> CsvTable:
    if args.figure:
        _reject_with_figure(args, CONFIG_FLAGS)
        preset = PresetManager(settings.presets_path).get(args.figure)
        base = preset_base(preset, **_toggles(args))
        variable = args.var or preset.variable
        precode = args.precode or preset.precode
        rate = args.rate if args.rate is not None else preset.rate
    else:
        if args.var is None:
            raise UsageError("optimize needs --var or --figure")
        base = config_from_args(args)
        variable = args.var
        precode = args.precode or (PRECODE_FIXED_K if args.precode_k is not None else PRECODE_NONE)
        rate = args.rate

    best, row = optimize(base, variable, args.start, args.stop, objective=args.maximize,
                         precode_mode=precode, rate=rate,
                         workers=_pick(args.workers, settings.workers))
    table = _metrics_table([variable])
    table.add_row([best] + _metrics_cells(row))
    table.add_comment(f"maximize={args.maximize} range=[{args.start},{args.stop}]")
    return table


def cmd_presets(args, settings: Settings) -> CsvTable:
    manager = PresetManager(settings.presets_path)
    table = CsvTable(["name", "variable", "precode", "description"])
    for name in manager.names():
        preset = manager.get(name)
        table.add_row([preset.name, preset.variable, preset.precode, preset.description])
    return table


COMMANDS = {
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "optimize": cmd_optimize,
    "presets": cmd_presets,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Parse flags, run one command and print its CSV.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])

    Returns:
        Exit status: 0 success, 1 usage or validation error, 2 trial-cap abort
    """
    parser = build_parser()
    try:
        settings = load_settings()
        args = parser.parse_args(argv)
        configure_logging("INFO" if args.verbose else settings.log_level)
        logger.info(f"Running {args.command}")
        table = COMMANDS[args.command](args, settings)
        table.write(args.out)
        return EXIT_OK
    except UsageError as e:
        if e.usage:
            sys.stderr.write(e.usage)
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except (ConfigError, SweepError, PresetError, SettingsError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except TrialCapExceeded as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ABORT
