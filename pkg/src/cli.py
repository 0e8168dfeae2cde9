"""
Command-line entry point: ``sparls run|prox-table|mcp-table|gamma-sweep|diag|presets``.

Every :class:`ExperimentConfig` field is exposed as a ``--flag`` that overrides
the value read from ``--config``.
"""
import argparse
import logging
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union, get_args, get_origin

import numpy as np

from . import __version__
from .app import ExperimentRunner
from .config import ExperimentConfig, Scenario, load_config
from .core.errors import SparlsError
from .templates.presets import default_library

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
FLAG_ALIASES = {"lam": ["--lambda"]}


def _unwrap_optional(annotation: Any) -> Any:
    if get_origin(annotation) is Union:
        args = [a for a in get_args(annotation) if a is not type(None)]
        if len(args) == 1:
            return args[0]
    return annotation


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("experiment overrides")
    for name, info in ExperimentConfig.model_fields.items():
        annotation = _unwrap_optional(info.annotation)
        flags = [f"--{name.replace('_', '-')}"] + FLAG_ALIASES.get(name, [])
        kwargs: Dict[str, Any] = {"dest": name, "default": None}
        origin = get_origin(annotation)
        if annotation is bool:
            kwargs["action"] = argparse.BooleanOptionalAction
        elif origin in (list, List):
            (item,) = get_args(annotation)
            kwargs.update(nargs="+", type=str, choices=[m.value for m in item])
        elif origin in (tuple,):
            kwargs.update(nargs=len(get_args(annotation)), type=float)
        elif isinstance(annotation, type) and issubclass(annotation, Enum):
            kwargs.update(type=str, choices=[m.value for m in annotation])
        else:
            kwargs["type"] = annotation
        group.add_argument(*flags, **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparls",
        description="MCP-regularized sparse adaptive filtering experiments",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging verbosity",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a Monte Carlo experiment and write its artifacts")
    run.add_argument("--config", type=Path, help="TOML experiment file")
    _add_config_flags(run)

    sweep = sub.add_parser("gamma-sweep", help="Grid search over gamma or alpha")
    sweep.add_argument("--config", type=Path, help="TOML experiment file")
    sweep.add_argument("--param", choices=["gamma", "alpha"], default="gamma")
    sweep.add_argument("--values", type=float, nargs="+", help="Explicit grid values")
    sweep.add_argument(
        "--grid",
        type=float,
        nargs=3,
        metavar=("START", "STOP", "NUM"),
        default=[0.1, 100.0, 7],
        help="Log-spaced grid used when --values is absent",
    )
    sweep.add_argument("--sweep-trials", type=int, default=None, help="Trials per grid point")
    _add_config_flags(sweep)

    diag = sub.add_parser("diag", help="Error-bound report on a static instance")
    diag.add_argument("--config", type=Path, help="TOML experiment file")
    _add_config_flags(diag)

    prox = sub.add_parser("prox-table", help="Tabulate the scalar MCP prox")
    prox.add_argument("--alpha", type=float, default=1.0)
    prox.add_argument("--beta", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    prox.add_argument("--r-range", type=float, nargs=2, default=[-3.0, 3.0])
    prox.add_argument("--points", type=int, default=601)
    prox.add_argument("--output", type=Path, default=Path("prox_table.csv"))
    prox.add_argument("--plots", action=argparse.BooleanOptionalAction, default=True)

    mcp = sub.add_parser("mcp-table", help="Tabulate MCP, its Moreau envelope and |w|")
    mcp.add_argument("--alpha", type=float, default=1.0)
    mcp.add_argument("--w-range", type=float, nargs=2, default=[-3.0, 3.0])
    mcp.add_argument("--points", type=int, default=601)
    mcp.add_argument("--output", type=Path, default=Path("mcp_table.csv"))
    mcp.add_argument("--plots", action=argparse.BooleanOptionalAction, default=True)

    presets = sub.add_parser("presets", help="List the shipped parameter presets")
    presets.add_argument("--category", help="Only presets of this category")
    presets.add_argument("--search", help="Match against name, tags and description")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {name: getattr(args, name, None) for name in ExperimentConfig.model_fields}


def _runner(plots: bool) -> ExperimentRunner:
    runner = ExperimentRunner()
    if not plots:
        runner.plotter = None
    return runner


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config, _overrides(args))
    artifacts = _runner(config.plots).run_experiment(config)
    for name in sorted(artifacts):
        print(f"{name}: {artifacts[name]}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config, _overrides(args))
    if args.values:
        values = args.values
    else:
        start, stop, num = args.grid
        values = np.geomspace(start, stop, int(num)).tolist()
    table = _runner(False).gamma_sweep(config, values, args.param, args.sweep_trials)
    print(table.to_string(index=False))
    return 0


def _cmd_diag(args: argparse.Namespace) -> int:
    overrides = _overrides(args)
    overrides["scenario"] = Scenario.STATIC_DIAG.value
    config = load_config(args.config, overrides)
    report = _runner(False).diag(config)
    print(report.to_json(indent=2))
    return 0


def _cmd_prox(args: argparse.Namespace) -> int:
    grid = np.linspace(args.r_range[0], args.r_range[1], args.points)
    _runner(args.plots).prox_table(args.beta, args.alpha, grid, args.output)
    print(f"prox_table: {args.output}")
    return 0


def _cmd_mcp(args: argparse.Namespace) -> int:
    grid = np.linspace(args.w_range[0], args.w_range[1], args.points)
    _runner(args.plots).mcp_table(args.alpha, grid, args.output)
    print(f"mcp_table: {args.output}")
    return 0


def _cmd_presets(args: argparse.Namespace) -> int:
    library = default_library()
    names = library.list_presets(args.category)
    if args.search:
        matches = set(library.search_presets(args.search))
        names = [name for name in names if name in matches]
    for name in names:
        preset = library.get_preset(name)
        snr = "-" if preset.snr_db is None else f"{preset.snr_db:g} dB"
        print(
            f"{name}: scenario={preset.scenario} snr={snr} gamma={preset.gamma} "
            f"alpha={preset.alpha} lambda={preset.lam} K={preset.K}"
        )
    return 0


COMMANDS = {
    "run": _cmd_run,
    "gamma-sweep": _cmd_sweep,
    "diag": _cmd_diag,
    "prox-table": _cmd_prox,
    "mcp-table": _cmd_mcp,
    "presets": _cmd_presets,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI.

    Returns:
        0 on success, 2 for library errors (bad config, failed trials, ...) and
        1 for anything unexpected.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)
    try:
        return COMMANDS[args.command](args)
    except SparlsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        logger.exception("Unexpected failure")
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
