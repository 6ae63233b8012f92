"""
Command-line subcommands.

Each subcommand reads a JSON experiment description, applies its
"settings" block and the common flags to the loaded configuration, runs
the experiment and maps lab errors to exit codes:
0 ok, 1 config/parse, 2 hyperbolicity, 3 convergence, 4 resolution.
"""

import argparse
import logging
import os
from typing import Optional

from app.config.settings import LabConfig, apply_overrides, load_config
from app.domain.runner import COMMANDS, load_experiment
from app.errors import LabError
from app.factory import create_runner

logger = logging.getLogger(__name__)

_HELP = {
    "roots": "Hyperbolicity certificate, roots and root derivatives on a (t, ω) grid",
    "asymint": "Asymptotic profiles α_± and ε(t) along given frequencies",
    "sugimoto": "Contact indices γ, γ₀ of a phase or of the limiting operators",
    "decay": "Spectral Cauchy solve with L^q decay fits per frequency zone",
    "vdc": "Model oscillatory integrals and their envelope fit",
    "kernel": "Windowed dispersive kernels I(t, x) with stationary splitting",
    "dump": "Sampled N, D, C along one frequency and the energy check",
}


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", default=None, help="Experiment description (JSON)")
    parser.add_argument("--operator", default=None, help="Operator file, overrides the experiment's operator")
    parser.add_argument("--out-dir", default=None, help="Output directory")
    parser.add_argument("--seed", type=int, default=None, help="Random seed")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads (1 = reproducible mode)")
    parser.add_argument("--tol", type=float, default=None, help="ODE tolerance")
    parser.add_argument("--debug", action="store_true", help="Debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Hyperbolic decay lab")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        _add_common(subparsers.add_parser(command, help=_HELP[command]))
    return parser


def configure(args: argparse.Namespace, spec: dict, config: Optional[LabConfig] = None) -> LabConfig:
    """Defaults and environment, then the experiment's settings block, then flags."""
    config = config or load_config()
    apply_overrides(config, spec.get("settings", {}))
    if args.out_dir:
        config.run.out_dir = args.out_dir
    if args.seed is not None:
        config.run.seed = args.seed
    if args.threads is not None:
        config.run.threads = args.threads
    if args.tol is not None:
        config.asymint.ode_tol = args.tol
    if args.debug:
        config.run.debug = True
    return config


def execute(args: argparse.Namespace, config: Optional[LabConfig] = None) -> int:
    try:
        if args.config:
            spec = load_experiment(args.config)
            base_dir = os.path.dirname(os.path.abspath(args.config))
        else:
            spec, base_dir = {}, os.getcwd()
        if args.operator:
            spec["operator"] = os.path.abspath(args.operator)
        config = configure(args, spec, config)
        runner = create_runner(config)
        manifest = runner.run(args.command, spec, base_dir)
    except LabError as e:
        logger.error("%s failed (%s): %s", args.command, type(e).__name__, e)
        return e.exit_code
    logger.info("%s finished: %d files, config %s", args.command, len(manifest.files), manifest.config_hash[:12])
    return 0
