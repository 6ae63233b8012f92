"""
Entry point for the hyperbolic decay lab.

Usage:
    python run.py roots --operator operators/wave.json
    python run.py decay --config experiments/wave2d.json --out-dir runs/wave2d --threads 1
"""

import logging
import sys

from app.api.commands import build_parser, execute


def setup_logging(debug: bool = False):
    level = logging.DEBUG if debug else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%H:%M:%S",
        stream=sys.stdout,
    )
    # Silence noisy libraries
    logging.getLogger("joblib").setLevel(logging.WARNING)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.debug)
    return execute(args)


if __name__ == "__main__":
    sys.exit(main())
