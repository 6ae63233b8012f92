"""
Runner factory.

Wires configuration into a ready experiment runner; the single
construction point used by the command line and by tests.
"""

import logging
from typing import Optional

from app.config.settings import LabConfig, load_config
from app.domain.runner import ExperimentRunner

logger = logging.getLogger(__name__)


def create_runner(config: Optional[LabConfig] = None) -> ExperimentRunner:
    if config is None:
        config = load_config()
    runner = ExperimentRunner(config)
    logger.debug("Runner created (seed=%d, threads=%d)", config.run.seed, config.run.threads)
    return runner
