"""
Run output recorder.

Owns one output directory per run: CSV tables, JSON reports and the
manifest listing them. Nothing time-dependent is written, so a rerun with
the same config and seed reproduces every file byte for byte.
"""

import csv
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from app.errors import ConfigError

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_plain)


def config_hash(payload) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=_plain)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    command: str
    config_hash: str
    seed: int
    tolerances: dict
    files: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "tolerances": self.tolerances,
            "files": self.files,
        }


class RunRecorder:
    def __init__(self, out_dir: str, command: str, payload: dict, tolerances: dict, seed: int):
        self._out_dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self._manifest = RunManifest(
            command=command,
            config_hash=config_hash(payload),
            seed=seed,
            tolerances=tolerances,
        )

    @property
    def out_dir(self) -> str:
        return self._out_dir

    @property
    def manifest(self) -> RunManifest:
        return self._manifest

    def _path(self, name: str) -> str:
        if os.path.basename(name) != name or name == MANIFEST_NAME:
            raise ConfigError(f"Invalid output file name '{name}'")
        if name in self._manifest.files:
            raise ConfigError(f"Output file '{name}' written twice in one run")
        self._manifest.files.append(name)
        return os.path.join(self._out_dir, name)

    def write_csv(self, name: str, rows: Iterable[dict], fieldnames: Optional[list] = None) -> str:
        rows = list(rows)
        if fieldnames is None:
            fieldnames = []
            for row in rows:
                fieldnames.extend(key for key in row if key not in fieldnames)
        filepath = self._path(name)
        with open(filepath, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=fieldnames, extrasaction="ignore")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _cell(row.get(k)) for k in fieldnames})
        logger.info("Wrote %s (%d rows)", filepath, len(rows))
        return filepath

    def write_json(self, name: str, payload) -> str:
        filepath = self._path(name)
        with open(filepath, "w", encoding="utf-8") as f:
            f.write(canonical_json(payload))
            f.write("\n")
        logger.info("Wrote %s", filepath)
        return filepath

    def finalize(self) -> str:
        filepath = os.path.join(self._out_dir, MANIFEST_NAME)
        with open(filepath, "w", encoding="utf-8") as f:
            f.write(canonical_json(self._manifest.to_dict()))
            f.write("\n")
        logger.info("Run manifest %s (%d files, config %s)", filepath, len(self._manifest.files),
                    self._manifest.config_hash[:12])
        return filepath


def _cell(value):
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float):
        return repr(value)
    return value
