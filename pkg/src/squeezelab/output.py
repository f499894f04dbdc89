"""CSV, JSON and run-manifest emission.

CSVs are the machine contract: RFC-4180 quoting via the stdlib writer, a
header row always present, floats serialized with 17 significant digits so
re-runs compare byte-identically.
"""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path


def format_number(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(cell) if isinstance(cell, (int, float)) else str(cell)
                             for cell in row])


def _json_safe(obj):
    if isinstance(obj, dict):
        return {key: _json_safe(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(val) for val in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(_json_safe(payload), handle, indent=2, sort_keys=True)
        handle.write("\n")


@dataclass
class RunManifest:
    """Provenance record emitted alongside every output set."""

    command: str
    config: dict
    seed: int | None
    tool_version: str
    duration_s: float = 0.0
    outputs: list[str] = field(default_factory=list)
    _started: float = field(default_factory=time.monotonic, repr=False)

    def add_output(self, path: Path) -> Path:
        self.outputs.append(path.name)
        return path

    def write(self, out_dir: Path) -> Path:
        self.duration_s = time.monotonic() - self._started
        path = out_dir / "run_manifest.json"
        write_json(path, {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "duration_s": self.duration_s,
            "outputs": sorted(self.outputs),
        })
        return path
