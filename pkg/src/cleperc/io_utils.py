"""Run configuration, result records, and flat-file serialization.

Floats are serialized with 17 significant digits so every table round-trips
losslessly.  Summaries are JSON with sorted keys and no timestamps, so a
repeated run with the same seed and version produces byte-identical output.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParameterError

TOOL_VERSION = "0.1.0"


def fmt_float(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt_float(v) for v in row])


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) for v in row])
    return buf.getvalue()


def _jsonify(obj):
    if isinstance(obj, float):
        return float(format(obj, ".17g"))
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    return obj


def dump_json(obj, path=None) -> str:
    text = json.dumps(_jsonify(obj), indent=2, sort_keys=True) + "\n"
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return text


@dataclass
class ResultRecord:
    """Envelope for a command result: inputs echo, outputs, provenance."""

    command: str
    inputs: dict
    outputs: dict
    seed: int | None = None
    version: str = TOOL_VERSION
    partial: bool = False

    def to_dict(self) -> dict:
        d = {
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "version": self.version,
        }
        if self.seed is not None:
            d["seed"] = self.seed
        if self.partial:
            d["partial"] = True
        return d


def read_config_file(path) -> dict[str, str]:
    """Flat key=value text config; '#' starts a comment."""
    out: dict[str, str] = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out
