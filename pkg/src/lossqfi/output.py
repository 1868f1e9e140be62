"""CSV tables and the key=value manifest sidecar that accompanies every data file."""
from __future__ import annotations

import csv
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__

OUTDIR_ENV = "LOSSQFI_OUTDIR"


def fmt(value) -> str:
    # 17 significant digits round-trip a double exactly
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def default_output(name: str) -> Path:
    return Path(os.environ.get(OUTDIR_ENV, ".")) / name


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    n = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
            n += 1
    return n


def manifest_path(path) -> Path:
    return Path(str(path) + ".manifest")


def write_manifest(path, command: str, params: dict, seed=None) -> Path:
    """Write ``<path>.manifest`` describing how ``path`` was produced."""
    target = manifest_path(path)
    lines = [f"command={command}"]
    for key, value in sorted(params.items()):
        lines.append(f"{key}={value!r}" if isinstance(value, float) else f"{key}={value}")
    lines.append(f"seed={'' if seed is None else seed}")
    lines.append(f"version={__version__}")
    lines.append(f"timestamp={datetime.now(timezone.utc).isoformat(timespec='seconds')}")
    target.write_text("\n".join(lines) + "\n")
    return target


def read_manifest(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        key, _, value = line.partition("=")
        out[key] = value
    return out
