"""CSV/JSON writers, the run manifest and optional SVG plots."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

__all__ = ["fmt", "write_csv", "write_json", "sha256_file", "write_manifest", "line_plot"]


def fmt(x) -> str:
    """17 significant digits: round-trips every float64 exactly."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if hasattr(x, "value"):  # enums
        return x.value
    return x


def write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out: Path, *, command: str, config: dict, version: str, prng: str | None,
                   knobs: dict, wall_clock: float, files: list[Path], status: str) -> Path:
    """Manifest covering every emitted data file. Only ``wall_clock_s`` varies
    between identical reruns."""
    return write_json(out / "manifest.json", {
        "command": command,
        "config": config,
        "version": version,
        "prng": prng,
        "knobs": knobs,
        "status": status,
        "wall_clock_s": wall_clock,
        "checksums": {f.name: sha256_file(f) for f in sorted(files)},
    })


def line_plot(path: Path, x, ys: dict, *, xlabel: str, ylabel: str, logy: bool = False,
              vline: float | None = None) -> Path:
    """Minimal static SVG line plot; byte-stable across reruns."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "quadfloquet", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        for label, y in ys.items():
            ax.plot(x, y, lw=1, label=label)
        if vline is not None:
            ax.axvline(vline, color="g", ls="--", lw=1)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if len(ys) > 1:
            ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
