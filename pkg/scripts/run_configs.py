"""Run every shipped configuration through the command-line tool.

Usage: python3 scripts/run_configs.py [--out OUT] [--plot] [NAME ...]

NAME is a config stem such as ``sweep_a``; without names every file in
configs/ is run. The command is taken from the file-name prefix.
"""

import argparse
import sys
import time
from pathlib import Path

from quadfloquet.cli import main

ROOT = Path(__file__).resolve().parent.parent
PREFIX = {"static": "static-spectrum", "sweep": "sweep", "evolve": "evolve", "disorder": "disorder"}


def command_for(stem: str) -> str:
    return PREFIX[stem.split("_")[0]]


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("names", nargs="*")
    ap.add_argument("--out", type=Path, default=ROOT / "out")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()

    paths = sorted((ROOT / "configs").glob("*.yaml"))
    if args.names:
        paths = [p for p in paths if p.stem in args.names]
    worst = 0
    for path in paths:
        argv = [command_for(path.stem), "--config", str(path), "--out", str(args.out / path.stem)]
        if args.plot:
            argv.append("--plot")
        t0 = time.perf_counter()
        code = main(argv)
        print(f"{path.stem:14s} exit {code}  {time.perf_counter() - t0:7.1f} s", flush=True)
        worst = max(worst, code)
    sys.exit(worst)
