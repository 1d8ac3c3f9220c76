#!/usr/bin/env python3
"""Run the checked-in scripted flights benchmark end to end.

Executes five planner/executor trajectories against the bundled fixture
data with the deterministic scripted backend (no model endpoint needed),
then builds the metric report from the resulting records.

Usage: python scripts/run_scripted_demo.py [out_dir]
"""

from __future__ import annotations

import sys
from pathlib import Path

from rpreact.cli import main

ROOT = Path(__file__).resolve().parent.parent


def run(out_dir: str) -> int:
    config = ROOT / "data" / "config.example.json"
    status = main(["run", "--config", str(config), "--out", out_dir])
    if status != 0:
        return status
    return main([
        "report",
        "--records", str(Path(out_dir) / "records.jsonl"),
        "--out", str(Path(out_dir) / "results"),
    ])


if __name__ == "__main__":
    sys.exit(run(sys.argv[1] if len(sys.argv) > 1 else "out"))
