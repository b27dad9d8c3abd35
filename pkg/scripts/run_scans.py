#!/usr/bin/env python3
"""
Run the desk-scale scans listed in config/scan_config.json

Usage examples:
  - List planned experiments (priority order):
      python scripts/run_scans.py --list
  - Preview the scan commands:
      python scripts/run_scans.py --run --dry-run
  - Run only horodecki and upb, skipping CSVs that already exist:
      python scripts/run_scans.py --run --experiments horodecki,upb --skip-existing --yes
  - Run everything into another directory:
      python scripts/run_scans.py --run --out-dir results/full --yes
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import List, Set

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from app import __version__  # noqa: E402
from app.core.errors import EntangleError  # noqa: E402
from app.core.scan_controller import EXPERIMENTS, ScanController, resolve_scan_config  # noqa: E402
from app.core.settings import get_settings  # noqa: E402


def build_plan(experiments: List[str]) -> List[str]:
    """Ordered unique list of experiments to run.
    Priority order comes from scan_config.json; explicit names are kept in that order
    and unknown names are reported and dropped.
    """
    ordered = get_settings().experiments_by_priority()
    if not experiments or experiments == ["all"]:
        return ordered
    plan: List[str] = []
    seen: Set[str] = set()
    for name in sorted(experiments, key=lambda n: ordered.index(n) if n in ordered else len(ordered)):
        if name not in EXPERIMENTS:
            print(f"[WARN] unknown experiment: {name}")
            continue
        if name not in seen:
            seen.add(name)
            plan.append(name)
    return plan


def csv_path(out_dir: str, experiment: str) -> str:
    return os.path.join(out_dir, f"{experiment}.csv")


def run_scans(plan: List[str], out_dir: str, skip_existing: bool, yes: bool, dry_run: bool, threads: int) -> int:
    exit_code = 0

    for name in plan:
        out = csv_path(out_dir, name)
        if skip_existing and os.path.exists(out):
            print(f"[SKIP] already exists: {out}")
            continue
        cmd = ["python", "-m", "app.cli", "scan", "--experiment", name, "--out", out]
        if dry_run:
            print(f"[DRY-RUN] {' '.join(cmd)}")
            continue
        if not yes:
            try:
                ans = input(f"Run {name}? [Y/n] ").strip().lower()
            except EOFError:
                ans = "y"
            if ans and ans not in ("y", "yes"):
                print(f"[SKIP] user cancelled: {name}")
                continue
        print(f"[RUN] {name} -> {out}")
        try:
            controller = ScanController(resolve_scan_config(name), threads=threads, version=__version__)
            controller.run()
            controller.write_csv(out)
            print(controller.summary().to_string(index=False))
        except (EntangleError, OSError) as e:
            print(f"[ERROR] failed: {name} ({e})")
            exit_code = 1
    return exit_code


def main(argv: List[str]) -> int:
    parser = argparse.ArgumentParser(description="Run scans from config/scan_config.json")
    action = parser.add_mutually_exclusive_group(required=False)
    action.add_argument("--list", action="store_true", help="List planned experiments and exit")
    action.add_argument("--run", action="store_true", help="Run planned experiments")

    parser.add_argument(
        "--experiments",
        default="all",
        help="Comma-separated experiment names (or 'all')",
    )
    parser.add_argument("--out-dir", default="results", help="Directory for the CSV files")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads (default: ED_THREADS)")
    parser.add_argument("--skip-existing", action="store_true", help="Skip experiments whose CSV exists")
    parser.add_argument("--yes", "-y", action="store_true", help="Assume yes for prompts")
    parser.add_argument("--dry-run", action="store_true", help="Print commands without executing")

    args = parser.parse_args(argv)

    names = [n.strip() for n in args.experiments.split(",") if n.strip()]
    plan = build_plan(names)

    if args.list or not (args.list or args.run):
        print("Planned experiments:")
        for i, name in enumerate(plan, 1):
            description = get_settings().scan_defaults(name).get("description", "")
            print(f"  [{i}] {name:<12} {description}")
        print("\nHint: add --run to execute, and --dry-run to preview commands.")
        return 0

    threads = args.threads if args.threads is not None else get_settings().threads()
    return run_scans(plan, args.out_dir, args.skip_existing, args.yes, args.dry_run, threads)


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
