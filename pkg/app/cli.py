#!/usr/bin/env python3
"""
Entangle Detect CLI

Usage examples:
  - Generate a state file:
      python -m app.cli gen --family werner --d 3 --phi -0.5 --out werner.json
  - Check a state (exit code 3 when entangled):
      python -m app.cli check --state werner.json --criterion ccnr --criterion obs2:t=1
  - Build the witness for a preset:
      python -m app.cli witness --state bell.json --criterion vicente
  - Filter normal form:
      python -m app.cli normal-form --state hs.json
  - Simplex vertex coordinates as CSV:
      python -m app.cli simplex --n 8
  - Desk-scale scan:
      python -m app.cli scan --experiment werner --grid phi=-1:1:201 --out werner.csv
  - Post-LFT bound table:
      python -m app.cli lft-table --dA 2 --dB 3
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

from dotenv import load_dotenv

from app import __version__
from app.core.criteria import evaluate, parse_criterion, preset_tuples
from app.core.errors import ConfigError, EntangleError
from app.core.lft import lft_table, normal_form
from app.core.observables import simplex_vertices
from app.core.scan_controller import (
    ScanConfig,
    ScanController,
    load_scan_config,
    parse_grid,
    resolve_scan_config,
)
from app.core.settings import get_settings
from app.core.states import FAMILIES, load_state, make_state, save_state
from app.core.witness import witness_check

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ENTANGLED = 3

# 単一グリッドの実験で "a:b:n" だけ渡されたときの適用先
DEFAULT_GRID_AXES = {"horodecki": ("s", "p"), "upb": ("p",), "werner": ("phi",)}


def _configure_logging(verbosity: int) -> None:
    env_level = os.getenv("ED_LOG_LEVEL")
    if env_level:
        level = logging.getLevelName(env_level.upper())
        if not isinstance(level, int):
            level = logging.WARNING
    elif verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.getLogger().setLevel(level)


def _emit(payload: Any, out: Optional[str] = None) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2)
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text if text.endswith("\n") else text + "\n")
        logger.info(f"Output written to {out}")
    else:
        print(text)


# ---------------------------------------------------------------------------
# サブコマンド
# ---------------------------------------------------------------------------

def cmd_check(args: argparse.Namespace) -> int:
    state = load_state(args.state)
    criteria = args.criterion or ["vicente"]
    reports = [evaluate(state, c) for c in criteria]
    payload = reports[0].to_dict() if len(reports) == 1 else [r.to_dict() for r in reports]
    _emit(payload)
    return EXIT_ENTANGLED if any(r.entangled for r in reports) else EXIT_OK


def cmd_witness(args: argparse.Namespace) -> int:
    state = load_state(args.state)
    name, params = parse_criterion(args.criterion)
    A, B = preset_tuples(name, params, state.dA, state.dB)
    witness, expectation = witness_check(state, A, B)
    _emit(witness.to_dict(expectation), args.out)
    tol = get_settings().tolerance("verdict")
    return EXIT_ENTANGLED if expectation < -tol else EXIT_OK


def cmd_normal_form(args: argparse.Namespace) -> int:
    state = load_state(args.state)
    result = normal_form(state, tol=args.tol, max_iter=args.max_iter)
    _emit(result.to_dict(), args.out)
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    params = {
        key: getattr(args, key)
        for key in ("d", "phi", "s", "p", "dA", "dB", "k", "seed", "index")
    }
    state = make_state(args.family, **params)
    text = save_state(state, args.out)
    if not args.out:
        print(text)
    return EXIT_OK


def cmd_simplex(args: argparse.Namespace) -> int:
    V = simplex_vertices(args.n)
    lines = [",".join(f"v{k + 1}" for k in range(V.shape[1]))]
    lines += [",".join(f"{x:.17g}" for x in row) for row in V]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _grid_overrides(experiment: str, grids: List[str]) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for item in grids:
        if "=" in item:
            name, spec = item.split("=", 1)
            out[name.strip()] = list(parse_grid(spec))
        else:
            for axis in DEFAULT_GRID_AXES.get(experiment, ()):
                out[axis] = list(parse_grid(item))
    return out


def _scan_csv(config: ScanConfig, allowed: Tuple[str, ...], threads: Optional[int] = None) -> str:
    if config.experiment not in allowed:
        raise ConfigError(f"expected experiment {' or '.join(allowed)}, got {config.experiment!r}")
    controller = ScanController(config, threads=threads, version=__version__)
    controller.run()
    text = controller.write_csv()
    summary = controller.summary()
    if summary is not controller.result:
        logger.info("Scan summary:\n" + summary.to_string(index=False))
    return text


def cmd_scan_horodecki(config: ScanConfig, threads: Optional[int] = None) -> str:
    """(s, p) グリッド × t の検出結果を CSV で返す"""
    return _scan_csv(config, ("horodecki",), threads)


def cmd_scan_random(config: ScanConfig, threads: Optional[int] = None) -> str:
    """HS ランダム状態の検出率（obs1(t) と sarbicki(h)）を CSV で返す"""
    return _scan_csv(config, ("random",), threads)


def cmd_scan_werner(config: ScanConfig, threads: Optional[int] = None) -> str:
    return _scan_csv(config, ("werner",), threads)


def cmd_scan_upb_chessboard(config: ScanConfig, threads: Optional[int] = None) -> str:
    """UPB は t ごとの p*、チェス盤は t ごとの検出率"""
    return _scan_csv(config, ("upb", "chessboard"), threads)


SCAN_COMMANDS: Dict[str, Callable[[ScanConfig, Optional[int]], str]] = {
    "horodecki": cmd_scan_horodecki,
    "random": cmd_scan_random,
    "werner": cmd_scan_werner,
    "upb": cmd_scan_upb_chessboard,
    "chessboard": cmd_scan_upb_chessboard,
}


def cmd_scan(args: argparse.Namespace) -> int:
    overrides: Dict[str, Any] = load_scan_config(args.config) if args.config else {}
    experiment = args.experiment or overrides.pop("experiment", None)
    overrides.pop("experiment", None)
    if not experiment:
        raise ConfigError("scan needs --experiment (or 'experiment' in the config file)")
    flags: Dict[str, Any] = {
        "seed": args.seed,
        "samples": args.samples,
        "out": args.out,
        "t": args.t,
        "h": args.h,
        "dims": args.dims,
    }
    if args.grid:
        flags["grid"] = _grid_overrides(experiment, args.grid)
    config = resolve_scan_config(experiment, {**overrides, **flags})
    text = SCAN_COMMANDS[experiment](config, args.threads)
    if config.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_lft_table(args: argparse.Namespace) -> int:
    _emit({"dA": args.dA, "dB": args.dB, "bounds": lft_table(args.dA, args.dB)})
    return EXIT_OK


# ---------------------------------------------------------------------------
# 引数
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entangle-detect",
        description="Correlation-matrix entanglement criteria, witnesses and scans",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="Evaluate criteria on a state file")
    p.add_argument("--state", required=True, help="State file (JSON)")
    p.add_argument(
        "--criterion",
        action="append",
        help="vicente | sarbicki:hA=..,hB=.. | simplex:tA=..,tB=.. | ccnr | esic | obs2:t=.. | ppt"
        " | thm2:<preset> | obs3:tA=..,tB=.. | lft-min (repeatable)",
    )
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("witness", help="Build the SVD-optimal witness for a preset")
    p.add_argument("--state", required=True)
    p.add_argument("--criterion", default="vicente", help="vicente | sarbicki:.. | simplex:.. | ccnr | esic")
    p.add_argument("--out")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("normal-form", help="Filter normal form of a state")
    p.add_argument("--state", required=True)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_normal_form)

    p = sub.add_parser("gen", help="Emit a state from the zoo as a state file")
    p.add_argument("--family", required=True, choices=sorted(FAMILIES))
    p.add_argument("--d", type=int)
    p.add_argument("--phi", type=float)
    p.add_argument("--s", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--dA", type=int)
    p.add_argument("--dB", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--index", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("simplex", help="Regular simplex vertex coordinates as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simplex)

    p = sub.add_parser("scan", help="Parameter scans (CSV)")
    p.add_argument("--experiment", choices=["horodecki", "random", "werner", "upb", "chessboard"])
    p.add_argument("--config", help="Scan config (JSON or YAML)")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--grid", action="append", help="a:b:n or name=a:b:n (repeatable)")
    p.add_argument("--t", nargs="+", help="t values (numbers, ccnr, esic)")
    p.add_argument("--h", nargs="+", type=float, help="h values")
    p.add_argument("--dims", nargs="+", type=int)
    p.add_argument("--threads", type=int, default=None, help="Worker threads (default: ED_THREADS)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("lft-table", help="Post-LFT bounds for the named presets")
    p.add_argument("--dA", type=int, required=True)
    p.add_argument("--dB", type=int, required=True)
    p.set_defaults(func=cmd_lft_table)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except (EntangleError, OSError, ValueError) as e:
        logger.debug("command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
