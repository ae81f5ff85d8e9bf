"""Command-line entry point: ``remswitch <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import rem as rem_mod
from .actions import active_count, bitstring
from .config import ConfigError, ConfigReadError, config_to_dict, load_config
from .experiment import (
    Environment,
    ExperimentConfig,
    InfeasibleCoverage,
    cdf_csv,
    results_csv,
    run_evaluation_phase,
    run_learning_phase,
    summarize,
    summary_csv,
)
from .geometry import MetricKind, PositionSet, set_distance
from .netsim import scenario_document

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_CONFIG_UNREADABLE = 3
EXIT_CONFIG_INVALID = 4
EXIT_INPUT = 5
EXIT_EXISTS = 6

log = logging.getLogger("remswitch")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _common(p: argparse.ArgumentParser, out: bool = True) -> None:
    p.add_argument("--config", metavar="PATH", help="experiment configuration JSON (defaults if omitted)")
    p.add_argument("--seed", type=int, metavar="U64", help="override the configuration seed")
    if out:
        p.add_argument("--out", metavar="DIR", default=".", help="output directory, created if absent (default: .)")
        p.add_argument("--force", action="store_true", help="overwrite existing output files")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="remswitch",
        description="Location-based pico BS on/off switching with a Radio Environment Map.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("gen-scenario", help="write the UE population and its motion pattern as JSON",
                       description="Write scenario.json: every UE state at every snapshot.")
    _common(p)

    p = sub.add_parser("learn", help="run the learning phase and write rem.json",
                       description="Run the learning phase and write rem.json.")
    _common(p)

    p = sub.add_parser("evaluate", help="evaluate metric arms against a learned REM",
                       description="Evaluate every (metric, localization) arm; writes results.csv, "
                                   "summary.csv and cdf.csv.")
    _common(p)
    p.add_argument("--rem", metavar="PATH", help="REM JSON produced by 'learn' (required)")

    p = sub.add_parser("metrics", help="distance between two position sets",
                       description="Print the distance between two position sets given as JSON "
                                   "lists of [x, y] pairs.")
    p.add_argument("--kind", required=True, help="hausdorff | mean | average | som")
    p.add_argument("--a", required=True, metavar="PATH", help="first position set JSON")
    p.add_argument("--b", required=True, metavar="PATH", help="second position set JSON")

    p = sub.add_parser("inspect-rem", help="print a per-entry summary of a REM file",
                       description="Print a per-entry summary of a REM file.")
    p.add_argument("--rem", required=True, metavar="PATH", help="REM JSON file")

    p = sub.add_parser("fullexperiment", help="learn then evaluate; writes rem.json and the CSVs",
                       description="Run learning and evaluation; writes rem.json, results.csv, "
                                   "summary.csv and cdf.csv.")
    _common(p)
    return parser


def _config(args) -> ExperimentConfig:
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
    except ConfigReadError as exc:
        raise CliError(str(exc), EXIT_CONFIG_UNREADABLE) from exc
    except ConfigError as exc:
        raise CliError(f"invalid config: {exc}", EXIT_CONFIG_INVALID) from exc
    if args.seed is not None:
        if args.seed < 0:
            raise CliError("invalid config: seed: must be non-negative", EXIT_CONFIG_INVALID)
        cfg.seed = args.seed
    return cfg


def _outputs(args, names: Sequence[str]) -> dict[str, Path]:
    out = Path(args.out)
    paths = {n: out / n for n in names}
    if not args.force:
        existing = [str(p) for p in paths.values() if p.exists()]
        if existing:
            raise CliError(f"refusing to overwrite {', '.join(existing)} (use --force)", EXIT_EXISTS)
    out.mkdir(parents=True, exist_ok=True)
    return paths


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="")


def _load_rem(path) -> rem_mod.Rem:
    try:
        return rem_mod.load(path)
    except OSError as exc:
        raise CliError(f"cannot read REM {path}: {exc.strerror or exc}", EXIT_INPUT) from exc
    except rem_mod.RemError as exc:
        raise CliError(f"invalid REM {path}: {exc}", EXIT_INPUT) from exc


def _load_points(path) -> PositionSet:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read position set {path}: {exc}", EXIT_INPUT) from exc
    if isinstance(doc, dict):
        doc = doc.get("points", doc.get("tag"))
    try:
        return PositionSet(doc)
    except (ValueError, TypeError) as exc:
        raise CliError(f"invalid position set {path}: {exc}", EXIT_INPUT) from exc


def cmd_gen_scenario(args) -> int:
    cfg = _config(args)
    paths = _outputs(args, ["scenario.json"])
    env = Environment.build(cfg)
    doc = {"seed": cfg.seed, **scenario_document(env.snapshots, cfg.snapshot_interval_s),
           "config": config_to_dict(cfg)}
    _write(paths["scenario.json"], json.dumps(doc, indent=1) + "\n")
    return EXIT_OK


def cmd_learn(args) -> int:
    cfg = _config(args)
    paths = _outputs(args, ["rem.json"])
    rem = run_learning_phase(cfg)
    rem_mod.save(rem, paths["rem.json"])
    return EXIT_OK


def _write_eval(cfg: ExperimentConfig, rem, env, paths) -> None:
    results = run_evaluation_phase(cfg, rem, env)
    summary = summarize(results)
    _write(paths["results.csv"], results_csv(results, cfg.layout.pbs_count))
    _write(paths["summary.csv"], summary_csv(summary))
    _write(paths["cdf.csv"], cdf_csv(summary))
    for name, arm in summary.arms.items():
        log.info("%-16s gain %.4f  oracle share %.3f", name, arm.gain, summary.oracle_gap_ratio(name))
    log.info("%-16s gain %.4f", "oracle", summary.oracle.gain)


def cmd_evaluate(args) -> int:
    if not args.rem:
        raise CliError("REM required: pass --rem PATH (produce one with 'learn')", EXIT_INPUT)
    cfg = _config(args)
    rem = _load_rem(args.rem)
    if rem.pbs_count != cfg.layout.pbs_count:
        raise CliError(f"REM has {rem.pbs_count} pico BSs but the layout has {cfg.layout.pbs_count}",
                       EXIT_INPUT)
    if not rem.entries:
        raise CliError("REM required: the REM file has no entries", EXIT_INPUT)
    paths = _outputs(args, ["results.csv", "summary.csv", "cdf.csv"])
    _write_eval(cfg, rem, Environment.build(cfg), paths)
    return EXIT_OK


def cmd_fullexperiment(args) -> int:
    cfg = _config(args)
    paths = _outputs(args, ["rem.json", "results.csv", "summary.csv", "cdf.csv"])
    env = Environment.build(cfg)
    rem = run_learning_phase(cfg, env)
    rem_mod.save(rem, paths["rem.json"])
    _write_eval(cfg, rem, env, paths)
    return EXIT_OK


def cmd_metrics(args) -> int:
    try:
        kind = MetricKind.parse(args.kind)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    a, b = _load_points(args.a), _load_points(args.b)
    print(repr(set_distance(kind, a, b)))
    return EXIT_OK


def cmd_inspect_rem(args) -> int:
    rem = _load_rem(args.rem)
    n_pbs = rem.pbs_count
    print(f"REM: {len(rem)} entries, {n_pbs} pico BSs, {1 << n_pbs} actions per entry")
    print(f"{'entry':>5} {'ues':>4} {'centroid':>17} {'visited':>8} {'asr':>4} {'best':>{n_pbs + 2}} {'q_best':>12}")
    for i, entry in enumerate(rem.entries):
        cx, cy = entry.tag.centroid()
        visited = int(np.count_nonzero(entry.n))
        try:
            reduced = rem_mod.action_space_reduction(entry)
            best = rem_mod.greedy_action(entry, reduced)
            best_s = bitstring(best, n_pbs)
            q = f"{entry.q[best]:.6g}"
            asr = str(len(reduced))
        except rem_mod.RemError:
            best_s, q, asr = "-", "-", "-"
        print(f"{i:>5} {len(entry.tag):>4} ({cx:7.1f},{cy:7.1f}) {visited:>8} {asr:>4} {best_s:>{n_pbs + 2}} {q:>12}")
    return EXIT_OK


COMMANDS = {
    "gen-scenario": cmd_gen_scenario,
    "learn": cmd_learn,
    "evaluate": cmd_evaluate,
    "metrics": cmd_metrics,
    "inspect-rem": cmd_inspect_rem,
    "fullexperiment": cmd_fullexperiment,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"remswitch {args.command}: error: {exc}", file=sys.stderr)
        return exc.code
    except InfeasibleCoverage as exc:
        print(f"remswitch {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
