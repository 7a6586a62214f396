"""Command-line entry point: ``transit-assign <command> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import kernels
from .assignment import EngineParams, run_assignment
from .choice import MODELS, ModelConfig
from .formats import (
    Config, FormatError, check_config, export_geojson, load_config, load_demand, load_network, read_stats,
    read_utilization, write_results,
)
from .network import NetworkError, integrate_zones, validate_network
from .preprocess import CacheError, cached_preprocess, sufficiency_check
from .profiles import PenaltyParams, compute_profiles

log = logging.getLogger("transit_assign")

CACHE_ENV = "TRANSIT_ASSIGN_CACHE"


class CommandError(RuntimeError):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config file; command-line flags take precedence")
    p.add_argument("--network", help="network directory (stops.csv, trips.csv, connections.csv, edges.csv)")
    p.add_argument("--cache-dir", help=f"artifact cache directory (also ${CACHE_ENV})")
    p.add_argument("-v", "--verbose", action="store_true")


def _preprocess_knobs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--avg-degree-limit", type=float, help="core contraction stops above this average degree")
    p.add_argument("--max-transfer-time", type=int, help="longest transfer walk in seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="transit-assign", description="Stochastic public transit assignment.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="build walking-graph artifacts and transfer shortcuts")
    _common(p)
    _preprocess_knobs(p)

    p = sub.add_parser("assign", help="assign demand and write result files")
    _common(p)
    _preprocess_knobs(p)
    p.add_argument("--demand", help="demand CSV: id,origin,destination,dep_time")
    p.add_argument("--output", help="result directory")
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--beta", type=float)
    p.add_argument("--delay-tolerance", type=float, help="seconds")
    p.add_argument("--transfer-penalty", type=float, help="seconds")
    p.add_argument("--wait-weight", type=float)
    p.add_argument("--walk-weight", type=float)
    p.add_argument("--buffer-weight", type=float)
    p.add_argument("--multiplier", type=int, help="passenger multiplier (group size per demand entry)")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="worker threads for destination batches")
    p.add_argument("--no-cycle-removal", action="store_true")
    p.add_argument("--auto-preprocess", action="store_true", help="build missing artifacts instead of failing")
    p.add_argument("--timing-json", nargs="?", const="-", metavar="PATH",
                   help="write phase timings as JSON to PATH (stdout when omitted)")
    p.add_argument("--dump-profiles", type=int, metavar="VERTEX",
                   help="also write profiles towards VERTEX as profiles-VERTEX.csv in the output directory")

    p = sub.add_parser("validate", help="check a network (and optionally demand) for errors")
    _common(p)
    p.add_argument("--demand")

    p = sub.add_parser("export-geojson", help="write connection utilization as GeoJSON")
    _common(p)
    p.add_argument("results", help="result directory holding utilization.csv")
    p.add_argument("--out", help="output file (default: RESULTS/utilization.geojson)")

    p = sub.add_parser("stats", help="print summary figures of a result directory")
    p.add_argument("results")
    p.add_argument("--json", action="store_true", help="print JSON instead of text")
    return parser


def resolve_config(args: argparse.Namespace) -> Config:
    cfg = load_config(args.config) if getattr(args, "config", None) else Config()
    overrides = {}
    for key in ("network", "demand", "output", "model", "beta", "delay_tolerance", "transfer_penalty",
                "wait_weight", "walk_weight", "buffer_weight", "multiplier", "seed", "threads",
                "avg_degree_limit", "max_transfer_time"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "no_cycle_removal", False):
        overrides["cycle_removal"] = False
    cfg = replace(cfg, **overrides)
    env = os.environ.get(CACHE_ENV)
    if getattr(args, "cache_dir", None):
        cfg = replace(cfg, cache_dir=args.cache_dir)
    elif env:
        cfg = replace(cfg, cache_dir=env)
    check_config(cfg)
    return cfg


def _cache_dir(cfg: Config) -> Path:
    if cfg.cache_dir:
        return Path(cfg.cache_dir)
    return Path.home() / ".cache" / "transit-assign"


def _need(value: Optional[str], what: str) -> str:
    if not value:
        raise CommandError(f"no {what} given (flag or config key)")
    return value


def _report_timings(title: str, timings: dict, target: Optional[str]) -> None:
    parts = " ".join(f"{k}={v:.3f}s" for k, v in timings.items())
    print(f"{title}: {parts}", file=sys.stderr)
    if target is None:
        return
    text = json.dumps({k: round(v, 6) for k, v in timings.items()}, sort_keys=True)
    if target == "-":
        print(text)
    else:
        Path(target).write_text(text + "\n", encoding="utf-8")


def cmd_preprocess(cfg: Config) -> int:
    net = load_network(_need(cfg.network, "network"))
    art, hit = cached_preprocess(net, _cache_dir(cfg), cfg.avg_degree_limit, cfg.max_transfer_time)
    if hit:
        print(f"cache hit in {_cache_dir(cfg)}; nothing recomputed")
    else:
        _report_timings("preprocessing", art.timings, None)
    print(f"contraction hierarchy: {art.ch.num_vertices} vertices, "
          f"{len(art.ch.up_edges) + len(art.ch.down_edges)} edges")
    print(f"core graph: {len(art.core.vertices)} vertices, average degree {art.core.average_degree:.2f}")
    print(f"transfer shortcuts: {len(art.shortcuts)}")
    print(f"bucket index: {art.buckets.num_entries} entries")
    problems = sufficiency_check(art)
    if problems:
        for p in problems[:20]:
            print(f"sufficiency: {p}", file=sys.stderr)
        raise CommandError(f"shortcut sufficiency check failed ({len(problems)} problems)")
    print("sufficiency check passed")
    return 0


def engine_params(cfg: Config) -> EngineParams:
    return EngineParams(
        penalties=PenaltyParams(cfg.transfer_penalty, cfg.wait_weight, cfg.walk_weight, cfg.buffer_weight,
                                cfg.delay_tolerance),
        multiplier=cfg.multiplier,
        model=ModelConfig(cfg.model, cfg.beta),
        seed=cfg.seed,
        cycle_removal=cfg.cycle_removal,
        threads=cfg.threads,
    )


def cmd_assign(cfg: Config, auto_preprocess: bool = False, timing_json: Optional[str] = None,
               dump_profiles: Optional[int] = None) -> int:
    net = load_network(_need(cfg.network, "network"))
    out_dir = Path(_need(cfg.output, "output directory"))
    params = engine_params(cfg)
    t = time.perf_counter()
    try:
        art, _ = cached_preprocess(net, _cache_dir(cfg), cfg.avg_degree_limit, cfg.max_transfer_time,
                                   rebuild=auto_preprocess)
    except CacheError as exc:
        raise CommandError(str(exc)) from None
    load_time = time.perf_counter() - t
    demand = load_demand(_need(cfg.demand, "demand file"), art.net)
    result = run_assignment(art.net, art.shortcuts, art.buckets, demand, params)
    t = time.perf_counter()
    stats = write_results(result, art.net, out_dir)
    if dump_profiles is not None:
        dest = dump_profiles
        if not 0 <= dest < art.net.walking_graph.num_vertices:
            raise CommandError(f"unknown vertex {dest}")
        prof = compute_profiles(art.net, art.shortcuts, art.buckets.many_to_one(dest), params.penalties)
        prof.write_csv(out_dir / f"profiles-{dest}.csv")
    timings = {"artifacts": load_time, **result.timings, "output": time.perf_counter() - t}
    print(f"assigned {stats['assigned']} entries, {stats['unassigned']} unassigned; results in {out_dir}")
    _report_timings("phases", timings, timing_json)
    return 0


def cmd_validate(cfg: Config, demand: Optional[str]) -> int:
    net = load_network(_need(cfg.network, "network"), validate=False)
    report = validate_network(net)
    for v in report.violations:
        print(v)
    if report:
        print(f"{len(report)} violations", file=sys.stderr)
        return 1
    if demand:
        entries = load_demand(demand, integrate_zones(net))
        print(f"demand: {len(entries)} entries")
    print(f"network ok: {net.num_stops} stops, {net.num_connections} connections, "
          f"{len(net.trips)} trips, {net.walking_graph.num_vertices} vertices, {len(net.zones)} zones")
    return 0


def cmd_export(cfg: Config, results: str, out: Optional[str]) -> int:
    net = load_network(_need(cfg.network, "network"))
    util = read_utilization(Path(results) / "utilization.csv")
    target = Path(out) if out else Path(results) / "utilization.geojson"
    written, skipped = export_geojson(util, net, target)
    print(f"{written} features written to {target}; {skipped} skipped without coordinates")
    return 0


def cmd_stats(results: str, as_json: bool = False) -> int:
    stats = read_stats(results)
    if as_json:
        print(json.dumps(stats, indent=2, sort_keys=True))
        return 0
    labels = [
        ("assigned", "Assigned entries"),
        ("unassigned", "Unassigned entries"),
        ("travel_time_min", "Travel time [min]"),
        ("walking_time_min", "Walking time [min]"),
        ("in_vehicle_time_min", "Time in vehicle [min]"),
        ("connections_per_passenger", "Connections per passenger"),
        ("trips_per_passenger", "Trips per passenger"),
        ("journeys_per_passenger", "Journeys per passenger"),
    ]
    for key, label in labels:
        value = stats[key]
        print(f"{label:<28}{value:>12.2f}" if isinstance(value, float) else f"{label:<28}{value:>12}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    log.info("kernel backend: %s", kernels.BACKEND)
    try:
        if args.command == "stats":
            return cmd_stats(args.results, args.json)
        cfg = resolve_config(args)
        if args.command == "preprocess":
            return cmd_preprocess(cfg)
        if args.command == "assign":
            return cmd_assign(cfg, args.auto_preprocess, args.timing_json, args.dump_profiles)
        if args.command == "validate":
            return cmd_validate(cfg, args.demand)
        return cmd_export(cfg, args.results, args.out)
    except (CommandError, FormatError, NetworkError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
