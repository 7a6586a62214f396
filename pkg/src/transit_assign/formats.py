"""Text formats: network directories, demand, results, GeoJSON and config.

Every CSV starts with the version line ``#transit-assign v1`` followed by
a column header.  Times are ``HH:MM:SS`` with hours allowed past 24.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, fields
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from .assignment import AssignmentResult, DemandEntry
from .journey import Ride, encode, replay
from .network import Connection, NetworkError, Stop, TransitNetwork, Trip, WalkingGraph, Zone, format_time, parse_time

log = logging.getLogger(__name__)

HEADER = "#transit-assign v1"

STOPS_COLUMNS = ("stop_id", "vertex_id", "buffer_time", "lon", "lat")
TRIPS_COLUMNS = ("trip_id", "label")
CONNECTIONS_COLUMNS = ("connection_id", "trip_id", "index_in_trip", "dep_stop", "arr_stop", "dep_time", "arr_time")
EDGES_COLUMNS = ("from_vertex", "to_vertex", "seconds")
ZONES_COLUMNS = ("zone_id", "direction", "stop_id", "seconds")
DEMAND_COLUMNS = ("id", "origin", "destination", "dep_time")
JOURNEY_COLUMNS = (
    "demand_id", "group_units", "probability", "departure", "arrival",
    "walking_seconds", "in_vehicle_seconds", "vehicles", "connections", "legs",
)


class FormatError(ValueError):
    """Malformed input, located by file, line and (when known) column."""

    def __init__(self, path, line: int, message: str, column: Optional[int] = None, name: str = ""):
        where = f"{path}:{line}"
        if column is not None:
            where += f": column {column}" + (f" ({name})" if name else "")
        super().__init__(f"{where}: {message}")
        self.path, self.line, self.column = str(path), line, column


# ------------------------------------------------------------------ csv reading


def _rows(path: Path, columns: Sequence[str], required: bool = True, header_line: bool = True):
    """Yield ``(line_number, {column: text})`` for each data row."""
    if not path.exists():
        if required:
            raise FormatError(path, 0, "file not found")
        return
    with open(path, newline="", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    start = 0
    if lines and lines[0].startswith("#"):
        if lines[0].strip() != HEADER:
            raise FormatError(path, 1, f"unsupported version line {lines[0]!r}, expected {HEADER!r}")
        start = 1
    elif header_line:
        raise FormatError(path, 1, f"missing version line {HEADER!r}")
    if start >= len(lines):
        if header_line:
            raise FormatError(path, start + 1, "missing column header")
        return
    got = [c.strip() for c in next(csv.reader([lines[start]]))]
    if tuple(got) != tuple(columns):
        raise FormatError(path, start + 1, f"expected columns {','.join(columns)}, got {','.join(got)}")
    for offset, fields_ in enumerate(csv.reader(lines[start + 1:])):
        lineno = start + 2 + offset
        if not fields_ or all(not f.strip() for f in fields_):
            continue
        if len(fields_) != len(columns):
            raise FormatError(path, lineno, f"expected {len(columns)} fields, got {len(fields_)}")
        yield lineno, dict(zip(columns, (f.strip() for f in fields_)))


class _Field:
    """Converts one cell with errors pointing at file, line and column."""

    def __init__(self, path: Path, columns: Sequence[str]):
        self.path = path
        self.columns = list(columns)

    def __call__(self, lineno: int, row: dict, name: str, kind, optional: bool = False):
        text = row[name]
        if optional and text == "":
            return None
        try:
            return kind(text)
        except ValueError as exc:
            message = str(exc) if kind is parse_time else f"bad value {text!r} ({exc})"
            raise FormatError(self.path, lineno, message,
                              self.columns.index(name) + 1, name) from None


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise ValueError(f"negative value {text!r}")
    return v


def _time(text: str) -> int:
    return parse_time(text)


def load_network(directory: Path | str, validate: bool = True) -> TransitNetwork:
    """Read a network directory; invalid networks raise ``NetworkError`` unless ``validate`` is off."""
    d = Path(directory)
    stops = []
    path = d / "stops.csv"
    f = _Field(path, STOPS_COLUMNS)
    for ln, row in _rows(path, STOPS_COLUMNS):
        stops.append(Stop(
            f(ln, row, "stop_id", int), f(ln, row, "vertex_id", int), f(ln, row, "buffer_time", int),
            f(ln, row, "lon", float, True), f(ln, row, "lat", float, True),
        ))
    stops.sort(key=lambda s: s.id)

    labels = {}
    path = d / "trips.csv"
    f = _Field(path, TRIPS_COLUMNS)
    for ln, row in _rows(path, TRIPS_COLUMNS):
        tid = f(ln, row, "trip_id", int)
        if tid in labels:
            raise FormatError(path, ln, f"duplicate trip id {tid}", 1, "trip_id")
        labels[tid] = row["label"]

    conns = []
    path = d / "connections.csv"
    f = _Field(path, CONNECTIONS_COLUMNS)
    for ln, row in _rows(path, CONNECTIONS_COLUMNS):
        trip = f(ln, row, "trip_id", int)
        if trip not in labels:
            raise FormatError(path, ln, f"unknown trip {trip}", 2, "trip_id")
        conns.append(Connection(
            f(ln, row, "connection_id", int), f(ln, row, "dep_stop", int), f(ln, row, "arr_stop", int),
            f(ln, row, "dep_time", _time), f(ln, row, "arr_time", _time), trip,
            f(ln, row, "index_in_trip", int),
        ))

    edges = []
    path = d / "edges.csv"
    f = _Field(path, EDGES_COLUMNS)
    for ln, row in _rows(path, EDGES_COLUMNS):
        edges.append((f(ln, row, "from_vertex", _nonneg_int), f(ln, row, "to_vertex", _nonneg_int),
                      f(ln, row, "seconds", int)))
    nv = max([max(a, b) for a, b, _ in edges] + [s.vertex_id for s in stops] + [-1]) + 1
    try:
        graph = WalkingGraph(nv, edges)
    except ValueError as exc:
        raise NetworkError(f"{path}: {exc}") from None

    zones: dict[str, tuple[list, list]] = {}
    path = d / "zones.csv"
    f = _Field(path, ZONES_COLUMNS)
    for ln, row in _rows(path, ZONES_COLUMNS, required=False):
        direction = row["direction"]
        if direction not in ("out", "in"):
            raise FormatError(path, ln, f"direction must be 'out' or 'in', got {direction!r}", 2, "direction")
        if not row["zone_id"]:
            raise FormatError(path, ln, "empty zone id", 1, "zone_id")
        out, inc = zones.setdefault(row["zone_id"], ([], []))
        (out if direction == "out" else inc).append(
            (f(ln, row, "stop_id", int), f(ln, row, "seconds", int)))
    zone_list = [Zone(z, tuple(o), tuple(i)) for z, (o, i) in sorted(zones.items())]

    members: dict[int, list[Connection]] = {t: [] for t in labels}
    for c in conns:
        members[c.trip_id].append(c)
    trips = [Trip(t, tuple(c.id for c in sorted(cs, key=lambda c: c.index_in_trip)), labels[t])
             for t, cs in members.items()]
    return TransitNetwork(stops, conns, graph, zone_list, trips, validate=validate)


# ------------------------------------------------------------------ csv writing


def _writer(path: Path, columns: Sequence[str]):
    fh = open(path, "w", newline="", encoding="utf-8")
    fh.write(HEADER + "\n")
    out = csv.writer(fh, lineterminator="\n")
    out.writerow(columns)
    return fh, out


def _fmt_float(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def dump_network(net: TransitNetwork, directory: Path | str) -> None:
    """Write ``net`` in canonical form (sorted, fixed formatting)."""
    if net.zone_vertices:
        raise ValueError("dump the network before zone integration")
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    fh, out = _writer(d / "stops.csv", STOPS_COLUMNS)
    with fh:
        for s in net.stops:
            out.writerow([s.id, s.vertex_id, s.buffer_time, _fmt_float(s.lon), _fmt_float(s.lat)])
    fh, out = _writer(d / "trips.csv", TRIPS_COLUMNS)
    with fh:
        for t in net.trips:
            out.writerow([t.id, t.label])
    fh, out = _writer(d / "connections.csv", CONNECTIONS_COLUMNS)
    with fh:
        for c in net.connections:
            out.writerow([c.id, c.trip_id, c.index_in_trip, c.dep_stop, c.arr_stop,
                          format_time(c.dep_time), format_time(c.arr_time)])
    fh, out = _writer(d / "edges.csv", EDGES_COLUMNS)
    with fh:
        out.writerows(net.walking_graph.edges)
    if net.zones:
        fh, out = _writer(d / "zones.csv", ZONES_COLUMNS)
        with fh:
            for z in net.zones:
                for sid, sec in z.outgoing:
                    out.writerow([z.id, "out", sid, sec])
                for sid, sec in z.incoming:
                    out.writerow([z.id, "in", sid, sec])


# ----------------------------------------------------------------------- demand


def _endpoint(token: str, net: TransitNetwork, side: int) -> int:
    if token.startswith("z:"):
        pair = net.zone_vertices.get(token[2:])
        if pair is None:
            raise ValueError(f"unknown zone {token[2:]!r}")
        return pair[side]
    v = int(token)
    if not 0 <= v < net.walking_graph.num_vertices:
        raise ValueError(f"unknown vertex {v}")
    return v


def _demand_time(text: str) -> int:
    return int(text) if text.isdigit() else parse_time(text)


def load_demand(path: Path | str, net: TransitNetwork) -> list[DemandEntry]:
    """Read ``id,origin,destination,dep_time``.

    Endpoints are vertex ids or ``z:<zone id>``; zone origins resolve to the
    zone's source vertex and zone destinations to its sink vertex, so ``net``
    must have its zones integrated.  ``dep_time`` is ``HH:MM:SS`` or seconds.
    """
    path = Path(path)
    f = _Field(path, DEMAND_COLUMNS)
    out = []
    seen: dict[str, int] = {}
    if path.exists() and path.stat().st_size == 0:
        return out
    for ln, row in _rows(path, DEMAND_COLUMNS, header_line=False):
        did = row["id"]
        if not did:
            raise FormatError(path, ln, "empty demand id", 1, "id")
        if did in seen:
            raise FormatError(path, ln, f"duplicate demand id {did!r} (first on line {seen[did]})", 1, "id")
        seen[did] = ln
        origin = f(ln, row, "origin", lambda t: _endpoint(t, net, 0))
        dest = f(ln, row, "destination", lambda t: _endpoint(t, net, 1))
        out.append(DemandEntry(did, origin, dest, f(ln, row, "dep_time", _demand_time)))
    return out


def write_demand(entries: Iterable[DemandEntry], path: Path | str) -> None:
    fh, out = _writer(Path(path), DEMAND_COLUMNS)
    with fh:
        for e in entries:
            out.writerow([e.id, e.origin, e.destination, format_time(e.dep_time)])


# ---------------------------------------------------------------------- results


_SIX = Decimal("0.000001")


def fixed6(units: int, multiplier: int) -> str:
    """``units / multiplier`` with six decimals, ties to even."""
    return str((Decimal(int(units)) / Decimal(int(multiplier))).quantize(_SIX, rounding=ROUND_HALF_EVEN))


@dataclass
class JourneyRow:
    demand_id: str
    group_units: int
    departure: int
    arrival: int
    walking_seconds: int
    in_vehicle_seconds: int
    vehicles: int
    connections: int


def journey_rows(result: AssignmentResult, net: TransitNetwork) -> list[tuple[JourneyRow, str]]:
    rows = []
    for did in sorted(result.journeys):
        dep = result.departures[did]
        for journey, units in result.journeys[did]:
            t = replay(journey, net, dep)
            rides = sum(1 for leg in journey if isinstance(leg, Ride))
            rows.append((JourneyRow(did, units, dep, t.arrival, t.walking, t.in_vehicle, t.rides, rides),
                         encode(journey)))
    return rows


def summarize(rows: Sequence[JourneyRow], unassigned: int = 0) -> dict[str, Any]:
    """Expected per-passenger figures over assigned demand entries."""
    per_entry: dict[str, list[JourneyRow]] = {}
    for r in rows:
        per_entry.setdefault(r.demand_id, []).append(r)
    acc = dict.fromkeys(("travel", "walk", "vehicle", "conns", "trips"), 0.0)
    journeys = 0
    for items in per_entry.values():
        total = sum(r.group_units for r in items)
        for r in items:
            p = r.group_units / total
            acc["travel"] += p * (r.arrival - r.departure)
            acc["walk"] += p * r.walking_seconds
            acc["vehicle"] += p * r.in_vehicle_seconds
            acc["conns"] += p * r.connections
            acc["trips"] += p * r.vehicles
        journeys += len(items)
    n = len(per_entry)

    def avg(x, scale=1.0):
        return round(x / n / scale, 6) if n else 0.0

    return {
        "assigned": n,
        "unassigned": unassigned,
        "travel_time_min": avg(acc["travel"], 60),
        "walking_time_min": avg(acc["walk"], 60),
        "in_vehicle_time_min": avg(acc["vehicle"], 60),
        "connections_per_passenger": avg(acc["conns"]),
        "trips_per_passenger": avg(acc["trips"]),
        "journeys_per_passenger": avg(journeys),
    }


def write_results(result: AssignmentResult, net: TransitNetwork, directory: Path | str) -> dict[str, Any]:
    """Write utilization.csv, utilization_cycle_free.csv, journeys.csv and stats.json."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    mul = result.multiplier
    for name, util in (("utilization.csv", result.utilization),
                       ("utilization_cycle_free.csv", result.cycle_free_utilization)):
        if util is None:
            continue
        fh, out = _writer(d / name, ("connection_id", "expected_passengers"))
        with fh:
            for cid, units in enumerate(util.tolist()):
                out.writerow([cid, fixed6(units, mul)])

    rows = journey_rows(result, net)
    fh, out = _writer(d / "journeys.csv", JOURNEY_COLUMNS)
    with fh:
        for r, legs in rows:
            out.writerow([r.demand_id, r.group_units, fixed6(r.group_units, mul), format_time(r.departure),
                          format_time(r.arrival), r.walking_seconds, r.in_vehicle_seconds, r.vehicles,
                          r.connections, legs])
    fh, out = _writer(d / "unassigned.csv", ("demand_id",))
    with fh:
        out.writerows([u] for u in result.unassigned)

    stats = summarize([r for r, _ in rows], len(result.unassigned))
    stats["multiplier"] = mul
    stats["passenger_connections"] = fixed6(int(result.utilization.sum()), mul)
    if result.cycle_free_utilization is not None:
        stats["passenger_connections_cycle_free"] = fixed6(int(result.cycle_free_utilization.sum()), mul)
    with open(d / "stats.json", "w", encoding="utf-8") as fh:
        json.dump(stats, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return stats


def read_journey_rows(path: Path | str) -> list[JourneyRow]:
    path = Path(path)
    f = _Field(path, JOURNEY_COLUMNS)
    rows = []
    for ln, row in _rows(path, JOURNEY_COLUMNS):
        rows.append(JourneyRow(
            row["demand_id"], f(ln, row, "group_units", int), f(ln, row, "departure", _time),
            f(ln, row, "arrival", _time), f(ln, row, "walking_seconds", int),
            f(ln, row, "in_vehicle_seconds", int), f(ln, row, "vehicles", int), f(ln, row, "connections", int),
        ))
    return rows


def read_stats(directory: Path | str) -> dict[str, Any]:
    """Recompute the summary from a result directory."""
    d = Path(directory)
    rows = read_journey_rows(d / "journeys.csv")
    unassigned = sum(1 for _ in _rows(d / "unassigned.csv", ("demand_id",), required=False))
    return summarize(rows, unassigned)


def read_utilization(path: Path | str) -> dict[int, str]:
    path = Path(path)
    return {int(r["connection_id"]): r["expected_passengers"]
            for _, r in _rows(path, ("connection_id", "expected_passengers"))}


# ---------------------------------------------------------------------- geojson


def export_geojson(result, net: TransitNetwork, path: Path | str) -> tuple[int, int]:
    """One LineString per connection carrying its utilization.

    ``result`` is an :class:`AssignmentResult` or a mapping from connection
    id to expected passengers (as read back from utilization.csv).  Returns
    ``(features written, connections skipped for lack of coordinates)``.
    """
    if isinstance(result, AssignmentResult):
        values = {cid: float(fixed6(u, result.multiplier)) for cid, u in enumerate(result.utilization.tolist())}
    else:
        values = {int(k): float(v) for k, v in result.items()}
    features = []
    skipped = 0
    for c in sorted(net.connections, key=lambda c: c.id):
        a, b = net.stops[c.dep_stop], net.stops[c.arr_stop]
        if None in (a.lon, a.lat, b.lon, b.lat):
            skipped += 1
            continue
        features.append({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": [[a.lon, a.lat], [b.lon, b.lat]]},
            "properties": {
                "connection_id": c.id,
                "trip_id": c.trip_id,
                "dep_time": format_time(c.dep_time),
                "arr_time": format_time(c.arr_time),
                "utilization": values.get(c.id, 0.0),
            },
        })
    if skipped:
        log.warning("%d connections skipped: stop coordinates missing", skipped)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh, indent=1)
        fh.write("\n")
    return len(features), skipped


# ----------------------------------------------------------------------- config


@dataclass
class Config:
    network: Optional[str] = None
    demand: Optional[str] = None
    output: Optional[str] = None
    cache_dir: Optional[str] = None
    model: str = "linear"
    beta: float = 1.0
    transfer_penalty: float = 300.0
    wait_weight: float = 0.5
    walk_weight: float = 2.0
    buffer_weight: float = 0.0
    delay_tolerance: float = 300.0
    multiplier: int = 100
    seed: int = 0
    threads: Optional[int] = None
    cycle_removal: bool = True
    avg_degree_limit: float = 16.0
    max_transfer_time: int = 3600


_PATH_KEYS = ("network", "demand", "output", "cache_dir")
_NUMERIC_KEYS = ("beta", "transfer_penalty", "wait_weight", "walk_weight", "buffer_weight", "delay_tolerance",
                 "avg_degree_limit", "max_transfer_time")


def load_config(path: Path | str) -> Config:
    """JSON object with the keys of :class:`Config`; unknown keys are rejected.

    Relative paths are resolved against the config file's directory.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(path, exc.lineno, exc.msg, exc.colno) from None
    if not isinstance(doc, dict):
        raise FormatError(path, 1, "config must be a JSON object")
    known = {f.name for f in fields(Config)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ValueError(f"{path}: unknown config keys: {', '.join(unknown)}")
    for key in _PATH_KEYS:
        if doc.get(key) is not None:
            doc[key] = str((path.parent / doc[key]).resolve())
    cfg = Config(**doc)
    check_config(cfg)
    return cfg


def check_config(cfg: Config) -> None:
    for key in _NUMERIC_KEYS:
        v = getattr(cfg, key)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or math.isnan(v) or v < 0:
            raise ValueError(f"config value {key} must be a non-negative number, got {v!r}")
    if isinstance(cfg.multiplier, bool) or not isinstance(cfg.multiplier, int) or cfg.multiplier < 1:
        raise ValueError(f"multiplier must be a positive integer, got {cfg.multiplier!r}")
    if cfg.threads is not None and (not isinstance(cfg.threads, int) or cfg.threads < 1):
        raise ValueError(f"threads must be a positive integer, got {cfg.threads!r}")
    if not isinstance(cfg.seed, int) or not 0 <= cfg.seed < 1 << 64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {cfg.seed!r}")
