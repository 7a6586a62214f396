"""Static timetable and walking-graph data model.

A network is the 4-tuple of stops, connections, trips and a directed walking
graph.  Connections are kept in one array sorted by
``(dep_time, trip_id, index_in_trip)``; every algorithm downstream refers to
connections by their position in that array, while public outputs use the
stable connection id.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

INF = 1 << 60


class NetworkError(ValueError):
    """Raised when a network cannot be built or a reference dangles."""


def parse_time(text: str) -> int:
    """Parse ``HH:MM:SS`` (hours may exceed 23) into seconds."""
    parts = text.strip().split(":")
    if len(parts) != 3 or not all(p.isdigit() for p in parts):
        raise ValueError(f"malformed time {text!r}")
    h, m, s = (int(p) for p in parts)
    if m > 59 or s > 59:
        raise ValueError(f"malformed time {text!r}")
    return h * 3600 + m * 60 + s


def format_time(seconds: int) -> str:
    h, rem = divmod(int(seconds), 3600)
    m, s = divmod(rem, 60)
    return f"{h:02d}:{m:02d}:{s:02d}"


@dataclass(frozen=True)
class Stop:
    id: int
    vertex_id: int
    buffer_time: int = 0
    lon: Optional[float] = None
    lat: Optional[float] = None


@dataclass(frozen=True)
class Connection:
    id: int
    dep_stop: int
    arr_stop: int
    dep_time: int
    arr_time: int
    trip_id: int
    index_in_trip: int


@dataclass(frozen=True)
class Trip:
    id: int
    connection_ids: tuple[int, ...]
    label: str = ""


@dataclass(frozen=True)
class Zone:
    id: str
    outgoing: tuple[tuple[int, int], ...] = ()
    incoming: tuple[tuple[int, int], ...] = ()


class WalkingGraph:
    """Directed graph with integer walking times.

    Loop edges are dropped and parallel edges collapse to the cheapest one.
    CSR arrays for both directions are built on demand and cached.
    """

    def __init__(self, num_vertices: int, edges: Iterable[tuple[int, int, int]] = ()):
        self.num_vertices = int(num_vertices)
        best: dict[tuple[int, int], int] = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), int(w)
            if u == v:
                continue
            if w < 0:
                raise NetworkError(f"negative walking time on edge {u}->{v}")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise NetworkError(f"edge {u}->{v} references unknown vertex")
            key = (u, v)
            if key not in best or w < best[key]:
                best[key] = w
        self.edges: list[tuple[int, int, int]] = sorted((u, v, w) for (u, v), w in best.items())
        self._csr: Optional[tuple[np.ndarray, np.ndarray, np.ndarray]] = None
        self._rcsr: Optional[tuple[np.ndarray, np.ndarray, np.ndarray]] = None

    def __len__(self) -> int:
        return self.num_vertices

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, WalkingGraph)
            and self.num_vertices == other.num_vertices
            and self.edges == other.edges
        )

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self._csr is None:
            self._csr = _build_csr(self.num_vertices, self.edges, reverse=False)
        return self._csr

    def reverse_csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self._rcsr is None:
            self._rcsr = _build_csr(self.num_vertices, self.edges, reverse=True)
        return self._rcsr

    def with_vertices(self, extra: int, edges: Iterable[tuple[int, int, int]]) -> "WalkingGraph":
        return WalkingGraph(self.num_vertices + extra, list(self.edges) + list(edges))

    def in_degree(self, v: int) -> int:
        indptr = self.reverse_csr()[0]
        return int(indptr[v + 1] - indptr[v])

    def out_degree(self, v: int) -> int:
        indptr = self.csr()[0]
        return int(indptr[v + 1] - indptr[v])


def _build_csr(n: int, edges: Sequence[tuple[int, int, int]], reverse: bool):
    if edges:
        arr = np.asarray(edges, dtype=np.int64)
        src, dst, w = (arr[:, 1], arr[:, 0], arr[:, 2]) if reverse else (arr[:, 0], arr[:, 1], arr[:, 2])
    else:
        src = dst = w = np.zeros(0, dtype=np.int64)
    order = np.lexsort((dst, src))
    src, dst, w = src[order], dst[order], w[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, np.ascontiguousarray(dst), np.ascontiguousarray(w)


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    def __bool__(self) -> bool:  # truthy when there is something to report
        return bool(self.violations)

    def __len__(self) -> int:
        return len(self.violations)

    def add(self, kind: str, message: str) -> None:
        self.violations.append(Violation(kind, message))


def _conn_key(c: Connection) -> tuple[int, int, int]:
    return (c.dep_time, c.trip_id, c.index_in_trip)


class TransitNetwork:
    """Immutable timetable plus walking graph.

    ``connections`` is sorted ascending by ``(dep_time, trip_id,
    index_in_trip)``.  Numpy arrays indexed by sorted position are exposed
    for the scan kernels (``dep_stop``, ``arr_stop``, ``dep_time``,
    ``arr_time``, ``trip``, ``next_pos``).
    """

    def __init__(
        self,
        stops: Sequence[Stop],
        connections: Sequence[Connection],
        walking_graph: WalkingGraph,
        zones: Sequence[Zone] = (),
        trips: Optional[Sequence[Trip]] = None,
        zone_vertices: Optional[dict[str, tuple[int, int]]] = None,
        validate: bool = True,
    ):
        self.stops: tuple[Stop, ...] = tuple(stops)
        self.connections: tuple[Connection, ...] = tuple(sorted(connections, key=_conn_key))
        self.walking_graph = walking_graph
        self.zones: tuple[Zone, ...] = tuple(zones)
        self.zone_vertices: dict[str, tuple[int, int]] = dict(zone_vertices or {})
        if trips is None:
            trips = _trips_from_connections(self.connections)
        self.trips: tuple[Trip, ...] = tuple(sorted(trips, key=lambda t: t.id))
        if validate:
            report = validate_network(self)
            if report:
                raise NetworkError("invalid network:\n" + "\n".join(map(str, report.violations)))
        self._build_arrays()

    def _build_arrays(self) -> None:
        conns = self.connections
        n = len(conns)
        self.num_stops = len(self.stops)
        self.dep_stop = np.fromiter((c.dep_stop for c in conns), dtype=np.int64, count=n)
        self.arr_stop = np.fromiter((c.arr_stop for c in conns), dtype=np.int64, count=n)
        self.dep_time = np.fromiter((c.dep_time for c in conns), dtype=np.int64, count=n)
        self.arr_time = np.fromiter((c.arr_time for c in conns), dtype=np.int64, count=n)
        self.trip = np.fromiter((c.trip_id for c in conns), dtype=np.int64, count=n)
        self.conn_ids = np.fromiter((c.id for c in conns), dtype=np.int64, count=n)
        self.pos_of_id = {c.id: i for i, c in enumerate(conns)}
        by_key = {(c.trip_id, c.index_in_trip): i for i, c in enumerate(conns)}
        self.next_pos = np.fromiter(
            (by_key.get((c.trip_id, c.index_in_trip + 1), -1) for c in conns), dtype=np.int64, count=n
        )
        self.buffer = np.fromiter((s.buffer_time for s in self.stops), dtype=np.int64, count=len(self.stops))
        self.stop_vertex = np.fromiter((s.vertex_id for s in self.stops), dtype=np.int64, count=len(self.stops))
        self.vertex_stops: dict[int, list[int]] = {}
        for s in self.stops:
            self.vertex_stops.setdefault(s.vertex_id, []).append(s.id)

    @property
    def num_connections(self) -> int:
        return len(self.connections)

    def connection(self, conn_id: int) -> Connection:
        return self.connections[self.pos_of_id[conn_id]]

    def follows_in_trip(self, c1: Connection, c2: Connection) -> bool:
        return c1.trip_id == c2.trip_id and c2.index_in_trip == c1.index_in_trip + 1


def _trips_from_connections(conns: Sequence[Connection]) -> list[Trip]:
    members: dict[int, list[Connection]] = {}
    for c in conns:
        members.setdefault(c.trip_id, []).append(c)
    return [
        Trip(tid, tuple(c.id for c in sorted(cs, key=lambda c: c.index_in_trip)))
        for tid, cs in sorted(members.items())
    ]


def validate_network(net: TransitNetwork) -> ValidationReport:
    """Collect every violated structural invariant of ``net``."""
    report = ValidationReport()
    nstops = len(net.stops)
    nverts = net.walking_graph.num_vertices

    for i, s in enumerate(net.stops):
        if s.id != i:
            report.add("stop-id", f"stop at position {i} has id {s.id}; ids must be contiguous from 0")
        if s.buffer_time < 0:
            report.add("negative-time", f"stop {s.id} has negative buffer time {s.buffer_time}")
        if not 0 <= s.vertex_id < nverts:
            report.add("dangling-reference", f"stop {s.id} references unknown vertex {s.vertex_id}")

    conns = net.connections
    seen_ids: set[int] = set()
    for pos, c in enumerate(conns):
        if c.id in seen_ids:
            report.add("duplicate-id", f"connection id {c.id} used twice")
        seen_ids.add(c.id)
        for label, sid in (("dep_stop", c.dep_stop), ("arr_stop", c.arr_stop)):
            if not 0 <= sid < nstops:
                report.add("dangling-reference", f"connection {c.id} {label} references unknown stop {sid}")
        if c.dep_time < 0 or c.arr_time < 0:
            report.add("negative-time", f"connection {c.id} has a negative timestamp")
        if c.dep_time >= c.arr_time:
            report.add("time-order", f"connection {c.id} departs at {c.dep_time} but arrives at {c.arr_time}")
        if pos and _conn_key(conns[pos - 1]) > _conn_key(c):
            report.add("unsorted", f"connection {c.id} is out of departure order")
    if seen_ids and seen_ids != set(range(len(conns))):
        report.add("connection-id", "connection ids must be dense from 0")

    by_id = {c.id: c for c in conns}
    covered: dict[int, int] = {}
    for t in net.trips:
        if not t.connection_ids:
            report.add("empty-trip", f"trip {t.id} has no connections")
            continue
        prev: Optional[Connection] = None
        for k, cid in enumerate(t.connection_ids):
            c = by_id.get(cid)
            if c is None:
                report.add("dangling-reference", f"trip {t.id} references unknown connection {cid}")
                prev = None
                continue
            if cid in covered:
                report.add("trip-membership", f"connection {cid} belongs to trips {covered[cid]} and {t.id}")
            covered[cid] = t.id
            if c.trip_id != t.id or c.index_in_trip != k:
                report.add("trip-membership", f"connection {cid} does not sit at index {k} of trip {t.id}")
            if prev is not None:
                if prev.arr_time > c.dep_time:
                    report.add(
                        "trip-discontinuity",
                        f"trip {t.id}: connection {c.id} departs before connection {prev.id} arrives",
                    )
                if prev.arr_stop != c.dep_stop:
                    report.add(
                        "trip-discontinuity",
                        f"trip {t.id}: connection {c.id} departs from stop {c.dep_stop}, "
                        f"previous arrives at {prev.arr_stop}",
                    )
            prev = c
    for cid in by_id:
        if cid not in covered:
            report.add("trip-membership", f"connection {cid} belongs to no trip")

    for zone in net.zones:
        for sid, d in zone.outgoing + zone.incoming:
            if not 0 <= sid < nstops:
                report.add("dangling-reference", f"zone {zone.id} references unknown stop {sid}")
            if d < 0:
                report.add("negative-time", f"zone {zone.id} has negative distance {d}")
    return report


def transfer_feasible(
    c1: Connection, c2: Connection, walk_time: Optional[float], net: TransitNetwork
) -> bool:
    """Whether a passenger arriving with ``c1`` can continue with ``c2``.

    ``walk_time`` is ``dist(arr_stop(c1), dep_stop(c2))``; ``None`` or
    infinity means unreachable.  Staying seated in the same trip needs no
    buffer time.
    """
    if net.follows_in_trip(c1, c2):
        return True
    if walk_time is None or walk_time == math.inf or walk_time >= INF:
        return False
    return c1.arr_time + walk_time + net.stops[c2.dep_stop].buffer_time <= c2.dep_time


def integrate_zones(net: TransitNetwork) -> TransitNetwork:
    """Add a source and a sink vertex per zone.

    The source only has edges to the zone's outgoing stops, the sink only
    receives edges from its incoming stops, so no stop-to-stop path can run
    through a zone.
    """
    if net.zone_vertices:
        return net
    nstops = len(net.stops)
    base = net.walking_graph.num_vertices
    new_edges: list[tuple[int, int, int]] = []
    zone_vertices: dict[str, tuple[int, int]] = {}
    for k, zone in enumerate(net.zones):
        source, sink = base + 2 * k, base + 2 * k + 1
        zone_vertices[zone.id] = (source, sink)
        for sid, d in zone.outgoing:
            if not 0 <= sid < nstops:
                raise NetworkError(f"dangling-reference: zone {zone.id} references unknown stop {sid}")
            new_edges.append((source, net.stops[sid].vertex_id, d))
        for sid, d in zone.incoming:
            if not 0 <= sid < nstops:
                raise NetworkError(f"dangling-reference: zone {zone.id} references unknown stop {sid}")
            new_edges.append((net.stops[sid].vertex_id, sink, d))
    graph = net.walking_graph.with_vertices(2 * len(net.zones), new_edges)
    return TransitNetwork(
        net.stops, net.connections, graph, net.zones, net.trips, zone_vertices, validate=False
    )
