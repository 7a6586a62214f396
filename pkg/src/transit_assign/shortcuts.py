"""Stop-to-stop transfer shortcuts replacing the walking graph between vehicles."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import kernels
from .graph import CoreGraph
from .network import INF, TransitNetwork

DEFAULT_MAX_TRANSFER_TIME = 3600
CSV_HEADER = "#transit-assign v1"


@dataclass
class ShortcutGraph:
    num_stops: int
    edges: list[tuple[int, int, int]]  # (from_stop, to_stop, walk_seconds), sorted, no loops

    def __post_init__(self):
        self.edges = sorted(set(self.edges))
        self._csr = None

    def __len__(self) -> int:
        return len(self.edges)

    def __getstate__(self):
        return {"num_stops": self.num_stops, "edges": self.edges}

    def __setstate__(self, state):
        self.num_stops = state["num_stops"]
        self.edges = state["edges"]
        self._csr = None

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self._csr is None:
            indptr = np.zeros(self.num_stops + 1, dtype=np.int64)
            to = np.zeros(len(self.edges), dtype=np.int64)
            w = np.zeros(len(self.edges), dtype=np.int64)
            for k, (a, b, t) in enumerate(self.edges):
                indptr[a + 1] += 1
                to[k] = b
                w[k] = t
            np.cumsum(indptr, out=indptr)
            self._csr = (indptr, to, w)
        return self._csr

    def outgoing(self, stop: int) -> list[tuple[int, int]]:
        indptr, to, w = self.csr()
        lo, hi = indptr[stop], indptr[stop + 1]
        return list(zip(to[lo:hi].tolist(), w[lo:hi].tolist()))

    def write_csv(self, path: Path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["from_stop", "to_stop", "walk_seconds"])
            out.writerows(self.edges)

    @classmethod
    def read_csv(cls, path: Path, num_stops: int) -> "ShortcutGraph":
        with open(path, newline="") as fh:
            first = fh.readline().strip()
            if first != CSV_HEADER:
                raise ValueError(f"{path}: missing header {CSV_HEADER!r}")
            rows = list(csv.DictReader(fh))
        return cls(num_stops, [(int(r["from_stop"]), int(r["to_stop"]), int(r["walk_seconds"])) for r in rows])


def full_transfer_graph(net: TransitNetwork) -> ShortcutGraph:
    """Every stop pair joined by its exact walking distance (the unrestricted reference)."""
    g = net.walking_graph
    indptr, idx, w = g.csr()
    edges = []
    for a in range(net.num_stops):
        dist = kernels.dijkstra(indptr, idx, w, int(net.stop_vertex[a]), INF, None)
        for b in range(net.num_stops):
            d = int(dist[net.stop_vertex[b]])
            if b != a and d < INF:
                edges.append((a, b, d))
    return ShortcutGraph(net.num_stops, edges)


def compute_shortcuts(
    net: TransitNetwork, core: CoreGraph, max_transfer_time: Optional[int] = DEFAULT_MAX_TRANSFER_TIME
) -> ShortcutGraph:
    """Candidate inter-vehicle transfers, a superset of the needed ones.

    A walk ``a -> b`` is kept when some vehicle arrives at ``a`` early enough
    that, after walking and observing the buffer time at ``b``, a vehicle
    departing from ``b`` can still be caught, and the walk is no longer than
    ``max_transfer_time``.  Checking the earliest arrival at ``a`` against
    the latest departure at ``b`` is the same as checking every arrival
    event separately.
    """
    n = net.num_stops
    if net.num_connections == 0:
        return ShortcutGraph(n, [])
    earliest_arr = np.full(n, INF, dtype=np.int64)
    np.minimum.at(earliest_arr, net.arr_stop, net.arr_time)
    latest_dep = np.full(n, -1, dtype=np.int64)
    np.maximum.at(latest_dep, net.dep_stop, net.dep_time)
    bound = INF if max_transfer_time is None else int(max_transfer_time)

    indptr, idx, w = core.graph().csr()
    departing = np.nonzero(latest_dep >= 0)[0]
    dep_vertices = net.stop_vertex[departing]
    edges = []
    for a in np.nonzero(earliest_arr < INF)[0].tolist():
        ta = int(earliest_arr[a])
        slack = int(latest_dep.max()) - ta
        if slack < 0:
            continue
        dist = kernels.dijkstra(indptr, idx, w, int(net.stop_vertex[a]), min(bound, slack), dep_vertices)
        d = dist[dep_vertices]
        ok = (d < INF) & (ta + d + net.buffer[departing] <= latest_dep[departing])
        for b, t in zip(departing[ok].tolist(), d[ok].tolist()):
            if b != a:
                edges.append((a, b, t))
    return ShortcutGraph(n, edges)
