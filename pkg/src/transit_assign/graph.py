"""Shortest paths on the walking graph.

Plain Dijkstra is the building block and the reference everything else is
tested against.  On top of it sit a contraction hierarchy (CH), a partially
contracted core graph used for transfer shortcuts, and a bucket index that
answers one-to-many and many-to-one queries from the CH search spaces.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .network import INF, WalkingGraph

WITNESS_SETTLE_LIMIT = 500


class GraphError(ValueError):
    pass


def _check_vertex(n: int, v: int) -> None:
    if not 0 <= v < n:
        raise GraphError(f"unknown vertex {v}")


def dijkstra(
    graph: WalkingGraph,
    source: int,
    targets: Optional[Iterable[int]] = None,
    bound: int = INF,
    reverse: bool = False,
) -> np.ndarray:
    """Distances from ``source`` (to ``source`` when ``reverse``); INF if unreachable."""
    _check_vertex(graph.num_vertices, source)
    indptr, idx, w = graph.reverse_csr() if reverse else graph.csr()
    tgt = None if targets is None else np.fromiter(targets, dtype=np.int64)
    return kernels.dijkstra(indptr, idx, w, int(source), int(bound), tgt)


def _csr(n: int, edges: Sequence[tuple[int, int, int]]):
    return WalkingGraph(n, edges).csr()


# --------------------------------------------------------------------- contraction


def _witness_dist(out_adj, source, target_set, skip, bound) -> dict[int, int]:
    """Bounded Dijkstra in the remaining graph avoiding ``skip``."""
    dist = {source: 0}
    heap = [(0, source)]
    settled: dict[int, int] = {}
    found = 0
    while heap and len(settled) < WITNESS_SETTLE_LIMIT:
        d, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled[u] = d
        if u in target_set:
            found += 1
            if found == len(target_set):
                break
        for v, w in out_adj[u].items():
            if v == skip:
                continue
            nd = d + w
            if nd <= bound and nd < dist.get(v, INF):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return settled


class _Contractor:
    def __init__(self, graph: WalkingGraph):
        n = graph.num_vertices
        self.n = n
        self.out: list[dict[int, int]] = [dict() for _ in range(n)]
        self.inn: list[dict[int, int]] = [dict() for _ in range(n)]
        for u, v, w in graph.edges:
            self.out[u][v] = w
            self.inn[v][u] = w
        self.mid: dict[tuple[int, int], int] = {}
        self.contracted = [False] * n
        self.contracted_neighbors = [0] * n
        self.num_edges = len(graph.edges)
        self.num_remaining = n
        self.recorded: list[tuple[int, int, int]] = []

    def needed_shortcuts(self, x: int) -> list[tuple[int, int, int]]:
        result = []
        outs = self.out[x]
        if not outs:
            return result
        for u, wu in self.inn[x].items():
            targets = {v: wu + wv for v, wv in outs.items() if v != u}
            if not targets:
                continue
            bound = max(targets.values())
            settled = _witness_dist(self.out, u, set(targets), x, bound)
            for v, via in targets.items():
                if settled.get(v, INF) > via:
                    result.append((u, v, via))
        return result

    def priority(self, x: int) -> int:
        shortcuts = self.needed_shortcuts(x)
        removed = len(self.out[x]) + len(self.inn[x])
        return len(shortcuts) - removed + self.contracted_neighbors[x]

    def contract(self, x: int) -> None:
        shortcuts = self.needed_shortcuts(x)
        for v, w in self.out[x].items():
            self.recorded.append((x, v, w))
            del self.inn[v][x]
            self.contracted_neighbors[v] += 1
        for u, w in self.inn[x].items():
            self.recorded.append((u, x, w))
            del self.out[u][x]
            self.contracted_neighbors[u] += 1
        self.num_edges -= len(self.out[x]) + len(self.inn[x])
        self.out[x] = {}
        self.inn[x] = {}
        for u, v, w in shortcuts:
            old = self.out[u].get(v)
            if old is None or w < old:
                if old is None:
                    self.num_edges += 1
                self.out[u][v] = w
                self.inn[v][u] = w
                self.mid[(u, v)] = x
        self.contracted[x] = True
        self.num_remaining -= 1

    def average_degree(self) -> float:
        if self.num_remaining == 0:
            return 0.0
        return self.num_edges / self.num_remaining

    def run(self, keep: set[int], avg_degree_limit: float) -> list[int]:
        """Contract vertices outside ``keep``; returns the contraction order."""
        order: list[int] = []
        candidates = [v for v in range(self.n) if v not in keep]
        for v in candidates:
            if not self.out[v] and not self.inn[v]:
                self.contract(v)
                order.append(v)
        heap = [(self.priority(v), v) for v in candidates if not self.contracted[v]]
        heapq.heapify(heap)
        while heap:
            prio, x = heapq.heappop(heap)
            if self.contracted[x]:
                continue
            fresh = self.priority(x)
            if heap and fresh > heap[0][0]:
                heapq.heappush(heap, (fresh, x))
                continue
            if (self.out[x] or self.inn[x]) and self.average_degree() > avg_degree_limit:
                break
            self.contract(x)
            order.append(x)
        return order

    def remaining_edges(self) -> list[tuple[int, int, int]]:
        return [(u, v, w) for u in range(self.n) for v, w in self.out[u].items()]


# ------------------------------------------------------------------------------ CH


@dataclass
class ContractionHierarchy:
    num_vertices: int
    rank: np.ndarray
    up_edges: list[tuple[int, int, int]]  # forward, towards higher rank
    down_edges: list[tuple[int, int, int]]  # u -> v with rank[u] > rank[v]
    shortcut_middle: dict[tuple[int, int], int]

    def __post_init__(self):
        self._fwd = _csr(self.num_vertices, self.up_edges)
        self._bwd = _csr(self.num_vertices, [(v, u, w) for u, v, w in self.down_edges])

    def __getstate__(self):
        state = dict(self.__dict__)
        state.pop("_fwd", None)
        state.pop("_bwd", None)
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self.__post_init__()

    def forward_search(self, source: int) -> np.ndarray:
        _check_vertex(self.num_vertices, source)
        return kernels.dijkstra(*self._fwd, int(source))

    def backward_search(self, target: int) -> np.ndarray:
        _check_vertex(self.num_vertices, target)
        return kernels.dijkstra(*self._bwd, int(target))

    def distance(self, source: int, target: int) -> int:
        f = self.forward_search(source)
        b = self.backward_search(target)
        both = (f < INF) & (b < INF)
        if not both.any():
            return INF
        return int((f[both] + b[both]).min())

    def unpack(self, u: int, v: int) -> list[int]:
        """Vertex sequence of the original path behind overlay edge ``u -> v``."""
        m = self.shortcut_middle.get((u, v))
        if m is None:
            return [u, v]
        return self.unpack(u, m)[:-1] + self.unpack(m, v)


def build_ch(graph: WalkingGraph) -> ContractionHierarchy:
    """Contract every vertex; ordering by edge difference plus contracted neighbours."""
    con = _Contractor(graph)
    order = con.run(keep=set(), avg_degree_limit=math.inf)
    rank = np.empty(graph.num_vertices, dtype=np.int64)
    rank[np.asarray(order, dtype=np.int64)] = np.arange(len(order), dtype=np.int64)
    up, down = [], []
    for u, v, w in con.recorded:
        (up if rank[u] < rank[v] else down).append((u, v, w))
    return ContractionHierarchy(graph.num_vertices, rank, up, down, con.mid)


# ---------------------------------------------------------------------------- core


@dataclass
class CoreGraph:
    num_vertices: int
    vertices: np.ndarray  # sorted core vertex ids
    edges: list[tuple[int, int, int]]

    def graph(self) -> WalkingGraph:
        return WalkingGraph(self.num_vertices, self.edges)

    @property
    def average_degree(self) -> float:
        return len(self.edges) / max(1, len(self.vertices))


def build_core(graph: WalkingGraph, keep: Iterable[int], avg_degree_limit: float = 16) -> CoreGraph:
    """Contract vertices outside ``keep`` until the core gets too dense.

    Contraction stops once the average degree (edges per remaining vertex)
    exceeds ``avg_degree_limit``; isolated vertices are always removed.
    """
    keep = {int(k) for k in keep}
    for k in keep:
        _check_vertex(graph.num_vertices, k)
    con = _Contractor(graph)
    con.run(keep=keep, avg_degree_limit=avg_degree_limit)
    verts = np.asarray([v for v in range(graph.num_vertices) if not con.contracted[v]], dtype=np.int64)
    return CoreGraph(graph.num_vertices, verts, sorted(con.remaining_edges()))


# ------------------------------------------------------------------------- buckets


class BucketIndex:
    """Bucket-CH over a fixed list of keyed endpoints (usually one per stop).

    ``key_vertex[k]`` is the walking-graph vertex of key ``k``.  Target
    buckets hold backward search spaces (one-to-many), source buckets hold
    forward search spaces (many-to-one).
    """

    def __init__(self, ch: ContractionHierarchy, key_vertex: Sequence[int]):
        self.ch = ch
        self.key_vertex = np.asarray(key_vertex, dtype=np.int64)
        self.num_keys = len(self.key_vertex)
        self._tgt = self._collect(ch.backward_search)
        self._src = self._collect(ch.forward_search)

    def _collect(self, search):
        vs, ks, ds = [], [], []
        for k, v in enumerate(self.key_vertex.tolist()):
            dist = search(v)
            hit = np.nonzero(dist < INF)[0]
            vs.append(hit)
            ks.append(np.full(len(hit), k, dtype=np.int64))
            ds.append(dist[hit])
        if not vs:
            z = np.zeros(0, dtype=np.int64)
            return z, z, z
        v, k, d = np.concatenate(vs), np.concatenate(ks), np.concatenate(ds)
        order = np.argsort(v, kind="stable")
        return v[order], k[order], d[order]

    @staticmethod
    def _scan(space: np.ndarray, buckets, nkeys: int) -> np.ndarray:
        bv, bk, bd = buckets
        res = np.full(nkeys, INF, dtype=np.int64)
        reach = space[bv]
        mask = reach < INF
        np.minimum.at(res, bk[mask], reach[mask] + bd[mask])
        return res

    def one_to_many(self, source: int) -> np.ndarray:
        """``dist(source, key_vertex[k])`` for every key (INF if unreachable)."""
        return self._scan(self.ch.forward_search(source), self._tgt, self.num_keys)

    def many_to_one(self, target: int) -> np.ndarray:
        """``dist(key_vertex[k], target)`` for every key (INF if unreachable)."""
        return self._scan(self.ch.backward_search(target), self._src, self.num_keys)

    @property
    def num_entries(self) -> int:
        return len(self._tgt[0]) + len(self._src[0])


def bucket_one_to_many(index: BucketIndex, source: int) -> dict[int, int]:
    """Distance map ``key -> dist`` over reachable registered keys."""
    dist = index.one_to_many(source)
    return {int(k): int(dist[k]) for k in np.nonzero(dist < INF)[0]}


@dataclass(frozen=True)
class DistanceList:
    origin: int
    stops: np.ndarray
    dists: np.ndarray

    def __len__(self) -> int:
        return len(self.stops)

    def __iter__(self):
        return zip(self.stops.tolist(), self.dists.tolist())


def distance_list(index: BucketIndex, origin: int) -> DistanceList:
    dist = index.one_to_many(origin)
    reach = np.nonzero(dist < INF)[0]
    order = np.lexsort((reach, dist[reach]))
    stops = reach[order]
    return DistanceList(int(origin), stops, dist[stops])


def build_distance_lists(index: BucketIndex, origins: Iterable[int]) -> dict[int, DistanceList]:
    """Stops reachable from each origin, ascending by distance then stop id."""
    return {int(o): distance_list(index, int(o)) for o in origins}
