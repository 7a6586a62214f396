"""Reference answers computed without any engine code paths.

Distances come from a plain heapq Dijkstra on the full walking graph, and
minimum PATs from a memoized recursion over the explicit choices a
passenger has (board, ride to some stop, walk to the destination or to any
stop, board again).  ``enumerate_journeys`` lists every journey outright for
very small instances; it is used to cross-check the recursion.
"""
from __future__ import annotations

import heapq
from functools import lru_cache

from transit_assign.journey import Ride, Transfer, Walk
from transit_assign.network import INF

MILLI = 1000


def all_pairs(net):
    n = net.walking_graph.num_vertices
    adj = [[] for _ in range(n)]
    for a, b, w in net.walking_graph.edges:
        adj[a].append((b, w))
    out = []
    for s in range(n):
        dist = [INF] * n
        dist[s] = 0
        pq = [(0, s)]
        while pq:
            d, u = heapq.heappop(pq)
            if d > dist[u]:
                continue
            for v, w in adj[u]:
                if d + w < dist[v]:
                    dist[v] = d + w
                    heapq.heappush(pq, (d + w, v))
        out.append(dist)
    return out


class Oracle:
    """Minimum PAT (milliseconds) towards one destination vertex."""

    def __init__(self, net, dest, fp, apsp=None):
        self.net = net
        self.dest = dest
        self.fp = fp
        self.D = apsp or all_pairs(net)
        self.conns = sorted(net.connections, key=lambda c: (c.dep_time, c.trip_id, c.index_in_trip))
        self.by_stop = {}
        for c in self.conns:
            self.by_stop.setdefault(c.dep_stop, []).append(c)
        self.next_in_trip = {}
        key = {(c.trip_id, c.index_in_trip): c for c in self.conns}
        for c in self.conns:
            self.next_in_trip[c.id] = key.get((c.trip_id, c.index_in_trip + 1))
        self.vertex = [s.vertex_id for s in net.stops]
        self.buf = [s.buffer_time for s in net.stops]
        self._board = lru_cache(maxsize=None)(self._board_impl)
        self._ride = lru_cache(maxsize=None)(self._ride_impl)

    def walk_cost(self, seconds):
        return self.fp.walk_milli * seconds

    # value of being ready to board at stop s at time r, excluding costs so far
    def board(self, s, r):
        return self._board(s, r)[0]

    def _board_impl(self, s, r):
        best = (INF, None)
        for c in self.by_stop.get(s, ()):
            if c.dep_time < r:
                continue
            v, path = self._ride(c.id)
            if v >= INF:
                continue
            v += self.fp.wait_milli * (c.dep_time - r)
            if v < best[0]:
                best = (v, (c, path))
        return best

    def _ride_impl(self, cid):
        """Best continuation once aboard connection ``cid`` (after it was boarded)."""
        c = self.net.connection(cid)
        a, t = c.arr_stop, c.arr_time
        best = (INF, None)
        fd = self.D[self.vertex[a]][self.dest]
        if fd < INF:
            best = ((t + fd) * MILLI + self.walk_cost(fd), ("final", fd))
        for b in range(self.net.num_stops):
            d = self.D[self.vertex[a]][self.vertex[b]]
            if d >= INF:
                continue
            v = self.board(b, t + d + self.buf[b])
            if v >= INF:
                continue
            v += self.fp.trans_ms + self.walk_cost(d) + self.fp.buf_milli * self.buf[b]
            if v < best[0]:
                best = (v, ("transfer", b, d))
        nxt = self.next_in_trip[cid]
        if nxt is not None:
            v, path = self._ride(nxt.id)
            if v < best[0]:
                best = (v, ("stay", nxt.id))
        return best

    def min_pat(self, origin, t0):
        """Minimum over all journeys from vertex ``origin`` departing at ``t0``."""
        return self.best_journey(origin, t0)[0]

    def best_journey(self, origin, t0):
        dd = self.D[origin][self.dest]
        best = (INF, None)
        if dd < INF:
            best = ((t0 + dd) * MILLI + self.walk_cost(dd), (Walk(origin, self.dest, dd),))
        for s in range(self.net.num_stops):
            d = self.D[origin][self.vertex[s]]
            if d >= INF:
                continue
            r = t0 + d + self.buf[s]
            v = self.board(s, r)
            if v >= INF:
                continue
            v += self.walk_cost(d) + self.fp.buf_milli * self.buf[s]
            if v < best[0]:
                best = (v, self._rebuild([Walk(origin, self.vertex[s], d)], s, r))
        return best

    def _rebuild(self, legs, s, r):
        while True:
            _, (c, _) = self._board(s, r)
            cid = c.id
            while True:
                legs.append(Ride(cid))
                _, step = self._ride(cid)
                if step[0] == "stay":
                    cid = step[1]
                    continue
                break
            a = self.net.connection(cid).arr_stop
            t = self.net.connection(cid).arr_time
            if step[0] == "final":
                legs.append(Walk(self.vertex[a], self.dest, step[1]))
                return tuple(legs)
            _, b, d = step
            legs.append(Transfer(a, b, d))
            s, r = b, t + d + self.buf[b]


def enumerate_journeys(net, origin, dest, t0, apsp=None, limit=200_000):
    """Every journey from ``origin`` at ``t0`` to ``dest`` as leg tuples."""
    D = apsp or all_pairs(net)
    vertex = [s.vertex_id for s in net.stops]
    buf = [s.buffer_time for s in net.stops]
    conns = sorted(net.connections, key=lambda c: (c.dep_time, c.trip_id, c.index_in_trip))
    key = {(c.trip_id, c.index_in_trip): c for c in conns}
    out = []

    def boarded(legs, s, r):
        for c in conns:
            if c.dep_stop == s and c.dep_time >= r:
                aboard(legs, c)

    def aboard(legs, c):
        if len(out) > limit:
            raise RuntimeError("too many journeys")
        legs = legs + [Ride(c.id)]
        a, t = c.arr_stop, c.arr_time
        fd = D[vertex[a]][dest]
        if fd < INF:
            out.append(tuple(legs + [Walk(vertex[a], dest, fd)]))
        for b in range(net.num_stops):
            d = D[vertex[a]][vertex[b]]
            if d < INF:
                boarded(legs + [Transfer(a, b, d)], b, t + d + buf[b])
        nxt = key.get((c.trip_id, c.index_in_trip + 1))
        if nxt is not None:
            aboard(legs, nxt)

    dd = D[origin][dest]
    if dd < INF:
        out.append((Walk(origin, dest, dd),))
    for s in range(net.num_stops):
        d = D[origin][vertex[s]]
        if d < INF:
            boarded([Walk(origin, vertex[s], d)], s, t0 + d + buf[s])
    return out


def journey_pat(journey, net, t0, fp):
    """PAT of an explicit journey, tallied leg by leg."""
    by_id = {c.id: c for c in net.connections}
    t, extra, boardings, prev = t0, 0, 0, None
    for leg in journey:
        if isinstance(leg, Ride):
            c = by_id[leg.connection]
            seated = prev is not None and prev.trip_id == c.trip_id and c.index_in_trip == prev.index_in_trip + 1
            if not seated:
                b = net.stops[c.dep_stop].buffer_time
                assert c.dep_time >= t + b, "boarding before ready"
                extra += fp.buf_milli * b + fp.wait_milli * (c.dep_time - t - b)
                boardings += 1
            t, prev = c.arr_time, c
        else:
            extra += fp.walk_milli * leg.seconds
            t += leg.seconds
            prev = None
    return t * MILLI + extra + fp.trans_ms * max(0, boardings - 1)
