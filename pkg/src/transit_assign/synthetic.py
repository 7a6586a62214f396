"""Random networks and demand for tests and benchmarks."""
from __future__ import annotations

import random
from typing import Optional

from .assignment import DemandEntry
from .network import Connection, Stop, TransitNetwork, WalkingGraph


def random_network(
    rng: random.Random,
    max_stops: int = 12,
    max_connections: int = 50,
    max_vertices: int = 20,
    span: int = 3000,
) -> TransitNetwork:
    """Small random timetable whose whole service fits into ``span`` seconds.

    Trips may revisit stops, stops may have buffer times and the walking
    graph is directed with random lengths, so most corner cases of transfer
    handling show up in a few hundred samples.
    """
    nv = rng.randint(2, max_vertices)
    ns = rng.randint(2, min(max_stops, nv))
    stop_vertices = rng.sample(range(nv), ns)
    stops = [Stop(i, v, rng.choice((0, 0, 0, 30, 60, 120))) for i, v in enumerate(stop_vertices)]

    edges = []
    for _ in range(rng.randint(0, 3 * nv)):
        a, b = rng.randrange(nv), rng.randrange(nv)
        if a != b:
            w = rng.randint(1, 900)
            edges.append((a, b, w))
            if rng.random() < 0.6:
                edges.append((b, a, w))
    graph = WalkingGraph(nv, edges)

    conns = []
    target = rng.randint(1, max_connections)
    trip_id = 0
    while len(conns) < target:
        length = rng.randint(1, min(6, target - len(conns)))
        t = rng.randint(0, span // 2)
        here = rng.randrange(ns)
        legs = []
        for k in range(length):
            nxt = rng.randrange(ns - 1)
            nxt = nxt + 1 if nxt >= here else nxt
            dep = t + (rng.choice((0, 0, 30, 60)) if k else 0)
            arr = dep + rng.randint(30, 400)
            if arr > span:
                break
            legs.append((here, nxt, dep, arr))
            here, t = nxt, arr
        for k, (a, b, dep, arr) in enumerate(legs):
            conns.append((a, b, dep, arr, trip_id, k))
        trip_id += 1
        if not legs:
            # keep the loop finite when start times are near the horizon
            target -= 1
    ids = list(range(len(conns)))
    rng.shuffle(ids)
    connections = [Connection(ids[i], *c) for i, c in enumerate(conns)]
    return TransitNetwork(stops, connections, graph)


def random_demand(rng: random.Random, net: TransitNetwork, count: int, span: int = 3000,
                  num_vertices: Optional[int] = None) -> list[DemandEntry]:
    nv = num_vertices or net.walking_graph.num_vertices
    out = []
    for i in range(count):
        out.append(DemandEntry(f"d{i}", rng.randrange(nv), rng.randrange(nv), rng.randint(0, span)))
    return out


def synthetic_city(seed: int = 0, columns: int = 10, rows: int = 5, horizon: int = 3 * 3600) -> TransitNetwork:
    """Grid city with one stop per crossing and bus lines along rows and columns.

    Crossings are 400 m apart (300 s walking) with a mid-block vertex between
    them, giving ``columns * rows`` stops.  Lines run both ways with
    headways between 5 and 15 minutes plus a few diagonal express lines.
    """
    rng = random.Random(seed)
    n = columns * rows

    def vid(c, r):
        return r * columns + c

    edges = []
    mid = n
    for r in range(rows):
        for c in range(columns):
            for dc, dr in ((1, 0), (0, 1)):
                c2, r2 = c + dc, r + dr
                if c2 < columns and r2 < rows:
                    w1, w2 = rng.randint(120, 180), rng.randint(120, 180)
                    a, b = vid(c, r), vid(c2, r2)
                    edges += [(a, mid, w1), (mid, a, w1), (mid, b, w2), (b, mid, w2)]
                    mid += 1
    graph = WalkingGraph(mid, edges)
    stops = [Stop(i, i, rng.choice((0, 30, 60)), lon=9.1 + 0.005 * (i % columns), lat=48.7 + 0.004 * (i // columns))
             for i in range(n)]

    lines = []
    for r in range(rows):
        lines.append([vid(c, r) for c in range(columns)])
    for c in range(0, columns, 2):
        lines.append([vid(c, r) for r in range(rows)])
    for _ in range(3):
        c, r = rng.randrange(columns), 0
        path = [vid(c, r)]
        while r < rows - 1:
            r += 1
            c = min(columns - 1, max(0, c + rng.choice((-1, 1))))
            path.append(vid(c, r))
        lines.append(path)

    conns = []
    trip = 0
    for line in lines:
        for path in (line, line[::-1]):
            headway = rng.choice((300, 600, 900))
            hop = [rng.randint(90, 150) for _ in path[:-1]]
            t0 = rng.randint(0, headway)
            while t0 < horizon:
                t = t0
                for k, (a, b) in enumerate(zip(path, path[1:])):
                    conns.append((a, b, t, t + hop[k], trip, k))
                    t += hop[k] + 20
                trip += 1
                t0 += headway
    connections = [Connection(i, *c) for i, c in enumerate(conns)]
    return TransitNetwork(stops, connections, graph)


def city_demand(net: TransitNetwork, count: int = 1000, seed: int = 0, latest: int = 2 * 3600) -> list[DemandEntry]:
    """Demand between random crossings and mid-block vertices."""
    rng = random.Random(seed)
    nv = net.walking_graph.num_vertices
    out = []
    for i in range(count):
        o = rng.randrange(nv)
        d = rng.randrange(nv)
        while d == o:
            d = rng.randrange(nv)
        out.append(DemandEntry(f"p{i:05d}", o, d, rng.randint(0, latest)))
    return out
