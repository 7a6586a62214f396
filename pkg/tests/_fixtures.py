"""Hand-built networks shared by several test modules."""
from __future__ import annotations

from transit_assign.network import Connection, Stop, TransitNetwork, WalkingGraph, Zone, parse_time


def hms(text: str) -> int:
    return parse_time(text)


def buffer_time_network() -> TransitNetwork:
    """Stops v, w, x, y, z; w has a 5-minute buffer.

    green: v -> w 8:00-8:05, w -> x 8:06-8:15
    blue:  w -> y 8:10-8:15
    red:   w -> z 8:09-8:15
    """
    stops = [Stop(0, 0), Stop(1, 1, 300), Stop(2, 2), Stop(3, 3), Stop(4, 4)]
    conns = [
        Connection(0, 0, 1, hms("8:00:00"), hms("8:05:00"), 0, 0),
        Connection(1, 1, 2, hms("8:06:00"), hms("8:15:00"), 0, 1),
        Connection(2, 1, 3, hms("8:10:00"), hms("8:15:00"), 1, 0),
        Connection(3, 1, 4, hms("8:09:00"), hms("8:15:00"), 2, 0),
    ]
    return TransitNetwork(stops, conns, WalkingGraph(5))


GREEN_FIRST, GREEN_SECOND, BLUE, RED = 0, 1, 2, 3


def zone_network() -> TransitNetwork:
    """Stops v (0) and w (1) at distance 10; a zone 4 from v and 3 from w."""
    stops = [Stop(0, 0), Stop(1, 1)]
    graph = WalkingGraph(3, [(0, 2, 5), (2, 0, 5), (2, 1, 5), (1, 2, 5)])
    zone = Zone("Z", outgoing=((0, 4), (1, 3)), incoming=((0, 4), (1, 3)))
    return TransitNetwork(stops, [], graph, [zone])


def line_network(num_stops: int = 4, headway: int = 600, runs: int = 3) -> TransitNetwork:
    """One line through stops 0..n-1, no walking edges."""
    stops = [Stop(i, i) for i in range(num_stops)]
    conns = []
    for r in range(runs):
        t = 3600 + r * headway
        for k in range(num_stops - 1):
            conns.append(Connection(len(conns), k, k + 1, t, t + 120, r, k))
            t += 150
    return TransitNetwork(stops, conns, WalkingGraph(num_stops))


def two_branch_network() -> TransitNetwork:
    """Origin stop 0, destination stop 3, two equally good lines via stops 1 and 2."""
    stops = [Stop(i, i) for i in range(4)]
    conns = [
        Connection(0, 0, 1, 1000, 1300, 0, 0),
        Connection(1, 1, 3, 1300, 1600, 0, 1),
        Connection(2, 0, 2, 1000, 1300, 1, 0),
        Connection(3, 2, 3, 1300, 1600, 1, 1),
    ]
    return TransitNetwork(stops, conns, WalkingGraph(4))


def cycle_network() -> TransitNetwork:
    """A loop line 0 -> 1 -> 2 -> 1 -> 3 where alighting at 1 early equals staying aboard.

    Trip 0 runs 0 -> 1 -> 2 -> 1 -> 3.  Trip 1 leaves stop 1 for 3 at the
    same time trip 0 does, so riding the loop and changing at the first
    visit of stop 1 give equal PAT without transfer penalty.  Under a
    stochastic model some passengers ride the loop, visiting stop 1 twice.
    """
    stops = [Stop(i, i) for i in range(4)]
    conns = [
        Connection(0, 0, 1, 1000, 1100, 0, 0),
        Connection(1, 1, 2, 1100, 1200, 0, 1),
        Connection(2, 2, 1, 1200, 1300, 0, 2),
        Connection(3, 1, 3, 1300, 1400, 0, 3),
        Connection(4, 1, 3, 1300, 1400, 1, 0),
    ]
    return TransitNetwork(stops, conns, WalkingGraph(4))
