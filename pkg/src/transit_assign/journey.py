"""Journey records and cycle removal."""
from __future__ import annotations

from typing import NamedTuple, Optional, Union

from .network import TransitNetwork


class Walk(NamedTuple):
    """Initial, final or direct walk between arbitrary vertices."""

    origin: int
    target: int
    seconds: int


class Ride(NamedTuple):
    connection: int  # connection id


class Transfer(NamedTuple):
    """Walk between two stops after leaving one vehicle and before boarding the next."""

    from_stop: int
    to_stop: int
    seconds: int


Leg = Union[Walk, Ride, Transfer]
JourneyRecord = tuple  # tuple[Leg, ...]


def encode(journey: JourneyRecord) -> str:
    tokens = []
    for leg in journey:
        if isinstance(leg, Ride):
            tokens.append(f"C{leg.connection}")
        elif isinstance(leg, Transfer):
            tokens.append(f"T{leg.from_stop}>{leg.to_stop}:{leg.seconds}")
        else:
            tokens.append(f"W{leg.origin}>{leg.target}:{leg.seconds}")
    return "|".join(tokens)


def decode(text: str) -> JourneyRecord:
    legs: list[Leg] = []
    for tok in text.split("|"):
        kind, body = tok[0], tok[1:]
        if kind == "C":
            legs.append(Ride(int(body)))
            continue
        ends, secs = body.split(":")
        a, b = ends.split(">")
        legs.append((Transfer if kind == "T" else Walk)(int(a), int(b), int(secs)))
    return tuple(legs)


def connections_of(journey: JourneyRecord) -> list[int]:
    return [leg.connection for leg in journey if isinstance(leg, Ride)]


class JourneyTimes(NamedTuple):
    departure: int
    arrival: int
    walking: int
    in_vehicle: int
    waiting: int
    buffer: int
    transfers: int
    rides: int


class InfeasibleJourney(ValueError):
    pass


def replay(journey: JourneyRecord, net: TransitNetwork, departure: int) -> JourneyTimes:
    """Follow ``journey`` from ``departure`` and account for where the time went.

    Raises ``InfeasibleJourney`` if a vehicle is boarded before the
    passenger is ready.  Staying seated between consecutive connections of
    one trip needs no buffer time; every other boarding does.
    """
    t = departure
    walking = in_vehicle = waiting = buffer = transfers = rides = 0
    prev: Optional[object] = None  # previous Connection while seated
    boarded_before = False
    for leg in journey:
        if isinstance(leg, Ride):
            c = net.connection(leg.connection)
            if prev is not None and net.follows_in_trip(prev, c):
                waiting_here = c.dep_time - t
                if waiting_here < 0:
                    raise InfeasibleJourney(f"connection {c.id} departs before the previous one arrives")
                in_vehicle += waiting_here  # dwell time aboard
            else:
                if prev is not None:
                    raise InfeasibleJourney(f"connection {c.id} does not continue the current trip")
                buf = int(net.buffer[c.dep_stop])
                ready = t + buf
                if c.dep_time < ready:
                    raise InfeasibleJourney(f"connection {c.id} departs at {c.dep_time}, ready only at {ready}")
                buffer += buf
                waiting += c.dep_time - ready
                if boarded_before:
                    transfers += 1
                boarded_before = True
                rides += 1
            in_vehicle += c.arr_time - c.dep_time
            t = c.arr_time
            prev = c
        else:
            walking += leg.seconds
            t += leg.seconds
            prev = None
    return JourneyTimes(departure, t, walking, in_vehicle, waiting, buffer, transfers, rides)


def _visits(journey: JourneyRecord, net: TransitNetwork) -> list[tuple[int, int, int]]:
    """Visits as ``(place, first boundary, last boundary)``.

    Boundary ``k`` sits before leg ``k``.  A zero-length stay (walk or
    transfer from a place to itself) does not separate two visits.
    """
    def start(leg):
        if isinstance(leg, Ride):
            return ("s", net.connection(leg.connection).dep_stop)
        if isinstance(leg, Transfer):
            return ("s", leg.from_stop)
        return ("v", leg.origin)

    def end(leg):
        if isinstance(leg, Ride):
            return ("s", net.connection(leg.connection).arr_stop)
        if isinstance(leg, Transfer):
            return ("s", leg.to_stop)
        return ("v", leg.target)

    def norm(place):
        kind, ident = place
        if kind == "v":
            stops = net.vertex_stops.get(ident)
            if stops and len(stops) == 1:
                return stops[0]
            return ("v", ident)
        return ident

    points: list[list] = []  # [place, first boundary, last boundary]
    for k in range(len(journey) + 1):
        place = norm(end(journey[k - 1]) if k else start(journey[0]))
        if k and points and points[-1][0] == place and not isinstance(journey[k - 1], Ride):
            points[-1][2] = k
            continue
        points.append([place, k, k])
    return [(p[0], p[1], p[2]) for p in points]


def _join(left: Leg, right: Leg, place, net: TransitNetwork) -> list[Leg]:
    if isinstance(left, Ride) and isinstance(right, Ride):
        if net.follows_in_trip(net.connection(left.connection), net.connection(right.connection)):
            return [left, right]
        return [left, Transfer(place, place, 0), right]
    if not isinstance(left, Ride) and not isinstance(right, Ride):
        a = left.origin if isinstance(left, Walk) else left.from_stop
        b = right.target if isinstance(right, Walk) else right.to_stop
        kind = Walk if isinstance(left, Walk) or isinstance(right, Walk) else Transfer
        return [kind(a, b, left.seconds + right.seconds)]
    return [left, right]


def remove_cycles(journey: JourneyRecord, net: TransitNetwork) -> JourneyRecord:
    """Cut out loops until every stop is visited at most once.

    The earliest location visited twice is located; the legs between its
    first and its last visit are removed and the two ends are re-joined.
    """
    legs = list(journey)
    while True:
        visits = _visits(tuple(legs), net)
        first: dict = {}
        last: dict = {}
        for i, (place, _, _) in enumerate(visits):
            first.setdefault(place, i)
            last[place] = i
        repeated = [place for place in first if last[place] != first[place]]
        if not repeated:
            return tuple(legs)
        place = min(repeated, key=lambda p: first[p])
        i, j = first[place], last[place]
        before, after = legs[: visits[i][2]], legs[visits[j][1]:]
        if not before:
            o = legs[0].origin
            before = [Walk(o, o, 0)]
        if not after:
            d = legs[-1].target
            after = [Walk(d, d, 0)]
        stop_id = place if isinstance(place, int) else place[1]
        legs = before[:-1] + _join(before[-1], after[0], stop_id, net) + after[1:]
