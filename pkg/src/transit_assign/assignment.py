"""Passenger-group simulation for all demand with a common destination.

For each destination the PAT profiles are computed once; then one group of
``multiplier`` passengers per demand entry is placed at its origin and moved
through the connections in departure order.  At every decision a group is
split into floored proportional shares, and the few passengers lost to
rounding are drawn at random from the entry's own generator.
"""
from __future__ import annotations

import hashlib
import logging
import math
import os
import random
import time
from bisect import bisect_right
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .choice import ModelConfig, choose
from .graph import BucketIndex, DistanceList, distance_list
from .journey import JourneyRecord, Ride, Transfer, Walk, connections_of, remove_cycles
from .network import INF, TransitNetwork
from .profiles import FixedParams, PenaltyParams, Profiles, compute_profiles
from .shortcuts import ShortcutGraph

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DemandEntry:
    id: str
    origin: int
    destination: int
    dep_time: int


@dataclass(frozen=True)
class EngineParams:
    penalties: PenaltyParams = field(default_factory=PenaltyParams)
    multiplier: int = 100
    model: ModelConfig = field(default_factory=ModelConfig)
    seed: int = 0
    cycle_removal: bool = True
    threads: Optional[int] = None

    def __post_init__(self):
        if self.multiplier < 1:
            raise ValueError("passenger multiplier must be a positive integer")


@dataclass
class AssignmentResult:
    """Utilization in group units plus the journey distribution per demand entry.

    ``utilization[conn_id] / multiplier`` is the expected passenger count
    recorded during the simulation; ``cycle_free_utilization`` recounts it
    from the journeys after cycle removal.
    """

    multiplier: int
    utilization: np.ndarray
    journeys: dict[str, list[tuple[JourneyRecord, int]]]
    unassigned: list[str]
    departures: dict[str, int] = field(default_factory=dict)
    cycle_free_utilization: Optional[np.ndarray] = None
    timings: dict[str, float] = field(default_factory=dict)

    def expected_passengers(self, conn_id: int) -> float:
        return int(self.utilization[conn_id]) / self.multiplier

    def probabilities(self, demand_id: str) -> list[tuple[JourneyRecord, float]]:
        return [(j, units / self.multiplier) for j, units in self.journeys.get(demand_id, [])]


class MissingArtifacts(RuntimeError):
    pass


# ------------------------------------------------------------------------ groups


class PassengerGroup:
    __slots__ = ("entry", "size", "ready", "legs", "rng")

    def __init__(self, entry: int, size: int, rng: random.Random, legs=None, ready: int = 0):
        self.entry = entry
        self.size = size
        self.rng = rng
        self.legs = legs  # linked list (leg, parent)
        self.ready = ready

    def extended(self, size: int, leg) -> "PassengerGroup":
        return PassengerGroup(self.entry, size, self.rng, (leg, self.legs), self.ready)

    def journey(self) -> JourneyRecord:
        out = []
        node = self.legs
        while node is not None:
            out.append(node[0])
            node = node[1]
        return tuple(reversed(out))


def split_sizes(size: int, probs: Sequence[float], rng: random.Random) -> list[int]:
    """Floored shares ``floor(size * p_i)`` plus leftovers sampled one by one."""
    sizes = [math.floor(size * p) for p in probs]
    left = size - sum(sizes)
    if left:
        cum = []
        acc = 0.0
        last_positive = 0
        for i, p in enumerate(probs):
            acc += p
            cum.append(acc)
            if p > 0:
                last_positive = i
        for _ in range(left):
            i = bisect_right(cum, rng.random() * acc)
            if i >= len(probs) or probs[i] <= 0:
                i = last_positive
            sizes[i] += 1
    return sizes


def split_group(group: PassengerGroup, probs: Sequence[float], rng: random.Random) -> list[tuple[int, PassengerGroup]]:
    """Non-empty child groups tagged with the option index they follow."""
    out = []
    for i, s in enumerate(split_sizes(group.size, probs, rng)):
        if s:
            out.append((i, PassengerGroup(group.entry, s, group.rng, group.legs, group.ready)))
    return out


def entry_rng(seed: int, demand_id: str) -> random.Random:
    digest = hashlib.blake2b(f"{seed}\x00{demand_id}".encode(), digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "little"))


# ------------------------------------------------------------- initial transfers


class InitialOption(NamedTuple):
    pat: int
    stop: int  # -1 for walking straight to the destination
    dist: int
    ready: int


def evaluate_initial_transfers(
    entry: DemandEntry,
    dlist: DistanceList,
    profiles: Profiles,
    params: PenaltyParams | FixedParams,
    direct_dist: int = INF,
) -> list[InitialOption]:
    """Choice set of first stops, stopping once walking alone is too costly.

    The list is sorted by distance, so ``departure + perceived walk`` is a
    lower bound on every remaining option; once it exceeds the best PAT by
    more than the delay tolerance no later stop can get a positive gain.
    """
    fp = params if isinstance(params, FixedParams) else params.fixed()
    t0 = entry.dep_time
    buf = profiles.net.buffer
    options: list[InitialOption] = []
    best = INF
    if direct_dist < INF:
        best = t0 * 1000 + (1000 + fp.walk_milli) * direct_dist
        options.append(InitialOption(best, -1, direct_dist, t0 + direct_dist))
    for v, dist in dlist:
        if best < INF and (t0 + dist) * 1000 + fp.walk_milli * dist > best + fp.delta_ms:
            break
        b = int(buf[v])
        ready = t0 + dist + b
        e = profiles.evaluate(v, ready)
        if e >= INF:
            continue
        pat = e + fp.walk_milli * dist + fp.buf_milli * b
        options.append(InitialOption(pat, v, dist, ready))
        if pat < best:
            best = pat
    return options


# ------------------------------------------------------------------------ engine


class _Context:
    def __init__(self, net, shortcuts, buckets, params: EngineParams, entries, dlists, fwd_spaces):
        self.net = net
        self.shortcuts = shortcuts
        self.buckets = buckets
        self.params = params
        self.fp = params.penalties.fixed()
        self.delta = params.penalties.delay_tolerance
        self.model = params.model
        self.entries = entries
        self.dlists = dlists
        self.fwd_spaces = fwd_spaces
        self.stop_vertex = net.stop_vertex.tolist()
        self.buffer = net.buffer.tolist()
        self.dep_stop = net.dep_stop.tolist()
        self.arr_stop = net.arr_stop.tolist()
        self.dep_time = net.dep_time.tolist()
        self.arr_time = net.arr_time.tolist()
        self.trip = net.trip.tolist()
        self.conn_ids = net.conn_ids.tolist()
        self.sc_out = [shortcuts.outgoing(s) for s in range(net.num_stops)]


class _BatchResult(NamedTuple):
    utilization: dict
    finished: list  # (entry index, journey, units)
    unassigned: list
    pat_time: float
    assign_time: float


def _decide(pats_ms: Sequence[int], ctx: _Context) -> list[float]:
    return choose([p / 1000 for p in pats_ms], ctx.delta, ctx.model)


def _run_destination(ctx: _Context, dest: int, entry_ids: list[int]) -> _BatchResult:
    t_start = time.perf_counter()
    net = ctx.net
    fp = ctx.fp
    fd = ctx.buckets.many_to_one(dest)
    prof = compute_profiles(net, ctx.shortcuts, fd, fp)
    t_pat = time.perf_counter()
    fd_list = fd.tolist()
    bwd = ctx.buckets.ch.backward_search(dest)

    waiting: dict[int, list[PassengerGroup]] = defaultdict(list)
    riding: dict[int, list[PassengerGroup]] = {}
    finished: list[tuple[int, JourneyRecord, int]] = []
    unassigned: list[int] = []
    util: dict[int, int] = defaultdict(int)
    mul = ctx.params.multiplier

    for ei in entry_ids:
        entry = ctx.entries[ei]
        fv, fdists = ctx.fwd_spaces[entry.origin]
        reach = bwd[fv]
        ok = reach < INF
        direct = int((reach[ok] + fdists[ok]).min()) if ok.any() else INF
        options = evaluate_initial_transfers(entry, ctx.dlists[entry.origin], prof, fp, direct)
        if not options:
            unassigned.append(ei)
            continue
        group = PassengerGroup(ei, mul, entry_rng(ctx.params.seed, entry.id))
        probs = _decide([o.pat for o in options], ctx) if len(options) > 1 else [1.0]
        for i, part in split_group(group, probs, group.rng):
            opt = options[i]
            if opt.stop < 0:
                finished.append((ei, (Walk(entry.origin, dest, opt.dist),), part.size))
                continue
            child = part.extended(part.size, Walk(entry.origin, ctx.stop_vertex[opt.stop], opt.dist))
            child.ready = opt.ready
            waiting[opt.stop].append(child)

    wait_milli = fp.wait_milli
    pat_trip = prof.pat_trip.tolist()
    pat_transfer = prof.pat_transfer.tolist()
    pat_target = prof.pat_target.tolist()
    best = prof.best.tolist()
    wait_adj = prof.wait_adj.tolist()

    for pos in range(net.num_connections):
        v = ctx.dep_stop[pos]
        trip = ctx.trip[pos]
        here = waiting.get(v)
        if here:
            dep = ctx.dep_time[pos]
            board_adj = best[pos] + wait_milli * dep if best[pos] < INF else INF
            if board_adj < INF:
                stay: list[PassengerGroup] = []
                aboard = riding.setdefault(trip, [])
                probs = None
                if wait_adj[pos] >= INF:
                    probs = [1.0, 0.0]
                for g in here:
                    if g.ready > dep:
                        stay.append(g)
                        continue
                    if probs is None:
                        probs = _decide([board_adj, wait_adj[pos]], ctx)
                    for i, part in split_group(g, probs, g.rng):
                        (aboard if i == 0 else stay).append(part)
                if stay:
                    waiting[v] = stay
                else:
                    del waiting[v]

        groups = riding.get(trip)
        if not groups:
            continue
        cid = ctx.conn_ids[pos]
        ride = Ride(cid)
        units = 0
        for g in groups:
            units += g.size
            g.legs = (ride, g.legs)
        util[pos] += units

        stay_pat = pat_trip[pos]
        leave_pat = min(pat_transfer[pos], pat_target[pos])
        if stay_pat < INF and leave_pat >= INF:
            continue
        if stay_pat >= INF:
            leaving = groups
            riding[trip] = []
        else:
            probs = _decide([stay_pat, leave_pat], ctx)
            seated, leaving = [], []
            for g in groups:
                for i, part in split_group(g, probs, g.rng):
                    (seated if i == 0 else leaving).append(part)
            riding[trip] = seated
        if not leaving:
            continue

        a = ctx.arr_stop[pos]
        ta = ctx.arr_time[pos]
        tgt, trf = pat_target[pos], pat_transfer[pos]
        if trf >= INF:
            walking_off, transferring = leaving, []
        elif tgt >= INF:
            walking_off, transferring = [], leaving
        else:
            probs = _decide([tgt, trf], ctx)
            walking_off, transferring = [], []
            for g in leaving:
                for i, part in split_group(g, probs, g.rng):
                    (walking_off if i == 0 else transferring).append(part)
        if walking_off:
            final = Walk(ctx.stop_vertex[a], dest, fd_list[a])
            for g in walking_off:
                finished.append((g.entry, PassengerGroup.journey(g.extended(g.size, final)), g.size))
        if transferring:
            targets = [(a, 0)] + ctx.sc_out[a]
            opts = []
            for w, t in targets:
                b = ctx.buffer[w]
                r = ta + t + b
                e = prof.evaluate(w, r)
                if e < INF:
                    opts.append((e + fp.walk_milli * t + fp.buf_milli * b + fp.trans_ms, w, t, r))
            probs = _decide([o[0] for o in opts], ctx) if len(opts) > 1 else [1.0]
            for g in transferring:
                for i, part in split_group(g, probs, g.rng):
                    _, w, t, r = opts[i]
                    child = part.extended(part.size, Transfer(a, w, t))
                    child.ready = r
                    waiting[w].append(child)

    stranded = sum(g.size for gs in waiting.values() for g in gs) + sum(
        g.size for gs in riding.values() for g in gs
    )
    if stranded:
        raise RuntimeError(f"{stranded} passenger units left in the network for destination {dest}")
    t_end = time.perf_counter()
    return _BatchResult(util, finished, unassigned, t_pat - t_start, t_end - t_pat)


def run_assignment(
    net: TransitNetwork,
    shortcuts: Optional[ShortcutGraph],
    buckets: Optional[BucketIndex],
    demand: Sequence[DemandEntry],
    params: EngineParams = EngineParams(),
) -> AssignmentResult:
    """Assign every demand entry to a distribution over journeys."""
    if shortcuts is None or buckets is None:
        raise MissingArtifacts("shortcut graph and bucket index are required; run preprocessing first")
    timings = {"setup": 0.0, "pat": 0.0, "assignment": 0.0, "cycle": 0.0}
    t0 = time.perf_counter()
    nverts = buckets.ch.num_vertices
    seen = set()
    for e in demand:
        if e.id in seen:
            raise ValueError(f"duplicate demand id {e.id!r}")
        seen.add(e.id)
        for v in (e.origin, e.destination):
            if not 0 <= v < nverts:
                raise ValueError(f"demand {e.id!r} references unknown vertex {v}")

    entries = sorted(demand, key=lambda e: (e.destination, e.origin, e.dep_time, e.id))
    origins = sorted({e.origin for e in entries})
    dlists = {o: distance_list(buckets, o) for o in origins}
    fwd_spaces = {}
    for o in origins:
        space = buckets.ch.forward_search(o)
        hit = np.nonzero(space < INF)[0]
        fwd_spaces[o] = (hit, space[hit])
    by_dest: dict[int, list[int]] = defaultdict(list)
    for i, e in enumerate(entries):
        by_dest[e.destination].append(i)
    ctx = _Context(net, shortcuts, buckets, params, entries, dlists, fwd_spaces)
    timings["setup"] = time.perf_counter() - t0

    dests = sorted(by_dest)
    threads = params.threads or os.cpu_count() or 1
    if threads == 1 or len(dests) <= 1:
        batches = [_run_destination(ctx, d, by_dest[d]) for d in dests]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(lambda d: _run_destination(ctx, d, by_dest[d]), dests))

    util_pos = np.zeros(net.num_connections, dtype=np.int64)
    raw: dict[int, list[tuple[JourneyRecord, int]]] = defaultdict(list)
    unassigned_idx: list[int] = []
    for b in batches:
        for pos, units in b.utilization.items():
            util_pos[pos] += units
        for ei, journey, units in b.finished:
            raw[ei].append((journey, units))
        unassigned_idx.extend(b.unassigned)
        timings["pat"] += b.pat_time
        timings["assignment"] += b.assign_time

    utilization = np.zeros(net.num_connections, dtype=np.int64)
    utilization[net.conn_ids] = util_pos

    t_cycle = time.perf_counter()
    journeys: dict[str, list[tuple[JourneyRecord, int]]] = {}
    for ei in sorted(raw):
        items = raw[ei]
        if params.cycle_removal:
            merged: dict[JourneyRecord, int] = {}
            for j, units in items:
                j = remove_cycles(j, net)
                merged[j] = merged.get(j, 0) + units
            items = list(merged.items())
        journeys[entries[ei].id] = items
    cycle_free = np.zeros(net.num_connections, dtype=np.int64)
    for items in journeys.values():
        for j, units in items:
            for cid in connections_of(j):
                cycle_free[cid] += units
    timings["cycle"] = time.perf_counter() - t_cycle

    return AssignmentResult(
        multiplier=params.multiplier,
        utilization=utilization,
        journeys=journeys,
        unassigned=sorted(entries[i].id for i in unassigned_idx),
        departures={e.id: e.dep_time for e in entries},
        cycle_free_utilization=cycle_free,
        timings=timings,
    )
