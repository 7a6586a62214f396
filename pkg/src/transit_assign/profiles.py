"""Perceived-arrival-time (PAT) profiles for one destination.

PATs are integers in milliseconds.  Penalty weights are held as integer
per-mille factors so that products with whole seconds stay exact.
"""
from __future__ import annotations

import csv
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .journey import JourneyRecord, replay
from .network import INF, TransitNetwork
from .shortcuts import ShortcutGraph

MAX_WEIGHT = 1_000_000


def _to_milli(value: float, name: str) -> int:
    if value < 0:
        raise ValueError(f"{name} must be non-negative, got {value}")
    if value > MAX_WEIGHT:
        raise ValueError(f"{name} too large: {value}")
    milli = Fraction(str(value)) * 1000
    if milli.denominator != 1:
        raise ValueError(f"{name}={value} is not representable with millisecond resolution")
    return int(milli)


@dataclass(frozen=True)
class PenaltyParams:
    """Penalty weights.

    ``transfer_penalty`` and ``delay_tolerance`` are in seconds; the other
    three are dimensionless multipliers on waiting, walking and buffer time.
    """

    transfer_penalty: float = 300.0
    wait_weight: float = 0.5
    walk_weight: float = 2.0
    buffer_weight: float = 0.0
    delay_tolerance: float = 300.0

    def __post_init__(self):
        # validates representability
        self.fixed()

    def fixed(self) -> "FixedParams":
        return FixedParams(
            trans_ms=_to_milli(self.transfer_penalty, "transfer_penalty"),
            wait_milli=_to_milli(self.wait_weight, "wait_weight"),
            walk_milli=_to_milli(self.walk_weight, "walk_weight"),
            buf_milli=_to_milli(self.buffer_weight, "buffer_weight"),
            delta_ms=_to_milli(self.delay_tolerance, "delay_tolerance"),
        )


@dataclass(frozen=True)
class FixedParams:
    trans_ms: int
    wait_milli: int
    walk_milli: int
    buf_milli: int
    delta_ms: int


def walk_pat(seconds: int, fp: FixedParams) -> int:
    """Perceived duration of a walk: the time itself plus its penalty."""
    return (1000 + fp.walk_milli) * seconds


@dataclass
class PATProfile:
    """Breakpoints of one stop, ascending by departure.

    ``suffix_min[i]`` is the minimum of ``value + wait * dep`` over
    breakpoints ``i..``; ``walk_only`` is the perceived duration of walking
    straight to the destination (INF when not offered).
    """

    dep: list[int]
    suffix_min: list[int]
    walk_only: int = INF

    @classmethod
    def from_breakpoints(cls, points: Sequence[tuple[int, int]], wait_milli: int, walk_only: int = INF):
        pts = sorted(points)
        dep = [d for d, _ in pts]
        adj = [v + wait_milli * d for d, v in pts]
        for i in range(len(adj) - 2, -1, -1):
            adj[i] = min(adj[i], adj[i + 1])
        return cls(dep, adj, walk_only)

    def __len__(self) -> int:
        return len(self.dep)


def evaluate_profile(profile: PATProfile, ready_time: int, params: PenaltyParams | FixedParams) -> int:
    """Minimum PAT when ready to board at ``ready_time``; INF if nothing is left."""
    wait = params.wait_milli if isinstance(params, FixedParams) else params.fixed().wait_milli
    best = INF
    if profile.walk_only < INF:
        best = ready_time * 1000 + profile.walk_only
    i = bisect_right(profile.dep, ready_time - 1)
    if i < len(profile.dep):
        best = min(best, profile.suffix_min[i] - wait * ready_time)
    return best


@dataclass(frozen=True)
class ConnectionLabels:
    trip: int
    transfer: int
    target: int

    @property
    def best(self) -> int:
        return min(self.trip, self.transfer, self.target)


class Profiles:
    """Result of the backward scan for one destination.

    Arrays are indexed by sorted connection position.  Per-stop profiles are
    stored as kept breakpoints in scan order: departure non-increasing and
    adjusted value (``PAT + wait * departure``) strictly decreasing.
    """

    def __init__(self, net: TransitNetwork, fp: FixedParams, final_dist: np.ndarray, scan_out, offsets):
        self.net = net
        self.fp = fp
        self.final_dist = final_dist
        (self.pat_trip, self.pat_transfer, self.pat_target, self.wait_adj,
         self._pdep, self._padj, self._pcnt) = scan_out
        self._offsets = offsets
        self.best = np.minimum(np.minimum(self.pat_trip, self.pat_transfer), self.pat_target)
        self._cache: dict[int, tuple[list[int], list[int]]] = {}

    def labels(self, pos: int) -> ConnectionLabels:
        return ConnectionLabels(int(self.pat_trip[pos]), int(self.pat_transfer[pos]), int(self.pat_target[pos]))

    def _stop(self, stop: int) -> tuple[list[int], list[int]]:
        got = self._cache.get(stop)
        if got is None:
            lo = int(self._offsets[stop])
            hi = lo + int(self._pcnt[stop])
            got = ((-self._pdep[lo:hi]).tolist(), self._padj[lo:hi].tolist())
            self._cache[stop] = got
        return got

    def evaluate(self, stop: int, ready_time: int) -> int:
        negdep, adj = self._stop(stop)
        i = bisect_right(negdep, -ready_time)
        if i == 0:
            return INF
        return adj[i - 1] - self.fp.wait_milli * ready_time

    def profile(self, stop: int) -> PATProfile:
        negdep, adj = self._stop(stop)
        return PATProfile([-d for d in reversed(negdep)], list(reversed(adj)))

    def breakpoints(self, stop: int) -> list[tuple[int, int]]:
        negdep, adj = self._stop(stop)
        w = self.fp.wait_milli
        return [(-nd, a + w * nd) for nd, a in zip(reversed(negdep), reversed(adj))]

    def write_csv(self, path: Path) -> None:
        """Debug dump ``stop,dep_time,pat_millis``."""
        with open(path, "w", newline="") as fh:
            fh.write("#transit-assign v1\n")
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["stop", "dep_time", "pat_millis"])
            for s in range(self.net.num_stops):
                for dep, val in self.breakpoints(s):
                    out.writerow([s, dep, val])


def compute_profiles(
    net: TransitNetwork,
    shortcuts: ShortcutGraph,
    final_dist: np.ndarray,
    params: PenaltyParams | FixedParams,
    backend=None,
) -> Profiles:
    """Scan connections by decreasing departure and build all profiles.

    ``final_dist[s]`` is the walking distance from stop ``s`` to the
    destination (INF if there is none).
    """
    fp = params if isinstance(params, FixedParams) else params.fixed()
    impl = backend or kernels
    counts = np.bincount(net.dep_stop, minlength=net.num_stops).astype(np.int64)
    offsets = np.zeros(net.num_stops + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    sc_indptr, sc_to, sc_w = shortcuts.csr()
    fd = np.ascontiguousarray(final_dist, dtype=np.int64)
    out = impl.profile_scan(
        net.dep_stop, net.arr_stop, net.dep_time, net.arr_time, net.next_pos, net.buffer,
        sc_indptr, sc_to, sc_w, fd, offsets,
        fp.trans_ms, fp.wait_milli, fp.walk_milli, fp.buf_milli,
    )
    return Profiles(net, fp, fd, out, offsets)


def pat_of_journey(
    journey: JourneyRecord, net: TransitNetwork, departure: int, params: PenaltyParams | FixedParams
) -> int:
    """PAT in milliseconds: arrival plus transfer, waiting, walking and buffer penalties."""
    fp = params if isinstance(params, FixedParams) else params.fixed()
    t = replay(journey, net, departure)
    return (
        t.arrival * 1000
        + fp.trans_ms * t.transfers
        + fp.wait_milli * t.waiting
        + fp.walk_milli * t.walking
        + fp.buf_milli * t.buffer
    )


def direct_walk_pat(departure: int, dist: int, fp: FixedParams) -> int:
    if dist >= INF:
        return INF
    return departure * 1000 + walk_pat(dist, fp)

