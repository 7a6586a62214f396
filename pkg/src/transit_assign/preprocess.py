"""Preprocessing artifacts and their on-disk cache."""
from __future__ import annotations

import hashlib
import logging
import pickle
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .graph import BucketIndex, ContractionHierarchy, CoreGraph, build_ch, build_core
from .network import TransitNetwork, integrate_zones
from .shortcuts import DEFAULT_MAX_TRANSFER_TIME, ShortcutGraph, compute_shortcuts, full_transfer_graph

log = logging.getLogger(__name__)

CACHE_MAGIC = b"TRANSIT-ASSIGN-CACHE\x00v1\n"
ARTIFACT_NAMES = ("ch", "core", "shortcuts", "buckets")


@dataclass
class Artifacts:
    net: TransitNetwork  # with zones integrated
    ch: ContractionHierarchy
    core: CoreGraph
    shortcuts: ShortcutGraph
    buckets: BucketIndex
    timings: dict[str, float] = field(default_factory=dict)


def preprocess(
    net: TransitNetwork,
    avg_degree_limit: float = 16,
    max_transfer_time: Optional[int] = DEFAULT_MAX_TRANSFER_TIME,
) -> Artifacts:
    timings = {}
    t = time.perf_counter()
    net = integrate_zones(net)
    timings["zones"] = time.perf_counter() - t

    t = time.perf_counter()
    ch = build_ch(net.walking_graph)
    timings["ch"] = time.perf_counter() - t

    t = time.perf_counter()
    core = build_core(net.walking_graph, net.stop_vertex.tolist(), avg_degree_limit)
    timings["core"] = time.perf_counter() - t

    t = time.perf_counter()
    shortcuts = compute_shortcuts(net, core, max_transfer_time)
    timings["shortcuts"] = time.perf_counter() - t

    t = time.perf_counter()
    buckets = BucketIndex(ch, net.stop_vertex.tolist())
    timings["buckets"] = time.perf_counter() - t
    return Artifacts(net, ch, core, shortcuts, buckets, timings)


def sufficiency_check(art: Artifacts) -> list[str]:
    """Compare one-hop transfer options against the complete stop-to-stop graph.

    Every walk ``a -> b`` that could connect an arrival at ``a`` to a later
    departure at ``b`` must either be a shortcut or be matched in length by
    a shortcut; returns human-readable problems (empty when sufficient).
    """
    net = art.net
    have = {(a, b): t for a, b, t in art.shortcuts.edges}
    problems = []
    if net.num_connections == 0:
        return problems
    earliest = {}
    latest = {}
    for c in net.connections:
        earliest[c.arr_stop] = min(earliest.get(c.arr_stop, c.arr_time), c.arr_time)
        latest[c.dep_stop] = max(latest.get(c.dep_stop, c.dep_time), c.dep_time)
    for a, b, d in full_transfer_graph(net).edges:
        if a not in earliest or b not in latest:
            continue
        if earliest[a] + d + int(net.buffer[b]) > latest[b]:
            continue
        if d > DEFAULT_MAX_TRANSFER_TIME:
            continue
        got = have.get((a, b))
        if got != d:
            problems.append(f"transfer {a}->{b} of {d}s missing (have {got})")
    return problems


# ------------------------------------------------------------------------- cache


def network_digest(net: TransitNetwork, **knobs) -> str:
    h = hashlib.sha256()
    for s in net.stops:
        h.update(repr((s.id, s.vertex_id, s.buffer_time)).encode())
    for c in net.connections:
        h.update(repr((c.id, c.dep_stop, c.arr_stop, c.dep_time, c.arr_time, c.trip_id, c.index_in_trip)).encode())
    h.update(repr((net.walking_graph.num_vertices, net.walking_graph.edges)).encode())
    for z in net.zones:
        h.update(repr((z.id, tuple(z.outgoing), tuple(z.incoming))).encode())
    h.update(repr(sorted(knobs.items())).encode())
    return h.hexdigest()


class CacheError(RuntimeError):
    pass


def cache_path(cache_dir: Path, digest: str) -> Path:
    return Path(cache_dir) / f"artifacts-{digest[:32]}.bin"


def save_artifacts(art: Artifacts, path: Path, digest: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = pickle.dumps({name: getattr(art, name) for name in ARTIFACT_NAMES} | {"net": art.net},
                           protocol=pickle.HIGHEST_PROTOCOL)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(digest.encode() + b"\n")
        fh.write(payload)
    tmp.replace(path)


def load_artifacts(path: Path, digest: str) -> Artifacts:
    """Read a cache file; ``CacheError`` when the header or digest does not match."""
    with open(path, "rb") as fh:
        if fh.read(len(CACHE_MAGIC)) != CACHE_MAGIC:
            raise CacheError(f"{path}: bad cache header")
        stored = fh.readline().rstrip(b"\n").decode(errors="replace")
        if stored != digest:
            raise CacheError(f"{path}: cache built for different inputs")
        try:
            data = pickle.loads(fh.read())
        except Exception as exc:  # truncated or garbled payload
            raise CacheError(f"{path}: unreadable cache payload ({exc})") from exc
    return Artifacts(data["net"], data["ch"], data["core"], data["shortcuts"], data["buckets"])


def cached_preprocess(
    net: TransitNetwork,
    cache_dir: Path,
    avg_degree_limit: float = 16,
    max_transfer_time: Optional[int] = DEFAULT_MAX_TRANSFER_TIME,
    rebuild: bool = True,
) -> tuple[Artifacts, bool]:
    """Return artifacts and whether they came from the cache.

    A damaged cache file is rebuilt with a warning.  With ``rebuild=False``
    a missing cache raises ``CacheError`` instead.
    """
    digest = network_digest(net, avg_degree_limit=avg_degree_limit, max_transfer_time=max_transfer_time)
    path = cache_path(cache_dir, digest)
    if path.exists():
        try:
            return load_artifacts(path, digest), True
        except CacheError as exc:
            if not rebuild:
                raise
            log.warning("%s; rebuilding", exc)
    elif not rebuild:
        raise CacheError(f"no preprocessing artifacts in {cache_dir}; run `transit-assign preprocess` first")
    art = preprocess(net, avg_degree_limit, max_transfer_time)
    save_artifacts(art, path, digest)
    art.shortcuts.write_csv(path.with_suffix(".shortcuts.csv"))
    return art, False
