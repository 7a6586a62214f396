"""Pure-Python kernels; same signatures and results as ``_kernels.pyx``."""
from __future__ import annotations

import heapq
from bisect import bisect_right

import numpy as np

INF = 1 << 60


def dijkstra(indptr, indices, weights, source, bound=INF, targets=None):
    """Single-source distances over a CSR graph, settled up to ``bound``.

    Vertices farther than ``bound`` (or unreachable) are reported as INF.
    With ``targets`` the search stops once all of them are settled.
    """
    n = len(indptr) - 1
    ptr = indptr.tolist()
    idx = indices.tolist()
    wts = weights.tolist()
    dist = [INF] * n
    done = [False] * n
    remaining = -1
    is_target = None
    if targets is not None and len(targets):
        is_target = [False] * n
        for t in targets:
            is_target[int(t)] = True
        remaining = sum(is_target)
    dist[source] = 0
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if is_target is not None and is_target[u]:
            remaining -= 1
            if remaining == 0:
                break
        for k in range(ptr[u], ptr[u + 1]):
            v = idx[k]
            nd = d + wts[k]
            if nd < dist[v] and nd <= bound:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    out = np.asarray(dist, dtype=np.int64)
    if is_target is not None:
        out[~np.asarray(done, dtype=bool)] = INF
    return out


def profile_scan(
    dep_stop, arr_stop, dep_time, arr_time, next_pos, buffer,
    sc_indptr, sc_to, sc_w, final_dist, prof_offset,
    trans_ms, wait_milli, walk_milli, buf_milli,
):
    """Backward connection scan producing per-connection labels and per-stop profiles.

    Returns ``(pat_trip, pat_transfer, pat_target, wait_adj, prof_dep,
    prof_adj, prof_count)``; all PATs are integer milliseconds, INF when
    unreachable.  Profile entries of stop ``s`` live at
    ``prof_offset[s]:prof_offset[s] + prof_count[s]`` in insertion order
    (departure non-increasing, adjusted value strictly decreasing).
    """
    n = len(dep_stop)
    nstops = len(buffer)
    dstop = dep_stop.tolist()
    astop = arr_stop.tolist()
    dtime = dep_time.tolist()
    atime = arr_time.tolist()
    nxt = next_pos.tolist()
    buf = buffer.tolist()
    sptr = sc_indptr.tolist()
    sto = sc_to.tolist()
    sw = sc_w.tolist()
    fdist = final_dist.tolist()

    # per stop: negated departures (ascending) and adjusted values, insertion order
    negdep = [[] for _ in range(nstops)]
    adjs = [[] for _ in range(nstops)]
    pat_trip = [INF] * n
    pat_transfer = [INF] * n
    pat_target = [INF] * n
    wait_adj = [INF] * n
    best = [INF] * n

    def evaluate(w, ready):
        nd = negdep[w]
        i = bisect_right(nd, -ready)
        if i == 0:
            return INF
        return adjs[w][i - 1] - wait_milli * ready

    for i in range(n - 1, -1, -1):
        a = astop[i]
        ta = atime[i]
        fd = fdist[a]
        tgt = INF
        if fd < INF:
            tgt = ta * 1000 + (1000 + walk_milli) * fd
        trip = INF
        j = nxt[i]
        if j >= 0:
            trip = best[j]
        tr = INF
        e = evaluate(a, ta + buf[a])
        if e < INF:
            tr = e + buf_milli * buf[a]
        for k in range(sptr[a], sptr[a + 1]):
            w = sto[k]
            t = sw[k]
            e = evaluate(w, ta + t + buf[w])
            if e < INF:
                cand = e + walk_milli * t + buf_milli * buf[w]
                if cand < tr:
                    tr = cand
        if tr < INF:
            tr += trans_ms
        pat_target[i] = tgt
        pat_trip[i] = trip
        pat_transfer[i] = tr
        m = min(tgt, trip, tr)
        best[i] = m
        v = dstop[i]
        lst = adjs[v]
        if lst:
            wait_adj[i] = lst[-1]
        if m < INF:
            adj = m + wait_milli * dtime[i]
            if not lst or adj < lst[-1]:
                lst.append(adj)
                negdep[v].append(-dtime[i])

    off = prof_offset.tolist()
    prof_dep = np.zeros(n, dtype=np.int64)
    prof_adj = np.zeros(n, dtype=np.int64)
    prof_count = np.zeros(nstops, dtype=np.int64)
    for s in range(nstops):
        k = len(adjs[s])
        prof_count[s] = k
        if k:
            prof_dep[off[s]:off[s] + k] = [-x for x in negdep[s]]
            prof_adj[off[s]:off[s] + k] = adjs[s]
    as_arr = lambda x: np.asarray(x, dtype=np.int64)  # noqa: E731
    return (
        as_arr(pat_trip), as_arr(pat_transfer), as_arr(pat_target), as_arr(wait_adj),
        prof_dep, prof_adj, prof_count,
    )
