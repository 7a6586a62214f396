# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled kernels: CSR Dijkstra and the backward profile scan."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t
from libcpp.vector cimport vector
from libcpp.queue cimport priority_queue
from libcpp.pair cimport pair

cnp.import_array()

cdef int64_t INF_ = 1 << 60
INF = INF_


def dijkstra(const int64_t[::1] indptr, const int64_t[::1] indices, const int64_t[::1] weights,
             int64_t source, int64_t bound=INF_, targets=None):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out = np.full(n, INF_, dtype=np.int64)
    cdef int64_t[::1] dist = out
    cdef vector[char] done = vector[char](n, 0)
    cdef vector[char] is_target
    cdef int64_t remaining = -1
    cdef int64_t[::1] tv
    cdef Py_ssize_t k
    if targets is not None and len(targets):
        tarr = np.ascontiguousarray(targets, dtype=np.int64)
        tv = tarr
        is_target = vector[char](n, 0)
        remaining = 0
        for k in range(tv.shape[0]):
            if not is_target[tv[k]]:
                is_target[tv[k]] = 1
                remaining += 1
    cdef priority_queue[pair[int64_t, int64_t]] heap
    cdef pair[int64_t, int64_t] top
    cdef int64_t d, u, v, nd
    with nogil:
        dist[source] = 0
        heap.push(pair[int64_t, int64_t](0, source))
        while not heap.empty():
            top = heap.top()
            heap.pop()
            d = -top.first
            u = top.second
            if done[u]:
                continue
            done[u] = 1
            if remaining > 0 and is_target[u]:
                remaining -= 1
                if remaining == 0:
                    break
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                nd = d + weights[k]
                if nd < dist[v] and nd <= bound:
                    dist[v] = nd
                    heap.push(pair[int64_t, int64_t](-nd, v))
    if remaining >= 0:
        for k in range(n):
            if not done[k]:
                dist[k] = INF_
    return out


cdef inline int64_t _evaluate(int64_t w, int64_t ready, const int64_t* off, const int64_t* cnt,
                              const int64_t* pdep, const int64_t* padj, int64_t wait_milli) nogil:
    # entries of w: departure non-increasing; find last index with dep >= ready
    cdef int64_t lo = off[w], hi = off[w] + cnt[w], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if pdep[mid] >= ready:
            lo = mid + 1
        else:
            hi = mid
    if lo == off[w]:
        return INF_
    return padj[lo - 1] - wait_milli * ready


def profile_scan(const int64_t[::1] dep_stop, const int64_t[::1] arr_stop,
                 const int64_t[::1] dep_time, const int64_t[::1] arr_time,
                 const int64_t[::1] next_pos, const int64_t[::1] buffer,
                 const int64_t[::1] sc_indptr, const int64_t[::1] sc_to, const int64_t[::1] sc_w,
                 const int64_t[::1] final_dist, const int64_t[::1] prof_offset,
                 int64_t trans_ms, int64_t wait_milli, int64_t walk_milli, int64_t buf_milli):
    cdef Py_ssize_t n = dep_stop.shape[0]
    cdef Py_ssize_t nstops = buffer.shape[0]
    o_trip = np.full(n, INF_, dtype=np.int64)
    o_transfer = np.full(n, INF_, dtype=np.int64)
    o_target = np.full(n, INF_, dtype=np.int64)
    o_wait = np.full(n, INF_, dtype=np.int64)
    o_pdep = np.zeros(n, dtype=np.int64)
    o_padj = np.zeros(n, dtype=np.int64)
    o_cnt = np.zeros(nstops, dtype=np.int64)
    cdef int64_t[::1] pat_trip = o_trip
    cdef int64_t[::1] pat_transfer = o_transfer
    cdef int64_t[::1] pat_target = o_target
    cdef int64_t[::1] wait_adj = o_wait
    cdef int64_t[::1] pdep = o_pdep
    cdef int64_t[::1] padj = o_padj
    cdef int64_t[::1] cnt = o_cnt
    cdef vector[int64_t] best = vector[int64_t](n, INF_)
    cdef Py_ssize_t i
    cdef int64_t a, ta, fd, tgt, trip, tr, e, cand, m, v, w, t, k, j, adj, last
    cdef const int64_t* offp
    if n == 0:
        return o_trip, o_transfer, o_target, o_wait, o_pdep, o_padj, o_cnt
    offp = &prof_offset[0]
    with nogil:
        for i in range(n - 1, -1, -1):
            a = arr_stop[i]
            ta = arr_time[i]
            fd = final_dist[a]
            tgt = INF_
            if fd < INF_:
                tgt = ta * 1000 + (1000 + walk_milli) * fd
            trip = INF_
            j = next_pos[i]
            if j >= 0:
                trip = best[j]
            tr = INF_
            e = _evaluate(a, ta + buffer[a], offp, &cnt[0], &pdep[0], &padj[0], wait_milli)
            if e < INF_:
                tr = e + buf_milli * buffer[a]
            for k in range(sc_indptr[a], sc_indptr[a + 1]):
                w = sc_to[k]
                t = sc_w[k]
                e = _evaluate(w, ta + t + buffer[w], offp, &cnt[0], &pdep[0], &padj[0], wait_milli)
                if e < INF_:
                    cand = e + walk_milli * t + buf_milli * buffer[w]
                    if cand < tr:
                        tr = cand
            if tr < INF_:
                tr = tr + trans_ms
            pat_target[i] = tgt
            pat_trip[i] = trip
            pat_transfer[i] = tr
            m = tgt
            if trip < m:
                m = trip
            if tr < m:
                m = tr
            best[i] = m
            v = dep_stop[i]
            if cnt[v] > 0:
                last = padj[offp[v] + cnt[v] - 1]
                wait_adj[i] = last
            if m < INF_:
                adj = m + wait_milli * dep_time[i]
                if cnt[v] == 0 or adj < padj[offp[v] + cnt[v] - 1]:
                    pdep[offp[v] + cnt[v]] = dep_time[i]
                    padj[offp[v] + cnt[v]] = adj
                    cnt[v] += 1
    return o_trip, o_transfer, o_target, o_wait, o_pdep, o_padj, o_cnt
