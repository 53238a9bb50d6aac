# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph kernels: all-pairs BFS and sphere-size tables."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def all_pairs_bfs(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                  Py_ssize_t n, cnp.int64_t unreachable):
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out = np.full((n, n), unreachable, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] dist = out
    cdef cnp.int64_t[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    cdef Py_ssize_t src, head, tail, v, w, k
    cdef cnp.int64_t dv
    for src in range(n):
        dist[src, src] = 0
        queue[0] = src
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            dv = dist[src, v] + 1
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[src, w] == unreachable:
                    dist[src, w] = dv
                    queue[tail] = w
                    tail += 1
    return out


def sphere_counts(const cnp.int64_t[:, ::1] dist, Py_ssize_t max_r):
    cdef Py_ssize_t n = dist.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out = np.zeros((n, max_r + 1), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] counts = out
    cdef Py_ssize_t i, j
    cdef cnp.int64_t d
    for i in range(n):
        for j in range(n):
            d = dist[i, j]
            if 0 <= d <= max_r:
                counts[i, d] += 1
    return out
