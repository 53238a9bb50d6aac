"""Pure-Python reference versions of the compiled graph kernels."""
from collections import deque

import numpy as np


def all_pairs_bfs(indptr, indices, n, unreachable):
    dist = np.full((n, n), unreachable, dtype=np.int64)
    indptr = [int(v) for v in indptr]
    indices = [int(v) for v in indices]
    for src in range(n):
        row = [unreachable] * n
        row[src] = 0
        queue = deque([src])
        while queue:
            v = queue.popleft()
            dv = row[v] + 1
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if row[w] == unreachable:
                    row[w] = dv
                    queue.append(w)
        dist[src] = row
    return dist


def sphere_counts(dist, max_r):
    n = dist.shape[0]
    counts = np.zeros((n, max_r + 1), dtype=np.int64)
    for i in range(n):
        row = dist[i]
        row = row[(row >= 0) & (row <= max_r)]
        counts[i] = np.bincount(row, minlength=max_r + 1)[: max_r + 1]
    return counts
