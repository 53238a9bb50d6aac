"""Finite undirected graphs and the lattice geometry used by the bounds.

Distances are hop counts computed by breadth-first search from every vertex
and cached as a dense ``int64`` table. Pairs in different components carry
the sentinel :data:`UNREACHABLE`, which is large enough to keep the triangle
inequality meaningful without overflowing on addition.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels

UNREACHABLE = 2**40

SiteSet = tuple[int, ...]


class GraphError(ValueError):
    """Invalid graph description."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    Parameters
    ----------
    n : int
        Number of vertices.
    edges : tuple of (int, int)
        Sorted, duplicate-free pairs with ``i < j``.
    dist : ndarray
        Read-only ``(n, n)`` table of hop distances.
    shape : tuple of int, optional
        Lattice extent for graphs built by :func:`cubic`; vertex indices
        follow ``numpy.ravel_multi_index`` on this shape.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    dist: np.ndarray
    shape: tuple[int, ...] | None = None

    def distance(self, i: int, j: int) -> float:
        d = int(self.dist[i, j])
        return float("inf") if d >= UNREACHABLE else d

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        a.setflags(write=False)
        return a

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        nb: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nb[i].append(j)
            nb[j].append(i)
        return tuple(tuple(sorted(v)) for v in nb)

    @cached_property
    def diameter(self) -> int:
        """Largest finite distance."""
        finite = self.dist[self.dist < UNREACHABLE]
        return int(finite.max()) if finite.size else 0

    @property
    def is_connected(self) -> bool:
        return bool((self.dist < UNREACHABLE).all())

    def site(self, coords: Sequence[int]) -> int:
        """Vertex index of lattice coordinates (cubic graphs only)."""
        if self.shape is None:
            raise GraphError("graph has no lattice shape")
        return int(np.ravel_multi_index(tuple(c % s for c, s in zip(coords, self.shape)), self.shape))


def _csr(n: int, edges: Iterable[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    nb: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        nb[i].append(j)
        nb[j].append(i)
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(v) for v in nb])
    indices = np.fromiter(itertools.chain.from_iterable(sorted(v) for v in nb), dtype=np.int64, count=int(indptr[-1]))
    return indptr, indices


def from_edges(n: int, edges: Iterable[Sequence[int]], shape: tuple[int, ...] | None = None) -> Graph:
    """Build a graph from an edge list; duplicates are merged, self-loops rejected."""
    n = int(n)
    if n < 1:
        raise GraphError(f"vertex count must be >= 1, got {n}")
    clean = set()
    for e in edges:
        if len(e) != 2:
            raise GraphError(f"edge must have two endpoints: {e!r}")
        i, j = int(e[0]), int(e[1])
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge ({i}, {j}) has an endpoint outside 0..{n - 1}")
        if i == j:
            raise GraphError(f"self-loop at vertex {i}")
        clean.add((min(i, j), max(i, j)))
    edge_tuple = tuple(sorted(clean))
    indptr, indices = _csr(n, edge_tuple)
    dist = _kernels.all_pairs_bfs(indptr, indices, n, UNREACHABLE)
    dist.setflags(write=False)
    return Graph(n=n, edges=edge_tuple, dist=dist, shape=shape)


def path(n: int) -> Graph:
    return from_edges(n, [(i, i + 1) for i in range(n - 1)], shape=(n,))


def ring(n: int) -> Graph:
    if n < 3:
        return path(n)
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)], shape=(n,))


def cubic(N: int, D: int, periodic: bool = True) -> Graph:
    """``D``-dimensional cubic lattice with ``N`` sites per side."""
    if N < 1 or D < 1:
        raise GraphError("cubic lattice needs N >= 1 and D >= 1")
    shape = (N,) * D
    edges = []
    for coords in itertools.product(range(N), repeat=D):
        i = int(np.ravel_multi_index(coords, shape))
        for axis in range(D):
            c = list(coords)
            if coords[axis] + 1 < N:
                c[axis] += 1
            elif periodic and N > 1:
                c[axis] = 0
            else:
                continue
            j = int(np.ravel_multi_index(tuple(c), shape))
            if i != j:
                edges.append((i, j))
    return from_edges(N**D, edges, shape=shape)


def build_graph(spec: Mapping) -> Graph:
    """Construct a graph from a JSON-style descriptor.

    ``{"generator": "path"|"ring", "n": ...}``,
    ``{"generator": "cubic", "N": ..., "D": ..., "periodic": true}`` or
    ``{"generator": "edges", "n": ..., "edges": [[i, j], ...]}``.
    """
    kind = spec.get("generator")
    if kind == "path":
        return path(int(spec["n"]))
    if kind == "ring":
        return ring(int(spec["n"]))
    if kind == "cubic":
        return cubic(int(spec["N"]), int(spec["D"]), bool(spec.get("periodic", True)))
    if kind == "edges":
        return from_edges(int(spec["n"]), spec.get("edges", []))
    raise GraphError(f"unknown graph generator {kind!r}")


@dataclass(frozen=True, eq=False)
class DimensionProfile:
    """Sphere-growth data of a finite graph.

    ``sphere_table[i, r]`` is ``|S_r(i)|``, the number of vertices at
    distance exactly ``r`` from ``i``. ``c_D`` is the smallest constant with
    ``|S_r(i)| <= c_D r**(D-1)`` for every ``i`` and ``r >= 1`` on this graph.
    """

    D: int
    c_D: float
    sphere_table: np.ndarray

    def ball_size(self, r: int) -> int:
        """Largest number of sites within distance ``r`` of any vertex."""
        r = min(r, self.sphere_table.shape[1] - 1)
        return int(self.sphere_table[:, : r + 1].sum(axis=1).max())


def dimension_profile(g: Graph, D: int) -> DimensionProfile:
    """Minimal sphere-growth constant for an asserted dimension ``D``.

    The asserted ``D`` is taken as given; a finite graph cannot fix the
    asymptotic dimension of a lattice family.
    """
    if D < 1:
        raise GraphError(f"dimension must be >= 1, got {D}")
    table = _kernels.sphere_counts(np.ascontiguousarray(g.dist), g.diameter)
    table.setflags(write=False)
    if table.shape[1] < 2:
        return DimensionProfile(D=D, c_D=0.0, sphere_table=table)
    r = np.arange(1, table.shape[1], dtype=float)
    ratios = table[:, 1:] / r ** (D - 1)
    return DimensionProfile(D=D, c_D=float(ratios.max()), sphere_table=table)


def as_site_set(members: Iterable[int], n: int) -> SiteSet:
    s = tuple(sorted({int(m) for m in members}))
    if s and not (0 <= s[0] and s[-1] < n):
        raise GraphError(f"site set {s} not inside 0..{n - 1}")
    return s


def boundary_sets(g: Graph, A: Iterable[int], r: int) -> tuple[SiteSet, SiteSet]:
    """Surface ``dA`` of ``A`` and the layer ``dA_r`` of ``A`` within ``r`` of it.

    Returns
    -------
    boundary : tuple of int
        Sites of ``A`` with a neighbor outside ``A``.
    layer : tuple of int
        Sites of ``A`` within distance ``r`` of ``boundary``.
    """
    A = as_site_set(A, g.n)
    if not A:
        raise GraphError("boundary of an empty set is undefined")
    if r < 0:
        raise GraphError("layer thickness must be nonnegative")
    inside = np.zeros(g.n, dtype=bool)
    inside[list(A)] = True
    nb = g.neighbors
    boundary = tuple(i for i in A if any(not inside[j] for j in nb[i]))
    if not boundary:
        return (), ()
    near = (g.dist[list(boundary)] <= r).any(axis=0)
    layer = tuple(int(i) for i in np.flatnonzero(near & inside))
    return boundary, layer


def set_distance(g: Graph, A: Iterable[int], B: Iterable[int]) -> float:
    A = as_site_set(A, g.n)
    B = as_site_set(B, g.n)
    if not A or not B:
        raise GraphError("distance to an empty set is undefined")
    d = int(g.dist[np.ix_(A, B)].min())
    return float("inf") if d >= UNREACHABLE else d
