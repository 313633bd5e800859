"""Graphs, rooted trees, random-graph samplers and local statistics."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .offspring import OffspringDistribution
from .rng import stream

DEFAULT_MAX_VERTICES = 10**7


class GraphError(ValueError):
    pass


class TreeSizeError(RuntimeError):
    """A Galton-Watson sample outgrew the configured vertex cap."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Finite simple graph on vertices ``0..n-1``.

    ``x`` holds optional per-vertex monomer weights and ``w`` optional
    per-edge dimer weights aligned with ``edges``.  Edges are stored with the
    smaller endpoint first.
    """

    n: int
    edges: np.ndarray
    x: np.ndarray | None = None
    w: np.ndarray | None = None

    def __post_init__(self):
        n = int(self.n)
        if n < 0:
            raise GraphError("vertex count must be nonnegative")
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if np.any(e[:, 0] == e[:, 1]):
                raise GraphError("self-loops are not allowed")
            if e.min() < 0 or e.max() >= n:
                raise GraphError("edge endpoint out of range")
            e = np.sort(e, axis=1)
            key = e[:, 0] * n + e[:, 1]
            if np.unique(key).size != key.size:
                raise GraphError("duplicate edge")
        e.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", e)
        if self.x is not None:
            x = _weights(self.x, n, "vertex")
            object.__setattr__(self, "x", x)
        if self.w is not None:
            w = _weights(self.w, e.shape[0], "edge")
            object.__setattr__(self, "w", w)

    # -- structure ---------------------------------------------------------
    @property
    def m(self):
        return int(self.edges.shape[0])

    @cached_property
    def _csr(self):
        n, e = self.n, self.edges
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        eid = np.concatenate([np.arange(self.m), np.arange(self.m)])
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return indptr, dst[order].astype(np.int64), eid[order].astype(np.int64)

    @property
    def indptr(self):
        return self._csr[0]

    @property
    def indices(self):
        return self._csr[1]

    @cached_property
    def degrees(self):
        return np.diff(self.indptr)

    def neighbors(self, v):
        p = self.indptr
        return self.indices[p[v] : p[v + 1]]

    @cached_property
    def _edge_lookup(self):
        return {(int(u), int(v)): i for i, (u, v) in enumerate(self.edges)}

    def edge_id(self, u, v):
        key = (min(u, v), max(u, v))
        try:
            return self._edge_lookup[key]
        except KeyError:
            raise GraphError(f"edge {u}-{v} not in graph") from None

    def has_edge(self, u, v):
        return (min(u, v), max(u, v)) in self._edge_lookup

    def vertex_weights(self):
        return np.ones(self.n) if self.x is None else self.x

    def edge_weights(self):
        return np.ones(self.m) if self.w is None else self.w

    @property
    def weighted(self):
        return self.x is not None or self.w is not None

    def induced(self, vertices):
        """Induced subgraph on ``vertices`` (relabelled in the given order)."""
        vertices = np.asarray(vertices, dtype=np.int64)
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[vertices] = np.arange(vertices.size)
        e = self.edges
        keep = (pos[e[:, 0]] >= 0) & (pos[e[:, 1]] >= 0) if e.size else np.zeros(0, bool)
        sub_e = pos[e[keep]] if e.size else np.zeros((0, 2), np.int64)
        return Graph(
            int(vertices.size),
            sub_e,
            None if self.x is None else self.x[vertices],
            None if self.w is None else self.w[keep],
        )

    def components(self):
        """Connected components as a list of vertex arrays."""
        label = np.full(self.n, -1, dtype=np.int64)
        comps = []
        for s in range(self.n):
            if label[s] >= 0:
                continue
            label[s] = len(comps)
            stack, members = [s], [s]
            while stack:
                u = stack.pop()
                for v in self.neighbors(u):
                    if label[v] < 0:
                        label[v] = len(comps)
                        stack.append(int(v))
                        members.append(int(v))
            comps.append(np.array(sorted(members), dtype=np.int64))
        return comps

    def distances_from(self, o):
        dist = np.full(self.n, -1, dtype=np.int64)
        dist[o] = 0
        frontier = [o]
        while frontier:
            nxt = []
            for u in frontier:
                for v in self.neighbors(u):
                    if dist[v] < 0:
                        dist[v] = dist[u] + 1
                        nxt.append(int(v))
            frontier = nxt
        return dist

    def __repr__(self):
        tag = ", weighted" if self.weighted else ""
        return f"Graph(n={self.n}, m={self.m}{tag})"

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_edges(cls, edges, n=None, x=None, w=None):
        edges = list(edges)
        if n is None:
            n = 1 + max((max(e) for e in edges), default=-1)
        return cls(n, np.array(edges, dtype=np.int64).reshape(-1, 2), x, w)

    @classmethod
    def path(cls, n):
        return cls(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def cycle(cls, n):
        return cls(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def complete(cls, n):
        return cls(n, [(i, j) for i in range(n) for j in range(i + 1, n)])

    @classmethod
    def star(cls, k):
        return cls(k + 1, [(0, i) for i in range(1, k + 1)])

    @classmethod
    def empty(cls, n):
        return cls(n, np.zeros((0, 2), dtype=np.int64))


def _weights(values, size, what):
    a = np.asarray(values)
    if a.dtype != object:
        a = a.astype(float)
    if a.shape != (size,):
        raise GraphError(f"{what} weights must have length {size}")
    if not all(v > 0 for v in a.tolist()):
        raise GraphError(f"{what} weights must be strictly positive")
    a.setflags(write=False)
    return a


def disjoint_union(*graphs):
    offset, edges, xs, ws = 0, [], [], []
    weighted = any(g.weighted for g in graphs)
    for g in graphs:
        edges.append(g.edges + offset)
        xs.append(g.vertex_weights())
        ws.append(g.edge_weights())
        offset += g.n
    e = np.concatenate(edges) if edges else np.zeros((0, 2), np.int64)
    if weighted:
        return Graph(offset, e, np.concatenate(xs), np.concatenate(ws))
    return Graph(offset, e)


@dataclass(frozen=True)
class Ball:
    graph: Graph
    center: int
    vertices: np.ndarray = field(repr=False)


def ball(g, o, r):
    """Induced subgraph on vertices within distance ``r`` of ``o``.

    Vertices are relabelled in BFS order, so the centre becomes 0;
    ``vertices`` maps new labels back to ``g``.
    """
    if not 0 <= o < g.n:
        raise GraphError(f"vertex {o} not in graph with {g.n} vertices")
    if r < 0:
        raise GraphError("radius must be nonnegative")
    dist = {int(o): 0}
    order = [int(o)]
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        if dist[u] == r:
            continue
        for v in g.neighbors(u):
            v = int(v)
            if v not in dist:
                dist[v] = dist[u] + 1
                order.append(v)
    verts = np.array(order, dtype=np.int64)
    return Ball(g.induced(verts), 0, verts)


def is_tree(g):
    """Connected with ``n - 1`` edges; the empty graph is not a tree."""
    if g.n == 0 or g.m != g.n - 1:
        return False
    return int((g.distances_from(0) >= 0).sum()) == g.n


def is_forest(g):
    return g.m == g.n - len(g.components()) if g.n else True


class RootedTree:
    """A tree with vertices relabelled in BFS order from the root.

    Internal label 0 is the root and every vertex's parent has a smaller
    label, so ``T(r)`` (the first ``r`` generations) is a prefix of the
    labels.  ``labels`` maps internal labels to the caller's vertex ids.
    """

    def __init__(self, parent, x=None, w_parent=None, labels=None):
        parent = np.asarray(parent, dtype=np.int64)
        n = parent.size
        if n == 0:
            raise GraphError("a rooted tree has at least one vertex")
        if parent[0] != -1 or np.any(parent[1:] < 0) or np.any(parent[1:] >= np.arange(1, n)):
            raise GraphError("parent array must be BFS-ordered with the root first")
        if np.any(np.diff(parent[1:]) < 0):
            raise GraphError("parents must be nondecreasing (BFS order)")
        # generation g occupies labels gen_ptr[g]:gen_ptr[g+1]
        ptr = [0, 1]
        while ptr[-1] < n:
            ptr.append(int(np.searchsorted(parent, ptr[-1], side="left")))
        gen_ptr = np.array(ptr, dtype=np.int64)
        gen = np.repeat(np.arange(gen_ptr.size - 1), np.diff(gen_ptr))
        self.parent = parent
        self.generation = gen
        self.x = None if x is None else np.asarray(x)
        self.w_parent = None if w_parent is None else np.asarray(w_parent)
        self.labels = np.arange(n, dtype=np.int64) if labels is None else np.asarray(labels, np.int64)
        self.gen_ptr = gen_ptr

    root = 0

    @property
    def n(self):
        return self.parent.size

    @property
    def depth(self):
        return int(self.generation[-1])

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"RootedTree(n={self.n}, depth={self.depth})"

    @cached_property
    def _children(self):
        order = np.argsort(self.parent[1:], kind="stable") + 1
        counts = np.bincount(self.parent[1:], minlength=self.n)
        ptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=ptr[1:])
        return ptr, order

    def children(self, v):
        ptr, idx = self._children
        return idx[ptr[v] : ptr[v + 1]]

    def size_upto(self, r):
        """Number of vertices in generations ``0..r``."""
        r = min(int(r), self.depth)
        return int(self.gen_ptr[r + 1])

    def truncate(self, r):
        m = self.size_upto(r)
        return RootedTree(
            self.parent[:m],
            None if self.x is None else self.x[:m],
            None if self.w_parent is None else self.w_parent[:m],
            self.labels[:m],
        )

    @cached_property
    def graph(self):
        """The underlying :class:`Graph` in internal labels."""
        e = np.stack([self.parent[1:], np.arange(1, self.n)], axis=1)
        w = None if self.w_parent is None else self.w_parent[1:]
        return Graph(self.n, e, self.x, w)

    @classmethod
    def from_graph(cls, g, root=0):
        if not is_tree(g):
            raise GraphError("graph is not a tree")
        b = ball(g, root, g.n)
        order = b.vertices
        pos = np.empty(g.n, dtype=np.int64)
        pos[order] = np.arange(g.n)
        parent = np.full(g.n, -1, dtype=np.int64)
        w_parent = np.ones(g.n) if g.w is None else np.ones(g.n, dtype=g.w.dtype)
        for (u, v), eid in zip(g.edges, range(g.m)):
            a, b_ = pos[u], pos[v]
            child, par = (b_, a) if a < b_ else (a, b_)
            parent[child] = par
            if g.w is not None:
                w_parent[child] = g.w[eid]
        x = None if g.x is None else g.x[order]
        return cls(parent, x, None if g.w is None else w_parent, order)


# -- samplers --------------------------------------------------------------
def sample_galton_watson(P, rho, r, seed, index=0, max_vertices=DEFAULT_MAX_VERTICES):
    """Sample the first ``r`` generations of the Galton-Watson tree T(P, rho).

    The root has ``Delta ~ P`` children and every later vertex ``K ~ rho``
    children, all independent.  Vertices come out in BFS order.
    """
    if r < 0:
        raise GraphError("depth must be nonnegative")
    rng = stream(seed, 0x6757, index)
    parents = [np.array([-1], dtype=np.int64)]
    frontier = np.array([0], dtype=np.int64)
    total = 1
    for gen in range(r):
        law = P if gen == 0 else rho
        counts = law.sample(rng, frontier.size)
        born = int(counts.sum())
        if total + born > max_vertices:
            raise TreeSizeError(
                f"Galton-Watson sample exceeds {max_vertices} vertices at generation {gen + 1}"
            )
        if born == 0:
            break
        parents.append(np.repeat(frontier, counts))
        frontier = np.arange(total, total + born, dtype=np.int64)
        total += born
    return RootedTree(np.concatenate(parents))


def _pair_from_index(k, n):
    """Map linear indices into the row-major strict upper triangle to (i, j)."""
    k = np.asarray(k, dtype=np.int64)
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(np.maximum(b * b - 8.0 * k, 0.0))) / 2).astype(np.int64)

    def off(i):
        return i * (n - 1) - i * (i - 1) // 2

    for _ in range(2):
        i = np.where(off(i) > k, i - 1, i)
        i = np.where(off(i + 1) <= k, i + 1, i)
    j = k - off(i) + i + 1
    return i, j


def sample_erdos_renyi(n, c, seed, index=0):
    """G(n, c/n): every pair is an edge independently with probability c/n.

    The edge count is drawn from its binomial law and the edge set uniformly
    among pair subsets of that size, which is the same distribution.
    """
    if n < 1:
        raise GraphError("n must be positive")
    if c < 0 or c > n:
        raise GraphError("need 0 <= c <= n")
    rng = stream(seed, 0x4552, index)
    pairs = n * (n - 1) // 2
    p = c / n
    if pairs == 0 or p == 0:
        return Graph.empty(n)
    m = int(rng.binomial(pairs, p))
    picks = np.sort(rng.choice(pairs, size=m, replace=False))
    i, j = _pair_from_index(picks, n)
    return Graph(n, np.stack([i, j], axis=1))


# -- local statistics -----------------------------------------------------
def empirical_degree_distribution(g):
    if g.n < 1:
        raise GraphError("empty graph has no degree distribution")
    pmf = np.bincount(g.degrees, minlength=1) / g.n
    return OffspringDistribution.explicit(pmf / pmf.sum())


def edge_vertex_ratio(g):
    if g.n < 1:
        raise GraphError("empty graph")
    return g.m / g.n


def tree_ball_flags(g, r, vertices=None):
    """Boolean array: is ``ball(g, v, r)`` a tree, for each listed vertex."""
    if vertices is None:
        vertices = np.arange(g.n, dtype=np.int64)
    return kernels.ball_tree_flags(g.indptr, g.indices, np.asarray(vertices, np.int64), int(r))


def tree_ball_fraction(g, r):
    if g.n == 0:
        return float("nan")
    return float(tree_ball_flags(g, r).mean())
