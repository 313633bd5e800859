"""Exact monomer-dimer computations on small graphs.

The workhorse is :class:`ExactModel`, which tabulates the partition function
of every induced subgraph once (``2^n`` entries, n <= 24).  Monomer and dimer
probabilities, correlations and the recursion identities are then ratios of
table entries.  :func:`enumerate_matchings` is an independent brute-force
oracle that never touches the recursion.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Complex, Real

import numpy as np

from . import kernels
from .graph import Graph, GraphError, is_forest

MAX_VERTICES = kernels.MAX_TABLE_VERTICES


class ActivityError(ValueError):
    pass


class SizeError(ValueError):
    pass


@dataclass(frozen=True)
class Matching:
    """A dimeric configuration: vertex-disjoint edges of a host graph."""

    edges: frozenset
    host_vertex_count: int

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u in seen or v in seen:
                raise GraphError("edges of a matching must be vertex-disjoint")
            seen.update((u, v))

    @property
    def dimers(self):
        return len(self.edges)

    @property
    def monomers(self):
        return self.host_vertex_count - 2 * len(self.edges)

    def covered(self):
        return {v for e in self.edges for v in e}

    def monomer_set(self):
        c = self.covered()
        return [v for v in range(self.host_vertex_count) if v not in c]


def _check_size(g):
    if g.n > MAX_VERTICES:
        raise SizeError(f"exact computation limited to {MAX_VERTICES} vertices (got {g.n})")


def iter_matchings(g):
    """Yield every matching of ``g`` exactly once (brute force over edges)."""
    _check_size(g)
    edges = [tuple(map(int, e)) for e in g.edges]
    chosen = []

    def rec(i, used):
        if i == len(edges):
            yield Matching(frozenset(chosen), g.n)
            return
        yield from rec(i + 1, used)
        u, v = edges[i]
        if not (used >> u) & 1 and not (used >> v) & 1:
            chosen.append((u, v))
            yield from rec(i + 1, used | (1 << u) | (1 << v))
            chosen.pop()

    yield from rec(0, 0)


def enumerate_matchings(g):
    return list(iter_matchings(g))


def configuration_weight(g, D, x=None):
    """Gibbs weight of matching ``D``: prod of dimer weights times monomer weights."""
    if x is not None:
        return x ** D.monomers
    xv, wv = g.vertex_weights(), g.edge_weights()
    out = 1
    for u, v in D.edges:
        out = out * wv[g.edge_id(u, v)]
    for v in D.monomer_set():
        out = out * xv[v]
    return out


def matching_polynomial(g):
    """Integer counts ``m_k`` of k-edge matchings, so ``Z(x) = sum m_k x^(n-2k)``.

    Exact (Python integers) via the vertex recursion on bitmasks.
    """
    _check_size(g)
    n = g.n
    nbr = [0] * n
    for u, v in g.edges:
        nbr[u] |= 1 << int(v)
        nbr[v] |= 1 << int(u)

    @lru_cache(maxsize=None)
    def counts(mask):
        if mask == 0:
            return (1,)
        h = mask.bit_length() - 1
        rest = mask ^ (1 << h)
        out = list(counts(rest))
        cand = rest & nbr[h]
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            sub = counts(rest ^ (1 << v))
            if len(out) < len(sub) + 1:
                out.extend([0] * (len(sub) + 1 - len(out)))
            for k, c in enumerate(sub):
                out[k + 1] += c
            cand ^= low
        return tuple(out)

    return list(counts((1 << n) - 1))


def evaluate_matching_polynomial(coeffs, n, x):
    """``sum m_k x^(n-2k)``; exact for int/Fraction ``x``."""
    return sum(c * x ** (n - 2 * k) for k, c in enumerate(coeffs))


def _check_activity(x):
    if isinstance(x, (bool, np.bool_)):
        raise ActivityError("activity must be a number")
    if isinstance(x, Real):
        if not x > 0:
            raise ActivityError(f"real activity must be > 0, got {x}")
        return
    if isinstance(x, Complex):
        if not x.real > 0:
            raise ActivityError(f"complex activity needs Re(z) > 0, got {x}")
        return
    raise ActivityError(f"unsupported activity {x!r}")


def _as_exact(v):
    if isinstance(v, (int, Fraction, np.integer)):
        return Fraction(int(v)) if isinstance(v, np.integer) else Fraction(v)
    return Fraction(float(v))


class ExactModel:
    """Subset-table evaluator for one graph and one set of weights.

    ``x=None`` uses the graph's own weights (unit weights where absent);
    a number ``x`` means uniform monomer activity ``x`` and unit dimer
    weights.  ``exact=True`` switches to rational arithmetic.
    """

    def __init__(self, g, x=None, exact=False):
        _check_size(g)
        self.graph = g
        n = g.n
        if x is None:
            xv = np.asarray(g.vertex_weights())
            wv = np.asarray(g.edge_weights())
        else:
            _check_activity(x)
            xv = np.full(n, x, dtype=object if isinstance(x, Fraction) else None)
            wv = np.ones(g.m, dtype=int)
        self.uniform = x
        if exact or xv.dtype == object or wv.dtype == object:
            xv = np.array([_as_exact(v) for v in xv.tolist()], dtype=object)
            wv = np.array([_as_exact(v) for v in wv.tolist()], dtype=object)
            W = np.zeros((n, n), dtype=object)
            W[:] = Fraction(0)
        else:
            dtype = np.complex128 if np.iscomplexobj(xv) else np.float64
            xv = xv.astype(dtype)
            wv = wv.astype(float)
            W = np.zeros((n, n))
        for (u, v), w in zip(g.edges, wv):
            W[u, v] = W[v, u] = w
        self.xv, self.wv, self.W = xv, wv, W
        self.exact = xv.dtype == object
        self.Z = kernels.subset_table(xv, W)
        self.full = (1 << n) - 1

    # -- basic quantities -----------------------------------------------
    @staticmethod
    def mask_of(vertices):
        m = 0
        for v in vertices:
            m |= 1 << int(v)
        return m

    def z(self, mask):
        return self.Z[mask]

    def partition_function(self):
        return self.Z[self.full]

    def log_partition_function(self):
        z = self.partition_function()
        if self.exact:
            return math.log(z.numerator) - math.log(z.denominator)
        return cmath.log(z) if np.iscomplexobj(self.Z) else math.log(z)

    def monomer_probability(self, o, mask=None):
        """R(H, o) for the induced subgraph ``H`` given by ``mask`` (default: G)."""
        mask = self.full if mask is None else mask
        if not (mask >> o) & 1:
            raise GraphError(f"vertex {o} not in subgraph")
        return self.xv[o] * self.Z[mask ^ (1 << o)] / self.Z[mask]

    def dimer_probability(self, u, v, mask=None):
        mask = self.full if mask is None else mask
        eid = self.graph.edge_id(u, v)
        return self.wv[eid] * self.Z[mask ^ (1 << u) ^ (1 << v)] / self.Z[mask]

    def monomer_probabilities(self):
        return [self.monomer_probability(o) for o in range(self.graph.n)]

    def dimer_probabilities(self):
        return [self.dimer_probability(int(u), int(v)) for u, v in self.graph.edges]

    def density(self):
        n = self.graph.n
        if n == 0:
            raise GraphError("density of the empty graph is undefined")
        return sum(self.monomer_probabilities()) / n

    def pressure(self):
        if self.graph.n == 0:
            raise GraphError("pressure of the empty graph is undefined")
        return self.log_partition_function() / self.graph.n

    # -- recursion identities ---------------------------------------------
    def _ratio(self, a, b):
        # w_ab / (x_a x_b): the coupling entering the monomer recursion
        return self.W[a, b] / (self.xv[a] * self.xv[b])

    def _present_neighbors(self, o, mask):
        return [int(v) for v in self.graph.neighbors(o) if (mask >> int(v)) & 1]

    def recursion1(self, o, mask=None):
        """Right side of R(G,o) = (1 + sum_v c_ov R(G-o, v))^-1, c = w/(x x)."""
        mask = self.full if mask is None else mask
        rest = mask ^ (1 << o)
        s = sum(
            (self._ratio(o, v) * self.monomer_probability(v, rest) for v in self._present_neighbors(o, rest)),
            0,
        )
        return 1 / (1 + s)

    def recursion2(self, o, mask=None):
        """Two-step version: the recursion applied again at every neighbour."""
        mask = self.full if mask is None else mask
        rest = mask ^ (1 << o)
        outer = 0
        for v in self._present_neighbors(o, rest):
            rest2 = rest ^ (1 << v)
            inner = sum(
                (self._ratio(v, u) * self.monomer_probability(u, rest2) for u in self._present_neighbors(v, rest2)),
                0,
            )
            outer = outer + self._ratio(o, v) / (1 + inner)
        return 1 / (1 + outer)

    # -- two-point functions ----------------------------------------------
    def _edge(self, e):
        u, v = int(e[0]), int(e[1])
        self.graph.edge_id(u, v)
        return u, v

    def joint_monomer_monomer(self, o, p):
        if o == p:
            return self.monomer_probability(o)
        return self.xv[o] * self.xv[p] * self.Z[self.full ^ (1 << o) ^ (1 << p)] / self.Z[self.full]

    def joint_monomer_dimer(self, o, e):
        p, v = self._edge(e)
        if o in (p, v):
            return 0 * self.Z[self.full]
        eid = self.graph.edge_id(p, v)
        m = self.full ^ (1 << o) ^ (1 << p) ^ (1 << v)
        return self.xv[o] * self.wv[eid] * self.Z[m] / self.Z[self.full]

    def joint_dimer_dimer(self, e, f):
        o, u = self._edge(e)
        p, v = self._edge(f)
        if {o, u} == {p, v}:
            return self.dimer_probability(o, u)
        if {o, u} & {p, v}:
            return 0 * self.Z[self.full]
        m = self.full ^ (1 << o) ^ (1 << u) ^ (1 << p) ^ (1 << v)
        w1 = self.wv[self.graph.edge_id(o, u)]
        w2 = self.wv[self.graph.edge_id(p, v)]
        return w1 * w2 * self.Z[m] / self.Z[self.full]

    def monomer_monomer_covariance(self, o, p):
        return self.joint_monomer_monomer(o, p) - self.monomer_probability(o) * self.monomer_probability(p)

    def monomer_dimer_covariance(self, o, e):
        p, v = self._edge(e)
        return self.joint_monomer_dimer(o, e) - self.monomer_probability(o) * self.dimer_probability(p, v)

    def dimer_dimer_covariance(self, e, f):
        o, u = self._edge(e)
        p, v = self._edge(f)
        return self.joint_dimer_dimer(e, f) - self.dimer_probability(o, u) * self.dimer_probability(p, v)


# -- functional front end ------------------------------------------------
def _forest_log_z(g, x):
    from .tree import forest_log_partition_function

    return forest_log_partition_function(g, x)


def log_partition_function(g, x):
    """log Z_G(x); forests of any size go through the linear-time tree pass."""
    _check_activity(x)
    if g.n > MAX_VERTICES:
        if isinstance(x, Real) and is_forest(g):
            return _forest_log_z(g, x)
        _check_size(g)
    return ExactModel(g, x).log_partition_function()


def partition_function(g, x):
    """Z_G(x) = sum over matchings of x^(number of monomers); Z(empty) = 1."""
    _check_activity(x)
    if g.n > MAX_VERTICES:
        return math.exp(log_partition_function(g, x))
    return ExactModel(g, x).partition_function()


def partition_function_general(g):
    """Z with the graph's own vertex and edge weights."""
    return ExactModel(g).partition_function()


def monomer_probability(g, o, x=None):
    return ExactModel(g, x).monomer_probability(o)


def dimer_probability(g, e, x=None):
    u, v = int(e[0]), int(e[1])
    return ExactModel(g, x).dimer_probability(u, v)


def monomer_density(g, x):
    if g.n == 0:
        raise GraphError("density of the empty graph is undefined")
    return ExactModel(g, x).density()


def pressure_per_particle(g, x):
    if not isinstance(x, Real):
        raise ActivityError("pressure needs a real activity")
    if g.n == 0:
        raise GraphError("pressure of the empty graph is undefined")
    return log_partition_function(g, x) / g.n


def pressure_bounds(g, x):
    """(log x, log x + |E|/|V| log(1 + 1/x^2))."""
    lo = math.log(x)
    return lo, lo + g.m / g.n * math.log1p(1.0 / (x * x))


def complex_monomer_probability(g, o, z):
    z = complex(z)
    if not z.real > 0:
        raise ActivityError("complex activity needs Re(z) > 0")
    return complex(ExactModel(g, z).monomer_probability(o))


def monomer_monomer_covariance(g, o, p, x=None):
    return ExactModel(g, x).monomer_monomer_covariance(o, p)


def monomer_dimer_covariance(g, o, pv, x=None):
    return ExactModel(g, x).monomer_dimer_covariance(o, pv)


def dimer_dimer_covariance(g, ou, pv, x=None):
    return ExactModel(g, x).dimer_dimer_covariance(ou, pv)


def density_by_finite_difference(g, x, h=None):
    """x d/dx log Z / |V| by central differences (cross-check only)."""
    h = 1e-6 * x if h is None else h
    lp = log_partition_function(g, x + h)
    lm = log_partition_function(g, x - h)
    return x * (lp - lm) / (2 * h) / g.n
