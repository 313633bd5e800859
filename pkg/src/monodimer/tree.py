"""Linear-time recursion on trees and the tree correlation inequalities."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .exact import ExactModel
from .graph import Graph, GraphError, RootedTree, ball, is_tree
from .rng import stream

EXHAUSTIVE_PROBE_LIMIT = 14
RANDOM_PROBES = 100
SIGN_ZERO = 1e-14


class InvariantError(AssertionError):
    pass


def _as_rooted(t, root=0):
    if isinstance(t, RootedTree):
        return t
    if isinstance(t, Graph):
        return RootedTree.from_graph(t, root)
    raise TypeError(f"expected RootedTree or Graph, got {type(t).__name__}")


def _tree_arrays(t, x):
    n = t.n
    if x is None:
        xv = np.ones(n) if t.x is None else np.asarray(t.x, dtype=float)
        wp = np.ones(n) if t.w_parent is None else np.asarray(t.w_parent, dtype=float)
    else:
        if not x > 0:
            raise ValueError("activity must be positive")
        xv = np.full(n, float(x))
        wp = np.ones(n)
    return xv, wp


def cavity_ratios(t, x=None, depth=None):
    """q_v = 1 / (x_v + sum over children of w q_c) on T(depth)."""
    m = t.n if depth is None else t.size_upto(depth)
    xv, wp = _tree_arrays(t, x)
    return kernels.tree_q(t.parent, xv, wp, m, t.gen_ptr)


def tree_log_partition_function(t, x=None, root=0):
    """log Z of a tree in one leaves-to-root pass.

    Each vertex contributes ``-log q_v``; working with the ratios keeps the
    pass free of overflow on very large trees.
    """
    t = _as_rooted(t, root)
    q = cavity_ratios(t, x)
    return float(-np.log(q).sum())


def tree_partition_function(t, x=None, root=0):
    return math.exp(tree_log_partition_function(t, x, root))


def tree_root_probability(t, x=None, depth=None, root=0):
    """Monomer probability of the root of ``T(depth)`` (whole tree by default)."""
    t = _as_rooted(t, root)
    q = cavity_ratios(t, x, depth)
    xv, _ = _tree_arrays(t, x)
    return float(xv[0] * q[0])


def forest_log_partition_function(g, x=None):
    """log Z of a forest, factorised over its components."""
    total = 0.0
    for comp in g.components():
        sub = g.induced(comp)
        total += tree_log_partition_function(RootedTree.from_graph(sub, 0), x)
    return total


@dataclass(frozen=True)
class TruncatedSequence:
    """Root monomer probabilities R(T(r), o) for r = 0..r_max."""

    root_probabilities: np.ndarray
    activity: float

    def __post_init__(self):
        bad = self.violations()
        if bad:
            raise InvariantError("; ".join(bad))

    @property
    def even(self):
        return self.root_probabilities[0::2]

    @property
    def odd(self):
        return self.root_probabilities[1::2]

    def violations(self):
        out = []
        ev, od = self.even, self.odd
        if np.any(np.diff(ev) > 0):
            out.append("even-depth values increase")
        if np.any(np.diff(od) < 0):
            out.append("odd-depth values decrease")
        if od.size and ev.size and od.max() > ev.min():
            out.append("an odd-depth value exceeds an even-depth value")
        return out

    def rows(self):
        return [(r, float(v)) for r, v in enumerate(self.root_probabilities)]


def truncated_sequence(t, x, r_max):
    """R(T(r), o) for r = 0..r_max; truncation beyond the tree depth is a no-op."""
    t = _as_rooted(t)
    vals = np.array([tree_root_probability(t, x, depth=r) for r in range(r_max + 1)])
    return TruncatedSequence(vals, x)


def regular_truncation_sequence(x, r_max, k=1):
    """Scalar recursion R_{r+1} = x^2 / (x^2 + k R_r), R_0 = 1.

    Root probabilities of the truncated infinite k-ary tree (k = 1 is the
    half-infinite path).
    """
    x2 = x * x
    vals = [1.0]
    for _ in range(r_max):
        vals.append(x2 / (x2 + k * vals[-1]))
    return TruncatedSequence(np.array(vals), x)


def regular_fixed_point(x, k):
    """Root of k X^2 + x^2 X - x^2 = 0 in [0, 1]."""
    if k == 0:
        return 1.0
    x2 = x * x
    return (-x2 + math.sqrt(x2 * x2 + 4 * k * x2)) / (2 * k)


# -- localisation ---------------------------------------------------------
@dataclass(frozen=True)
class LocalisationBounds:
    lower: float | None
    upper: float | None

    @property
    def available(self):
        return tuple(name for name in ("lower", "upper") if getattr(self, name) is not None)


def localisation_bounds(g, o, r, x):
    """Bounds on R(G, o) from tree-shaped balls.

    If the radius-2r ball is a tree its root probability is an upper bound;
    if the radius-(2r+1) ball is a tree its root probability is a lower bound.
    """
    upper = lower = None
    b = ball(g, o, 2 * r)
    if is_tree(b.graph):
        upper = tree_root_probability(RootedTree.from_graph(b.graph, 0), x)
    b = ball(g, o, 2 * r + 1)
    if is_tree(b.graph):
        lower = tree_root_probability(RootedTree.from_graph(b.graph, 0), x)
    return LocalisationBounds(lower, upper)


@dataclass(frozen=True)
class DensityBracket:
    x: float
    r: int
    lower: float
    upper: float
    covered_fraction: float
    n_sampled: int
    lower_se: float
    upper_se: float

    def row(self):
        return dict(
            x=self.x, r=self.r, lower=self.lower, upper=self.upper, covered_fraction=self.covered_fraction
        )


def local_bounds(g, r, x, vertices=None):
    """Per-vertex (lower, upper, covered) arrays at localisation depth ``r``."""
    if vertices is None:
        vertices = np.arange(g.n, dtype=np.int64)
    return kernels.local_bounds(g.indptr, g.indices, vertices, 2 * r + 1, x)


def sample_vertices(g, sample, seed):
    if sample is None or sample == "all" or sample >= g.n:
        return np.arange(g.n, dtype=np.int64)
    rng = stream(seed, 0x5645)
    return np.sort(rng.choice(g.n, size=int(sample), replace=False)).astype(np.int64)


def empirical_density_bracket(g, r, x, sample=None, seed=0):
    """Average the localisation bounds over sampled vertices with a tree (2r+1)-ball.

    The vertex sample is drawn before any per-vertex work, so the result does
    not depend on evaluation order.
    """
    verts = sample_vertices(g, sample, seed)
    lo, up, cov = local_bounds(g, r, x, verts)
    k = int(cov.sum())
    if k == 0:
        nan = float("nan")
        return DensityBracket(x, r, nan, nan, 0.0, verts.size, nan, nan)
    lo, up = lo[cov], up[cov]
    se = lambda a: float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else 0.0
    return DensityBracket(x, r, float(lo.mean()), float(up.mean()), k / verts.size, verts.size, se(lo), se(up))


# -- correlation inequalities on trees --------------------------------------
def _all_distances(g):
    return np.array([g.distances_from(v) for v in range(g.n)])


def _expected_sign(kind, distance, same):
    """+1 for a nonnegative covariance, -1 for a nonpositive one."""
    if kind == "monomer-dimer":
        return 1 if distance % 2 else -1
    if same:
        return 1
    return 1 if distance % 2 else -1


@dataclass(frozen=True)
class SignCheck:
    kind: str
    a: object
    b: object
    distance: int
    parity: str
    covariance: float
    expected: str
    sign_ok: bool


def _probe_pool(g):
    verts = list(range(g.n))
    edges = [tuple(int(v) for v in e) for e in g.edges]
    pool = [(o, p) for i, o in enumerate(verts) for p in verts[i:]]
    pool += [(o, e) for o in verts for e in edges]
    pool += [(e, f) for i, e in enumerate(edges) for f in edges[i:]]
    return pool


def correlation_sign_report(t, probe_pairs=None, x=None, seed=0, exact=True, transform=None):
    """Check the parity rule for covariances on a (weighted) tree.

    Probe pairs mix vertices (ints) and edges (2-tuples).  With no pairs given
    all pairs are probed on trees of at most 14 vertices, otherwise 100 random
    ones.  ``transform`` is applied to each covariance before the sign test
    (a hook for negative controls).
    """
    g = t.graph if isinstance(t, RootedTree) else t
    if not is_tree(g):
        raise GraphError("correlation sign report needs a tree")
    model = ExactModel(g, x, exact=exact)
    dist = _all_distances(g)
    if probe_pairs is None:
        pool = _probe_pool(g)
        if g.n <= EXHAUSTIVE_PROBE_LIMIT:
            probe_pairs = pool
        else:
            rng = stream(seed, 0x434F)
            pick = rng.choice(len(pool), size=min(RANDOM_PROBES, len(pool)), replace=False)
            probe_pairs = [pool[i] for i in sorted(pick)]
    tol = 0 if model.exact else SIGN_ZERO
    rows = []
    for a, b in probe_pairs:
        if isinstance(a, tuple) and not isinstance(b, tuple):
            a, b = b, a
        if not isinstance(a, tuple) and not isinstance(b, tuple):
            kind, same = "monomer-monomer", a == b
            d = int(dist[a, b])
            cov = model.monomer_monomer_covariance(a, b)
        elif not isinstance(a, tuple):
            kind, same = "monomer-dimer", False
            d = int(min(dist[a, b[0]], dist[a, b[1]]))
            cov = model.monomer_dimer_covariance(a, b)
        else:
            kind, same = "dimer-dimer", set(a) == set(b)
            d = int(min(dist[i, j] for i in a for j in b))
            cov = model.dimer_dimer_covariance(a, b)
        if transform is not None:
            cov = transform(cov)
        sign = _expected_sign(kind, d, same)
        ok = cov >= -tol if sign > 0 else cov <= tol
        rows.append(
            SignCheck(kind, a, b, d, "odd" if d % 2 else "even", float(cov), ">=0" if sign > 0 else "<=0", bool(ok))
        )
    return rows


@dataclass(frozen=True)
class FundamentalCheck:
    lhs: object
    rhs: object
    parity: str
    holds: bool


def tree_fundamental_check(t, c0, cl, x=None, exact=True, model=None):
    """Compare 1[l>=1] Z(T_c1 - T_cl) Z(T) with Z(T_c1) Z(T - T_cl).

    Subtrees hang from the root ``c0``; ``c0..cl`` is the path of length l.
    The left side dominates for odd l and is dominated for even l.  For
    l = 0 the convention c1 = c0 is used, giving lhs = 0 <= Z(T).
    """
    g = t.graph if isinstance(t, RootedTree) else t
    if not is_tree(g):
        raise GraphError("needs a tree")
    if not (0 <= c0 < g.n and 0 <= cl < g.n):
        raise GraphError("vertex not in tree")
    rooted = RootedTree.from_graph(g, c0)
    lab = rooted.labels
    pos = np.empty(g.n, dtype=np.int64)
    pos[lab] = np.arange(g.n)
    # descendant masks, built leaves-first
    sub = [1 << int(lab[i]) for i in range(g.n)]
    for i in range(g.n - 1, 0, -1):
        sub[rooted.parent[i]] |= sub[i]
    path = [pos[cl]]
    while path[-1] != 0:
        path.append(rooted.parent[path[-1]])
    path = path[::-1]
    l = len(path) - 1
    if model is None:
        model = ExactModel(g, x, exact=exact)
    Z = model.z
    full = model.full
    T_cl = sub[path[-1]]
    if l == 0:
        lhs = 0 * Z(full)
        rhs = Z(full) * Z(0)
    else:
        T_c1 = sub[path[1]]
        lhs = Z(T_c1 & ~T_cl) * Z(full)
        rhs = Z(T_c1) * Z(full & ~T_cl)
    holds = lhs >= rhs if l % 2 else lhs <= rhs
    return FundamentalCheck(lhs, rhs, "odd" if l % 2 else "even", bool(holds))


def tree_fundamental_sweep(t, x=None, exact=True):
    """tree_fundamental_check over every ordered vertex pair, sharing one table."""
    g = t.graph if isinstance(t, RootedTree) else t
    model = ExactModel(g, x, exact=exact)
    return [tree_fundamental_check(g, a, b, model=model) for a in range(g.n) for b in range(g.n)]


def random_weighted_tree(n, seed, index=0, exact=True, max_den=20):
    """Uniform random labelled tree (Pruefer code) with random positive weights."""
    rng = stream(seed, 0x5254, index)
    if n == 1:
        edges = []
    elif n == 2:
        edges = [(0, 1)]
    else:
        code = rng.integers(0, n, size=n - 2)
        degree = np.ones(n, dtype=np.int64)
        np.add.at(degree, code, 1)
        edges = []
        import heapq

        leaves = [i for i in range(n) if degree[i] == 1]
        heapq.heapify(leaves)
        for c in code:
            leaf = heapq.heappop(leaves)
            edges.append((leaf, int(c)))
            degree[c] -= 1
            if degree[c] == 1:
                heapq.heappush(leaves, int(c))
        u, v = heapq.heappop(leaves), heapq.heappop(leaves)
        edges.append((u, v))

    def draw(size):
        num = rng.integers(1, 4 * max_den, size=size)
        den = rng.integers(1, max_den, size=size)
        if exact:
            return np.array([Fraction(int(a), int(b)) for a, b in zip(num, den)], dtype=object)
        return num / den

    return Graph(n, np.array(edges, dtype=np.int64).reshape(-1, 2), draw(n), draw(len(edges)))
