"""Hot loops, each in a numba variant (``*_nb``) and a numpy variant (``*_np``).

The public names at the bottom dispatch on :data:`monodimer._backend.USE_NUMBA`.
Both variants perform the same floating-point operations in the same order
wherever that is practical, so they agree to the last bit on the population
update and the subset table.
"""
import numpy as np
import scipy.sparse as sp

from ._backend import USE_NUMBA, njit

MAX_TABLE_VERTICES = 24


# -- partition functions of all induced subgraphs ---------------------------
def _nbr_lists(n, W):
    """Lower-neighbour lists: for each h, the neighbours v < h."""
    ptr = np.zeros(n + 1, dtype=np.int64)
    idx = []
    for h in range(n):
        lows = [v for v in range(h) if W[h, v] != 0]
        idx.extend(lows)
        ptr[h + 1] = ptr[h] + len(lows)
    return ptr, np.asarray(idx, dtype=np.int64)


@njit
def _subset_table_nb(xv, W, ptr, idx, Z):
    n = xv.size
    Z[0] = 1.0
    h = 0
    for mask in range(1, 1 << n):
        if mask >= (2 << h):
            h += 1
        rest = mask ^ (1 << h)
        acc = xv[h] * Z[rest]
        for t in range(ptr[h], ptr[h + 1]):
            v = idx[t]
            if (rest >> v) & 1:
                acc += W[h, v] * Z[rest ^ (1 << v)]
        Z[mask] = acc
    return Z


def _subset_table_np(xv, W, ptr, idx, Z):
    n = xv.size
    Z[0] = 1
    for h in range(n):
        size = 1 << h
        lo = Z[:size]
        blk = xv[h] * lo
        ar = np.arange(size, dtype=np.int64)
        for t in range(ptr[h], ptr[h + 1]):
            v = idx[t]
            has = ((ar >> v) & 1).astype(bool)
            blk[has] += W[h, v] * lo[ar[has] ^ (1 << v)]
        Z[size : 2 * size] = blk
    return Z


def subset_table(xv, W):
    """Partition function of every induced subgraph, indexed by vertex bitmask.

    Built bottom-up with the Heilmann-Lieb recursion pivoting on the highest
    vertex present, so each block ``[2^h, 2^(h+1))`` depends only on earlier
    blocks.  ``xv`` are monomer weights, ``W`` the symmetric dimer-weight
    matrix (zero off the edge set).  Object dtype gives exact arithmetic.
    """
    n = xv.size
    if n > MAX_TABLE_VERTICES:
        raise ValueError(f"subset table limited to {MAX_TABLE_VERTICES} vertices, got {n}")
    ptr, idx = _nbr_lists(n, W)
    dtype = np.result_type(xv.dtype, W.dtype)
    Z = np.zeros(1 << n, dtype=dtype)
    if USE_NUMBA and dtype in (np.float64, np.complex128):
        return _subset_table_nb(xv.astype(dtype), W.astype(dtype), ptr, idx, Z)
    if dtype == object:
        Z[:] = 0
    return _subset_table_np(xv, W, ptr, idx, Z)


# -- leaves-to-root pass on a BFS-ordered tree ------------------------------
@njit
def _tree_q_nb(parent, xv, wp, m):
    q = np.empty(m)
    S = np.zeros(m)
    for v in range(m - 1, -1, -1):
        q[v] = 1.0 / (xv[v] + S[v])
        if v > 0:
            S[parent[v]] += wp[v] * q[v]
    return q


def _tree_q_np(parent, xv, wp, m, gen_ptr):
    q = np.empty(m)
    S = np.zeros(m)
    ng = int(np.searchsorted(gen_ptr, m, side="left"))
    for g in range(ng - 1, -1, -1):
        a, b = gen_ptr[g], min(gen_ptr[g + 1], m)
        q[a:b] = 1.0 / (xv[a:b] + S[a:b])
        if g > 0:
            pa = gen_ptr[g - 1]
            S[pa:a] += np.bincount(parent[a:b] - pa, weights=wp[a:b] * q[a:b], minlength=a - pa)
    return q


def tree_q(parent, xv, wp, m, gen_ptr):
    """Cavity ratios ``q_v = 1 / (x_v + sum_children w q_c)`` on the prefix ``[0, m)``.

    ``x_v q_v`` is the monomer probability of ``v`` in its own subtree, and
    ``-sum(log q)`` is the log partition function of the prefix tree.
    """
    if USE_NUMBA:
        return _tree_q_nb(parent, xv, wp, m)
    return _tree_q_np(parent, xv, wp, m, gen_ptr)


# -- population dynamics --------------------------------------------------
@njit
def _gather_sums_nb(values, counts, picks):
    out = np.empty(counts.size)
    j = 0
    for i in range(counts.size):
        s = 0.0
        for _ in range(counts[i]):
            s += values[picks[j]]
            j += 1
        out[i] = s
    return out


def _gather_sums_np(values, counts, picks):
    owner = np.repeat(np.arange(counts.size), counts)
    return np.bincount(owner, weights=values[picks], minlength=counts.size)


def gather_sums(values, counts, picks):
    """``out[i] = sum of values[picks[j]]`` over the ``counts[i]`` picks owned by ``i``."""
    if USE_NUMBA:
        return _gather_sums_nb(values, counts, picks)
    return _gather_sums_np(values, counts, picks)


# -- per-vertex ball exploration ----------------------------------------
def _ball_scan(indptr, indices, o, radius, dist, order, par):
    """BFS to ``radius`` from ``o``; returns (ball size, is_tree).

    Fills ``order`` with ball vertices in BFS order and ``par`` with BFS parents
    (as positions in ``order``); ``dist`` is left marked and must be reset.
    """
    dist[o] = 0
    order[0] = o
    par[0] = -1
    size = 1
    head = 0
    while head < size:
        u = order[head]
        if dist[u] < radius:
            for t in range(indptr[u], indptr[u + 1]):
                v = indices[t]
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    order[size] = v
                    par[size] = head
                    size += 1
        head += 1
    twice_edges = 0
    for k in range(size):
        u = order[k]
        for t in range(indptr[u], indptr[u + 1]):
            if dist[indices[t]] >= 0:
                twice_edges += 1
    return size, twice_edges == 2 * (size - 1)


def _root_ratio(par, prefix, x2, S):
    """Root monomer probability of the BFS-ordered tree prefix (uniform activity)."""
    for k in range(prefix):
        S[k] = 0.0
    R = 1.0
    for k in range(prefix - 1, -1, -1):
        R = x2 / (x2 + S[k])
        if k > 0:
            S[par[k]] += R
    return R


def _local_bounds_py(indptr, indices, vertices, radius, x):
    n = indptr.size - 1
    dist = -np.ones(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    par = np.empty(n, dtype=np.int64)
    S = np.empty(n)
    lower = np.full(vertices.size, np.nan)
    upper = np.full(vertices.size, np.nan)
    covered = np.zeros(vertices.size, dtype=np.bool_)
    x2 = x * x
    for i in range(vertices.size):
        size, tree = _ball_scan(indptr, indices, vertices[i], radius, dist, order, par)
        if tree:
            covered[i] = True
            lower[i] = _root_ratio(par, size, x2, S)
            inner = size
            while inner > 0 and dist[order[inner - 1]] == radius:
                inner -= 1
            upper[i] = _root_ratio(par, inner, x2, S)
        for k in range(size):
            dist[order[k]] = -1
    return lower, upper, covered


def _ball_tree_flags_py(indptr, indices, vertices, radius):
    n = indptr.size - 1
    dist = -np.ones(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    par = np.empty(n, dtype=np.int64)
    flags = np.zeros(vertices.size, dtype=np.bool_)
    for i in range(vertices.size):
        size, tree = _ball_scan(indptr, indices, vertices[i], radius, dist, order, par)
        flags[i] = tree
        for k in range(size):
            dist[order[k]] = -1
    return flags


_ball_scan_nb = njit(_ball_scan)
_root_ratio_nb = njit(_root_ratio)


@njit
def _local_bounds_nb(indptr, indices, vertices, radius, x):
    n = indptr.size - 1
    dist = -np.ones(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    par = np.empty(n, dtype=np.int64)
    S = np.empty(n)
    lower = np.full(vertices.size, np.nan)
    upper = np.full(vertices.size, np.nan)
    covered = np.zeros(vertices.size, dtype=np.bool_)
    x2 = x * x
    for i in range(vertices.size):
        size, tree = _ball_scan_nb(indptr, indices, vertices[i], radius, dist, order, par)
        if tree:
            covered[i] = True
            lower[i] = _root_ratio_nb(par, size, x2, S)
            inner = size
            while inner > 0 and dist[order[inner - 1]] == radius:
                inner -= 1
            upper[i] = _root_ratio_nb(par, inner, x2, S)
        for k in range(size):
            dist[order[k]] = -1
    return lower, upper, covered


@njit
def _ball_tree_flags_nb(indptr, indices, vertices, radius):
    n = indptr.size - 1
    dist = -np.ones(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    par = np.empty(n, dtype=np.int64)
    flags = np.zeros(vertices.size, dtype=np.bool_)
    for i in range(vertices.size):
        size, tree = _ball_scan_nb(indptr, indices, vertices[i], radius, dist, order, par)
        flags[i] = tree
        for k in range(size):
            dist[order[k]] = -1
    return flags


def _ball_tree_flags_np(indptr, indices, vertices, radius):
    """Sparse-matrix route: ball membership from powers of ``A + I``.

    For the ball B_v, twice its induced edge count is the sum over u in B_v of
    the number of ball members adjacent to u, i.e. the row sum of
    ``B o (B A)`` (Hadamard product).
    """
    n = indptr.size - 1
    A = sp.csr_matrix((np.ones(indices.size), indices, indptr), shape=(n, n))
    B = sp.identity(n, format="csr")
    step = (A + sp.identity(n, format="csr")).astype(bool).astype(float)
    for _ in range(radius):
        B = (B @ step).astype(bool).astype(float)
    B = B[vertices]
    size = np.asarray(B.sum(axis=1)).ravel()
    twice = np.asarray(B.multiply(B @ A).sum(axis=1)).ravel()
    return twice == 2 * (size - 1)


def local_bounds(indptr, indices, vertices, radius, x):
    """Per-vertex localisation bounds from balls of odd ``radius``.

    For each vertex whose ``radius``-ball is a tree, ``lower`` is the root
    monomer probability on that ball and ``upper`` the same on the ball one
    step smaller.
    """
    vertices = np.asarray(vertices, dtype=np.int64)
    if USE_NUMBA:
        return _local_bounds_nb(indptr, indices, vertices, int(radius), float(x))
    return _local_bounds_py(indptr, indices, vertices, int(radius), float(x))


def ball_tree_flags(indptr, indices, vertices, radius):
    if USE_NUMBA:
        return _ball_tree_flags_nb(indptr, indices, vertices, int(radius))
    return _ball_tree_flags_np(indptr, indices, vertices, int(radius))
