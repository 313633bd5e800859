"""The numba kernels and their numpy fallbacks must agree."""
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from monodimer import kernels
from monodimer._backend import HAVE_NUMBA
from monodimer.graph import sample_erdos_renyi, sample_galton_watson
from monodimer.offspring import OffspringDistribution as O
from monodimer.rng import stream

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


def random_w(n, seed, dtype=float):
    rng = stream(seed, 1)
    W = np.triu(rng.random((n, n)) * (rng.random((n, n)) < 0.4), 1)
    return (W + W.T).astype(dtype)


@pytest.mark.parametrize("seed", range(5))
def test_subset_table(seed):
    n = 12
    W = random_w(n, seed)
    xv = stream(seed, 2).uniform(0.2, 2, n)
    ptr, idx = kernels._nbr_lists(n, W)
    a = kernels._subset_table_nb(xv, W, ptr, idx, np.zeros(1 << n))
    b = kernels._subset_table_np(xv, W, ptr, idx, np.zeros(1 << n))
    assert np.allclose(a, b, rtol=1e-13, atol=0)


def test_subset_table_complex():
    n = 9
    W = random_w(n, 3)
    xv = np.full(n, 0.7 + 0.4j)
    ptr, idx = kernels._nbr_lists(n, W)
    a = kernels._subset_table_nb(xv, W, ptr, idx, np.zeros(1 << n, complex))
    b = kernels._subset_table_np(xv, W, ptr, idx, np.zeros(1 << n, complex))
    assert np.allclose(a, b, rtol=1e-13, atol=0)


def test_subset_table_rational_path():
    W = np.zeros((3, 3), dtype=object)
    W[:] = Fraction(0)
    W[0, 1] = W[1, 0] = Fraction(1, 2)
    Z = kernels.subset_table(np.array([Fraction(1)] * 3, dtype=object), W)
    assert Z[7] == Fraction(3, 2)


@pytest.mark.parametrize("depth", [0, 3, 8])
def test_tree_pass(depth):
    P = O.poisson(2.0)
    t = sample_galton_watson(P, P, 8, 4)
    rng = stream(5, depth)
    xv, wp = rng.uniform(0.3, 2, t.n), rng.uniform(0.3, 2, t.n)
    m = t.size_upto(depth)
    a = kernels._tree_q_nb(t.parent, xv, wp, m)
    b = kernels._tree_q_np(t.parent, xv, wp, m, t.gen_ptr)
    assert np.allclose(a, b, rtol=1e-14, atol=0)


def test_gather_sums_bitwise():
    rng = stream(1, 1)
    vals = rng.random(5000)
    counts = O.poisson(3.0).sample(rng, 5000)
    picks = rng.integers(0, 5000, size=int(counts.sum()))
    a = kernels._gather_sums_nb(vals, counts, picks)
    b = kernels._gather_sums_np(vals, counts, picks)
    assert np.allclose(a, b, rtol=1e-15, atol=1e-15)


@pytest.mark.parametrize("radius", [1, 3, 5])
def test_local_bounds(radius):
    g = sample_erdos_renyi(1500, 2.0, radius)
    v = np.arange(g.n, dtype=np.int64)
    lo_a, up_a, c_a = kernels._local_bounds_nb(g.indptr, g.indices, v, radius, 0.9)
    lo_b, up_b, c_b = kernels._local_bounds_py(g.indptr, g.indices, v, radius, 0.9)
    assert np.array_equal(c_a, c_b)
    assert np.array_equal(lo_a[c_a], lo_b[c_b]) and np.array_equal(up_a[c_a], up_b[c_b])


@pytest.mark.parametrize("radius", [0, 1, 2, 4])
def test_ball_tree_flags(radius):
    g = sample_erdos_renyi(1500, 2.5, 7)
    v = np.arange(g.n, dtype=np.int64)
    a = kernels._ball_tree_flags_nb(g.indptr, g.indices, v, radius)
    b = kernels._ball_tree_flags_np(g.indptr, g.indices, v, radius)
    assert np.array_equal(a, b)


def test_environment_flag_selects_fallback():
    code = (
        "from monodimer import backend_name, fixedpoint, OffspringDistribution as O;"
        "r = fixedpoint.solve_fixed_point(O.poisson(2.0), 1.0, 2000, 6, 0.0, 3);"
        "print(backend_name(), repr(r.mean_even))"
    )
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, MONODIMER_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        out[flag] = res.stdout.split()
    assert out["0"][0] == "numba" and out["1"][0] == "numpy"
    assert float(out["0"][1]) == pytest.approx(float(out["1"][1]), rel=1e-14)
