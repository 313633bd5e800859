"""End-to-end acceptance checks, one test per criterion.

Each test is tagged with ``@criterion``; the terminal summary prints one
PASS/FAIL line per criterion (see conftest.py).
"""
import math
import time

import numpy as np
import pytest

from monodimer import exact, tree
from monodimer import fixedpoint as fp
from monodimer.exact import ExactModel
from monodimer.graph import Graph, sample_erdos_renyi, sample_galton_watson
from monodimer.offspring import OffspringDistribution as O
from monodimer.rng import stream

from graphgen import oracle_corpus, random_graphs

ACTIVITIES = (0.3, 1.0, 2.0)
KARP_SIPSER = 0.216074
POISSON2 = O.poisson(2.0)


def criterion(number, title):
    return pytest.mark.criterion(number=number, title=title)


def matching_counts(g):
    """Matchings by size, by plain include/exclude over the edge list."""
    edges = [(int(u), int(v)) for u, v in g.edges]
    counts = [0] * (g.n // 2 + 1)

    def rec(i, used, k):
        if i == len(edges):
            counts[k] += 1
            return
        rec(i + 1, used, k)
        u, v = edges[i]
        if not (used >> u) & 1 and not (used >> v) & 1:
            rec(i + 1, used | 1 << u | 1 << v, k + 1)

    rec(0, 0, 0)
    while len(counts) > 1 and counts[-1] == 0:
        counts.pop()
    return counts


@pytest.fixture(scope="module")
def corpus():
    graphs = oracle_corpus() + random_graphs(200, 12, seed=99)
    return graphs


@pytest.fixture(scope="module")
def oracle_run(corpus):
    """Criterion 1 work, timed; the models are reused by criteria 2 and 3."""
    t0 = time.perf_counter()
    bad_float, bad_int, models = [], [], []
    for i, g in enumerate(corpus):
        counts = matching_counts(g)
        if exact.matching_polynomial(g) != counts:
            bad_int.append(i)
        for x in ACTIVITIES:
            brute = sum(c * x ** (g.n - 2 * k) for k, c in enumerate(counts))
            m = ExactModel(g, x)
            z = m.partition_function()
            if abs(z - brute) > 1e-12 * abs(brute):
                bad_float.append((i, x))
            models.append((g, x, m, counts))
    return dict(elapsed=time.perf_counter() - t0, bad_float=bad_float, bad_int=bad_int, models=models)


@criterion(1, "oracle equivalence")
def test_oracle_equivalence(corpus, oracle_run, record_property):
    connected_small = len(oracle_corpus())
    record_property("detail", f"{len(corpus)} graphs ({connected_small} connected <= 9), {oracle_run['elapsed']:.1f}s")
    assert connected_small >= 500
    assert not oracle_run["bad_int"]
    assert not oracle_run["bad_float"]
    assert oracle_run["elapsed"] < 60


@criterion(2, "recursion identities")
def test_recursion_identities(oracle_run, record_property):
    worst = 0.0
    checked = 0
    for g, x, m, _ in oracle_run["models"]:
        for o in range(g.n):
            r = m.monomer_probability(o)
            worst = max(worst, abs(m.recursion1(o) - r), abs(m.recursion2(o) - r))
            checked += 1
    record_property("detail", f"{checked} vertex checks, worst deviation {worst:.2e}")
    assert worst <= 1e-12


@criterion(3, "pressure bounds, density identity, sum rule")
def test_pressure_bounds_and_sum_rule(oracle_run, record_property):
    worst, outside = 0.0, 0
    for g, x, m, counts in oracle_run["models"]:
        lo, hi = exact.pressure_bounds(g, x)
        p = m.pressure()
        if not (lo - 1e-12 <= p <= hi + 1e-12):
            outside += 1
        # monomer fraction straight from the matching counts
        w = [c * x ** (g.n - 2 * k) for k, c in enumerate(counts)]
        eps = sum((g.n - 2 * k) * wk for k, wk in enumerate(w)) / (g.n * sum(w))
        R = m.monomer_probabilities()
        E = m.dimer_probabilities()
        worst = max(worst, abs(sum(R) / g.n - eps), abs((sum(R) + 2 * sum(E)) / g.n - 1))
    record_property("detail", f"{outside} bound violations, worst identity error {worst:.2e}")
    assert outside == 0
    assert worst <= 1e-12


@criterion(4, "truncated-tree monotonicity")
def test_truncated_monotonicity(record_property):
    t0 = time.perf_counter()
    violations = 0
    for i in range(100):
        t = sample_galton_watson(POISSON2, POISSON2, 12, 4, i)
        for x in (0.1, 0.5, 1.0, 2.0):
            try:
                tree.truncated_sequence(t, x, 12)
            except tree.InvariantError:
                violations += 1
    elapsed = time.perf_counter() - t0
    record_property("detail", f"400 sequences, {violations} violations, {elapsed:.1f}s")
    assert violations == 0
    assert elapsed < 60


@criterion(5, "localisation brackets")
def test_localisation(record_property):
    violations, bounds = 0, 0
    for g in random_graphs(200, 14, seed=5):
        m = ExactModel(g, 1.0)
        for o in range(g.n):
            r = m.monomer_probability(o)
            for rad in range(4):
                b = tree.localisation_bounds(g, o, rad, 1.0)
                for val, ok in ((b.lower, lambda v: v <= r + 1e-12), (b.upper, lambda v: v >= r - 1e-12)):
                    if val is not None:
                        bounds += 1
                        violations += not ok(val)
    record_property("detail", f"{bounds} bounds checked, {violations} violations")
    assert bounds > 0 and violations == 0


@criterion(6, "tree correlation inequalities")
def test_tree_correlation_inequalities(record_property):
    sign_bad = fund_bad = probes = 0
    for i in range(100):
        n = int(stream(6, i).integers(2, 15))
        t = tree.random_weighted_tree(n, 6, i)
        rows = tree.correlation_sign_report(t, exact=True)
        probes += len(rows)
        sign_bad += sum(not r.sign_ok for r in rows)
        fund_bad += sum(not c.holds for c in tree.tree_fundamental_sweep(t))
    record_property("detail", f"{probes} probes, {sign_bad} sign violations, {fund_bad} fundamental violations")
    assert sign_bad == 0 and fund_bad == 0


@criterion(7, "scalar fixed point")
def test_scalar_fixed_point(record_property):
    r = fp.solve_fixed_point(O.fixed(1), 1.0, 1000, 200, 1e-13, 0)
    golden = (math.sqrt(5) - 1) / 2
    worst = 0.0
    for k in (1, 2, 3):
        for x in (0.5, 1.0, 2.0):
            est = fp.solve_fixed_point(O.fixed(k), x, 1000, 1000, 1e-12, 0).estimate
            worst = max(worst, abs(est - fp.regular_cavity(x, k)))
    record_property("detail", f"golden error {abs(r.estimate - golden):.1e}, worst quadratic-root error {worst:.1e}")
    assert abs(r.estimate - golden) <= 1e-9
    assert abs(r.estimate - 0.618034) <= 1e-6
    assert worst <= 1e-6


@criterion(8, "bound-curve reproduction")
def test_bounds_curve(record_property):
    t0 = time.perf_counter()
    grid = fp.default_x_grid()
    rows = fp.bounds_curve(POISSON2, POISSON2, grid, [3, 4, 5, 6], 10**4, 0)
    elapsed = time.perf_counter() - t0
    pts = {(p.x, p.r): p for p in rows}
    worst = -math.inf
    for x in grid:
        for lo in (3, 5):
            for hi in (4, 6):
                a, b = pts[(x, lo)], pts[(x, hi)]
                worst = max(worst, (a.mean - b.mean) / math.hypot(a.stderr, b.stderr))
    width = pts[(2.0, 6)].mean - pts[(2.0, 5)].mean
    record_property("detail", f"max odd-over-even excess {worst:.2f} SE, width at x=2 {width:.4f}, {elapsed:.1f}s")
    assert worst <= 3
    assert abs(width) < 0.05
    assert elapsed < 120


@criterion(9, "Karp-Sipser endpoint")
def test_karp_sipser(record_property):
    t0 = time.perf_counter()
    res = fp.solve_fixed_point(POISSON2, 0.01, 10**5, 40, 0.0, 0)
    upper = fp.density_bracket(POISSON2, POISSON2, res, 10**5, 1).upper
    res5 = fp.solve_fixed_point(POISSON2, 0.05, 10**5, 40, 0.0, 0)
    b = fp.density_bracket(POISSON2, POISSON2, res5, 10**5, 1)
    lo, hi = min(b.lower, b.upper), max(b.lower, b.upper)
    contains = lo <= KARP_SIPSER + 0.015 and hi >= KARP_SIPSER - 0.015
    elapsed = time.perf_counter() - t0
    record_property("detail", f"upper at 0.01: {upper:.4f}; bracket at 0.05: [{lo:.4f}, {hi:.4f}], {elapsed:.1f}s")
    assert upper >= KARP_SIPSER - 0.01
    assert contains
    assert elapsed < 300


@criterion(10, "pressure cross-checks")
def test_pressure_cross_checks(record_property):
    notes = []
    # (a) isolated edges
    for x in (0.5, 1.0, 2.0):
        est = fp.pressure_general(O.fixed(1), O.fixed(0), x, fp.Population.constant(x, 10**4), 10**4, 0)
        closed = 0.5 * math.log1p(x * x)
        assert abs(est.value - closed) <= max(3 * est.standard_error, 1e-12)
        g = Graph(100, [(2 * i, 2 * i + 1) for i in range(50)])
        assert abs(exact.pressure_per_particle(g, x) - est.value) <= 1e-12
    # (b) general against Erdos-Renyi
    worst_b = 0.0
    for c in (1.0, 2.0):
        P = O.poisson(c)
        for x in (0.5, 1.0, 2.0):
            res = fp.solve_fixed_point(P, x, 10**5, 100, 1e-3, 0)
            a = fp.pressure_general(P, P, x, res.population, 10**5, 1)
            b = fp.pressure_er(c, x, res.population, 10**5, 1)
            worst_b = max(worst_b, abs(a.value - b.value) / math.hypot(a.standard_error, b.standard_error))
    notes.append(f"(b) worst {worst_b:.2f} SE")
    # (c) derivative of pressure against density / x
    worst_c = 0.0
    for x in (0.5, 1.0, 2.0):
        chk = fp.pressure_derivative_check(POISSON2, POISSON2, x, N=2 * 10**4, M=5 * 10**4, seed=2)
        worst_c = max(worst_c, abs(chk.z_score))
    notes.append(f"(c) worst {worst_c:.2f} SE")
    record_property("detail", "(a) exact, " + ", ".join(notes))
    assert worst_b <= 3
    assert worst_c <= 3


@criterion(11, "contraction rate")
def test_contraction(record_property):
    out = []
    for rho, x in ((O.fixed(1), 2.0), (POISSON2, 2.0), (POISSON2, 3.0)):
        res = fp.contraction_diagnostic(rho, x, 10**4, 0)
        out.append((res.rate, res.stderr, res.bound))
    record_property("detail", "; ".join(f"{r:.4f}+-{s:.1e} vs {b:.4f}" for r, s, b in out))
    assert all(r <= b + 3 * s for r, s, b in out)


@criterion(12, "large-graph consistency")
def test_large_graph_consistency(record_property):
    t0 = time.perf_counter()
    res = fp.solve_fixed_point(POISSON2, 1.0, 10**5, 60, 1e-3, 0)
    lim = fp.density_bracket(POISSON2, POISSON2, res, 10**5, 0)
    ylo, yhi = min(lim.lower, lim.upper), max(lim.lower, lim.upper)
    yse = max(lim.lower_se, lim.upper_se)
    overlaps, covered = [], []
    for seed in range(5):
        b = tree.empirical_density_bracket(sample_erdos_renyi(2000, 2.0, seed), 2, 1.0)
        se = math.hypot(max(b.lower_se, b.upper_se), yse)
        overlaps.append(b.lower - 3 * se <= yhi and ylo <= b.upper + 3 * se)
        covered.append(b.covered_fraction)
    elapsed = time.perf_counter() - t0
    record_property(
        "detail",
        f"limit [{ylo:.4f}, {yhi:.4f}], overlaps {sum(overlaps)}/5, covered fraction {min(covered):.3f}..{max(covered):.3f}",
    )
    assert elapsed < 120
    assert min(covered) >= 0.9
    assert all(overlaps)


@criterion(13, "complex-activity half-plane bounds")
def test_complex_activity(record_property):
    violations = checks = 0
    for i, g in enumerate(random_graphs(100, 12, seed=13)):
        rng = stream(13, i)
        re = 3.0 * (1.0 - rng.random(100))
        im = rng.uniform(-3.0, 3.0, 100)
        for z in re + 1j * im:
            m = ExactModel(g, complex(z))
            for o in range(g.n):
                r = complex(m.monomer_probability(o))
                checks += 1
                violations += abs(r) > abs(z) / z.real * (1 + 1e-12) or not (r / z).real > 0
    record_property("detail", f"{checks} checks, {violations} violations")
    assert violations == 0


@criterion(14, "unimodularity identity")
def test_unimodularity_identity(record_property):
    zs = []
    for x in (0.5, 1.0, 2.0):
        res = fp.solve_fixed_point(POISSON2, x, 10**5, 100, 1e-3, 0)
        _, _, z = fp.unimodularity_identity_check(POISSON2, POISSON2, x, res.population, 10**5, 1)
        zs.append(z)
    record_property("detail", "z = " + ", ".join(f"{z:.2f}" for z in zs))
    assert all(abs(z) < 4 for z in zs)
