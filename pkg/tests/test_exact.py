import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monodimer import exact
from monodimer.exact import ExactModel
from monodimer.graph import Graph, disjoint_union

from graphgen import oracle_corpus


@st.composite
def small_graphs(draw, max_n=8, weighted=False):
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [p for p, keep in zip(pairs, mask) if keep]
    if not weighted:
        return Graph(n, np.array(edges, dtype=np.int64).reshape(-1, 2))
    pos = st.floats(0.1, 5.0)
    x = draw(st.lists(pos, min_size=n, max_size=n))
    w = draw(st.lists(pos, min_size=len(edges), max_size=len(edges)))
    return Graph(n, np.array(edges, dtype=np.int64).reshape(-1, 2), x, w)


def brute_z(g, x=None):
    return sum(exact.configuration_weight(g, D, x) for D in exact.iter_matchings(g))


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


class TestOracle:
    def test_matchings_of_small_graphs(self):
        assert len(exact.enumerate_matchings(Graph.path(2))) == 2
        assert len(exact.enumerate_matchings(Graph.complete(3))) == 4
        assert len(exact.enumerate_matchings(Graph.complete(4))) == 10
        assert len(exact.enumerate_matchings(Graph.empty(3))) == 1

    def test_matching_is_vertex_disjoint(self):
        with pytest.raises(exact.GraphError):
            exact.Matching(frozenset({(0, 1), (1, 2)}), 3)

    def test_enumeration_has_no_duplicates(self):
        ms = exact.enumerate_matchings(Graph.complete(6))
        assert len({m.edges for m in ms}) == len(ms) == 76

    @pytest.mark.parametrize(
        "g, z",
        [(Graph.path(2), 2), (Graph.complete(3), 4), (Graph.complete(4), 10), (Graph.empty(0), 1)],
    )
    def test_known_values_at_unit_activity(self, g, z):
        assert exact.partition_function(g, 1.0) == z

    def test_edge_polynomial(self):
        for x in (0.3, 1.0, 2.0):
            assert exact.partition_function(Graph.path(2), x) == pytest.approx(x * x + 1, rel=1e-15)

    def test_corpus_agrees_with_enumeration(self):
        for g in oracle_corpus()[::7]:
            for x in (0.3, 1.0, 2.0):
                assert rel(exact.partition_function(g, x), brute_z(g, x)) <= 1e-12

    def test_integer_coefficients(self):
        for g in oracle_corpus()[::11]:
            counts = np.bincount([m.dimers for m in exact.iter_matchings(g)]).tolist()
            assert exact.matching_polynomial(g) == counts

    def test_exact_rational_mode(self):
        g = Graph.cycle(5)
        z = ExactModel(g, Fraction(1, 3)).partition_function()
        coeffs = exact.matching_polynomial(g)
        assert z == exact.evaluate_matching_polynomial(coeffs, g.n, Fraction(1, 3))


@settings(max_examples=60, deadline=None)
@given(small_graphs(), st.sampled_from([0.3, 1.0, 2.0]))
def test_partition_function_matches_enumeration(g, x):
    assert rel(exact.partition_function(g, x), brute_z(g, x)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(small_graphs(max_n=7, weighted=True))
def test_weighted_partition_function_matches_enumeration(g):
    assert rel(exact.partition_function_general(g), brute_z(g)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(small_graphs(max_n=7, weighted=True))
def test_weighted_recursions(g):
    m = ExactModel(g)
    for o in range(g.n):
        r = m.monomer_probability(o)
        assert 0 < r <= 1 + 1e-15
        assert m.recursion1(o) == pytest.approx(r, rel=1e-12)
        assert m.recursion2(o) == pytest.approx(r, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(small_graphs(max_n=6), small_graphs(max_n=5), st.floats(0.2, 3.0))
def test_factorises_over_components(a, b, x):
    z = exact.partition_function(disjoint_union(a, b), x)
    assert z == pytest.approx(exact.partition_function(a, x) * exact.partition_function(b, x), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(small_graphs(), st.floats(0.1, 4.0), st.floats(0.1, 4.0))
def test_scaling_of_dimer_weight(g, x, w):
    # Z(x, w) = w^(n/2) Z(x / sqrt(w), 1)
    lhs = ExactModel(Graph(g.n, g.edges, np.full(g.n, x), np.full(g.m, w))).partition_function()
    rhs = w ** (g.n / 2) * exact.partition_function(g, x / math.sqrt(w))
    assert lhs == pytest.approx(rhs, rel=1e-11)


@settings(max_examples=50, deadline=None)
@given(small_graphs(), st.floats(0.05, 5.0))
def test_sum_rule_and_bounds(g, x):
    m = ExactModel(g, x)
    R = m.monomer_probabilities()
    E = m.dimer_probabilities()
    assert (sum(R) + 2 * sum(E)) / g.n == pytest.approx(1.0, abs=1e-12)
    assert m.density() == pytest.approx(sum(R) / g.n, abs=1e-15)
    lo, hi = exact.pressure_bounds(g, x)
    assert lo - 1e-12 <= m.pressure() <= hi + 1e-12


def test_density_is_log_derivative():
    g = Graph.from_edges([(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)])
    for x in (0.5, 1.0, 2.0):
        assert exact.density_by_finite_difference(g, x) == pytest.approx(exact.monomer_density(g, x), abs=1e-8)


class TestProbabilities:
    def test_edge(self):
        g = Graph.path(2)
        assert exact.monomer_probability(g, 0, 1.0) == 0.5
        assert exact.dimer_probability(g, (0, 1), 1.0) == 0.5
        assert exact.monomer_monomer_covariance(g, 0, 1, 1.0) == pytest.approx(0.25)

    def test_path_of_three(self):
        g = Graph.path(3)
        assert exact.monomer_monomer_covariance(g, 0, 2, 1.0) == pytest.approx(-1 / 9)
        assert exact.monomer_dimer_covariance(g, 0, (1, 2), 1.0) == pytest.approx(1 / 9)

    def test_exact_covariances_are_rational(self):
        m = ExactModel(Graph.path(3), 1, exact=True)
        assert m.monomer_monomer_covariance(0, 2) == Fraction(-1, 9)

    def test_isolated_vertex_is_always_a_monomer(self):
        g = Graph.from_edges([(0, 1)], n=3)
        assert exact.monomer_probability(g, 2, 0.7) == pytest.approx(1.0)

    def test_vertex_outside_subgraph(self):
        m = ExactModel(Graph.path(3), 1.0)
        with pytest.raises(exact.GraphError):
            m.monomer_probability(0, mask=0b110)


class TestComplexActivity:
    def test_matches_real_axis(self):
        g = Graph.cycle(5)
        assert exact.complex_monomer_probability(g, 0, 1.3 + 0j) == pytest.approx(exact.monomer_probability(g, 0, 1.3))

    @settings(max_examples=60, deadline=None)
    @given(small_graphs(), st.floats(0.01, 3.0), st.floats(-5.0, 5.0))
    def test_half_plane_bounds(self, g, re, im):
        z = complex(re, im)
        for o in range(g.n):
            r = exact.complex_monomer_probability(g, o, z)
            assert abs(r) <= abs(z) / z.real * (1 + 1e-12)
            assert (r / z).real > 0

    def test_rejects_left_half_plane(self):
        with pytest.raises(exact.ActivityError):
            exact.complex_monomer_probability(Graph.path(2), 0, -0.5 + 1j)


class TestErrors:
    def test_nonpositive_activity(self):
        for x in (0.0, -1.0):
            with pytest.raises(exact.ActivityError):
                exact.partition_function(Graph.path(2), x)

    def test_oversize_non_forest(self):
        with pytest.raises(exact.SizeError):
            exact.partition_function(Graph.cycle(30), 1.0)

    def test_large_forest_goes_through_tree_pass(self):
        g = Graph.path(200)
        big = exact.log_partition_function(g, 1.0)
        # Z(path_n) at x = 1 is the Fibonacci number F(n+1)
        a, b = 1, 1
        for _ in range(200):
            a, b = b, a + b
        assert big == pytest.approx(math.log(a), rel=1e-12)

    def test_empty_graph(self):
        assert exact.partition_function(Graph.empty(0), 1.0) == 1
        with pytest.raises(exact.GraphError):
            exact.pressure_per_particle(Graph.empty(0), 1.0)
