"""Self-check suites run by ``monodimer validate``."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import exact, fixedpoint, tree
from .graph import RootedTree, sample_erdos_renyi, sample_galton_watson
from .offspring import OffspringDistribution
from .rng import spawn_seed

FAULTS = ("sign-flip",)


@dataclass
class SuiteResult:
    name: str
    minimum_cases: int
    cases: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures and self.cases >= self.minimum_cases

    def fail(self, seed, detail):
        self.failures.append({"seed": int(seed), "detail": detail})

    def as_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def random_graph(n, p, seed, index=0):
    return sample_erdos_renyi(n, min(p * n, n), seed, index)


def _close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def suite_exact(seed, cases=60):
    res = SuiteResult("exact", 50)
    for i in range(cases):
        s = spawn_seed(seed, 1, i)
        rng = np.random.default_rng(s)
        g = random_graph(int(rng.integers(1, 9)), float(rng.uniform(0.2, 0.8)), s)
        x = float(rng.choice([0.3, 1.0, 2.0]))
        res.cases += 1
        brute = sum(exact.configuration_weight(g, D, x) for D in exact.iter_matchings(g))
        model = exact.ExactModel(g, x)
        if not _close(model.partition_function(), brute):
            res.fail(s, f"partition function {model.partition_function()} != enumeration {brute}")
            continue
        for o in range(g.n):
            r = model.monomer_probability(o)
            if not (_close(r, model.recursion1(o)) and _close(r, model.recursion2(o))):
                res.fail(s, f"recursion identity at vertex {o}")
                break
        rsum = sum(model.monomer_probabilities())
        esum = sum(model.dimer_probabilities())
        if not _close((rsum + 2 * esum) / g.n, 1.0):
            res.fail(s, "sum rule")
        lo, hi = exact.pressure_bounds(g, x)
        p = model.pressure()
        if not (lo - 1e-12 <= p <= hi + 1e-12):
            res.fail(s, "pressure bounds")
    return res


def suite_tree(seed, cases=40):
    res = SuiteResult("tree", 30)
    P = OffspringDistribution.poisson(2.0)
    for i in range(cases):
        s = spawn_seed(seed, 2, i)
        t = sample_galton_watson(P, P, 8, s)
        for x in (0.1, 0.5, 1.0, 2.0):
            res.cases += 1
            try:
                tree.truncated_sequence(t, x, 8)
            except tree.InvariantError as exc:
                res.fail(s, f"truncated sequence at x={x}: {exc}")
        rng = np.random.default_rng(s)
        g = random_graph(int(rng.integers(2, 12)), float(rng.uniform(0.1, 0.4)), s)
        model = exact.ExactModel(g, 1.0)
        for o in range(g.n):
            b = tree.localisation_bounds(g, o, int(rng.integers(0, 3)), 1.0)
            r = model.monomer_probability(o)
            if (b.lower is not None and b.lower > r + 1e-12) or (b.upper is not None and b.upper < r - 1e-12):
                res.fail(s, f"localisation bounds miss R at vertex {o}")
        res.cases += 1
    return res


def suite_correlations(seed, cases=25, fault=None):
    res = SuiteResult("correlations", 20)
    transform = (lambda c: -c) if fault == "sign-flip" else None
    for i in range(cases):
        s = spawn_seed(seed, 3, i)
        n = int(np.random.default_rng(s).integers(2, 10))
        t = tree.random_weighted_tree(n, s)
        res.cases += 1
        bad = [r for r in tree.correlation_sign_report(t, transform=transform) if not r.sign_ok]
        if bad:
            b = bad[0]
            res.fail(s, f"{len(bad)} sign violations, first {b.kind} {b.a} {b.b} cov={b.covariance:.3g}")
        bad = [k for k, chk in enumerate(tree.tree_fundamental_sweep(t)) if not chk.holds]
        if bad:
            res.fail(s, f"fundamental inequality at {divmod(bad[0], n)}")
    return res


def suite_fixedpoint(seed, N=5000):
    res = SuiteResult("fixedpoint", 15)
    for k in (0, 1, 2, 3):
        for x in (0.5, 1.0, 2.0):
            res.cases += 1
            r = fixedpoint.solve_fixed_point(OffspringDistribution.fixed(k), x, 1000, 400, 1e-13, seed)
            if abs(r.estimate - fixedpoint.regular_cavity(x, k)) > 1e-6:
                res.fail(seed, f"fixed({k}) at x={x}: {r.estimate}")
    P = OffspringDistribution.poisson(2.0)
    for x in (0.5, 1.0, 2.0):
        res.cases += 1
        pops = [fixedpoint.Population.constant(x, N)]
        for _ in range(8):
            pops.append(fixedpoint.iterate_population(pops[-1], P, seed))
        m = np.array([p.mean() for p in pops])
        se = np.array([p.stderr() for p in pops])
        for d in range(len(pops) - 2):
            sign = 1 if d % 2 == 0 else -1
            if sign * (m[d + 2] - m[d]) > 3 * math.hypot(se[d], se[d + 2]):
                res.fail(seed, f"bracket monotonicity at x={x}, depth {d}")
        est = fixedpoint.pressure_general(P, P, x, pops[-1], N, seed)
        lo, hi = est.bounds(P.mean)
        if not (lo - 3 * est.standard_error <= est.value <= hi + 3 * est.standard_error):
            res.fail(seed, f"pressure bounds at x={x}")
    return res


SUITES = ("exact", "tree", "correlations", "fixedpoint")


def run_validation(seed=0, fault=None, suites=SUITES):
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; choose from {FAULTS}")
    runners = {
        "exact": lambda: suite_exact(seed),
        "tree": lambda: suite_tree(seed),
        "correlations": lambda: suite_correlations(seed, fault=fault),
        "fixedpoint": lambda: suite_fixedpoint(seed),
    }
    return [runners[name]() for name in suites]
