"""Population dynamics for the limiting cavity equations on Galton-Watson trees."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import gather_sums
from .offspring import DistributionError, OffspringDistribution, total_variation, unimodular_offspring
from .rng import spawn_seed, stream

DEFAULT_POPULATION = 10**5
DEFAULT_DEPTH = 200
DEFAULT_TOL = 1e-3
SMALL_X = 0.1
UNIMODULAR_TV = 1e-9

_ITER, _ROOT, _PAIR, _PRESS, _IDENT = 0x4954, 0x524F, 0x5041, 0x5052, 0x4944


class ConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True, eq=False)
class Population:
    """A pool of cavity samples at a given iteration depth."""

    samples: np.ndarray
    x: float
    depth: int = 0
    init: str = "ones"

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", s)
        if not self.x > 0:
            raise ValueError("activity must be positive")
        if s.size and (s.min() < 0 or s.max() > 1):
            raise ValueError("population samples must lie in [0, 1]")

    @classmethod
    def constant(cls, x, size, value=1.0):
        return cls(np.full(int(size), float(value)), x, 0, "ones" if value == 1 else f"const:{value}")

    @property
    def size(self):
        return self.samples.size

    def mean(self):
        return float(self.samples.mean())

    def stderr(self):
        return float(self.samples.std(ddof=1) / math.sqrt(self.size)) if self.size > 1 else 0.0


def _draw(rho, size, seed, *keys):
    """Offspring counts and uniform pool indices for one generation."""
    rng = stream(seed, *keys)
    counts = rho.sample(rng, size)
    picks = rng.integers(0, size, size=int(counts.sum()))
    return counts, picks


def _update(samples, x, counts, picks):
    x2 = x * x
    return x2 / (x2 + gather_sums(samples, counts, picks))


def iterate_population(pop, rho, seed):
    """One synchronous generation X <- x^2 / (x^2 + X_1 + ... + X_K).

    Draws depend only on ``(seed, depth)`` so pools with different
    contents at the same depth share their randomness.
    """
    counts, picks = _draw(rho, pop.size, seed, _ITER, pop.depth)
    return Population(_update(pop.samples, pop.x, counts, picks), pop.x, pop.depth + 1, pop.init)


@dataclass(frozen=True)
class FixedPointResult:
    x: float
    mean_even: float
    mean_odd: float
    estimate: float
    gap: float
    population_size: int
    depth: int
    seed: int
    status: str
    stderr: float
    population_even: Population = field(repr=False)
    population_odd: Population = field(repr=False)

    @property
    def uncertainty(self):
        return self.gap / 2 + self.stderr

    @property
    def population(self):
        """The pool at the final depth."""
        return self.population_even if self.depth % 2 == 0 else self.population_odd

    def row(self):
        return dict(
            x=self.x, mean_even=self.mean_even, mean_odd=self.mean_odd, estimate=self.estimate,
            gap=self.gap, N=self.population_size, depth=self.depth, seed=self.seed,
        )


def solve_fixed_point(rho, x, N=DEFAULT_POPULATION, r_max=DEFAULT_DEPTH, tol=DEFAULT_TOL, seed=0):
    """Iterate from the all-ones pool until the even/odd gap drops below ``tol``.

    Even depths overestimate the cavity variable and odd depths
    underestimate it.  Not reaching ``tol`` within ``r_max`` is reported
    through ``status`` rather than raised.
    """
    if not x > 0:
        raise ValueError("activity must be positive")
    if N < 1 or r_max < 1:
        raise ValueError("need N >= 1 and r_max >= 1")
    pops = [Population.constant(x, N), None]
    pop = pops[0]
    while pop.depth < r_max:
        pop = iterate_population(pop, rho, seed)
        pops[pop.depth % 2] = pop
        if pops[0].mean() - pops[1].mean() < tol:
            break
    even, odd = pops
    me, mo = even.mean(), odd.mean()
    gap = me - mo
    if x <= SMALL_X:
        status = "bracket-only"
    else:
        status = "converged" if gap < tol else "not-converged"
    se = max(even.stderr(), odd.stderr())
    return FixedPointResult(x, me, mo, (me + mo) / 2, gap, N, pop.depth, seed, status, se, even, odd)


def _push_through(P, pop, M, seed, *keys):
    rng = stream(seed, *keys)
    counts = P.sample(rng, M)
    picks = rng.integers(0, pop.size, size=int(counts.sum()))
    return counts, picks


def _se(variance, M, N):
    """Standard error of a pool functional from M draws out of a pool of N.

    The pool is itself a finite sample of the cavity law, which adds a
    variance/N term on top of the resampling noise.
    """
    return math.sqrt(variance * (1.0 / M + 1.0 / N)) if M > 1 else 0.0


def _mean_se(a, N):
    return float(a.mean()), _se(a.var(ddof=1), a.size, N) if a.size > 1 else 0.0


def root_samples(P, pop, M, seed):
    counts, picks = _push_through(P, pop, M, seed, _ROOT, pop.depth)
    return _update(pop.samples, pop.x, counts, picks)


def root_density(P, rho, x, pop, M=DEFAULT_POPULATION, seed=0):
    """Monte-Carlo E[Y], Y = x^2 / (x^2 + X_1 + ... + X_D), D ~ P."""
    if pop.x != x:
        raise ValueError("population activity differs from x")
    return _mean_se(root_samples(P, pop, M, seed), pop.size)


@dataclass(frozen=True)
class LimitDensity:
    x: float
    lower: float
    upper: float
    lower_se: float
    upper_se: float

    @property
    def estimate(self):
        return (self.lower + self.upper) / 2


def density_bracket(P, rho, result, M=DEFAULT_POPULATION, seed=0):
    """Bracket on the limiting density from a solved pool pair.

    Pushing an even-depth pool through the root law gives an odd-depth tree,
    hence the lower bound, and vice versa.
    """
    lo, lo_se = root_density(P, rho, result.x, result.population_even, M, seed)
    up, up_se = root_density(P, rho, result.x, result.population_odd, M, seed)
    return LimitDensity(result.x, lo, up, lo_se, up_se)


@dataclass(frozen=True)
class CurvePoint:
    x: float
    r: int
    parity: str
    mean: float
    stderr: float


def bounds_curve(P, rho, x_grid, r_list, N=10**4, seed=0):
    """Depth-r bounds on the density for each x: the depth-(r-1) pool pushed through P.

    Every x uses the same random draws, so curves are smooth in x.
    """
    r_list = sorted(int(r) for r in r_list)
    if r_list[0] < 1:
        raise ValueError("depths must be >= 1")
    rows = []
    for x in x_grid:
        if not x > 0:
            raise ValueError("grid activities must be positive")
        pop = Population.constant(x, N)
        for r in r_list:
            while pop.depth < r - 1:
                pop = iterate_population(pop, rho, seed)
            mean, se = _mean_se(root_samples(P, pop, N, seed), N)
            rows.append(CurvePoint(float(x), r, "even" if r % 2 == 0 else "odd", mean, se))
    return rows


def default_x_grid():
    return [0.01] + [round(0.1 * k, 10) for k in range(1, 21)]


# -- pressure ------------------------------------------------------------
@dataclass(frozen=True)
class PressureEstimate:
    x: float
    value: float
    standard_error: float
    formula: str

    def bounds(self, mean_degree):
        lo = math.log(self.x)
        return lo, lo + mean_degree / 2 * math.log1p(1 / self.x**2)

    def row(self):
        return dict(x=self.x, value=self.value, stderr=self.standard_error, formula=self.formula)


def check_unimodular(P, rho, tol=UNIMODULAR_TV):
    if P.mean == 0:
        return
    d = total_variation(unimodular_offspring(P), rho)
    if d > tol:
        raise DistributionError(f"offspring law is not the size-biased shift of the root law (TV {d:.3g})")


def _pair_term(pop, M, seed):
    rng = stream(seed, _PAIR, pop.depth)
    a = pop.samples[rng.integers(0, pop.size, size=M)]
    b = pop.samples[rng.integers(0, pop.size, size=M)]
    return a * b / (pop.x * pop.x)


def pressure_general(P, rho, x, pop, M=DEFAULT_POPULATION, seed=0):
    """E[log(x + sum_i X_i / x)] - (mean(P)/2) E[log(1 + X_1 X_2 / x^2)]."""
    check_unimodular(P, rho)
    counts, picks = _push_through(P, pop, M, seed, _PRESS, pop.depth)
    s = gather_sums(pop.samples, counts, picks)
    a = np.log(x + s / x)
    b = np.log1p(_pair_term(pop, M, seed))
    half = P.mean / 2
    value = a.mean() - half * b.mean()
    se = _se(a.var(ddof=1) + half**2 * b.var(ddof=1), M, pop.size) if M > 1 else 0.0
    return PressureEstimate(x, float(value), se, "general")


def pressure_er(c, x, pop, M=DEFAULT_POPULATION, seed=0):
    """-E[log(Y/x)] - (c/2) E[log(1 + Y_1 Y_2 / x^2)] with Y drawn from the pool."""
    rng = stream(seed, _PRESS, pop.depth, 1)
    y = pop.samples[rng.integers(0, pop.size, size=M)]
    a = -np.log(y / x)
    b = np.log1p(_pair_term(pop, M, seed))
    value = a.mean() - c / 2 * b.mean()
    se = _se(a.var(ddof=1) + (c / 2) ** 2 * b.var(ddof=1), M, pop.size) if M > 1 else 0.0
    return PressureEstimate(x, float(value), se, "erdos_renyi")


def unimodularity_identity_check(P, rho, x, pop, M=DEFAULT_POPULATION, seed=0):
    """Both sides of E[S / (x^2 + S)] = mean(P) E[t / (1 + t)], t = X_1 X_2 / x^2.

    Returns ``(lhs, rhs, z_score)``.
    """
    check_unimodular(P, rho)
    counts, picks = _push_through(P, pop, M, seed, _IDENT, pop.depth)
    s = gather_sums(pop.samples, counts, picks)
    a = s / (x * x + s)
    t = _pair_term(pop, M, seed + 1)
    b = P.mean * (t / (1 + t))
    lhs, rhs = float(a.mean()), float(b.mean())
    se = _se(a.var(ddof=1) + b.var(ddof=1), M, pop.size) if M > 1 else 0.0
    diff = lhs - rhs
    if se == 0:
        z = 0.0 if abs(diff) <= 1e-12 else math.copysign(math.inf, diff)
    else:
        z = diff / se
    return lhs, rhs, z


# -- diagnostics -------------------------------------------------------------
@dataclass(frozen=True)
class ContractionResult:
    rate: float
    stderr: float
    bound: float
    replicates: int


def contraction_diagnostic(rho, x, N=10**4, seed=0, double_steps=3, replicates=16):
    """Empirical two-step contraction of coupled pools started at 1 and 0.

    Both pools consume identical draws; the rate is the mean ratio of
    successive double-step distances mean|A - B|, averaged over replicates.
    """
    bound = rho.mean**2 / x**4
    rates = []
    for rep in range(replicates):
        s = spawn_seed(seed, rep)
        a = Population.constant(x, N, 1.0)
        b = Population.constant(x, N, 0.0)
        dist = [1.0]
        for _ in range(2 * double_steps):
            a, b = iterate_population(a, rho, s), iterate_population(b, rho, s)
            dist.append(float(np.abs(a.samples - b.samples).mean()))
        ratios = [dist[k + 2] / dist[k] if dist[k] > 0 else 0.0 for k in range(0, 2 * double_steps, 2)]
        rates.append(np.mean(ratios))
    rates = np.array(rates)
    se = float(rates.std(ddof=1) / math.sqrt(rates.size)) if rates.size > 1 else 0.0
    return ContractionResult(float(rates.mean()), se, bound, replicates)


@dataclass(frozen=True)
class DerivativeCheck:
    x: float
    finite_difference: float
    density_over_x: float
    stderr: float

    @property
    def z_score(self):
        d = self.finite_difference - self.density_over_x
        return 0.0 if self.stderr == 0 and d == 0 else d / self.stderr


def pressure_derivative_check(P, rho, x, N=2 * 10**4, M=10**5, seed=0, h=None, replicates=8, r_max=60):
    """Central difference of the pressure against density / x.

    Each replicate uses common random numbers at x - h, x and x + h; the
    spread across replicates gives the standard error.
    """
    h = 1e-3 * x if h is None else h
    fd, dens = [], []
    for rep in range(replicates):
        s = spawn_seed(seed, rep)
        p = []
        for xx in (x - h, x + h):
            res = solve_fixed_point(rho, xx, N, r_max, 0.0, s)
            p.append(pressure_general(P, rho, xx, res.population, M, s).value)
        fd.append((p[1] - p[0]) / (2 * h))
        res = solve_fixed_point(rho, x, N, r_max, 0.0, s)
        dens.append(root_density(P, rho, x, res.population, M, s)[0] / x)
    diff = np.array(fd) - np.array(dens)
    se = float(diff.std(ddof=1) / math.sqrt(replicates)) if replicates > 1 else 0.0
    return DerivativeCheck(x, float(np.mean(fd)), float(np.mean(dens)), se)


def regular_cavity(x, k):
    """Fixed point of X = x^2 / (x^2 + k X)."""
    if k == 0:
        return 1.0
    x2 = x * x
    return (-x2 + math.sqrt(x2 * x2 + 4 * k * x2)) / (2 * k)


def as_offspring(spec):
    if isinstance(spec, OffspringDistribution):
        return spec
    from .offspring import parse_offspring

    return parse_offspring(spec)
