"""Offspring laws on the nonnegative integers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TAIL_MASS = 1e-14
PMF_TOL = 1e-12

KINDS = ("poisson", "fixed", "geometric", "explicit")


class DistributionError(ValueError):
    pass


def _poisson_pmf(mean):
    if mean == 0:
        return np.array([1.0])
    pmf = []
    log_p = -mean
    k = 0
    cum = 0.0
    while True:
        p = math.exp(log_p)
        pmf.append(p)
        cum += p
        # stop past the mode once the remaining tail is negligible
        if k > mean and 1.0 - cum < TAIL_MASS:
            break
        k += 1
        log_p += math.log(mean) - math.log(k)
        if k > 10 * mean + 1000:
            break
    return np.asarray(pmf)


def _geometric_pmf(p):
    # number of failures before the first success: P_k = (1-p)^k p
    if p == 1.0:
        return np.array([1.0])
    q = 1.0 - p
    kmax = int(math.ceil(math.log(TAIL_MASS) / math.log(q)))
    k = np.arange(kmax + 1)
    return p * q**k


@dataclass(frozen=True)
class OffspringDistribution:
    """A law on {0, 1, 2, ...}.

    ``pmf`` is always materialised (Poisson and geometric laws are truncated
    where the tail mass drops below 1e-14 and renormalised), so sampling is
    by inversion on a stored table for every kind.
    """

    kind: str
    param: float
    pmf: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DistributionError(f"unknown kind {self.kind!r}")
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.ndim != 1 or pmf.size == 0 or np.any(pmf < 0) or not np.all(np.isfinite(pmf)):
            raise DistributionError("pmf must be a nonempty vector of nonnegative reals")
        pmf.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)

    @classmethod
    def poisson(cls, mean):
        if not mean >= 0 or not math.isfinite(mean):
            raise DistributionError("Poisson mean must be finite and >= 0")
        pmf = _poisson_pmf(float(mean))
        return cls("poisson", float(mean), pmf / pmf.sum())

    @classmethod
    def fixed(cls, k):
        k = int(k)
        if k < 0:
            raise DistributionError("fixed offspring count must be >= 0")
        pmf = np.zeros(k + 1)
        pmf[k] = 1.0
        return cls("fixed", float(k), pmf)

    @classmethod
    def geometric(cls, p):
        if not 0 < p <= 1:
            raise DistributionError("geometric success probability must lie in (0, 1]")
        pmf = _geometric_pmf(float(p))
        return cls("geometric", float(p), pmf / pmf.sum())

    @classmethod
    def explicit(cls, pmf):
        pmf = np.asarray(pmf, dtype=float)
        if pmf.ndim != 1 or pmf.size == 0:
            raise DistributionError("pmf must be a nonempty vector")
        if np.any(pmf < 0):
            raise DistributionError("pmf entries must be nonnegative")
        if abs(pmf.sum() - 1.0) > PMF_TOL:
            raise DistributionError(f"pmf sums to {pmf.sum()!r}, not 1")
        nz = np.flatnonzero(pmf)
        pmf = pmf[: nz[-1] + 1] if nz.size else pmf[:1]
        return cls("explicit", float("nan"), pmf)

    @property
    def mean(self):
        if self.kind in ("poisson", "fixed"):
            return self.param
        if self.kind == "geometric":
            return (1.0 - self.param) / self.param
        return float(np.dot(np.arange(self.pmf.size), self.pmf))

    @property
    def support_max(self):
        return self.pmf.size - 1

    @property
    def cdf(self):
        c = np.cumsum(self.pmf)
        return c / c[-1]

    def prob(self, k):
        return float(self.pmf[k]) if 0 <= k < self.pmf.size else 0.0

    def sample(self, rng, size):
        """Inversion sampling: ``size`` iid draws as an int64 array."""
        if self.pmf.size == 1:
            return np.zeros(size, dtype=np.int64)
        if self.kind == "fixed":
            return np.full(size, int(self.param), dtype=np.int64)
        u = rng.random(size)
        cdf = self.cdf
        k = np.searchsorted(cdf, u, side="right")
        return np.minimum(k, cdf.size - 1).astype(np.int64)

    def to_text(self):
        """Short textual form, inverse of :func:`parse_offspring`."""
        if self.kind == "poisson":
            return f"poisson:{self.param:g}"
        if self.kind == "fixed":
            return f"fixed:{int(self.param)}"
        if self.kind == "geometric":
            return f"geom:{self.param:g}"
        return "pmf:[" + ",".join(f"{p:.17g}" for p in self.pmf) + "]"


def total_variation(a, b):
    """TV distance between two laws (or raw pmf vectors) on the integers."""
    pa = a.pmf if isinstance(a, OffspringDistribution) else np.asarray(a, float)
    pb = b.pmf if isinstance(b, OffspringDistribution) else np.asarray(b, float)
    n = max(pa.size, pb.size)
    pa = np.pad(pa, (0, n - pa.size))
    pb = np.pad(pb, (0, n - pb.size))
    return 0.5 * float(np.abs(pa - pb).sum())


def unimodular_offspring(P):
    """Size-biased shift: rho_k = (k+1) P_{k+1} / mean(P).

    This is the offspring law of non-root vertices in the local limit of
    graphs whose degree law is ``P``.
    """
    pmf = P.pmf
    k = np.arange(pmf.size)
    mass = k * pmf
    total = mass.sum()
    if not total > 0:
        raise DistributionError("unimodular shift needs a law with positive mean")
    rho = mass[1:] / total
    if rho.size == 0:
        rho = np.array([1.0])
    rho = rho / rho.sum()
    return OffspringDistribution.explicit(rho)


def parse_offspring(text):
    """Parse ``poisson:c``, ``fixed:k``, ``geom:p`` or ``pmf:FILE|[p0,p1,...]``."""
    try:
        kind, _, arg = text.partition(":")
        kind = kind.strip().lower()
        if kind == "poisson":
            return OffspringDistribution.poisson(float(arg))
        if kind == "fixed":
            return OffspringDistribution.fixed(int(arg))
        if kind in ("geom", "geometric"):
            return OffspringDistribution.geometric(float(arg))
        if kind == "pmf":
            arg = arg.strip()
            if arg.startswith("["):
                import json

                values = json.loads(arg)
            else:
                with open(arg) as fh:
                    raw = fh.read().strip()
                if raw.startswith("["):
                    import json

                    values = json.loads(raw)
                else:
                    values = [float(t) for t in raw.replace(",", " ").split()]
            return OffspringDistribution.explicit(values)
    except (ValueError, OSError) as exc:
        raise DistributionError(f"bad offspring law {text!r}: {exc}") from exc
    raise DistributionError(f"bad offspring law {text!r}")
