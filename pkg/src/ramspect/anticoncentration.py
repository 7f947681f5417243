"""Point-probability tools for weighted Bernoulli sums.

The object of study is X = sum_i a_i * xi_i + c with nonzero integer
coefficients and iid xi_i ~ Bernoulli(p).  For fixed p in (0,1) the largest
point mass of X is O(1/sqrt(n)), and that decay rate is what the scaling fit
measures empirically.

lo_exact_distribution computes the full pmf by dynamic programming over the
dense integer support (one vectorized shift-and-mix per coefficient), so its
cost is len(coefficients) * (sum |a_i| + 1).  The Monte-Carlo estimator exists
for instances past the exact cap and for cross-checking the DP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ParameterError

EXACT_WEIGHT_CAP = 10**6  # cap on sum |a_i| for the dense DP


@dataclass(frozen=True)
class LOInstance:
    """A weighted Bernoulli sum: coefficients, additive offset, success prob."""

    coefficients: tuple
    offset: int = 0
    p: float = 0.5

    def __post_init__(self):
        if not self.coefficients:
            raise ParameterError("need at least one coefficient")
        for a in self.coefficients:
            if not isinstance(a, int) or a == 0:
                raise ParameterError(f"coefficients must be nonzero integers, got {a!r}")
        if not 0.0 < self.p < 1.0:
            raise ParameterError(f"p must lie strictly inside (0,1), got {self.p}")

    @property
    def weight(self) -> int:
        return sum(abs(a) for a in self.coefficients)


@dataclass(frozen=True)
class LOPmf:
    """Dense pmf over the integer support [support_min, support_min + len - 1]."""

    support_min: int
    masses: np.ndarray = field(repr=False)

    def prob(self, x: int) -> float:
        i = x - self.support_min
        if 0 <= i < len(self.masses):
            return float(self.masses[i])
        return 0.0

    def max_mass(self) -> float:
        return float(self.masses.max())

    def argmax(self) -> int:
        return self.support_min + int(self.masses.argmax())

    def total(self) -> float:
        # fsum of the array; the DP keeps each entry nonnegative
        return math.fsum(self.masses.tolist())


def lo_exact_distribution(inst: LOInstance) -> LOPmf:
    """Exact pmf of the weighted Bernoulli sum via dense-range DP."""
    w = inst.weight
    if w > EXACT_WEIGHT_CAP:
        raise CapacityError(
            f"exact pmf needs a dense array of {w + 1} floats per step "
            f"(cap {EXACT_WEIGHT_CAP}); use lo_point_prob_mc instead"
        )
    neg = sum(-a for a in inst.coefficients if a < 0)
    f = np.zeros(w + 1, dtype=np.float64)
    f[neg] = 1.0  # index i holds Pr(X = support_min + i)
    p = inst.p
    q = 1.0 - p
    for a in inst.coefficients:
        if a > 0:
            f[a:] = f[a:] * q + f[:-a] * p
            f[:a] *= q
        else:
            b = -a
            f[:-b] = f[:-b] * q + f[b:] * p
            f[-b:] *= q
    pmf = LOPmf(inst.offset - neg, f)
    total = pmf.total()
    if abs(total - 1.0) > 1e-12:
        raise AssertionError(f"pmf mass drifted to {total!r}")
    return pmf


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    stderr: float
    trials: int
    hits: int
    workers: int


def lo_point_prob_mc(inst: LOInstance, x: int, trials: int, seed: int = 0,
                     workers: int = 1) -> MCEstimate:
    """Monte-Carlo estimate of Pr(X = x) with a binomial standard error.

    Each worker draws from its own generator seeded by (seed, worker index),
    so results are reproducible for a fixed worker count.
    """
    if trials < 1:
        raise ParameterError(f"trials must be positive, got {trials}")
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    a = np.asarray(inst.coefficients, dtype=np.int64)
    target = x - inst.offset
    per = [trials // workers + (1 if i < trials % workers else 0) for i in range(workers)]
    hits = 0
    for widx, t in enumerate(per):
        if t == 0:
            continue
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(widx,)))
        chunk = max(1, (1 << 22) // len(a))
        done = 0
        while done < t:
            b = min(chunk, t - done)
            draws = rng.random((b, len(a))) < inst.p
            sums = draws @ a
            hits += int(np.count_nonzero(sums == target))
            done += b
    est = hits / trials
    se = math.sqrt(max(est * (1.0 - est), 1.0 / trials) / trials)
    return MCEstimate(est, se, trials, hits, workers)


def _mc_max_mass(inst: LOInstance, trials: int, seed: int) -> float:
    """Empirical mode frequency; used only past the exact-DP cap."""
    a = np.asarray(inst.coefficients, dtype=np.int64)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    counts = {}
    chunk = max(1, (1 << 22) // len(a))
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        sums = (rng.random((b, len(a))) < inst.p) @ a
        vals, cnt = np.unique(sums, return_counts=True)
        for v, c in zip(vals.tolist(), cnt.tolist()):
            counts[v] = counts.get(v, 0) + c
        done += b
    return max(counts.values()) / trials


COEFF_MODELS = ("ones", "u3", "u10")


def model_coefficients(model: str, n: int, seed: int) -> tuple:
    """Deterministic coefficient families for the scaling study."""
    if model == "ones":
        return (1,) * n
    if model == "u3":
        lo, hi = 1, 3
    elif model == "u10":
        lo, hi = 1, 10
    else:
        raise ParameterError(f"unknown coefficient model {model!r}; choose from {COEFF_MODELS}")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(n,)))
    return tuple(int(v) for v in rng.integers(lo, hi + 1, size=n))


@dataclass(frozen=True)
class ScalingFit:
    n_values: tuple
    max_probs: tuple
    methods: tuple  # "exact" or "mc" per n
    slope: float
    stderr: float


def lo_scaling_fit(n_values, coeff_model: str = "ones", p: float = 0.5,
                   trials: int = 200_000, seed: int = 0,
                   exact_cap: int = EXACT_WEIGHT_CAP) -> ScalingFit:
    """Least-squares slope of log(max point mass) against log(n).

    Uses the exact DP whenever sum |a_i| fits under exact_cap and falls back
    to a Monte-Carlo mode estimate beyond it.
    """
    ns = sorted(set(int(n) for n in n_values))
    if len(ns) < 4:
        raise ParameterError("scaling fit needs at least 4 distinct values of n")
    if ns[0] < 1 or ns[-1] < 4 * ns[0]:
        raise ParameterError("scaling fit needs n values spanning at least two octaves")
    probs = []
    methods = []
    for n in ns:
        inst = LOInstance(model_coefficients(coeff_model, n, seed), 0, p)
        if inst.weight <= exact_cap:
            probs.append(lo_exact_distribution(inst).max_mass())
            methods.append("exact")
        else:
            probs.append(_mc_max_mass(inst, trials, seed))
            methods.append("mc")
    lx = np.log(np.asarray(ns, dtype=np.float64))
    ly = np.log(np.asarray(probs, dtype=np.float64))
    slope, resid_se = _least_squares_slope(lx, ly)
    return ScalingFit(tuple(ns), tuple(probs), tuple(methods), slope, resid_se)


def _least_squares_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Slope and its standard error for a simple linear regression."""
    xm = x - x.mean()
    sxx = float(xm @ xm)
    slope = float(xm @ (y - y.mean())) / sxx
    inter = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + inter)
    dof = max(len(x) - 2, 1)
    se = math.sqrt(float(resid @ resid) / dof / sxx)
    return slope, se
