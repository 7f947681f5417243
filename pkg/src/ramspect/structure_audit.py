"""Richness and diversity audits.

A graph is (delta, eps)-rich when for every vertex set W with |W| >= delta*n,
at most n^delta vertices see fewer than eps*|W| neighbors or fewer than
eps*|W| non-neighbors inside W.  Richness cannot be decided exhaustively
beyond toy sizes, so richness_audit drives a deterministic-then-random
candidate family under a budget and reports the first violation it finds;
exhaustive=True enumerates every W (tiny n only) and decides exactly.

Diversity counts, for each vertex, how many others have a nearly identical
neighborhood; the pair variant does the same for vertex pairs with multiset
neighborhoods, and close_complement_pair_count counts pairs whose
neighborhoods nearly complement each other.  Rich graphs keep all of these
counts polynomially small, which is what the audits let an experiment check.

rich_extract mirrors the proof-style cleanup loop: while a richness violation
(W, Y) exists, keep the side of Y that is sparse (or dense) toward W, drop it
from W, and keep only vertices with the matching density toward the dropped
set.  Each such round retains at least a (delta/4) fraction; a graph that
keeps yielding witnesses for K rounds is reported as far from Ramsey-like.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import CapacityError, ParameterError
from .graph_core import Graph, Unit, induced_subgraph, iter_bits, mask_of, symdiff_size

RICHNESS_EXHAUSTIVE_CAP = 14


@dataclass(frozen=True)
class AuditParams:
    epsilon: float = 0.2
    delta: float = 0.3
    c_div: float = 0.1
    alpha: float = 0.6
    sample_budget: int = 500
    k_rounds: int = 8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.5:
            raise ParameterError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if not 0.0 < self.delta <= 0.5:
            raise ParameterError(f"delta must lie in (0, 1/2], got {self.delta}")
        if self.c_div <= 0:
            raise ParameterError(f"c_div must be positive, got {self.c_div}")
        if self.alpha < 2 * self.delta:
            raise ParameterError(
                f"alpha must be at least 2*delta, got {self.alpha} < {2 * self.delta}")
        if self.sample_budget < 1:
            raise ParameterError("sample_budget must be >= 1")
        if self.k_rounds < 1:
            raise ParameterError("k_rounds must be >= 1")


def density_bounds_check(g: Graph, epsilon: float) -> tuple[float, bool]:
    """Edge density and whether it lies within [eps, 1-eps]."""
    if not 0.0 < epsilon < 0.5:
        raise ParameterError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    top = g.n * (g.n - 1) // 2
    if top == 0:
        return 0.0, False
    density = g.edge_count() / top
    return density, epsilon <= density <= 1.0 - epsilon


def diversity_profile(g: Graph, c_div: float) -> list[int]:
    """For each vertex, the number of others with symdiff(N(x), N(y)) < c_div*n."""
    if c_div <= 0:
        raise ParameterError(f"c_div must be positive, got {c_div}")
    thr = c_div * g.n
    adj = g.adj
    counts = [0] * g.n
    for x in range(g.n):
        rx = adj[x]
        for y in range(x + 1, g.n):
            if (rx ^ adj[y]).bit_count() < thr:
                counts[x] += 1
                counts[y] += 1
    return counts


def is_diverse(g: Graph, c_div: float, delta: float) -> bool:
    """(c, delta)-diversity: every per-vertex close-neighborhood count <= n^delta."""
    counts = diversity_profile(g, c_div)
    return max(counts, default=0) <= g.n ** delta


def close_complement_pair_count(g: Graph, threshold_fraction: float) -> int:
    """Pairs {x1,x2} whose neighborhoods nearly complement each other:
    |N(x1) symdiff N_bar(x2)| < threshold_fraction * n."""
    if threshold_fraction <= 0:
        raise ParameterError("threshold_fraction must be positive")
    thr = threshold_fraction * g.n
    count = 0
    for x1 in range(g.n):
        for x2 in range(x1 + 1, g.n):
            d = symdiff_size(g, Unit.single(x1), Unit.single(x2), compl_y=True)
            if d < thr:
                count += 1
    return count


@dataclass(frozen=True)
class PairWitness:
    center: Unit
    family: tuple  # pairwise-disjoint units with nearly identical neighborhoods


def pair_diversity_witness(g: Graph, c_div: float, delta: float,
                           alpha: float) -> PairWitness | None:
    """First violation of (c, delta, alpha)_2 pair diversity, if any.

    A violation is a pair x with |N(x1) symdiff N_bar(x2)| >= alpha*n for
    which more than n^delta pairwise-disjoint pairs y (also disjoint from x)
    satisfy |N(x) symdiff N(y)| < c_div*n in the multiset sense.
    """
    if alpha < 2 * delta:
        raise ParameterError(f"alpha must be at least 2*delta, got {alpha}")
    n = g.n
    adj = g.adj
    thr_close = c_div * n
    thr_alpha = alpha * n
    need = math.floor(n ** delta) + 1  # strictly more than n^delta
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    rows1 = [adj[a] ^ adj[b] for a, b in pairs]  # multiplicity-1 masks
    rows2 = [adj[a] & adj[b] for a, b in pairs]  # multiplicity-2 masks
    bc = int.bit_count
    for xi, (a, b) in enumerate(pairs):
        if symdiff_size(g, Unit.single(a), Unit.single(b), compl_y=True) < thr_alpha:
            continue
        x1, x2 = rows1[xi], rows2[xi]
        close = []
        for yi, (cy, dy) in enumerate(pairs):
            if yi == xi:
                continue
            y1, y2 = rows1[yi], rows2[yi]
            g2 = (x2 & ~(y2 | y1)) | (y2 & ~(x2 | x1))
            g1 = (x2 & y1) | (x1 & y2) | (x1 & ~(y2 | y1)) | (y1 & ~(x2 | x1))
            if bc(g1) + 2 * bc(g2) < thr_close:
                close.append(yi)
        if len(close) < need:
            continue  # even ignoring disjointness there are too few
        xmask = (1 << a) | (1 << b)
        used = xmask
        family = []
        for yi in close:
            cy, dy = pairs[yi]
            ym = (1 << cy) | (1 << dy)
            if ym & used:
                continue
            used |= ym
            family.append(Unit.pair(cy, dy))
            if len(family) >= need:
                return PairWitness(Unit.pair(a, b), tuple(family))
    return None


# ── richness ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class RichnessVerdict:
    status: str  # "witness_found" | "no_witness_in_budget"
    witness_w: int = 0  # masks; empty when no witness
    witness_y: int = 0
    budget_used: int = 0
    exhaustive: bool = False

    @property
    def found(self) -> bool:
        return self.status == "witness_found"


def _bad_vertices(g: Graph, wmask: int, epsilon: float) -> int:
    """Mask of vertices with too few neighbors or non-neighbors inside W."""
    thr = epsilon * wmask.bit_count()
    bad = 0
    for v in range(g.n):
        if (g.adj[v] & wmask).bit_count() < thr or (g.comp_row(v) & wmask).bit_count() < thr:
            bad |= 1 << v
    return bad


def _candidate_sets(g: Graph, delta: float, budget: int, seed: int):
    """Deterministic candidates first, then seeded random sets, budget total."""
    wmin = math.ceil(delta * g.n)
    emitted = 0
    degs = g.degrees()
    for v in range(g.n):
        if emitted >= budget:
            return
        if degs[v] >= wmin:
            emitted += 1
            yield g.adj[v]
    for v in range(g.n):
        if emitted >= budget:
            return
        if g.n - 1 - degs[v] >= wmin:
            emitted += 1
            yield g.comp_row(v)
    order = sorted(range(g.n), key=lambda v: (-degs[v], v))
    prefix = 0
    for i, v in enumerate(order):
        prefix |= 1 << v
        if i + 1 >= wmin:
            if emitted >= budget:
                return
            emitted += 1
            yield prefix
    rng = random.Random(seed)
    sizes = sorted({wmin, min(g.n, 2 * wmin), max(wmin, g.n // 2)})
    verts = list(range(g.n))
    while emitted < budget:
        for size in sizes:
            if emitted >= budget:
                return
            emitted += 1
            yield mask_of(rng.sample(verts, size))


def richness_audit(g: Graph, params: AuditParams, exhaustive: bool = False) -> RichnessVerdict:
    """Search for a witness against (delta, eps)-richness.

    A witness is a set W, |W| >= delta*n, for which strictly more than
    n^delta vertices are bad (few neighbors or few non-neighbors in W).
    exhaustive=True enumerates all W and therefore decides richness.
    """
    n = g.n
    limit = n ** params.delta
    wmin = math.ceil(params.delta * n)
    if exhaustive:
        if n > RICHNESS_EXHAUSTIVE_CAP:
            raise CapacityError(
                f"exhaustive richness enumerates 2^n candidate sets; capped at "
                f"n={RICHNESS_EXHAUSTIVE_CAP}, got n={n}")
        tried = 0
        for w in range(1 << n):
            if w.bit_count() < wmin:
                continue
            tried += 1
            bad = _bad_vertices(g, w, params.epsilon)
            if bad.bit_count() > limit:
                return RichnessVerdict("witness_found", w, bad, tried, True)
        return RichnessVerdict("no_witness_in_budget", 0, 0, tried, True)
    tried = 0
    for w in _candidate_sets(g, params.delta, params.sample_budget, params.seed):
        tried += 1
        bad = _bad_vertices(g, w, params.epsilon)
        if bad.bit_count() > limit:
            return RichnessVerdict("witness_found", w, bad, tried, False)
    return RichnessVerdict("no_witness_in_budget", 0, 0, tried, False)


# ── extraction ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ExtractRound:
    size_before: int
    w_size: int
    y_size: int
    side: str  # "sparse" | "dense"
    s_size: int
    size_after: int


@dataclass(frozen=True)
class ExtractResult:
    status: str  # "rich" | "rounds_exhausted" | "failed_shrink"
    u_mask: int
    trace: tuple = field(default_factory=tuple)


def rich_extract(g: Graph, params: AuditParams) -> ExtractResult:
    """Iteratively carve toward an empirically rich vertex subset.

    Stops with status "rich" the first time the budgeted audit finds no
    witness.  A round that would shrink the live set below the (delta/4)
    retention floor stops with "failed_shrink"; exhausting k_rounds with
    witnesses still arriving stops with "rounds_exhausted".  Both of the
    latter signal a graph far from Ramsey-like.
    """
    umask = g.full_mask
    trace = []
    for rnd in range(params.k_rounds):
        sub, vmap = induced_subgraph(g, umask)
        if sub.n == 0:
            return ExtractResult("failed_shrink", umask, tuple(trace))
        verdict = richness_audit(sub, params)
        if not verdict.found:
            return ExtractResult("rich", umask, tuple(trace))
        w, y = verdict.witness_w, verdict.witness_y
        wsize = w.bit_count()
        thr = params.epsilon * wsize
        sparse = [v for v in iter_bits(y) if (sub.adj[v] & w).bit_count() < thr]
        dense = [v for v in iter_bits(y)
                 if (sub.comp_row(v) & w).bit_count() < thr and v not in sparse]
        side, members = ("sparse", sparse) if len(sparse) >= len(dense) else ("dense", dense)
        if not members:
            side, members = ("dense", dense) if not sparse else ("sparse", sparse)
        cap = max(1, math.ceil((params.c_div * sub.n) ** params.delta / 2))
        cap = min(cap, max(1, wsize // 2), len(members))
        smask = mask_of(members[:cap])
        ssize = cap
        rest = w & ~smask
        keep = 0
        if side == "sparse":
            hi = 4 * params.epsilon * ssize
            for v in iter_bits(rest):
                if (sub.adj[v] & smask).bit_count() <= hi:
                    keep |= 1 << v
        else:
            lo = (1.0 - 4 * params.epsilon) * ssize
            for v in iter_bits(rest):
                if (sub.adj[v] & smask).bit_count() >= lo:
                    keep |= 1 << v
        new_umask = 0
        for v in iter_bits(keep):
            new_umask |= 1 << vmap[v]
        before, after = sub.n, new_umask.bit_count()
        trace.append(ExtractRound(before, wsize, y.bit_count(), side, ssize, after))
        if after < (params.delta / 4) * before:
            return ExtractResult("failed_shrink", new_umask, tuple(trace))
        umask = new_umask
    return ExtractResult("rounds_exhausted", umask, tuple(trace))
