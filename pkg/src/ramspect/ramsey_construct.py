"""Randomized construction of a degree-structured scaffold.

Given a dense graph and a target edge count m, build a tuple
(U0, S, T, X, d): a random vertex set U0 with e(U0) close to 4m, plus three
disjoint families of units (single vertices or pairs) that avoid U0, whose
degrees into U0 sit in a narrow window around d = p*d'', with every T unit
strictly above every S unit by a guaranteed integer gap, and with the X
units pairwise far apart in their U0-neighborhoods.

Stages: bucket vertex pairs by degree sum and keep the fullest bucket;
drop pairs whose neighborhoods nearly complement each other; extract either
a star (many bucket pairs through one vertex) or a large matching; thin the
survivors to units with pairwise far neighborhoods (greedy independent set
in a conflict graph, Turan bound asserted); then repeatedly sample U0 with
per-vertex probability p = sqrt(4m/e(G)) until five concentration events
hold, and read S, T, X off the degree order.

All the asymptotic constants are explicit knobs on ConstructionParams with
defaults tuned for dense random graphs at desk scale; every resolved value
is echoed in the result diagnostics so runs are self-describing.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionFailure, ContractViolation, ParameterError
from .graph_core import (Graph, Unit, count_edges, induced_subgraph, iter_bits,
                         symdiff_size, unit_degree, unit_rows)
from .seeding import derive_seed
from .structure_audit import AuditParams, rich_extract

PAIR_ENUM_CAP = 3000
DENSITY_FACTOR = 800.0


@dataclass(frozen=True)
class ConstructionParams:
    """Knobs for the scaffold pipeline; None fields resolve at run time."""

    ramsey_const: float = 10.0
    epsilon: float = 0.2
    delta: float = 0.3
    c_density: float = 0.0003
    bucket_width: int | None = None      # None -> ceil(sqrt(n))
    theta_compl: float | None = None     # None -> epsilon/2
    theta_conflict: float | None = None  # None -> epsilon^2/4
    star_coeff: float = 0.25             # star floor   = star_coeff  * n^(3/4)
    match_coeff: float = 0.25            # match floor  = match_coeff * n^(3/4)
    kappa1: float = 0.2     # e(U0) window, units of n^(3/2)
    kappa2: float = 1.5     # degree window, units of sqrt(n)
    kappa3: float | None = None   # pairwise symdiff floor, units of n; None -> p*theta_conflict/3
    kappa4: float | None = None   # collision budget, units of sqrt(n); None -> 3x analytic
    kappa5: float = 0.02    # recorded floor d >= kappa5*n (not enforced)
    a_cap_coeff: float = 4.0      # |A| kept to at most a_cap_coeff*sqrt(n)
    density_factor: float = DENSITY_FACTOR  # entry check e(G) >= density_factor*c*n^2
    pair_enum_cap: int = PAIR_ENUM_CAP
    pair_sample_coeff: float = 10.0
    retry_max: int = 40
    rich_prepass: bool = True
    c_div: float = 0.1      # audit pass-through
    alpha: float | None = None    # None -> 2*delta
    audit_budget: int = 200
    k_rounds: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.c_density <= 0:
            raise ParameterError(f"c_density must be positive, got {self.c_density}")
        if not 0.0 < self.epsilon < 0.5:
            raise ParameterError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if self.bucket_width is not None and self.bucket_width < 1:
            raise ParameterError("bucket_width must be >= 1")
        if self.density_factor <= 0:
            raise ParameterError("density_factor must be positive")
        if self.retry_max < 1:
            raise ParameterError("retry_max must be >= 1")
        for name in ("kappa1", "kappa2", "kappa5", "star_coeff", "match_coeff",
                     "a_cap_coeff", "pair_sample_coeff"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")

    def audit_params(self) -> AuditParams:
        alpha = 2 * self.delta if self.alpha is None else self.alpha
        return AuditParams(epsilon=self.epsilon, delta=self.delta, c_div=self.c_div,
                           alpha=alpha, sample_budget=self.audit_budget,
                           k_rounds=self.k_rounds, seed=derive_seed(self.seed, "audit"))


@dataclass(frozen=True)
class ConstructionResult:
    mode: str               # "star" | "matching"
    anchor: int | None      # star center in original vertex ids
    u0_mask: int
    a_units: tuple
    s_units: tuple
    t_units: tuple
    x_units: tuple
    d: float                # p * d_doubleprime
    d_prime: int
    d_doubleprime: int
    p: float
    gap_floor: int
    kappa3: float           # resolved pairwise-symdiff floor coefficient
    working_n: int          # vertex count the thresholds were computed against
    diagnostics: dict = field(compare=False, default_factory=dict)

    def all_units(self) -> tuple:
        return self.s_units + self.t_units + self.x_units


def pigeonhole_pairs(g: Graph, bucket_width: int | None = None, *,
                     pair_enum_cap: int = PAIR_ENUM_CAP,
                     sample_coeff: float = 10.0, seed: int = 0):
    """Bucket pairs by degree sum; return (d_prime, fullest bucket's pairs).

    d_prime is the bucket's center j*w + w//2.  Ties go to the lowest
    bucket.  Above pair_enum_cap vertices a uniform pair sample of size
    ~sample_coeff*n^(3/2) stands in for full enumeration.
    """
    n = g.n
    if n < 4:
        raise ParameterError(f"need n >= 4, got {n}")
    w = math.ceil(math.sqrt(n)) if bucket_width is None else bucket_width
    if w < 1:
        raise ParameterError("bucket_width must be >= 1")
    degs = np.array(g.degrees(), dtype=np.int64)
    if n <= pair_enum_cap:
        ii, jj = np.triu_indices(n, 1)
    else:
        rng = random.Random(derive_seed(seed, "pigeonhole"))
        # the dedup loop must not chase more pairs than exist
        want = min(int(sample_coeff * n ** 1.5), n * (n - 1) // 2)
        seen = set()
        while len(seen) < want:
            a = rng.randrange(n)
            b = rng.randrange(n)
            if a != b:
                seen.add((a, b) if a < b else (b, a))
        pairs = sorted(seen)
        ii = np.array([a for a, _ in pairs], dtype=np.int64)
        jj = np.array([b for _, b in pairs], dtype=np.int64)
    buckets = (degs[ii] + degs[jj]) // w
    counts = np.bincount(buckets)
    j = int(np.argmax(counts))  # argmax returns the first (lowest) maximum
    sel = buckets == j
    h = list(zip(ii[sel].tolist(), jj[sel].tolist()))
    return j * w + w // 2, h


def filter_close_complements(g: Graph, h: list, theta_compl: float) -> list:
    """Drop pairs whose neighborhoods nearly complement each other."""
    thr = theta_compl * g.n
    adj = g.adj
    nbar = [g.comp_row(v) for v in range(g.n)]
    out = []
    for a, b in h:
        if (adj[a] ^ nbar[b]).bit_count() >= thr:
            out.append((a, b))
    return out


def star_or_matching(g: Graph, h: list, h_filtered: list, d_prime: int,
                     star_floor: float, match_floor: float):
    """Either a heavy star center or a large matching inside the bucket.

    Star branch: if some vertex carries >= star_floor filtered pairs, its
    unit list is the Singles of its UNFILTERED bucket neighbors and
    d'' = d' - deg(v).  Otherwise a greedy lexicographic matching on the
    filtered pairs; if it reaches match_floor, units are the matched Pairs
    and d'' = d'.  Both under floor -> stage failure.
    """
    if not h_filtered:
        raise ConstructionFailure("star_or_matching", "filtered bucket is empty",
                                  {"h_size": len(h)})
    hdeg = Counter()
    for a, b in h_filtered:
        hdeg[a] += 1
        hdeg[b] += 1
    top = max(hdeg.values())
    best = min(v for v, c in hdeg.items() if c == top)
    if hdeg[best] >= star_floor:
        nb = sorted({b if a == best else a for a, b in h if best in (a, b)})
        units = tuple(Unit.single(v) for v in nb)
        return "star", best, units, d_prime - g.degree(best)
    used = 0
    matching = []
    for a, b in h_filtered:
        if not (used >> a & 1) and not (used >> b & 1):
            used |= (1 << a) | (1 << b)
            matching.append((a, b))
    if len(matching) >= match_floor:
        units = tuple(Unit.pair(a, b) for a, b in matching)
        return "matching", None, units, d_prime
    raise ConstructionFailure(
        "star_or_matching",
        "no vertex reaches the star floor and the greedy matching is too small",
        {"max_star_degree": hdeg[best], "matching_size": len(matching),
         "star_floor": star_floor, "match_floor": match_floor})


def _unit_gap_masks(g: Graph, units):
    return [unit_rows(g, x) for x in units]


def independent_units(g: Graph, units, theta_conflict: float):
    """Greedy independent set in the conflict graph (close neighborhoods).

    Conflict edge: multiset symdiff below theta_conflict*n.  Greedy
    min-degree removal meets the Turan bound |A| >= |L|/(1+avg degree),
    asserted against the computed conflict graph.
    """
    if not units:
        raise ParameterError("unit list must be nonempty")
    k = len(units)
    thr = theta_conflict * g.n
    rows = _unit_gap_masks(g, units)
    bc = int.bit_count
    fadj = [0] * k
    f_edges = 0
    for i in range(k):
        a1, a2 = rows[i]
        for j in range(i + 1, k):
            b1, b2 = rows[j]
            g2 = (a2 & ~(b2 | b1)) | (b2 & ~(a2 | a1))
            g1 = (a2 & b1) | (a1 & b2) | (a1 & ~(b2 | b1)) | (b1 & ~(a2 | a1))
            if bc(g1) + 2 * bc(g2) < thr:
                fadj[i] |= 1 << j
                fadj[j] |= 1 << i
                f_edges += 1
    alive = (1 << k) - 1
    chosen = []
    while alive:
        best_i = -1
        best_d = k + 1
        m = alive
        while m:
            low = m & -m
            i = low.bit_length() - 1
            di = bc(fadj[i] & alive)
            if di < best_d:
                best_d = di
                best_i = i
            m ^= low
        chosen.append(best_i)
        alive &= ~((1 << best_i) | fadj[best_i])
    turan = k / (1.0 + 2.0 * f_edges / k)
    if len(chosen) + 1e-9 < turan:
        raise ContractViolation(
            f"greedy independent set size {len(chosen)} below Turan bound {turan:.3f}")
    return tuple(units[i] for i in sorted(chosen))


def _resolve_kappa4(kappa4, a_size: int, p: float, d_dp: int, n: int) -> float:
    if kappa4 is not None:
        return kappa4
    sigma = math.sqrt(max(p * d_dp, 1.0) * (1.0 - p))
    per_pair = min(1.0, 1.0 / (2.0 * sigma * math.sqrt(math.pi)))
    est = a_size * (a_size - 1) / 2 * per_pair
    return 3.0 * est / math.sqrt(n)


def sample_U0(g: Graph, a_units, m: int, d_doubleprime: int,
              params: ConstructionParams):
    """Resample U0 at rate p = sqrt(4m/e(G)) until five events hold.

    (1) e(U0) within kappa1*n^(3/2) of 4m; (2) at least 2/3 of the units
    avoid U0 entirely (-> Q); (3) at least 2/3 have degree into U0 within
    kappa2*sqrt(n) of p*d'' (-> R); (4) every unit pair keeps symdiff
    >= kappa3*n inside U0; (5) at most kappa4*sqrt(n) unit pairs collide on
    exact degree.  Attempts use derived seeds, so the accepted attempt is
    the lowest-numbered passing one no matter the evaluation order.
    """
    if not a_units:
        raise ParameterError("unit family A must be nonempty")
    eg = g.edge_count()
    if eg == 0:
        raise ParameterError("graph has no edges")
    p = math.sqrt(4.0 * m / eg)
    if not 0.0 < p <= 1.0:
        raise ParameterError(f"sampling probability p={p:.4f} outside (0, 1]; "
                             f"m too large for e(G)={eg}")
    n = g.n
    target_d = p * d_doubleprime
    kappa3 = params.kappa3
    if kappa3 is None:
        theta_c = params.theta_conflict if params.theta_conflict is not None \
            else params.epsilon ** 2 / 4
        kappa3 = p * theta_c / 3.0
    kappa4 = _resolve_kappa4(params.kappa4, len(a_units), p, d_doubleprime, n)
    e_window = params.kappa1 * n ** 1.5
    d_window = params.kappa2 * math.sqrt(n)
    sym_floor = kappa3 * n
    coll_cap = kappa4 * math.sqrt(n)
    attempts = []
    fail_hist = [0] * 5
    for t in range(params.retry_max):
        rng = random.Random(derive_seed(params.seed, "u0", t))
        u0 = 0
        for v in range(n):
            if rng.random() < p:
                u0 |= 1 << v
        e_u0 = count_edges(g, u0)
        ok1 = abs(e_u0 - 4 * m) <= e_window
        q = tuple(x for x in a_units if not (x.mask() & u0))
        ok2 = len(q) >= (2 / 3) * len(a_units)
        degs = [unit_degree(g, x, u0) for x in a_units]
        r = tuple(x for x, dd in zip(a_units, degs) if abs(dd - target_d) <= d_window)
        ok3 = len(r) >= (2 / 3) * len(a_units)
        min_sym = None
        ok4 = True
        for i in range(len(a_units)):
            for j in range(i + 1, len(a_units)):
                s = symdiff_size(g, a_units[i], a_units[j], umask=u0)
                if min_sym is None or s < min_sym:
                    min_sym = s
                if s < sym_floor:
                    ok4 = False
                    break
            if not ok4:
                break
        cnt = Counter(degs)
        collisions = sum(c * (c - 1) // 2 for c in cnt.values())
        ok5 = collisions <= coll_cap
        flags = (ok1, ok2, ok3, ok4, ok5)
        attempts.append({"attempt": t, "events": flags, "e_u0": e_u0,
                         "q_size": len(q), "r_size": len(r),
                         "min_pair_symdiff": min_sym, "collisions": collisions})
        for i, ok in enumerate(flags):
            if not ok:
                fail_hist[i] += 1
        if all(flags):
            diag = {"attempts": attempts, "accepted_attempt": t, "p": p,
                    "kappa3": kappa3, "kappa4": kappa4,
                    "event_fail_histogram": fail_hist}
            return u0, q, r, diag
    raise ConstructionFailure(
        "sample_U0",
        f"no attempt passed all five events in {params.retry_max} tries",
        {"event_fail_histogram": fail_hist, "attempts": attempts, "p": p,
         "kappa3": kappa3, "kappa4": kappa4})


def select_STX(g: Graph, u0: int, q, r, p: float, d_doubleprime: int):
    """Split the surviving units into S, T, X with a guaranteed degree gap.

    The units in both Q and R are halved by unit order into Y and X.  On Y,
    equal-degree collisions form a graph whose greedy independent set B has
    all-distinct integer degrees; sorting B and taking the outer thirds
    yields S and T with min_T - max_S >= ceil(|B|/3).
    """
    rset = set(r)
    rq = tuple(x for x in q if x in rset)
    if len(rq) < 6:
        raise ConstructionFailure("select_STX",
                                  f"only {len(rq)} units survive both Q and R; need 6",
                                  {"q_size": len(q), "r_size": len(r)})
    half = len(rq) // 2
    y, x = rq[:half], rq[half:]
    ydeg = [unit_degree(g, u, u0) for u in y]
    k = len(y)
    fadj = [0] * k
    for i in range(k):
        for j in range(i + 1, k):
            if ydeg[i] == ydeg[j]:
                fadj[i] |= 1 << j
                fadj[j] |= 1 << i
    alive = (1 << k) - 1
    chosen = []
    while alive:
        best_i, best_d = -1, k + 1
        m = alive
        while m:
            low = m & -m
            i = low.bit_length() - 1
            di = (fadj[i] & alive).bit_count()
            if di < best_d:
                best_d, best_i = di, i
            m ^= low
        chosen.append(best_i)
        alive &= ~((1 << best_i) | fadj[best_i])
    if len(chosen) < 3:
        raise ConstructionFailure("select_STX",
                                  f"collision-free family has {len(chosen)} < 3 units",
                                  {"y_size": k, "distinct_degrees": len(set(ydeg))})
    b = sorted(chosen, key=lambda i: (ydeg[i], y[i]))
    third = len(b) // 3
    s = tuple(y[i] for i in b[:third])
    t = tuple(y[i] for i in b[-third:])
    gap_floor = math.ceil(len(b) / 3)
    return s, t, x, p * d_doubleprime, gap_floor, len(b)


def verify_construction(g: Graph, res: ConstructionResult,
                        params: ConstructionParams) -> bool:
    """Re-check the four output invariants from graph primitives alone."""
    n = res.working_n
    units = res.all_units()
    seen = res.u0_mask
    for x in units:
        xm = x.mask()
        if xm & seen:
            raise ContractViolation(f"unit {x.vertices} overlaps U0 or another unit")
        seen |= xm
    d_window = params.kappa2 * math.sqrt(n)
    for x in units:
        dd = unit_degree(g, x, res.u0_mask)
        if abs(dd - res.d) > d_window:
            raise ContractViolation(
                f"unit {x.vertices} degree {dd} outside {res.d:.2f}+-{d_window:.2f}")
    if res.s_units and res.t_units:
        max_s = max(unit_degree(g, x, res.u0_mask) for x in res.s_units)
        min_t = min(unit_degree(g, x, res.u0_mask) for x in res.t_units)
        if min_t - max_s < res.gap_floor:
            raise ContractViolation(
                f"degree gap {min_t - max_s} below floor {res.gap_floor}")
    sym_floor = res.kappa3 * n
    xs = res.x_units
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            s = symdiff_size(g, xs[i], xs[j], umask=res.u0_mask)
            if s < sym_floor:
                raise ContractViolation(
                    f"x units {xs[i].vertices},{xs[j].vertices} symdiff {s} "
                    f"below {sym_floor:.2f}")
    want_pair = res.mode == "matching"
    for x in units:
        if x.is_pair != want_pair:
            raise ContractViolation(f"mode {res.mode} but unit {x.vertices} mixes kinds")
    return True


def construct(g: Graph, m: int, params: ConstructionParams | None = None) -> ConstructionResult:
    """Run the full pipeline and return an independently verified result.

    Entry checks: e(G) >= density_factor*c*n^2 (stage "density") and
    c*n^2 <= m <= 2c*n^2 (parameter error).  With rich_prepass on, the
    pipeline runs inside the extracted vertex set and the result is mapped
    back to original vertex ids; every threshold uses the working size,
    echoed as working_n.
    """
    params = params or ConstructionParams()
    if m != int(m) or m < 1:
        raise ParameterError(f"m must be a positive integer, got {m}")
    n = g.n
    c = params.c_density
    if not c * n * n <= m <= 2 * c * n * n:
        raise ParameterError(
            f"m={m} outside [c*n^2, 2c*n^2] = [{c * n * n:.1f}, {2 * c * n * n:.1f}]")
    if g.edge_count() < params.density_factor * c * n * n:
        raise ConstructionFailure(
            "density",
            f"e(G)={g.edge_count()} below {params.density_factor * c * n * n:.1f}",
            {"edges": g.edge_count(), "required": params.density_factor * c * n * n})
    rich_status = "skipped"
    if params.rich_prepass:
        ext = rich_extract(g, params.audit_params())
        rich_status = ext.status
        if ext.status != "rich":
            raise ConstructionFailure(
                "rich_prepass", f"extraction ended with status {ext.status}",
                {"status": ext.status, "final_size": ext.u_mask.bit_count(),
                 "rounds": len(ext.trace)})
        work, vmap = induced_subgraph(g, ext.u_mask)
    else:
        work, vmap = g, list(range(n))
    wn = work.n
    width = params.bucket_width if params.bucket_width is not None \
        else math.ceil(math.sqrt(wn))
    theta_compl = params.theta_compl if params.theta_compl is not None \
        else params.epsilon / 2
    theta_conflict = params.theta_conflict if params.theta_conflict is not None \
        else params.epsilon ** 2 / 4
    d_prime, h = pigeonhole_pairs(work, width, pair_enum_cap=params.pair_enum_cap,
                                  sample_coeff=params.pair_sample_coeff,
                                  seed=params.seed)
    h_filt = filter_close_complements(work, h, theta_compl)
    star_floor = params.star_coeff * wn ** 0.75
    match_floor = params.match_coeff * wn ** 0.75
    mode, anchor, units, d_dp = star_or_matching(work, h, h_filt, d_prime,
                                                 star_floor, match_floor)
    a_full = independent_units(work, units, theta_conflict)
    a_cap = max(1, math.ceil(params.a_cap_coeff * math.sqrt(wn)))
    a = a_full[:a_cap]
    u0, q, r, u0_diag = sample_U0(work, a, m, d_dp, params)
    p = u0_diag["p"]
    s, t, x, d, gap_floor, b_size = select_STX(work, u0, q, r, p, d_dp)

    def remap_unit(u: Unit) -> Unit:
        vs = tuple(vmap[v] for v in u.vertices)
        return Unit.single(vs[0]) if len(vs) == 1 else Unit.pair(*vs)

    def remap_mask(mask: int) -> int:
        out = 0
        for v in iter_bits(mask):
            out |= 1 << vmap[v]
        return out

    diag = {
        "rich_status": rich_status,
        "h_size": len(h), "h_filtered_size": len(h_filt),
        "l_size": len(units), "a_full_size": len(a_full), "a_size": len(a),
        "b_size": b_size, "u0_size": u0.bit_count(),
        "d_floor_ok": d >= params.kappa5 * wn,
        "resolved": {"bucket_width": width, "theta_compl": theta_compl,
                     "theta_conflict": theta_conflict, "star_floor": star_floor,
                     "match_floor": match_floor, "kappa1": params.kappa1,
                     "kappa2": params.kappa2, "kappa3": u0_diag["kappa3"],
                     "kappa4": u0_diag["kappa4"], "kappa5": params.kappa5},
        "sampling": u0_diag,
    }
    res = ConstructionResult(
        mode=mode,
        anchor=None if anchor is None else vmap[anchor],
        u0_mask=remap_mask(u0),
        a_units=tuple(remap_unit(u) for u in a),
        s_units=tuple(remap_unit(u) for u in s),
        t_units=tuple(remap_unit(u) for u in t),
        x_units=tuple(remap_unit(u) for u in x),
        d=d, d_prime=d_prime, d_doubleprime=d_dp, p=p,
        gap_floor=gap_floor, kappa3=u0_diag["kappa3"], working_n=wn,
        diagnostics=diag)
    verify_construction(g, res, params)
    return res
