"""Second-stage randomness: swap families, checks, and size harvesting.

Starting from a construction result (U0, S, T, X, d), expose U inside U0 at
rate 1/2, then walk the swap family Z_{k,i} = (first k-i units of S) +
(first i units of T).  Because T units out-degree S units into U0 by a
guaranteed gap, e_{k,i} = e(Z_{k,i}) + e(Z_{k,i}, U) climbs with i, and the
X units supply many distinct finishing degrees; together they realize many
distinct values of e(U u Z_{k,i} u x) inside one narrow edge-count window.

Four per-k checks gate each row: (1) most cells i admit a large subset of X
with pairwise-distinct adjusted degrees in [d/2 - Q*sqrt(n), d/2 + Q*sqrt(n)];
(2) e_{k,0} sits within Q*n of its exact conditional expectation
e(Z) + e(Z,U0)/2; (3) the row climbs by at least 3*beta*n; (4) increments
of size >= M*sqrt(n) carry at most beta*n total mass.  Selection then thins
rows and cells so that surviving anchors are separated beyond the cluster
width, which makes cross-cell size collisions impossible by arithmetic
rather than by luck.

Constants (c', beta, Q, M) left as None are derived from the construction
geometry (|B|, the S/T gap floor, d) and echoed in every outcome, so a run
is reproducible from its own report.  The adjusted degree of a unit adds
its internal edge, so a pair unit's emitted size never collides with a
single's at equal plain degree.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace

from .errors import ConstructionFailure, ContractViolation, ParameterError
from .graph_core import Graph, Unit, count_edges, unit_degree
from .ramsey_construct import ConstructionParams, ConstructionResult, construct
from .seeding import derive_seed


@dataclass(frozen=True)
class ExposureParams:
    c_prime: float | None = None   # None -> derived from |B| and the gap floor
    big_m: float | None = None     # None -> (gap_floor + 3*sqrt(d) + 2)/sqrt(n)
    beta: float | None = None      # None -> 2*c'^2/3
    q_const: float | None = None   # None -> max(3*beta, (2.1*sqrt(d)+1)/sqrt(n))
    gamma: float = 0.05
    q_thin: int = 1
    expose_window: float | None = None  # |e(U)-m| gate, units of n^(3/2); None -> kappa1/4 + 0.02
    kappa_window: float = 0.25     # reported-size containment radius, units of n^(3/2)
    verify_fraction: float = 0.01
    trials: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.c_prime is not None and self.c_prime <= 0:
            raise ParameterError("c_prime must be positive")
        if self.q_thin < 1:
            raise ParameterError("q_thin must be >= 1")
        if not 0 < self.gamma < 1:
            raise ParameterError("gamma must lie in (0, 1)")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.beta is not None and self.q_const is not None \
                and self.q_const < 3 * self.beta:
            raise ParameterError(
                f"q_const must be >= 3*beta, got {self.q_const} < {3 * self.beta}")


@dataclass(frozen=True)
class ResolvedExposure:
    """Concrete per-run constants; kappa is the index scale c'*sqrt(n)."""
    n: int
    kappa: float
    c_prime: float
    beta: float
    big_m: float
    q_const: float
    gamma: float
    k_lo: int
    k_hi: int
    i_hi: int
    d: float

    def as_dict(self) -> dict:
        return {"n": self.n, "c_prime": self.c_prime, "beta": self.beta,
                "M": self.big_m, "Q": self.q_const, "gamma": self.gamma,
                "k_lo": self.k_lo, "k_hi": self.k_hi, "i_hi": self.i_hi}


def resolve_exposure(res: ConstructionResult, params: ExposureParams) -> ResolvedExposure:
    """Turn None constants into concrete values from the construction shape.

    The index scale kappa = c'*sqrt(n) is capped so every row keeps i=0
    available (2*kappa <= |S|) and every column fits (kappa <= |T|), and
    tuned so the expected climb over one row clears the 3*beta*n bar when
    swaps gain about half the U0-degree gap.
    """
    n = res.working_n
    rt = math.sqrt(n)
    if params.c_prime is not None:
        kappa = params.c_prime * rt
    else:
        struct_cap = min(len(res.s_units) / 2, len(res.t_units))
        kappa = max(1.0, min(struct_cap, res.gap_floor / 4))
    c_prime = kappa / rt
    beta = params.beta if params.beta is not None else 2 * c_prime ** 2 / 3
    dd = max(res.d, 1.0)
    big_m = params.big_m if params.big_m is not None \
        else (res.gap_floor + 3 * math.sqrt(dd) + 2) / rt
    # X degrees into U spread like sqrt(d/2); +-2.1 sigma keeps ~96% in window
    q_const = params.q_const if params.q_const is not None \
        else max(3 * beta, (2.1 * math.sqrt(dd) + 1) / rt)
    if q_const < 3 * beta:
        raise ParameterError(f"Q={q_const:.4f} below 3*beta={3 * beta:.4f}")
    k_lo = max(1, math.ceil(kappa))
    k_hi = max(k_lo, math.floor(2 * kappa))
    i_hi = math.floor(kappa)
    if params.c_prime is None:
        # derived scale bends to the scaffold; tiny |S|/|T| shrink the grid
        k_hi = min(k_hi, len(res.s_units))
        k_lo = min(k_lo, k_hi)
        i_hi = min(i_hi, len(res.t_units), k_lo)
    if k_hi > len(res.s_units):
        raise ParameterError(
            f"row range needs k={k_hi} first S units but |S|={len(res.s_units)}")
    if i_hi > len(res.t_units):
        raise ParameterError(
            f"column range needs {i_hi} T units but |T|={len(res.t_units)}")
    return ResolvedExposure(n=n, kappa=kappa, c_prime=c_prime, beta=beta,
                            big_m=big_m, q_const=q_const, gamma=params.gamma,
                            k_lo=k_lo, k_hi=k_hi, i_hi=i_hi, d=res.d)


def z_family(s_units, t_units, k: int, i: int) -> int:
    """Vertex mask of the first k-i units of S plus the first i units of T."""
    if not 0 <= i <= k:
        raise ParameterError(f"need 0 <= i <= k, got i={i}, k={k}")
    if i > len(t_units):
        raise ParameterError(f"i={i} exceeds |T|={len(t_units)}")
    if k - i > len(s_units):
        raise ParameterError(f"k-i={k - i} exceeds |S|={len(s_units)}")
    zm = 0
    for u in s_units[:k - i]:
        zm |= u.mask()
    for u in t_units[:i]:
        zm |= u.mask()
    return zm


def expose(u0_mask: int, seed: int) -> int:
    """Independent rate-1/2 subsample of U0; deterministic in the seed."""
    if u0_mask == 0:
        raise ParameterError("U0 must be nonempty")
    rng = random.Random(seed)
    u = 0
    m = u0_mask
    while m:
        low = m & -m
        if rng.random() < 0.5:
            u |= low
        m ^= low
    return u


@dataclass
class PerKRecord:
    k: int
    i_values: list
    z_masks: list
    e_values: list
    deltas: list
    verified_cells: list
    e_hat: float | None = None
    checks: tuple | None = None
    i_pass: list = field(default_factory=list)   # i with a valid X witness
    x_witnesses: dict = field(default_factory=dict)  # i -> tuple of (Unit, adjusted value)


def family_table(g: Graph, u_mask: int, s_units, t_units,
                 resolved: ResolvedExposure, *, seed: int = 0,
                 verify_fraction: float = 0.01):
    """e_{k,i} over the whole index rectangle, one swap per step.

    Each i -> i+1 replaces the last live S unit with the next T unit,
    adjusting internal-Z and Z-to-U edges incrementally.  The identity
    e_{k,i} = e(U_{k,i}) - e(U) is re-verified by direct counting on a
    seeded sample of cells (at least the first cell of every table).
    """
    rng = random.Random(derive_seed(seed, "verify"))
    records = []
    first_cell = True
    e_u = count_edges(g, u_mask)
    for k in range(resolved.k_lo, resolved.k_hi + 1):
        i_top = min(k, resolved.i_hi)
        zm = z_family(s_units, t_units, k, 0)
        e_z = count_edges(g, zm)
        e_zu = count_edges(g, zm, u_mask)
        i_values, z_masks, e_values = [0], [zm], [e_z + e_zu]
        for i in range(1, i_top + 1):
            out = s_units[k - i]
            inc = t_units[i - 1]
            om, tm = out.mask(), inc.mask()
            rest = zm & ~om
            e_z += (count_edges(g, tm, rest) + count_edges(g, tm)
                    - count_edges(g, om, rest) - count_edges(g, om))
            e_zu += count_edges(g, tm, u_mask) - count_edges(g, om, u_mask)
            zm = rest | tm
            i_values.append(i)
            z_masks.append(zm)
            e_values.append(e_z + e_zu)
        deltas = [b - a for a, b in zip(e_values, e_values[1:])]
        verified = []
        for idx, i in enumerate(i_values):
            if (first_cell and idx == 0) or rng.random() < verify_fraction:
                direct = count_edges(g, z_masks[idx] | u_mask) - e_u
                if direct != e_values[idx]:
                    raise ContractViolation(
                        f"incremental e_({k},{i})={e_values[idx]} but direct "
                        f"count gives {direct}")
                verified.append((k, i))
                first_cell = False
        records.append(PerKRecord(k=k, i_values=i_values, z_masks=z_masks,
                                  e_values=e_values, deltas=deltas,
                                  verified_cells=verified))
    return records


def _adjusted_values(g: Graph, x_units, ukimask: int):
    out = []
    for x in x_units:
        v = unit_degree(g, x, ukimask) + count_edges(g, x.mask())
        out.append((x, v))
    return out


def per_k_checks(record: PerKRecord, g: Graph, u_mask: int, u0_mask: int,
                 x_units, d: float, resolved: ResolvedExposure):
    """Evaluate the four row checks; fills the record's witness fields.

    check1: enough cells i admit >= gamma*sqrt(n) X units with pairwise
    distinct adjusted degrees inside [d/2 - Q*sqrt(n), d/2 + Q*sqrt(n)];
    check2: e_{k,0} within Q*n of e(Z) + e(Z,U0)/2; check3: the row climbs
    at least 3*beta*n; check4: increments >= M*sqrt(n) total at most beta*n.
    """
    n = resolved.n
    rt = math.sqrt(n)
    q = resolved.q_const
    lo, hi = d / 2 - q * rt, d / 2 + q * rt
    need = resolved.gamma * rt
    record.i_pass = []
    record.x_witnesses = {}
    for idx, i in enumerate(record.i_values):
        ukimask = record.z_masks[idx] | u_mask
        seen = set()
        wit = []
        for x, v in _adjusted_values(g, x_units, ukimask):
            if lo <= v <= hi and v not in seen:
                seen.add(v)
                wit.append((x, v))
        if len(wit) >= need:
            record.i_pass.append(i)
            record.x_witnesses[i] = tuple(wit)
    check1 = len(record.i_pass) >= (1 - resolved.beta / (2 * resolved.big_m)) \
        * len(record.i_values)
    z0 = record.z_masks[0]
    record.e_hat = count_edges(g, z0) + count_edges(g, z0, u0_mask) / 2
    check2 = abs(record.e_values[0] - record.e_hat) <= q * n
    check3 = record.e_values[-1] - record.e_values[0] >= 3 * resolved.beta * n
    big = resolved.big_m * rt
    check4 = sum(abs(dl) for dl in record.deltas if abs(dl) >= big) \
        <= resolved.beta * n
    record.checks = (check1, check2, check3, check4)
    return record.checks


def _stride_select(items, key_gap: float, values) -> list:
    """Smallest stride whose selected values are consecutively >= key_gap apart."""
    if not items:
        return []
    for q in range(1, len(items) + 1):
        sel = items[::q]
        vals = values[::q]
        if all(b - a >= key_gap for a, b in zip(vals, vals[1:])):
            return sel
    return [items[0]]


@dataclass(frozen=True)
class PerMOutcome:
    m: int
    u_mask: int
    e_u: int
    records: tuple
    k_selected: tuple
    p_selected: tuple          # (k, i) anchors in emission order
    family: tuple              # (k, i, Unit) triples
    distinct_sizes: tuple      # sorted distinct e(U u Z u x)
    window_center: int
    window_radius: float
    attempts: int
    constants: dict = field(compare=False, default_factory=dict)
    diagnostics: dict = field(compare=False, default_factory=dict)

    @property
    def distinct_count(self) -> int:
        return len(self.distinct_sizes)


def per_m_run(g: Graph, m: int, cparams: ConstructionParams | None = None,
              eparams: ExposureParams | None = None,
              result: ConstructionResult | None = None) -> PerMOutcome:
    """One full window: construct, expose, check, thin, harvest sizes.

    Exposures retry (chained seeds) while |e(U) - m| misses its gate, no
    row passes all four checks, or selection comes back empty; the attempt
    log is kept either way.  An exhausted retry budget returns the empty
    outcome with diagnostics rather than raising: a zero count is a
    measurement, not a crash.  Pass result to reuse a construction.
    """
    cparams = cparams or ConstructionParams()
    eparams = eparams or ExposureParams()
    res = result if result is not None else construct(g, m, cparams)
    resolved = resolve_exposure(res, eparams)
    wn = res.working_n
    gate = eparams.expose_window if eparams.expose_window is not None \
        else cparams.kappa1 / 4 + 0.02
    gate_abs = gate * wn ** 1.5
    rt = math.sqrt(wn)
    attempts_log = []
    chosen = None
    for t in range(eparams.trials):
        u = expose(res.u0_mask, derive_seed(eparams.seed, "expose", t))
        e_u = count_edges(g, u)
        if abs(e_u - m) > gate_abs:
            attempts_log.append({"attempt": t, "stage": "expose_gate", "e_u": e_u})
            continue
        records = family_table(g, u, res.s_units, res.t_units, resolved,
                               seed=derive_seed(eparams.seed, "table", t),
                               verify_fraction=eparams.verify_fraction)
        for rec in records:
            per_k_checks(rec, g, u, res.u0_mask, res.x_units, res.d, resolved)
        k_all = [rec.k for rec in records if all(rec.checks)]
        if not k_all:
            attempts_log.append({"attempt": t, "stage": "checks",
                                 "rows": {rec.k: rec.checks for rec in records}})
            continue
        by_k = {rec.k: rec for rec in records}
        e_hats = [by_k[k].e_hat for k in k_all]
        k_sel = _stride_select(k_all, 4 * resolved.q_const * wn, e_hats)
        cells = []
        for k in k_sel:
            rec = by_k[k]
            e0 = rec.e_values[0]
            span_hi = e0 + 3 * resolved.beta * wn
            n_int = max(1, math.floor(2 * resolved.beta * rt / resolved.big_m))
            length = resolved.big_m * rt
            reps = []
            for j in range(n_int):
                a = e0 + j * 1.5 * length
                if a > span_hi:
                    break
                b = min(a + length, span_hi)
                inside = [i for i in rec.i_pass
                          if a <= rec.e_values[rec.i_values.index(i)] <= b]
                if inside:
                    reps.append(min(inside))
            for i in sorted(set(reps)):
                cells.append((rec.e_values[rec.i_values.index(i)], k, i))
        cells.sort()
        sep = math.floor(2 * resolved.q_const * rt) + 1  # strict > 2Q*sqrt(n)
        sel = _stride_select(cells, sep, [c[0] for c in cells])
        if not sel:
            attempts_log.append({"attempt": t, "stage": "selection"})
            continue
        chosen = (t, u, e_u, records, k_sel, sel, by_k)
        attempts_log.append({"attempt": t, "stage": "accepted",
                             "rows_passing": k_all, "cells": len(sel)})
        break
    if chosen is None:
        return PerMOutcome(m=m, u_mask=0, e_u=0, records=(), k_selected=(),
                           p_selected=(), family=(), distinct_sizes=(),
                           window_center=0, window_radius=0.0,
                           attempts=len(attempts_log),
                           constants=resolved.as_dict(),
                           diagnostics={"attempts": attempts_log,
                                        "construction": res.diagnostics})
    t, u, e_u, records, k_sel, sel, by_k = chosen
    family = []
    sizes = []
    for e_ki, k, i in sel:
        rec = by_k[k]
        for x, v in rec.x_witnesses[i]:
            family.append((k, i, x))
            sizes.append(e_u + e_ki + int(v))
    if len(set(sizes)) != len(sizes):
        raise ContractViolation("emitted sizes collide despite separation")
    # every size reproducible from scratch
    for (k, i, x), s in zip(family, sizes):
        rec = by_k[k]
        zm = rec.z_masks[rec.i_values.index(i)]
        direct = count_edges(g, zm | u | x.mask())
        if direct != s:
            raise ContractViolation(
                f"size {s} for (k={k}, i={i}, x={x.vertices}) != direct {direct}")
    radius = eparams.kappa_window * wn ** 1.5
    for s in sizes:
        if abs(s - e_u) > radius:
            raise ContractViolation(
                f"size {s} outside window {e_u}+-{radius:.1f}")
    return PerMOutcome(
        m=m, u_mask=u, e_u=e_u, records=tuple(records),
        k_selected=tuple(k_sel), p_selected=tuple((k, i) for _, k, i in sel),
        family=tuple(family), distinct_sizes=tuple(sorted(set(sizes))),
        window_center=e_u, window_radius=radius, attempts=t + 1,
        constants=resolved.as_dict(),
        diagnostics={"attempts": attempts_log})


@dataclass(frozen=True)
class TheoremOutcome:
    windows: tuple            # per attempted m: (m, outcome or None, kept flag)
    kept: tuple               # kept PerMOutcome list, ascending m
    total_distinct: int
    step: int
    diagnostics: dict = field(compare=False, default_factory=dict)


def theorem_run(g: Graph, cparams: ConstructionParams | None = None,
                eparams: ExposureParams | None = None,
                sigma: float | None = None) -> TheoremOutcome:
    """Sweep m across [c*n^2, 2c*n^2] and union disjoint windows.

    Step defaults to a stride just beyond twice the containment radius, so
    kept windows cannot overlap; a greedy pass additionally drops any
    window whose smallest size fails to clear the previous kept maximum.
    Per-window failures are recorded and contribute nothing.
    """
    cparams = cparams or ConstructionParams()
    eparams = eparams or ExposureParams()
    n = g.n
    c = cparams.c_density
    m_lo = math.ceil(c * n * n)
    m_hi = math.floor(2 * c * n * n)
    if m_lo > m_hi:
        raise ParameterError(f"empty m range [{m_lo}, {m_hi}]")
    sig = sigma if sigma is not None else 2.2 * eparams.kappa_window
    step = max(1, round(sig * n ** 1.5))
    windows = []
    kept = []
    union = set()
    last_max = None
    idx = 0
    for m in range(m_lo, m_hi + 1, step):
        cp = _reseed(cparams, derive_seed(cparams.seed, "window-c", idx))
        ep = _reseed(eparams, derive_seed(eparams.seed, "window-e", idx))
        idx += 1
        try:
            out = per_m_run(g, m, cp, ep)
        except (ConstructionFailure, ParameterError):
            windows.append((m, None, False))
            continue
        if not out.distinct_sizes:
            windows.append((m, out, False))
            continue
        if last_max is not None and min(out.distinct_sizes) <= last_max:
            windows.append((m, out, False))
            continue
        windows.append((m, out, True))
        kept.append(out)
        union.update(out.distinct_sizes)
        last_max = max(out.distinct_sizes)
    for a, b in zip(kept, kept[1:]):
        if max(a.distinct_sizes) >= min(b.distinct_sizes):
            raise ContractViolation("kept windows overlap")
    total = sum(len(o.distinct_sizes) for o in kept)
    if total != len(union):
        raise ContractViolation("cross-window size collision")
    return TheoremOutcome(windows=tuple(windows), kept=tuple(kept),
                          total_distinct=total, step=step,
                          diagnostics={"m_lo": m_lo, "m_hi": m_hi,
                                       "attempted": len(windows)})


def _reseed(params, seed: int):
    return replace(params, seed=seed)
