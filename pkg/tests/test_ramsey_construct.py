"""Scaffold construction pipeline: stages, invariants, and the verifier."""
import math
import random
from dataclasses import replace

import pytest

from ramspect import graph_core as gc
from ramspect import ramsey_construct as rc
from ramspect.errors import ContractViolation, ParameterError
from ramspect.ramsey_construct import (ConstructionFailure, ConstructionParams,
                                       construct, verify_construction)

G256 = gc.generate("gnp", n=256, p=0.5, seed=3)
M256 = round(1.5 * 0.0003 * 256 * 256)  # window midpoint for default c


# ── pigeonhole bucketing ─────────────────────────────────────────────────


def test_pigeonhole_bucket_center_and_membership():
    rng = random.Random(2)
    for seed in range(6):
        g = gc.generate("gnp", n=40, p=0.5, seed=seed)
        d_prime, bucket = rc.pigeonhole_pairs(g)
        w = math.ceil(math.sqrt(40))
        assert bucket
        assert d_prime % w == w // 2  # bucket center
        degs = g.degrees()
        j = d_prime // w
        for a, b in bucket:
            assert a != b
            assert (degs[a] + degs[b]) // w == j
        # the fullest bucket is at least as big as a random other bucket
        sums = [degs[a] + degs[b] for a in range(40) for b in range(a + 1, 40)]
        other = rng.choice(sorted(set(s // w for s in sums)))
        assert len(bucket) >= sum(1 for s in sums if s // w == other)


def test_pigeonhole_width_one_star():
    # star K_{1,3}: degree sums are 2 (leaf+leaf) and 4 (center+leaf);
    # with width 1 the fullest bucket is the three leaf pairs at d'=2
    g = gc.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    d_prime, bucket = rc.pigeonhole_pairs(g, bucket_width=1)
    assert d_prime == 2
    assert sorted(bucket) == [(1, 2), (1, 3), (2, 3)]


def test_pigeonhole_rejects_tiny_graphs():
    with pytest.raises(ParameterError):
        rc.pigeonhole_pairs(gc.generate("complete", n=3))


def test_pigeonhole_sampling_path_is_deterministic():
    g = gc.generate("gnp", n=60, p=0.5, seed=7)
    a = rc.pigeonhole_pairs(g, pair_enum_cap=50, seed=11)
    b = rc.pigeonhole_pairs(g, pair_enum_cap=50, seed=11)
    assert a == b


# ── complement filter ────────────────────────────────────────────────────


def test_filter_close_complements_matches_direct_rule():
    g = gc.generate("gnp", n=30, p=0.5, seed=5)
    _, bucket = rc.pigeonhole_pairs(g)
    kept = rc.filter_close_complements(g, bucket, 0.3)
    thr = 0.3 * g.n
    for a, b in bucket:
        gap = (g.adj[a] ^ g.comp_row(b)).bit_count()
        assert ((a, b) in kept) == (gap >= thr)


# ── star / matching split ────────────────────────────────────────────────


def test_star_mode_on_star_heavy_bucket():
    g = gc.generate("gnp", n=64, p=0.5, seed=1)
    d_prime, bucket = rc.pigeonhole_pairs(g)
    kept = rc.filter_close_complements(g, bucket, 0.1)
    mode, anchor, units, d_dp = rc.star_or_matching(
        g, bucket, kept, d_prime, star_floor=4.0, match_floor=1e9)
    assert mode == "star"
    assert anchor is not None
    assert d_dp == d_prime - g.degree(anchor)
    assert all(not u.is_pair for u in units)
    # star units come from the anchor's unfiltered bucket pairs
    partners = {b if a == anchor else a
                for a, b in bucket if anchor in (a, b)}
    assert {u.vertices[0] for u in units} == partners


def test_matching_mode_when_star_unreachable():
    g = gc.generate("gnp", n=64, p=0.5, seed=1)
    d_prime, bucket = rc.pigeonhole_pairs(g)
    kept = rc.filter_close_complements(g, bucket, 0.1)
    mode, anchor, units, d_dp = rc.star_or_matching(
        g, bucket, kept, d_prime, star_floor=1e9, match_floor=3.0)
    assert mode == "matching" and anchor is None
    assert d_dp == d_prime
    assert all(u.is_pair for u in units)
    seen = 0
    for u in units:  # greedy matching is vertex-disjoint
        assert not (u.mask() & seen)
        seen |= u.mask()


def test_star_or_matching_failure_stage():
    g = gc.generate("gnp", n=64, p=0.5, seed=1)
    d_prime, bucket = rc.pigeonhole_pairs(g)
    kept = rc.filter_close_complements(g, bucket, 0.1)
    with pytest.raises(ConstructionFailure) as exc:
        rc.star_or_matching(g, bucket, kept, d_prime, 1e9, 1e9)
    assert exc.value.stage == "star_or_matching"


# ── conflict-free unit family ────────────────────────────────────────────


def test_independent_units_are_pairwise_far():
    g = gc.generate("gnp", n=48, p=0.5, seed=9)
    units = tuple(gc.Unit.single(v) for v in range(20))
    theta = 0.05
    a = rc.independent_units(g, units, theta)
    assert a
    thr = theta * g.n
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            assert gc.symdiff_size(g, a[i], a[j]) >= thr


# ── end-to-end construction ──────────────────────────────────────────────


def test_construct_verifies_on_gnp_battery():
    ok = 0
    for seed in range(6):
        g = gc.generate("gnp", n=256, p=0.5, seed=100 + seed)
        try:
            res = construct(g, M256, ConstructionParams(seed=seed))
        except ConstructionFailure:
            continue
        ok += 1
        assert verify_construction(g, res, ConstructionParams(seed=seed))
        assert res.mode in ("star", "matching")
        assert len(res.s_units) >= 1 and len(res.t_units) >= 1
        assert len(res.x_units) >= 1
        assert 0 < res.p < 1
        assert res.gap_floor >= 1
    assert ok >= 5  # soundness target is 90%; 6 local seeds may drop one


def test_construct_is_seed_deterministic():
    params = ConstructionParams(seed=4)
    a = construct(G256, M256, params)
    b = construct(G256, M256, params)
    assert a.u0_mask == b.u0_mask
    assert a.all_units() == b.all_units()
    assert a.d == b.d and a.p == b.p


def test_construct_rejects_m_outside_window():
    with pytest.raises(ParameterError):
        construct(G256, 10 * M256)
    with pytest.raises(ParameterError):
        construct(G256, 0)


def test_construct_density_entry_check():
    sparse = gc.generate("gnp", n=256, p=0.02, seed=0)
    with pytest.raises(ConstructionFailure) as exc:
        construct(sparse, M256)
    assert exc.value.stage == "density"


def test_construct_rich_prepass_rejects_homogeneous_input():
    g = gc.generate("complete", n=256)
    params = ConstructionParams(seed=0, delta=0.3)
    with pytest.raises(ConstructionFailure) as exc:
        construct(g, M256, params)
    assert exc.value.stage == "rich_prepass"


def test_verifier_catches_tampering():
    params = ConstructionParams(seed=4)
    res = construct(G256, M256, params)
    # overlap: copy an S unit into X
    bad = replace(res, x_units=res.x_units[:-1] + (res.s_units[0],))
    with pytest.raises(ContractViolation):
        verify_construction(G256, bad, params)
    # shrink the recorded degree target far below reality
    bad = replace(res, d=res.d + 100 * math.sqrt(res.working_n))
    with pytest.raises(ContractViolation):
        verify_construction(G256, bad, params)
    # claim a much larger symdiff floor than the family achieves
    bad = replace(res, kappa3=0.9)
    with pytest.raises(ContractViolation):
        verify_construction(G256, bad, params)
    # mix unit kinds against the declared mode
    flipped = "matching" if res.mode == "star" else "star"
    bad = replace(res, mode=flipped)
    with pytest.raises(ContractViolation):
        verify_construction(G256, bad, params)


def test_construct_diagnostics_shape():
    res = construct(G256, M256, ConstructionParams(seed=4))
    d = res.diagnostics
    for key in ("rich_status", "h_size", "l_size", "a_size", "b_size",
                "u0_size", "resolved", "sampling"):
        assert key in d
    assert len(d["sampling"]["attempts"]) >= 1
    assert d["sampling"]["accepted_attempt"] >= 0
    assert d["u0_size"] == res.u0_mask.bit_count()
    assert res.working_n == 256


def test_construct_event_knobs_are_respected():
    # vacuous event-4/5 knobs cannot make the pipeline fail those events
    params = ConstructionParams(seed=4, kappa3=0.0, kappa4=1e9)
    res = construct(G256, M256, params)
    assert res.kappa3 == 0.0
    hist = res.diagnostics["sampling"]["event_fail_histogram"]  # one slot per event
    assert hist[3] == 0 and hist[4] == 0
