"""Bit-packed graph primitives against brute-force recounts."""
import itertools
import random

import pytest

from ramspect import graph_core as gc
from ramspect.errors import GraphParseError, ParameterError


def brute_count_edges(g, avs, bvs=None):
    if bvs is None:
        return sum(1 for u, v in itertools.combinations(sorted(avs), 2)
                   if g.has_edge(u, v))
    return sum(1 for u in avs for v in bvs if g.has_edge(u, v))


def random_graph(rng, n, p=0.5):
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)
             if rng.random() < p]
    return gc.from_edges(n, edges)


# ── construction and basic counts ────────────────────────────────────────


def test_from_edges_symmetry_and_counts():
    g = gc.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert g.n == 4
    assert g.edge_count() == 3
    assert g.degrees() == [1, 2, 2, 1]
    assert g.has_edge(0, 1) and g.has_edge(1, 0)
    assert not g.has_edge(0, 2)


def test_from_edges_rejects_bad_input():
    with pytest.raises(ParameterError):
        gc.from_edges(3, [(0, 0)])
    with pytest.raises(ParameterError):
        gc.from_edges(3, [(0, 5)])


def test_complement_involution():
    rng = random.Random(7)
    for _ in range(20):
        g = random_graph(rng, rng.randrange(1, 12))
        gg = gc.complement(gc.complement(g))
        assert gg.adj == g.adj
        total = g.n * (g.n - 1) // 2
        assert g.edge_count() + gc.complement(g).edge_count() == total


def test_comp_row_excludes_self():
    g = gc.generate("gnp", n=9, p=0.4, seed=3)
    for v in range(g.n):
        row = g.comp_row(v)
        assert not (row >> v) & 1
        assert row == (g.full_mask & ~g.adj[v]) & ~(1 << v)


def test_induced_subgraph_matches_brute_force():
    rng = random.Random(11)
    for _ in range(30):
        n = rng.randrange(2, 13)
        g = random_graph(rng, n)
        keep = [v for v in range(n) if rng.random() < 0.6]
        sub, vmap = gc.induced_subgraph(g, gc.mask_of(keep))
        assert sub.n == len(keep)
        assert sorted(vmap) == sorted(keep)
        for i, j in itertools.combinations(range(sub.n), 2):
            assert sub.has_edge(i, j) == g.has_edge(vmap[i], vmap[j])


def test_count_edges_within_and_across():
    rng = random.Random(13)
    for _ in range(40):
        n = rng.randrange(2, 14)
        g = random_graph(rng, n)
        a = [v for v in range(n) if rng.random() < 0.5]
        b = [v for v in range(n) if v not in a and rng.random() < 0.5]
        assert gc.count_edges(g, gc.mask_of(a)) == brute_count_edges(g, a)
        assert gc.count_edges(g, gc.mask_of(a), gc.mask_of(b)) == \
            brute_count_edges(g, a, b)


def test_mask_helpers_roundtrip():
    vs = [0, 3, 5, 11]
    assert sorted(gc.iter_bits(gc.mask_of(vs))) == vs


# ── units ────────────────────────────────────────────────────────────────


def test_unit_basics():
    s = gc.Unit.single(4)
    p = gc.Unit.pair(7, 2)
    assert not s.is_pair and p.is_pair
    assert p.vertices == (2, 7)  # stored sorted
    assert s.mask() == 1 << 4
    assert p.mask() == (1 << 2) | (1 << 7)
    with pytest.raises(ParameterError):
        gc.Unit.pair(3, 3)


def test_unit_degree_counts_multiset():
    """Pair degree = edges from both endpoints into the set, multiplicity kept."""
    rng = random.Random(17)
    for _ in range(30):
        n = rng.randrange(3, 12)
        g = random_graph(rng, n)
        umask = gc.mask_of([v for v in range(n) if rng.random() < 0.5])
        a, b = rng.sample(range(n), 2)
        x = gc.Unit.pair(a, b)
        want = sum(1 for v in gc.iter_bits(umask) if g.has_edge(a, v)) + \
            sum(1 for v in gc.iter_bits(umask) if g.has_edge(b, v))
        assert gc.unit_degree(g, x, umask) == want
        v = rng.randrange(n)
        want_s = sum(1 for u in gc.iter_bits(umask) if g.has_edge(v, u))
        assert gc.unit_degree(g, gc.Unit.single(v), umask) == want_s


def brute_symdiff(g, x, y, uvs, compl_y):
    """Summed multiset symmetric-difference gap, restricted to uvs."""
    def mult(unit, v):
        if compl_y and unit is y:
            return sum(1 for w in unit.vertices if w != v and not g.has_edge(w, v))
        return sum(1 for w in unit.vertices if g.has_edge(w, v))
    return sum(abs(mult(x, v) - mult(y, v)) for v in uvs)


def test_symdiff_size_matches_brute_force():
    rng = random.Random(23)
    for _ in range(60):
        n = rng.randrange(4, 12)
        g = random_graph(rng, n)
        uvs = [v for v in range(n) if rng.random() < 0.7]
        mk = lambda: (gc.Unit.single(rng.randrange(n)) if rng.random() < 0.5
                      else gc.Unit.pair(*rng.sample(range(n), 2)))
        x, y = mk(), mk()
        for compl_y in (False, True):
            got = gc.symdiff_size(g, x, y, gc.mask_of(uvs), compl_y=compl_y)
            assert got == brute_symdiff(g, x, y, uvs, compl_y)


def test_symdiff_close_complement_single_pair():
    # |N(x1) ^ comp-neighborhood(x2)| via the unit helper, checked by hand
    g = gc.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    x1, x2 = gc.Unit.single(0), gc.Unit.single(3)
    full = g.full_mask
    got = gc.symdiff_size(g, x1, x2, full, compl_y=True)
    # N(0) = {1}; complement row of 3 = {0,1}; difference = {0}
    assert got == 1


# ── generators ───────────────────────────────────────────────────────────


def test_generate_complete_and_empty():
    k = gc.generate("complete", n=6)
    e = gc.generate("empty", n=6)
    assert k.edge_count() == 15 and e.edge_count() == 0


def test_generate_gnp_is_seed_deterministic():
    a = gc.generate("gnp", n=30, p=0.5, seed=9)
    b = gc.generate("gnp", n=30, p=0.5, seed=9)
    c = gc.generate("gnp", n=30, p=0.5, seed=10)
    assert a.adj == b.adj
    assert a.adj != c.adj


def test_generate_gnp_frozen_sample():
    g = gc.generate("gnp", n=10, p=0.5, seed=42)
    assert g.edge_count() == 21
    assert g.degrees() == [5, 5, 5, 5, 2, 3, 3, 3, 4, 7]


def test_generate_paley_13():
    g = gc.generate("paley", q=13)
    assert g.edge_count() == 39
    assert set(g.degrees()) == {6}
    # quadratic residues mod 13
    assert sorted(gc.iter_bits(g.adj[0])) == [1, 3, 4, 9, 10, 12]
    # self-complementary: isomorphic degree/edge profile
    assert gc.complement(g).edge_count() == 39


def test_generate_paley_rejects_bad_modulus():
    with pytest.raises(ParameterError):
        gc.generate("paley", q=15)
    with pytest.raises(ParameterError):
        gc.generate("paley", q=7)  # 7 % 4 == 3


def test_generate_rejects_unknown_model():
    with pytest.raises(ParameterError):
        gc.generate("smallworld", n=5)


# ── serialization ────────────────────────────────────────────────────────


def test_dump_load_roundtrip():
    rng = random.Random(31)
    for _ in range(10):
        g = random_graph(rng, rng.randrange(1, 15))
        assert gc.load_graph(gc.dump_graph(g)).adj == g.adj


def test_load_graph_ignores_comments_and_blanks():
    g = gc.load_graph("# hi\n\nn 3\n0 1\n# mid\n1 2\n")
    assert g.edge_count() == 2


@pytest.mark.parametrize("text", [
    "", "0 1\n", "n x\n", "n 3\n0 0\n", "n 3\n0 7\n", "n 3\n0\n",
])
def test_load_graph_rejects_malformed(text):
    with pytest.raises(GraphParseError):
        gc.load_graph(text)


# ── homogeneous sets ─────────────────────────────────────────────────────


def test_homogeneous_number_frozen():
    assert gc.homogeneous_number(gc.generate("paley", q=13)) == (3, 3)
    assert gc.homogeneous_number(gc.generate("complete", n=8)) == (8, 1)
    assert gc.homogeneous_number(gc.generate("empty", n=8)) == (1, 8)
    c5 = gc.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])
    assert gc.homogeneous_number(c5) == (2, 2)


def test_is_c_ramsey_on_paley():
    p13 = gc.generate("paley", q=13)
    # hom = 3 <= 10 * log2(13)
    assert gc.is_c_ramsey(p13, 10.0)
    assert not gc.is_c_ramsey(gc.generate("complete", n=32), 1.0)
