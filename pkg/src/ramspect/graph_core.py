"""Bit-packed graph primitives.

A graph on n vertices is stored as one Python integer per vertex: bit u of
``adj[v]`` is set iff uv is an edge.  Arbitrary-precision ints give branch-free
AND/XOR row operations and popcounts via ``int.bit_count``, which is what every
counting routine in this package reduces to.

Vertex sets are plain int bitmasks throughout ("mask" in signatures).  A Unit
is either a single vertex or an unordered pair of distinct vertices; pair
neighborhoods are multisets (multiplicities in {0,1,2}) and all unit-level
quantities (degrees, symmetric differences) honor multiplicity.

Complement neighborhoods follow the complement graph: N_bar(v) excludes v
itself as well as N(v).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import CapacityError, ContractViolation, GraphParseError, ParameterError

HOMOGENEOUS_CAP = 64  # exact clique/independence search refuses larger graphs


def mask_of(vertices) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def iter_bits(mask: int):
    """Yield set bit positions of mask in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class Graph:
    """Immutable simple graph on vertices 0..n-1 with bitset adjacency rows."""

    __slots__ = ("n", "adj", "full_mask")

    def __init__(self, n: int, adj, _checked: bool = False):
        if n < 0:
            raise ParameterError(f"vertex count must be nonnegative, got {n}")
        adj = tuple(adj)
        if len(adj) != n:
            raise ParameterError(f"expected {n} adjacency rows, got {len(adj)}")
        full = (1 << n) - 1
        if not _checked:
            for v, row in enumerate(adj):
                if row >> n:
                    raise ParameterError(f"row {v} has bits beyond vertex range")
                if (row >> v) & 1:
                    raise ParameterError(f"self-loop at vertex {v}")
            for v, row in enumerate(adj):
                for u in iter_bits(row):
                    if not (adj[u] >> v) & 1:
                        raise ParameterError(f"asymmetric adjacency at {v},{u}")
        self.n = n
        self.adj = adj
        self.full_mask = full

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self):
        return hash((self.n, self.adj))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edge_count()})"

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.adj) // 2

    def degrees(self) -> list[int]:
        return [r.bit_count() for r in self.adj]

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.adj[u] >> v) & 1)

    def comp_row(self, v: int) -> int:
        """Neighborhood of v in the complement graph (excludes v)."""
        return self.full_mask & ~self.adj[v] & ~(1 << v)


def from_edges(n: int, edges) -> Graph:
    rows = [0] * n
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise ParameterError(f"edge ({u},{v}) out of range for n={n}")
        if u == v:
            raise ParameterError(f"self-loop ({u},{v})")
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    return Graph(n, rows, _checked=True)


def complement(g: Graph) -> Graph:
    return Graph(g.n, (g.comp_row(v) for v in range(g.n)), _checked=True)


def induced_subgraph(g: Graph, mask: int) -> tuple[Graph, list[int]]:
    """Induced subgraph on the masked vertices, renumbered to 0..k-1.

    Returns (subgraph, vertex_map) where vertex_map[i] is the original id of
    subgraph vertex i.
    """
    if mask & ~g.full_mask:
        raise ParameterError("mask has bits outside the vertex range")
    vmap = list(iter_bits(mask))
    rows = []
    for v in vmap:
        row = g.adj[v] & mask
        packed = 0
        for j, u in enumerate(vmap):
            packed |= ((row >> u) & 1) << j
        rows.append(packed)
    return Graph(len(vmap), rows, _checked=True), vmap


# ── units ────────────────────────────────────────────────────────────────


@dataclass(frozen=True, order=True)
class Unit:
    """A single vertex or an unordered pair of distinct vertices."""

    vertices: tuple

    @staticmethod
    def single(v: int) -> "Unit":
        return Unit((v,))

    @staticmethod
    def pair(a: int, b: int) -> "Unit":
        if a == b:
            raise ParameterError(f"pair components must be distinct, got ({a},{b})")
        return Unit((a, b) if a < b else (b, a))

    @property
    def is_pair(self) -> bool:
        return len(self.vertices) == 2

    def mask(self) -> int:
        m = 0
        for v in self.vertices:
            m |= 1 << v
        return m


def unit_rows(g: Graph, x: Unit, compl: bool = False) -> tuple[int, int]:
    """Multiplicity masks (m1, m2) of the unit's neighborhood multiset.

    m2 covers vertices of multiplicity 2 (pair units only), m1 multiplicity 1.
    With compl=True each component neighborhood is complemented first.
    """
    if x.is_pair:
        a, b = x.vertices
        ra = g.comp_row(a) if compl else g.adj[a]
        rb = g.comp_row(b) if compl else g.adj[b]
        return ra ^ rb, ra & rb
    (v,) = x.vertices
    return (g.comp_row(v) if compl else g.adj[v]), 0


def unit_degree(g: Graph, x: Unit, umask: int) -> int:
    """Multiset degree of the unit into the masked set: sum of component degrees."""
    return sum((g.adj[v] & umask).bit_count() for v in x.vertices)


def symdiff_size(
    g: Graph,
    x: Unit,
    y: Unit,
    umask: int | None = None,
    compl_y: bool = False,
    count_elements: bool = False,
) -> int:
    """Size of the multiset symmetric difference of the two unit neighborhoods,
    restricted to umask (whole vertex set when None).

    Default counts total multiplicity gap (sum over vertices of
    |mult_x - mult_y|); count_elements=True counts vertices with differing
    multiplicity instead.  For two singles both readings agree with the
    ordinary set symmetric difference.
    """
    if umask is None:
        umask = g.full_mask
    a1, a2 = unit_rows(g, x)
    b1, b2 = unit_rows(g, y, compl=compl_y)
    # gap 2: one side has multiplicity 2 where the other has 0
    g2 = (a2 & ~(b2 | b1)) | (b2 & ~(a2 | a1))
    # gap 1: multiplicities differ by exactly one
    g1 = (a2 & b1) | (a1 & b2) | (a1 & ~(b2 | b1)) | (b1 & ~(a2 | a1))
    if count_elements:
        return ((g1 | g2) & umask).bit_count()
    return ((g1 & umask).bit_count()) + 2 * ((g2 & umask).bit_count())


# ── edge counting ────────────────────────────────────────────────────────


def count_edges(g: Graph, amask: int, bmask: int | None = None) -> int:
    """Edges inside amask, or between amask and bmask (which must be disjoint)."""
    if bmask is None:
        return sum((g.adj[v] & amask).bit_count() for v in iter_bits(amask)) // 2
    if amask & bmask:
        raise ContractViolation("count_edges(A, B) requires disjoint masks")
    return sum((g.adj[v] & bmask).bit_count() for v in iter_bits(amask))


# ── generation and serialization ─────────────────────────────────────────


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def generate(model: str, *, n: int | None = None, p: float = 0.5,
             q: int | None = None, seed: int = 0) -> Graph:
    """Deterministic graph generators: gnp, paley, complete, empty."""
    if model == "gnp":
        if n is None or n < 0:
            raise ParameterError("gnp requires n >= 0")
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"gnp requires p in [0,1], got {p}")
        rng = random.Random(seed)
        rows = [0] * n
        for u in range(n):
            for v in range(u + 1, n):
                if rng.random() < p:
                    rows[u] |= 1 << v
                    rows[v] |= 1 << u
        return Graph(n, rows, _checked=True)
    if model == "paley":
        if q is None:
            raise ParameterError("paley requires q")
        if not _is_prime(q) or q % 4 != 1:
            raise ParameterError(f"paley requires a prime q = 1 mod 4, got {q}")
        residues = 0
        for x in range(1, q):
            residues |= 1 << (x * x % q)
        rows = []
        for u in range(q):
            row = 0
            for v in range(q):
                if v != u and (residues >> ((u - v) % q)) & 1:
                    row |= 1 << v
            rows.append(row)
        return Graph(q, rows, _checked=True)
    if model == "complete":
        if n is None or n < 0:
            raise ParameterError("complete requires n >= 0")
        full = (1 << n) - 1
        return Graph(n, (full & ~(1 << v) for v in range(n)), _checked=True)
    if model == "empty":
        if n is None or n < 0:
            raise ParameterError("empty requires n >= 0")
        return Graph(n, (0,) * n, _checked=True)
    raise ParameterError(f"unknown model {model!r}")


def load_graph(text: str) -> Graph:
    """Parse the edge-list format: first line "n <N>", then one "u v" per line.

    Blank lines and lines starting with '#' are ignored.
    """
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise GraphParseError(f"line {lineno}: expected header 'n <count>'")
            try:
                n = int(parts[1])
            except ValueError:
                raise GraphParseError(f"line {lineno}: bad vertex count {parts[1]!r}")
            if n < 0:
                raise GraphParseError(f"line {lineno}: negative vertex count")
            continue
        if len(parts) != 2:
            raise GraphParseError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"line {lineno}: non-integer endpoint in {line!r}")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphParseError(f"line {lineno}: endpoint out of range in {line!r}")
        if u == v:
            raise GraphParseError(f"line {lineno}: self-loop {u}")
        edges.append((u, v))
    if n is None:
        raise GraphParseError("empty input: missing 'n <count>' header")
    return from_edges(n, edges)


def dump_graph(g: Graph) -> str:
    """Inverse of load_graph: header plus sorted edge lines."""
    lines = [f"n {g.n}"]
    for u in range(g.n):
        row = g.adj[u] >> (u + 1) << (u + 1)  # edges to higher-numbered vertices
        for v in iter_bits(row):
            lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


# ── exact clique / independence numbers ──────────────────────────────────


def _max_clique(adj: list[int], n: int) -> int:
    """Branch-and-bound maximum clique with a greedy coloring bound."""
    best = 0
    order = sorted(range(n), key=lambda v: adj[v].bit_count(), reverse=True)
    # remap rows so the search expands high-degree vertices first
    pos = {v: i for i, v in enumerate(order)}
    rows = [0] * n
    for v in range(n):
        r = 0
        for u in iter_bits(adj[v]):
            r |= 1 << pos[u]
        rows[pos[v]] = r

    def color_bound(cand: int) -> list[tuple[int, int]]:
        # greedy coloring: returns (vertex, color) with colors nondecreasing
        colored = []
        color = 0
        rest = cand
        while rest:
            color += 1
            avail = rest
            while avail:
                low = avail & -avail
                v = low.bit_length() - 1
                avail &= ~low & ~rows[v]
                rest ^= low
                colored.append((v, color))
        return colored

    def expand(cand: int, size: int):
        nonlocal best
        colored = color_bound(cand)
        for v, color in reversed(colored):
            if size + color <= best:
                return  # colors are nondecreasing: nothing left can improve
            if size + 1 > best:
                best = size + 1
            nxt = cand & rows[v]
            if nxt:
                expand(nxt, size + 1)
            cand ^= 1 << v

    expand((1 << n) - 1, 0)
    return best


def homogeneous_number(g: Graph) -> tuple[int, int]:
    """Exact (clique number, independence number).  Refuses n > HOMOGENEOUS_CAP."""
    if g.n > HOMOGENEOUS_CAP:
        raise CapacityError(
            f"exact homogeneous search capped at n={HOMOGENEOUS_CAP}; "
            f"n={g.n} would branch over subsets of up to 2^{g.n} candidates"
        )
    if g.n == 0:
        return 0, 0
    omega = _max_clique(list(g.adj), g.n)
    alpha = _max_clique([g.comp_row(v) for v in range(g.n)], g.n)
    return omega, alpha


def is_c_ramsey(g: Graph, c: float) -> bool:
    """True iff every homogeneous set has size < c*log2(n)."""
    if c <= 0:
        raise ParameterError(f"Ramsey constant must be positive, got {c}")
    if g.n < 2:
        return False
    omega, alpha = homogeneous_number(g)
    return max(omega, alpha) < c * math.log2(g.n)
