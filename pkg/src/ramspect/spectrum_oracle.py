"""Exact induced-subgraph size spectra for small graphs.

phi_exact enumerates all 2^n induced subgraphs with a reflected-Gray-code
walk: each step toggles one vertex v and updates the running edge count by
|N(v) ∩ current|, one AND plus one popcount.  psi_exact is the same walk
recording (order, size) pairs.  phi_naive recounts every subset from scratch
and exists only to cross-check the walk.

The walk parallelizes by fixing the membership of the top t vertices and
running 2^t independent sub-walks over the rest; the merged spectrum is
identical to the serial one regardless of worker count or schedule.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .errors import CapacityError, ParameterError
from .graph_core import Graph, count_edges, iter_bits

PHI_EXACT_CAP = 30
PHI_NAIVE_CAP = 20


@dataclass(frozen=True)
class SizeSpectrum:
    """Sorted set of achievable induced-subgraph edge counts of one graph."""

    n: int
    sizes: tuple

    def __post_init__(self):
        top = self.n * (self.n - 1) // 2
        if not self.sizes or self.sizes[0] != 0:
            raise ParameterError("a size spectrum always contains 0 (empty subgraph)")
        for a, b in zip(self.sizes, self.sizes[1:]):
            if a >= b:
                raise ParameterError("spectrum sizes must be strictly increasing")
        if self.sizes[-1] > top:
            raise ParameterError(f"size {self.sizes[-1]} exceeds C({self.n},2)={top}")

    def __len__(self):
        return len(self.sizes)

    def __iter__(self):
        return iter(self.sizes)

    def __contains__(self, e):
        lo, hi = 0, len(self.sizes)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.sizes[mid] < e:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(self.sizes) and self.sizes[lo] == e


def _require_cap(n: int, cap: int, op: str):
    if n > cap:
        est = (1 << n) // 2_000_000  # rough seconds at a couple million steps/s
        raise CapacityError(
            f"{op} is exact over all 2^n subsets and is capped at n={cap}; "
            f"n={n} would take ~2^{n} steps (~{est}s)"
        )


def _walk_phi(adj, m: int, init_mask: int, init_count: int, seen: bytearray) -> int:
    """Gray-code sub-walk over subsets of the low m vertices on top of a fixed
    high-vertex mask.  Marks every reachable edge count; returns steps taken."""
    cur = init_mask
    e = init_count
    seen[e] = 1
    total = 1 << m
    s = 1
    bc = int.bit_count
    while s < total:
        low = s & -s
        v = low.bit_length() - 1
        row = adj[v]
        if cur & low:
            cur ^= low
            e -= bc(row & cur)
        else:
            e += bc(row & cur)
            cur ^= low
        seen[e] = 1
        s += 1
    return total


def _walk_psi(adj, m: int, init_mask: int, init_count: int, init_size: int,
              stride: int, seen: bytearray) -> int:
    cur = init_mask
    e = init_count
    size = init_size
    seen[size * stride + e] = 1
    total = 1 << m
    s = 1
    bc = int.bit_count
    while s < total:
        low = s & -s
        v = low.bit_length() - 1
        row = adj[v]
        if cur & low:
            cur ^= low
            e -= bc(row & cur)
            size -= 1
        else:
            e += bc(row & cur)
            cur ^= low
            size += 1
        seen[size * stride + e] = 1
        s += 1
    return total


def _blocks(g: Graph, workers: int):
    """Split the subset lattice into 2^t prefix blocks, t = ceil(log2(workers))."""
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    t = 0
    while (1 << t) < workers and t < g.n:
        t += 1
    m = g.n - t
    for q in range(1 << t):
        pmask = q << m
        yield pmask, count_edges(g, pmask), m


def phi_exact(g: Graph, cap: int = PHI_EXACT_CAP, workers: int = 1) -> SizeSpectrum:
    """The full spectrum {e(H) : H induced subgraph of g}, computed exactly."""
    _require_cap(g.n, cap, "phi_exact")
    top = g.n * (g.n - 1) // 2
    adj = g.adj
    tasks = list(_blocks(g, workers))
    buffers = [bytearray(top + 1) for _ in tasks]
    if workers == 1:
        steps = sum(_walk_phi(adj, m, pm, pc, buf)
                    for (pm, pc, m), buf in zip(tasks, buffers))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_walk_phi, adj, m, pm, pc, buf)
                    for (pm, pc, m), buf in zip(tasks, buffers)]
            steps = sum(f.result() for f in futs)
    assert steps == 1 << g.n, f"walk visited {steps} subsets, expected 2^{g.n}"
    merged = bytearray(top + 1)
    for buf in buffers:
        for i, b in enumerate(buf):
            if b:
                merged[i] = 1
    return SizeSpectrum(g.n, tuple(i for i, b in enumerate(merged) if b))


def phi_naive(g: Graph, cap: int = PHI_NAIVE_CAP) -> SizeSpectrum:
    """Reference oracle: recounts the edges of every subset from scratch."""
    _require_cap(g.n, cap, "phi_naive")
    adj = g.adj
    seen = set()
    bc = int.bit_count
    for mask in range(1 << g.n):
        e = 0
        m = mask
        while m:
            low = m & -m
            m ^= low
            e += bc(adj[low.bit_length() - 1] & m)  # edges to still-unprocessed bits
        seen.add(e)
    return SizeSpectrum(g.n, tuple(sorted(seen)))


def psi_exact(g: Graph, cap: int = PHI_EXACT_CAP, workers: int = 1) -> tuple:
    """All achievable (order, size) pairs over induced subgraphs, sorted."""
    _require_cap(g.n, cap, "psi_exact")
    top = g.n * (g.n - 1) // 2
    stride = top + 1
    adj = g.adj
    tasks = list(_blocks(g, workers))
    buffers = [bytearray((g.n + 1) * stride) for _ in tasks]
    if workers == 1:
        steps = sum(_walk_psi(adj, m, pm, pc, pm.bit_count(), stride, buf)
                    for (pm, pc, m), buf in zip(tasks, buffers))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_walk_psi, adj, m, pm, pc, pm.bit_count(), stride, buf)
                    for (pm, pc, m), buf in zip(tasks, buffers)]
            steps = sum(f.result() for f in futs)
    assert steps == 1 << g.n, f"walk visited {steps} subsets, expected 2^{g.n}"
    merged = bytearray((g.n + 1) * stride)
    for buf in buffers:
        for i, b in enumerate(buf):
            if b:
                merged[i] = 1
    return tuple((i // stride, i % stride) for i, b in enumerate(merged) if b)


def psi_naive(g: Graph, cap: int = PHI_NAIVE_CAP) -> tuple:
    """From-scratch reference for psi_exact."""
    _require_cap(g.n, cap, "psi_naive")
    adj = g.adj
    seen = set()
    bc = int.bit_count
    for mask in range(1 << g.n):
        e = 0
        m = mask
        while m:
            low = m & -m
            m ^= low
            e += bc(adj[low.bit_length() - 1] & m)
        seen.add((bc(mask), e))
    return tuple(sorted(seen))


def phi_window(g: Graph, lo: int, hi: int, cap: int = PHI_EXACT_CAP,
               workers: int = 1) -> tuple:
    """Members of the spectrum within [lo, hi]."""
    top = g.n * (g.n - 1) // 2
    if not (0 <= lo <= hi <= top):
        raise ParameterError(f"window [{lo},{hi}] out of range [0,{top}]")
    spectrum = phi_exact(g, cap=cap, workers=workers)
    return tuple(e for e in spectrum if lo <= e <= hi)


def complete_graph_spectrum(n: int) -> tuple:
    """Closed form for K_n: exactly the triangular numbers C(k,2), k <= n."""
    return tuple(sorted({k * (k - 1) // 2 for k in range(n + 1)}))
