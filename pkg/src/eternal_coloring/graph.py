"""Simple undirected graphs with bitmask adjacency, G(n,p) sampling, named families.

Graphs are immutable after construction.  Adjacency is stored as one Python
int per vertex (bit u set in adj[v] iff uv is an edge), so neighbourhood
intersections are single AND operations.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import Iterable, Iterator


def derive_seed(*parts) -> int:
    """Derive a 64-bit seed from arbitrary labelled parts.

    Contract (fixed, cross-platform): SHA-256 over the parts rendered as
    ``repr`` and joined by '|', truncated to the low 64 bits.
    """
    payload = "|".join(repr(p) for p in parts).encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


@dataclass(frozen=True)
class GnpSpec:
    """Deterministic G(n,p) sample specification."""

    n: int
    p: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0,1], got {self.p}")
        if self.n < 0:
            raise ValueError("n must be non-negative")


class Graph:
    """Immutable simple graph on vertices 0..n-1."""

    __slots__ = ("n", "adj", "closed", "full_mask")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        self.n = n
        self.full_mask = (1 << n) - 1
        adj = [0] * n
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        self.adj = adj
        self.closed = [adj[v] | (1 << v) for v in range(n)]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def max_degree(self) -> int:
        return max((m.bit_count() for m in self.adj), default=0)

    def edge_count(self) -> int:
        return sum(m.bit_count() for m in self.adj) // 2

    def neighbors(self, v: int) -> Iterator[int]:
        return iter_bits(self.adj[v])

    def edges(self) -> list[tuple[int, int]]:
        """All edges (u, v) with u < v, sorted."""
        out = []
        for u in range(self.n):
            m = self.adj[u] >> (u + 1) << (u + 1)
            for v in iter_bits(m):
                out.append((u, v))
        return out

    def to_text(self) -> str:
        """Edge-list serialization: 'n m' header then sorted 'u v' lines."""
        lines = [f"{self.n} {self.edge_count()}"]
        lines.extend(f"{u} {v}" for u, v in self.edges())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        n, m = map(int, lines[0].split())
        edges = [tuple(map(int, ln.split())) for ln in lines[1 : m + 1]]
        if len(edges) != m:
            raise ValueError(f"expected {m} edges, found {len(edges)}")
        return cls(n, edges)

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self):
        return hash((self.n, tuple(self.adj)))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.edge_count()})"


def iter_bits(mask: int) -> Iterator[int]:
    """Yield set-bit positions of mask, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def closed_neighborhood(g: Graph, v: int) -> set[int]:
    """{v} together with its neighbours (the convention used throughout)."""
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range")
    return set(iter_bits(g.closed[v]))


def gnp_generate(spec: GnpSpec) -> Graph:
    """Sample G(n,p) deterministically from the spec.

    One Mersenne-Twister draw per vertex pair, pairs visited in lexicographic
    order (i, j) with i < j; identical spec always yields the identical graph.
    """
    rng = random.Random(spec.seed)
    n, p = spec.n, spec.p
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((i, j))
    return Graph(n, edges)


def make_named(kind: str, size: int) -> Graph:
    """Construct a named small graph.

    kind: 'star' (size = number of leaves, vertex 0 is the centre),
    'path', 'cycle', 'complete', 'empty' (size = number of vertices).
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    if kind == "star":
        return Graph(size + 1, [(0, i) for i in range(1, size + 1)])
    if kind == "path":
        return Graph(size, [(i, i + 1) for i in range(size - 1)])
    if kind == "cycle":
        if size < 3:
            raise ValueError("cycle needs size >= 3")
        return Graph(size, [(i, (i + 1) % size) for i in range(size)])
    if kind == "complete":
        return Graph(size, [(i, j) for i in range(size) for j in range(i + 1, size)])
    if kind == "empty":
        return Graph(size)
    raise ValueError(f"unknown graph kind {kind!r}")
