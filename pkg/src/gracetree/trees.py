"""Labelled trees on vertices 1..n.

Prüfer codec, uniform random generation, degree statistics, and a strict
text format (first line n, then n-1 lines "u v").
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .rng import Rng


class Tree:
    """Unrooted tree on 1..n. Validates shape on construction, then immutable."""

    __slots__ = ("n", "edges", "adj")

    def __init__(self, n: int, edges):
        if n < 1:
            raise ValueError("tree needs at least one vertex")
        norm = []
        seen = set()
        for u, v in edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge ({u},{v}) out of range 1..{n}")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            e = (u, v) if u < v else (v, u)
            if e in seen:
                raise ValueError(f"parallel edge {e}")
            seen.add(e)
            norm.append(e)
        if len(norm) != n - 1:
            raise ValueError(f"tree on {n} vertices needs {n-1} edges, got {len(norm)}")
        adj = [[] for _ in range(n + 1)]
        for u, v in norm:
            adj[u].append(v)
            adj[v].append(u)
        # connectivity: n-1 edges + connected <=> tree
        reached = 1
        mark = bytearray(n + 1)
        mark[1] = 1
        stack = [1]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if not mark[y]:
                    mark[y] = 1
                    reached += 1
                    stack.append(y)
        if reached != n:
            raise ValueError("edge set is not connected")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(norm))
        object.__setattr__(self, "adj", tuple(tuple(a) for a in adj))

    def __setattr__(self, *a):
        raise AttributeError("Tree is immutable")

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def __eq__(self, other):
        return (isinstance(other, Tree) and self.n == other.n
                and set(self.edges) == set(other.edges))

    def __hash__(self):
        return hash((self.n, frozenset(self.edges)))

    def __repr__(self):
        return f"Tree(n={self.n}, edges={list(self.edges)})"


@dataclass(frozen=True)
class DegreeStats:
    max_degree: int
    sum_sq_degree: int


def prufer_decode(seq, n: int) -> Tree:
    """Unique tree on 1..n with Prüfer sequence seq (length n-2)."""
    if n < 2:
        raise ValueError("prufer_decode needs n >= 2")
    seq = list(seq)
    if len(seq) != n - 2:
        raise ValueError(f"sequence length must be {n-2}, got {len(seq)}")
    deg = [1] * (n + 1)
    for s in seq:
        if not (1 <= s <= n):
            raise ValueError(f"sequence entry {s} out of range 1..{n}")
        deg[s] += 1
    edges = []
    ptr = 1
    while deg[ptr] != 1:
        ptr += 1
    leaf = ptr
    for s in seq:
        edges.append((leaf, s))
        deg[s] -= 1
        if deg[s] == 1 and s < ptr:
            leaf = s
        else:
            ptr += 1
            while deg[ptr] != 1:
                ptr += 1
            leaf = ptr
    edges.append((leaf, n))
    return Tree(n, edges)


def prufer_encode(t: Tree) -> list[int]:
    """Prüfer sequence of t: repeatedly strip the smallest leaf."""
    n = t.n
    if n < 2:
        raise ValueError("prufer_encode needs n >= 2")
    deg = [0] + [t.degree(v) for v in range(1, n + 1)]
    dead = bytearray(n + 1)
    heap = [v for v in range(1, n + 1) if deg[v] == 1]
    heapq.heapify(heap)
    seq = []
    for _ in range(n - 2):
        leaf = heapq.heappop(heap)
        dead[leaf] = 1
        nb = next(u for u in t.adj[leaf] if not dead[u])
        seq.append(nb)
        deg[nb] -= 1
        if deg[nb] == 1:
            heapq.heappush(heap, nb)
    return seq


def random_tree(n: int, rng: Rng) -> Tree:
    """Uniform labelled tree: uniform Prüfer sequence, decoded."""
    if n < 2:
        raise ValueError("random_tree needs n >= 2")
    return prufer_decode([1 + rng.randbelow(n) for _ in range(n - 2)], n)


def path_tree(n: int) -> Tree:
    """Path 1-2-...-n."""
    return Tree(n, [(i, i + 1) for i in range(1, n)])


def star_tree(n: int) -> Tree:
    """Star with center 1 and leaves 2..n."""
    return Tree(n, [(1, v) for v in range(2, n + 1)])


def degree_stats(t: Tree) -> DegreeStats:
    degs = [t.degree(v) for v in range(1, t.n + 1)]
    return DegreeStats(max(degs), sum(d * d for d in degs))


def leaves(t: Tree) -> list[int]:
    return [v for v in range(1, t.n + 1) if t.degree(v) == 1]


def parse_tree(text: str) -> Tree:
    """Strict text format: line 1 is n, then n-1 lines "u v"."""
    raw = [ln.strip() for ln in text.splitlines()]
    while raw and raw[-1] == "":
        raw.pop()
    if not raw:
        raise ValueError("empty tree text")
    try:
        n = int(raw[0])
    except ValueError:
        raise ValueError(f"first line must be the vertex count, got {raw[0]!r}") from None
    if len(raw) - 1 != max(n - 1, 0):
        raise ValueError(f"expected {n-1} edge lines, got {len(raw)-1}")
    edges = []
    for ln in raw[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"bad edge line {ln!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"bad edge line {ln!r}") from None
        edges.append((u, v))
    return Tree(n, edges)


def format_tree(t: Tree) -> str:
    lines = [str(t.n)]
    lines += [f"{u} {v}" for u, v in t.edges]
    return "\n".join(lines) + "\n"
