"""Exhaustive search for graceful labellings of small trees.

Ground truth for the verifiers and for statistics on label counts.
Vertices are placed in a connected order so each placement after the
first closes exactly one edge, making admissibility two bitmask tests
per candidate.  Also provides closed-form labellings for paths and
stars, the classical families where witnesses are known outright.
"""

from __future__ import annotations

from typing import Optional

from .prepare import order_vertices
from .trees import Tree, path_tree, star_tree
from .verify import Labelling

DEFAULT_CAP = 24


def _guard(t: Tree, m: int, cap: int) -> None:
    if m < t.n:
        raise ValueError(f"need m >= n, got m={m} n={t.n}")
    effective = cap - max(0, m - t.n)
    if t.n > effective:
        raise ValueError(
            f"tree order {t.n} exceeds search cap {effective} at m={m}")


def _ordered(t: Tree):
    order, parent_pos = order_vertices(t, frozenset())
    return order, parent_pos


def exact_graceful(t: Tree, m: int, cap: int = DEFAULT_CAP
                   ) -> Optional[Labelling]:
    """First m-graceful labelling in lexicographic search order, or
    None when no labelling exists.

    Labels are tried ascending at every position, so the witness is
    deterministic for a given tree.
    """
    _guard(t, m, cap)
    order, parent_pos = _ordered(t)
    n = t.n
    psi_pos = [0] * n

    def rec(i: int, used_v: int, used_d: int) -> bool:
        if i == n:
            return True
        parent_label = psi_pos[parent_pos[i]] if i else 0
        for b in range(1, m + 1):
            bit = 1 << b
            if used_v & bit:
                continue
            if i:
                dbit = 1 << abs(b - parent_label)
                if used_d & dbit:
                    continue
            else:
                dbit = 0
            psi_pos[i] = b
            if rec(i + 1, used_v | bit, used_d | dbit):
                return True
        return False

    if not rec(0, 0, 0):
        return None
    return Labelling(t, {v: psi_pos[i] for i, v in enumerate(order)}, m)


def exact_count(t: Tree, m: int, cap: int = DEFAULT_CAP) -> int:
    """Number of m-graceful labellings of t, counted as maps."""
    _guard(t, m, cap)
    _, parent_pos = _ordered(t)
    n = t.n
    psi_pos = [0] * n

    def rec(i: int, used_v: int, used_d: int) -> int:
        if i == n:
            return 1
        total = 0
        parent_label = psi_pos[parent_pos[i]] if i else 0
        for b in range(1, m + 1):
            bit = 1 << b
            if used_v & bit:
                continue
            if i:
                dbit = 1 << abs(b - parent_label)
                if used_d & dbit:
                    continue
            else:
                dbit = 0
            psi_pos[i] = b
            total += rec(i + 1, used_v | bit, used_d | dbit)
        return total

    return rec(0, 0, 0)


def canonical_path_labelling(n: int) -> Labelling:
    """Zigzag labelling of the n-path: 1, n, 2, n-1, ...

    Consecutive differences run n-1 down to 1, each used once.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    psi = {}
    lo, hi = 1, n
    for v in range(1, n + 1):
        if v % 2:
            psi[v] = lo
            lo += 1
        else:
            psi[v] = hi
            hi -= 1
    return Labelling(path_tree(n), psi, n)


def canonical_star_labelling(n: int) -> Labelling:
    """Star on n vertices with the center at label n and leaves 1..n-1."""
    if n < 2:
        raise ValueError("need n >= 2")
    psi = {1: n}
    psi.update({v: v - 1 for v in range(2, n + 1)})
    return Labelling(star_tree(n), psi, n)
