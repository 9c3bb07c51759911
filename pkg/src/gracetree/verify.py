"""Labelling verifiers and cyclic packings of complete graphs.

A labelling maps the n vertices of a tree injectively into [1, m]; it
is graceful when the induced edge differences are pairwise distinct,
bipartite-graceful when additionally one color class sits entirely
below the other, and harmonious (with modulus q) when the edge sums
mod q are pairwise distinct.  A graceful labelling embeds the tree
into the complete graph on residues {0..2m-2}, and its 2m-1 cyclic
shifts are pairwise edge-disjoint; they cover every host edge exactly
once iff m equals the edge count plus one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

from .trees import Tree


@dataclass(frozen=True)
class Labelling:
    """An injection candidate psi: V(tree) -> [1, m].

    Totality and range are construction invariants; injectivity and
    the graceful condition are what the verifiers report on.
    """

    tree: Tree
    psi: Mapping[int, int]
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"label bound m = {self.m} must be positive")
        missing = [v for v in range(1, self.tree.n + 1) if v not in self.psi]
        if missing:
            raise ValueError(f"psi is not total, missing vertices {missing}")
        bad = {v: b for v, b in self.psi.items() if not 1 <= b <= self.m}
        if bad:
            raise ValueError(f"labels outside 1..{self.m}: {bad}")

    def edge_difference(self, u: int, v: int) -> int:
        return abs(self.psi[u] - self.psi[v])


@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    reason: str = ""
    witness: Tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def _injectivity_failure(lab: Labelling) -> Optional[VerifyReport]:
    seen = {}
    for v in range(1, lab.tree.n + 1):
        b = lab.psi[v]
        if b in seen:
            return VerifyReport(False, "vertex-label collision",
                                (seen[b], v, b))
        seen[b] = v
    return None


def verify_graceful(lab: Labelling) -> VerifyReport:
    """Pass iff psi is injective and edge differences never repeat."""
    clash = _injectivity_failure(lab)
    if clash is not None:
        return clash
    seen = {}
    for e in lab.tree.edges:
        d = lab.edge_difference(*e)
        if d in seen:
            return VerifyReport(False, "edge-label collision", (seen[d], e, d))
        seen[d] = e
    return VerifyReport(True, "graceful")


def verify_bipartite_graceful(lab: Labelling,
                              coloring: Mapping[int, int]) -> VerifyReport:
    """Pass iff graceful and class-0 labels all sit below class-1 labels.

    coloring maps every vertex to 0 or 1 and must be proper.
    """
    for v in range(1, lab.tree.n + 1):
        if coloring.get(v) not in (0, 1):
            raise ValueError(f"vertex {v} not colored 0/1")
    for u, v in lab.tree.edges:
        if coloring[u] == coloring[v]:
            raise ValueError(f"edge {(u, v)} is monochromatic")
    base = verify_graceful(lab)
    if not base.ok:
        return base
    low = [(lab.psi[v], v) for v in coloring if coloring[v] == 0]
    high = [(lab.psi[v], v) for v in coloring if coloring[v] == 1]
    if low and high and max(low) >= min(high):
        return VerifyReport(False, "class separation",
                            (max(low)[1], min(high)[1]))
    return VerifyReport(True, "bipartite graceful")


def verify_harmonious(lab: Labelling, q: int) -> VerifyReport:
    """Pass iff psi is injective and edge sums mod q never repeat."""
    if q < 1:
        raise ValueError(f"modulus q = {q} must be positive")
    clash = _injectivity_failure(lab)
    if clash is not None:
        return clash
    seen = {}
    for u, v in lab.tree.edges:
        s = (lab.psi[u] + lab.psi[v]) % q
        if s in seen:
            return VerifyReport(False, "edge-sum collision",
                                (seen[s], (u, v), s))
        seen[s] = (u, v)
    return VerifyReport(True, "harmonious")


@dataclass(frozen=True)
class Packing:
    """Edge sets of tree copies inside the complete graph on
    {0..host_order-1}."""

    host_order: int
    copies: Tuple[frozenset, ...]


def build_cyclic_packing(lab: Labelling) -> Packing:
    """All cyclic shifts of the label embedding, one copy per residue.

    Labels 1..m are taken as host vertices directly; copy s translates
    every endpoint by s mod (2m-1).  Requires a graceful labelling:
    shifts of a non-graceful embedding would collide.
    """
    rep = verify_graceful(lab)
    if not rep.ok:
        raise ValueError(f"labelling is not graceful: {rep.reason} "
                         f"{rep.witness}")
    h = 2 * lab.m - 1
    copies = []
    for s in range(h):
        shifted = frozenset(
            tuple(sorted(((lab.psi[u] + s) % h, (lab.psi[v] + s) % h)))
            for u, v in lab.tree.edges)
        copies.append(shifted)
    return Packing(host_order=h, copies=tuple(copies))


@dataclass(frozen=True)
class PackingReport:
    ok: bool
    decomposition: bool
    total_edges: int
    reason: str = ""
    witness: Tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def verify_packing(p: Packing) -> PackingReport:
    """Pass iff copies are pairwise edge-disjoint; flag decomposition
    when they cover the complete host exactly."""
    h = p.host_order
    occupied = 0
    total = 0
    for k, copy in enumerate(p.copies):
        for u, v in copy:
            if not (0 <= u < v <= h - 1):
                return PackingReport(False, False, total, "bad host edge",
                                     ((u, v), k))
            idx = u * h - u * (u + 1) // 2 + (v - u - 1)
            bit = 1 << idx
            if occupied & bit:
                return PackingReport(False, False, total, "edge reused",
                                     ((u, v), k))
            occupied |= bit
            total += 1
    return PackingReport(True, total == h * (h - 1) // 2, total,
                         "edge-disjoint")
