"""Interval families over the label range 1..n_tilde.

Three families: I_V, the m-intervals partitioning the vertex labels;
I_E, the m-intervals partitioning the difference range 0..n_tilde-1;
and J, the ell-intervals used as labelling targets, closed under a
complement involution.  A set J and its complement sit in opposite
halves of the range and their element sum is ell*(n_tilde+1), so edge
labels |a - a'| between them follow a triangular profile el(J, c).
The correction distributions built here remove extra labels so that
free label sets shrink uniformly in expectation.

All masses are exact rationals on a shared denominator; sampling
converts once to integer thresholds so that the sampled law equals the
stated law bit-exactly.
"""

from __future__ import annotations

import bisect
from fractions import Fraction
from typing import NamedTuple, Optional

from .params import ParamError, Params
from .rng import Rng

_MAX_MATERIALIZED = 10 ** 8


def _exact_int(f: Fraction) -> int:
    if f.denominator != 1:
        raise ParamError(f"expected an integer mass scale, got {f}")
    return f.numerator


class Interval(NamedTuple):
    lo: int
    hi: int

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


class IntervalSystem:
    """I_V, I_E, J and the J-complement map for one (n_tilde, m, ell)."""

    def __init__(self, n_tilde: int, m: int, ell: int):
        if n_tilde % (2 * m) != 0:
            raise ParamError(f"2m = {2*m} must divide n_tilde = {n_tilde}")
        if ell % m != 0:
            raise ParamError(f"m = {m} must divide ell = {ell}")
        if 2 * ell >= n_tilde:
            raise ParamError(f"need ell < n_tilde/2, got ell = {ell}")
        if n_tilde // m > _MAX_MATERIALIZED:
            raise ParamError("interval system too large to materialize")
        self.n_tilde = n_tilde
        self.m = m
        self.ell = ell
        half = n_tilde // 2
        self.iv_starts = tuple(range(1, n_tilde - m + 2, m))
        self.ie_starts = tuple(range(0, n_tilde - m + 1, m))
        self.j_starts = (tuple(range(1, half - ell + 2, m))
                         + tuple(range(half + 1, n_tilde - ell + 2, m)))
        self.iv_intervals = tuple(Interval(s, s + m - 1) for s in self.iv_starts)
        self.ie_intervals = tuple(Interval(s, s + m - 1) for s in self.ie_starts)
        self.j_intervals = tuple(Interval(s, s + ell - 1) for s in self.j_starts)
        self.iv_index = {iv: i for i, iv in enumerate(self.iv_intervals)}
        self.ie_index = {ie: i for i, ie in enumerate(self.ie_intervals)}
        self.j_index = {j: i for i, j in enumerate(self.j_intervals)}
        assert len(self.iv_starts) == n_tilde // m
        assert len(self.ie_starts) == n_tilde // m
        assert len(self.j_starts) == n_tilde // m - 2 * (ell // m - 1)

    def complement(self, J: Interval) -> Interval:
        """The partner of J: starts sum to n_tilde - ell + 2."""
        if J not in self.j_index:
            raise ParamError(f"{J} is not in the J family")
        s = self.n_tilde - self.ell + 2 - J.lo
        return Interval(s, s + self.ell - 1)

    def el_count(self, j_lo: int, c: int) -> int:
        """ell^2 * el(J, c): ordered pairs of J x complement at distance c."""
        d0 = abs(self.n_tilde - self.ell + 2 - 2 * j_lo)
        return max(0, self.ell - abs(c - d0))

    def el(self, J: Interval, c: int) -> Fraction:
        """Fraction of ordered pairs (a, a') in J x complement(J) with
        |a - a'| = c."""
        if J not in self.j_index:
            raise ParamError(f"{J} is not in the J family")
        if not 0 <= c <= self.n_tilde - 1:
            raise ParamError(f"difference {c} outside 0..{self.n_tilde - 1}")
        return Fraction(self.el_count(J.lo, c), self.ell ** 2)


def build_interval_system(p: Params) -> IntervalSystem:
    if not isinstance(p.n_tilde, int):
        raise ParamError("interval systems need materialized integer parameters")
    return IntervalSystem(p.n_tilde, p.m, p.ell)


def el(J: Interval, c: int, sys: IntervalSystem) -> Fraction:
    return sys.el(J, c)


class CorrectionDistribution:
    """Distribution over one interval family plus the null outcome (None).

    support lists every family interval with its exact mass; masses and
    star_probability share the denominator den and sum to exactly 1.
    """

    __slots__ = ("kind", "support", "star_probability", "den", "_star_cut",
                 "_cuts", "_positive")

    def __init__(self, kind: str, support, star_probability: Fraction, den: int):
        total = star_probability
        for iv, mass in support:
            if mass < 0:
                raise ParamError(
                    f"negative mass {mass} at {iv}: system construction bug")
            total += mass
        if total != 1:
            raise ParamError(f"masses sum to {total}, not 1")
        self.kind = kind
        self.support = tuple(support)
        self.star_probability = star_probability
        self.den = den
        cum = _exact_int(star_probability * den)
        self._star_cut = cum
        cuts, positive = [], []
        for iv, mass in support:
            if mass > 0:
                cum += _exact_int(mass * den)
                cuts.append(cum)
                positive.append(iv)
        assert cum == den
        self._cuts = cuts
        self._positive = positive

    def mass_of(self, iv: Interval) -> Fraction:
        for jv, mass in self.support:
            if jv == iv:
                return mass
        raise ParamError(f"{iv} not in the {self.kind} family")

    def sample(self, rng: Rng) -> Optional[Interval]:
        u = rng.randbelow(self.den)
        if u < self._star_cut:
            return None
        return self._positive[bisect.bisect_right(self._cuts, u)]


def corv_distribution(sys: IntervalSystem) -> CorrectionDistribution:
    """Removal law for vertex labels: interval I gets mass
    (1 - (m/ell) |{J containing I}|) / |J|."""
    nj = len(sys.j_intervals)
    den = sys.ell * nj
    support = []
    for I in sys.iv_intervals:
        cnt = sum(1 for J in sys.j_intervals if J.contains(I))
        support.append((I, Fraction(sys.ell - sys.m * cnt, den)))
    star = Fraction(2 * nj - len(sys.iv_intervals), nj)
    return CorrectionDistribution("vertex", support, star, den)


def core_distribution(sys: IntervalSystem) -> CorrectionDistribution:
    """Removal law for edge labels: interval I_E gets mass
    (1 - m * sum_J el(J, min I_E)) / |J|.

    Needs ell/m even: the triangular profiles of complementary J-pairs sit
    on a step-2m center grid, and their summed coverage of an interior
    difference is exactly 1 only then; for odd ell/m it peaks at
    (r^2+1)/r^2 and the mass above would go negative.
    """
    if (sys.ell // sys.m) % 2 != 0:
        raise ParamError(
            f"edge-correction masses need ell/m even, got {sys.ell}/{sys.m}")
    nj = len(sys.j_intervals)
    ell2 = sys.ell ** 2
    den = ell2 * nj
    support = []
    for I in sys.ie_intervals:
        s = sum(sys.el_count(j_lo, I.lo) for j_lo in sys.j_starts)
        support.append((I, Fraction(ell2 - sys.m * s, den)))
    star = Fraction(2 * nj - len(sys.ie_intervals), nj)
    return CorrectionDistribution("edge", support, star, den)


def sample_correction(d: CorrectionDistribution, rng: Rng) -> Optional[Interval]:
    """One draw: a family interval, or None for the null outcome."""
    return d.sample(rng)
