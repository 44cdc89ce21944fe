"""Finite unions of closed rational intervals in [0,1], covers, and depth.

The compact supports used throughout are complements in [0,1] of finitely
many open grid intervals, so they are exactly finite unions of closed
intervals (single points included).  This module supplies the deterministic
open covers, the removal operation that produces the supports, exact
Lebesgue measure, intersections, a depth profile over the cell partition
induced by all endpoints, and deep-point witnesses.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class IntervalSet:
    """Canonical disjoint sorted union of closed intervals [lo, hi].

    Canonical means hi_j < lo_{j+1} strictly; touching or overlapping input
    intervals are merged by ``from_pairs``.  Degenerate single points are
    allowed (lo == hi).
    """

    intervals: tuple[tuple[Fraction, Fraction], ...]

    @staticmethod
    def from_pairs(pairs) -> IntervalSet:
        cleaned = []
        for lo, hi in pairs:
            lo, hi = Fraction(lo), Fraction(hi)
            if hi < lo:
                raise ValueError(f"interval endpoints out of order: [{lo}, {hi}]")
            cleaned.append((lo, hi))
        cleaned.sort()
        merged: list[tuple[Fraction, Fraction]] = []
        for lo, hi in cleaned:
            if merged and lo <= merged[-1][1]:
                if hi > merged[-1][1]:
                    merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        return IntervalSet(tuple(merged))

    @staticmethod
    def empty() -> IntervalSet:
        return IntervalSet(())

    @staticmethod
    def unit() -> IntervalSet:
        return IntervalSet(((ZERO, ONE),))

    def is_empty(self) -> bool:
        return not self.intervals

    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), ZERO)

    @cached_property
    def _starts(self) -> list[Fraction]:
        return [iv[0] for iv in self.intervals]

    def contains(self, x: Fraction) -> bool:
        return self.locate(x) >= 0

    def locate(self, x: Fraction) -> int:
        """Index of the interval containing x, or -1."""
        j = bisect_right(self._starts, x) - 1
        if j >= 0 and x <= self.intervals[j][1]:
            return j
        return -1

    def gap_around(self, x: Fraction) -> tuple[Fraction, Fraction]:
        """Endpoints (hi_j, lo_{j+1}) of the gap strictly containing x."""
        j = bisect_right(self._starts, x) - 1
        if j < 0 or j + 1 >= len(self.intervals) or not (
            self.intervals[j][1] < x < self.intervals[j + 1][0]
        ):
            raise ValueError(f"{x} is not interior to a gap")
        return (self.intervals[j][1], self.intervals[j + 1][0])

    def min_point(self) -> Fraction:
        if self.is_empty():
            raise ValueError("empty interval set has no minimum")
        return self.intervals[0][0]

    def max_point(self) -> Fraction:
        if self.is_empty():
            raise ValueError("empty interval set has no maximum")
        return self.intervals[-1][1]

    def endpoints(self) -> list[Fraction]:
        out = []
        for lo, hi in self.intervals:
            out.append(lo)
            out.append(hi)
        return out

    def subtract_open(self, lo: Fraction, hi: Fraction) -> IntervalSet:
        """Remove the open interval (lo, hi); the endpoints lo, hi survive."""
        if hi <= lo:
            return self
        pieces: list[tuple[Fraction, Fraction]] = []
        for a, b in self.intervals:
            if hi <= a or lo >= b:
                pieces.append((a, b))
                continue
            if lo >= a:
                pieces.append((a, lo))
            if hi <= b:
                pieces.append((hi, b))
        return IntervalSet(tuple(pieces))

    def intersect(self, other: IntervalSet) -> IntervalSet:
        out: list[tuple[Fraction, Fraction]] = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(tuple(out))

    def to_pairs(self) -> list[list[str]]:
        from .exactnum import format_rational

        return [[format_rational(lo), format_rational(hi)] for lo, hi in self.intervals]

    @staticmethod
    def from_strings(pairs) -> IntervalSet:
        from .exactnum import parse_rational

        return IntervalSet.from_pairs(
            (parse_rational(lo), parse_rational(hi)) for lo, hi in pairs
        )


@dataclass(frozen=True)
class CoverSpec:
    """Deterministic open cover of [0,1] by length-`length` intervals.

    Centers sit on the uniform grid k*length/2, so consecutive intervals
    overlap by half their length and the union covers [0,1] with both
    endpoints interior.  Removing any ``picks_per_set`` of them from [0,1]
    leaves measure at least delta.
    """

    delta: Fraction
    level: int
    length: Fraction
    centers: tuple[Fraction, ...]

    @property
    def picks_per_set(self) -> int:
        return 2**self.level

    def open_interval(self, index: int) -> tuple[Fraction, Fraction]:
        c = self.centers[index]
        half = self.length / 2
        return (c - half, c + half)

    def covers(self, index: int, x: Fraction) -> bool:
        lo, hi = self.open_interval(index)
        return lo < x < hi

    def covering_indices(self, x: Fraction) -> list[int]:
        """Indices of cover intervals whose open interior contains x.

        On the half-length grid each point is interior to one interval
        (when x is a grid point) or two (otherwise).
        """
        step = self.length / 2
        ratio = x / step
        k = ratio.numerator // ratio.denominator  # floor
        out = []
        for idx in (k, k + 1):
            if 0 <= idx < len(self.centers) and self.covers(idx, x):
                out.append(idx)
        return out

    def to_record(self) -> dict:
        from .exactnum import format_rational

        return {
            "delta": format_rational(self.delta),
            "level": self.level,
            "length": format_rational(self.length),
            "centers": [format_rational(c) for c in self.centers],
        }

    @staticmethod
    def from_record(record: dict) -> CoverSpec:
        from .exactnum import parse_rational

        cover = make_cover(parse_rational(record["delta"]), int(record["level"]))
        if cover.to_record() != record:
            raise ValueError("cover record does not match the deterministic layout")
        return cover


def make_cover(delta: Fraction, level: int) -> CoverSpec:
    """Level-i cover: open intervals of length (1-delta)/2^i on the k*l/2 grid."""
    if not (0 < delta < 1):
        raise ValueError(f"delta must lie in (0,1), got {delta}")
    if level < 1:
        raise ValueError(f"level must be a positive integer, got {level}")
    length = (1 - delta) / 2**level
    step = length / 2
    k_max = -(-step.denominator // step.numerator)  # ceil(1/step) = ceil(2/length)
    centers = tuple(k * step for k in range(k_max + 1))
    return CoverSpec(delta=delta, level=level, length=length, centers=centers)


def remove_intervals(cover: CoverSpec, picks) -> IntervalSet:
    """[0,1] minus the union of the picked open cover intervals.

    Exactly 2^level picks are required; repeats are allowed and harmless.
    """
    picks = list(picks)
    if len(picks) != cover.picks_per_set:
        raise ValueError(
            f"expected {cover.picks_per_set} picks at level {cover.level}, "
            f"got {len(picks)}"
        )
    result = IntervalSet.unit()
    for p in picks:
        if not (0 <= p < len(cover.centers)):
            raise ValueError(f"pick index {p} out of range")
        lo, hi = cover.open_interval(p)
        result = result.subtract_open(lo, hi)
    return result


def intersect_many(sets: list[IntervalSet]) -> IntervalSet:
    if not sets:
        raise ValueError("intersect_many requires at least one set")
    acc = sets[0]
    for s in sets[1:]:
        acc = acc.intersect(s)
    return acc


@dataclass(frozen=True)
class DepthCell:
    """One cell of a depth profile; lo == hi denotes a single point."""

    lo: Fraction
    hi: Fraction
    closed_lo: bool
    closed_hi: bool
    depth: int

    def length(self) -> Fraction:
        return self.hi - self.lo


def _fine_cells(sets: list[IntervalSet]):
    """Partition of [0,1] into endpoint singletons and open gaps.

    Yields (lo, hi, depth); lo == hi marks a point cell.  Depths come from a
    single sweep over interval endpoints.
    """
    values = {ZERO, ONE}
    opens: dict[Fraction, int] = {}
    closes: dict[Fraction, int] = {}
    for s in sets:
        for lo, hi in s.intervals:
            values.add(lo)
            values.add(hi)
            opens[lo] = opens.get(lo, 0) + 1
            closes[hi] = closes.get(hi, 0) + 1
    ordered = sorted(values)
    active = 0
    for i, v in enumerate(ordered):
        yield (v, v, active + opens.get(v, 0))
        active += opens.get(v, 0) - closes.get(v, 0)
        if i + 1 < len(ordered):
            yield (v, ordered[i + 1], active)


def depth_profile(sets: list[IntervalSet]) -> list[DepthCell]:
    """Cells of [0,1] labeled with how many sets contain them, merged.

    Adjacent cells of equal depth are merged, so consecutive output cells
    differ in depth.  Sum of length*depth equals the sum of the measures.
    An empty family yields the single cell [0,1] at depth 0.
    """
    for s in sets:
        if not s.is_empty() and (s.min_point() < 0 or s.max_point() > 1):
            raise ValueError("depth_profile expects sets within [0,1]")
    cells: list[DepthCell] = []
    for lo, hi, depth in _fine_cells(sets):
        point = lo == hi
        if cells and cells[-1].depth == depth:
            prev = cells[-1]
            cells[-1] = DepthCell(prev.lo, hi, prev.closed_lo, point, depth)
        else:
            cells.append(DepthCell(lo, hi, point, point, depth))
    return cells


def deep_witness(
    sets: list[IntervalSet], t: int
) -> tuple[Fraction, tuple[int, ...]] | None:
    """A point lying in at least t of the sets, or None.

    Scans the fine cell partition left to right and reports the first cell
    of depth >= t: the point itself for a singleton cell, the midpoint for
    an open gap cell, together with the first t containing set indices.
    Never None when all n sets have measure >= delta and n >= ceil((t-1)/delta)+1.
    """
    if t < 1:
        raise ValueError(f"witness depth must be positive, got {t}")
    for lo, hi, depth in _fine_cells(sets):
        if depth >= t:
            x = lo if lo == hi else (lo + hi) / 2
            members = tuple(i for i, s in enumerate(sets) if s.contains(x))[:t]
            return (x, members)
    return None
