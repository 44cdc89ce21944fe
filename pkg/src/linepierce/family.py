"""Deterministic construction of the evasive family of convex bodies.

Each body is the convex hull, inside a tilted plane y = q + eps*x, of the
points that the plane cuts out of the constant-x ruling lines of z = x*y
over a compact support set of measure >= delta.  The q values are emitted
by a dovetailed walk over approach sequences converging to every rational
in [0,1]; supports are drawn first-fit from a canonical enumeration of the
cover-complement sets so that the body for the n-th approacher of the m-th
base rational contains that rational but none of the earlier ones.

Everything here is deterministic: same delta, same prefix, byte for byte.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd

from .exactnum import format_rational, parse_rational
from .geometry import Point3, TiltedPlane
from .intervals import CoverSpec, IntervalSet, make_cover, remove_intervals


def _base_rationals():
    """0, 1, then reduced fractions by denominator, then numerator."""
    yield Fraction(0)
    yield Fraction(1)
    den = 2
    while True:
        for num in range(1, den):
            if gcd(num, den) == 1:
                yield Fraction(num, den)
        den += 1


_Q0_TERMS = _base_rationals()
_Q0_CACHE: list[Fraction] = []


def enumerate_Q0(n: int) -> Fraction:
    """n-th term (1-based) of the canonical enumeration of [0,1] rationals."""
    if n < 1:
        raise ValueError(f"enumeration index must be positive, got {n}")
    while len(_Q0_CACHE) < n:
        _Q0_CACHE.append(next(_Q0_TERMS))
    return _Q0_CACHE[n - 1]


def eps_of(n: int) -> Fraction:
    """Tilt of the n-th emitted body: 4^-(n+2), strictly decreasing to 0."""
    if n < 1:
        raise ValueError(f"tilt index must be positive, got {n}")
    return Fraction(1, 4 ** (n + 2))


class DyadicApproacher:
    """Emits distinct rationals converging to a target, avoiding a registry.

    Candidates are target +- 2^-j for j = 2, 3, ... (plus before minus),
    skipping values outside [0,1] and values the registry already holds.
    """

    def __init__(self, target: Fraction):
        if not (0 <= target <= 1):
            raise ValueError(f"target must lie in [0,1], got {target}")
        self.target = target
        self._j = 2
        self._plus = True

    def next_value(self, registry: set[Fraction]) -> Fraction:
        while True:
            offset = Fraction(1, 2**self._j)
            cand = self.target + offset if self._plus else self.target - offset
            if self._plus:
                self._plus = False
            else:
                self._plus = True
                self._j += 1
            if not (0 <= cand <= 1):
                continue
            if cand in registry:
                continue
            return cand


class _LevelCursor:
    """Lexicographic walk over the valid pick multisets of one cover level.

    A pick multiset (nondecreasing tuple of 2^level center indices) is valid
    when no picked interval's interior contains the protected target and
    every excluded point lies in some picked interval's interior.  The walk
    yields multisets in lexicographic order without materializing the
    enumeration, via a greedy feasibility oracle.
    """

    def __init__(self, cover: CoverSpec, target: Fraction, excluded: list[Fraction]):
        self.cover = cover
        self.size = cover.picks_per_set
        self.target = target
        self.excluded = sorted(excluded)
        forbidden = set(cover.covering_indices(target))
        self.allowed = [p for p in range(len(cover.centers)) if p not in forbidden]
        # each point is interior to at most two grid intervals
        self.cands = {
            e: [p for p in cover.covering_indices(e) if p not in forbidden]
            for e in self.excluded
        }
        self.workable = bool(self.allowed) and all(self.cands[e] for e in self.excluded)

    def _right_edge(self, p: int) -> Fraction:
        return self.cover.open_interval(p)[1]

    def _after_pick(self, uncovered: list[Fraction], p: int) -> list[Fraction]:
        lo, hi = self.cover.open_interval(p)
        return [e for e in uncovered if not (lo < e < hi)]

    def _need(self, uncovered: list[Fraction], p_min: int, cap: int) -> int | None:
        """Greedy minimum number of allowed picks >= p_min covering all
        points, or None when impossible or above cap."""
        count = 0
        i = 0
        while i < len(uncovered):
            options = [p for p in self.cands[uncovered[i]] if p >= p_min]
            if not options:
                return None
            count += 1
            if count > cap:
                return None
            reach = self._right_edge(max(options))
            i += 1
            while i < len(uncovered) and uncovered[i] < reach:
                i += 1
        return count

    def _trials(self, uncovered: list[Fraction], bound: int, strict: bool) -> list[int]:
        """Candidate next indices: the smallest allowed filler plus every
        interval that covers a still-uncovered point.  Any other index is
        dominated: a larger filler only shrinks the available index range."""
        out = set()
        j = bisect_left(self.allowed, bound + 1 if strict else bound)
        if j < len(self.allowed):
            out.add(self.allowed[j])
        floor = bound + 1 if strict else bound
        for e in uncovered:
            for p in self.cands[e]:
                if p >= floor:
                    out.add(p)
        return sorted(out)

    def _complete(self, combo: list[int], uncovered: list[Fraction], floor: int) -> list[int] | None:
        """Lex-least completion of a feasible prefix, or None."""
        while len(combo) < self.size:
            slots_after = self.size - len(combo) - 1
            choice = None
            for p in self._trials(uncovered, floor, strict=False):
                rest = self._after_pick(uncovered, p)
                if self._need(rest, p, slots_after) is not None:
                    choice = p
                    uncovered = rest
                    break
            if choice is None:
                return None
            combo.append(choice)
            floor = choice
        return combo if not uncovered else None

    def first(self) -> list[int] | None:
        if not self.workable:
            return None
        if self._need(self.excluded, 0, self.size) is None:
            return None
        return self._complete([], list(self.excluded), 0)

    def next_after(self, combo: list[int]) -> list[int] | None:
        """Lexicographic successor of a valid multiset, or None."""
        if not self.workable:
            return None
        for j in range(self.size - 1, -1, -1):
            prefix = combo[:j]
            uncovered = list(self.excluded)
            for p in prefix:
                uncovered = self._after_pick(uncovered, p)
            slots_after = self.size - j - 1
            for p in self._trials(uncovered, combo[j], strict=True):
                rest = self._after_pick(uncovered, p)
                if self._need(rest, p, slots_after) is not None:
                    return self._complete(prefix + [p], rest, p)
        return None


class SupportAssigner:
    """First-fit assignment of supports from the canonical enumeration.

    The enumeration runs over cover levels 1, 2, ... and within a level over
    pick multisets in lexicographic order.  For the m-th base rational the
    valid sets are those containing it and excluding all earlier base
    rationals; distinct multisets denoting the same point set are assigned
    only once.
    """

    def __init__(self, delta: Fraction):
        if not (0 < delta < 1):
            raise ValueError(f"delta must lie in (0,1), got {delta}")
        self.delta = delta
        self._states: dict[int, dict] = {}
        self._memo: dict[Fraction, IntervalSet] = {}

    def _state(self, m: int) -> dict:
        st = self._states.get(m)
        if st is None:
            st = {
                "target": enumerate_Q0(m),
                "excluded": [enumerate_Q0(k) for k in range(1, m)],
                "level": 0,
                "cursor": None,
                "combo": None,
                "assigned": set(),
            }
            self._states[m] = st
            self._bump_level(st)
        return st

    def _bump_level(self, st: dict) -> None:
        st["level"] += 1
        st["cursor"] = _LevelCursor(
            make_cover(self.delta, st["level"]), st["target"], st["excluded"]
        )
        st["combo"] = None

    def assign(self, q: Fraction, m: int) -> IntervalSet:
        """Support for the emitted value q of approach sequence m (memoized)."""
        got = self._memo.get(q)
        if got is not None:
            return got
        st = self._state(m)
        while True:
            cursor: _LevelCursor = st["cursor"]
            combo = cursor.first() if st["combo"] is None else cursor.next_after(st["combo"])
            if combo is None:
                self._bump_level(st)
                continue
            st["combo"] = combo
            support = remove_intervals(cursor.cover, combo)
            if support in st["assigned"]:
                continue
            st["assigned"].add(support)
            self._memo[q] = support
            return support


@dataclass(frozen=True)
class ConvexBody:
    """One member of the family: hull data for the slice at y = q + eps*x.

    In chart coordinates (u, w) = (x, z) the body is bounded below by the
    parabola w = q*u + eps*u^2 over the support (bridged by chords across
    support gaps) and above by the chord joining the extreme parabola
    points.
    """

    q: Fraction
    m: int
    f_index: int
    eps: Fraction
    support: IntervalSet

    def __post_init__(self) -> None:
        if self.support.is_empty():
            raise ValueError("body support must be nonempty")
        if self.support.min_point() < 0 or self.support.max_point() > 1:
            raise ValueError("body support must lie within [0,1]")

    @cached_property
    def plane(self) -> TiltedPlane:
        return TiltedPlane(self.q, self.eps)

    @property
    def r_min(self) -> Fraction:
        return self.support.min_point()

    @property
    def r_max(self) -> Fraction:
        return self.support.max_point()

    def parabola(self, u):
        return self.q * u + self.eps * u * u

    def chord_slope(self, a: Fraction, b: Fraction) -> Fraction:
        # (parabola(b) - parabola(a)) / (b - a), valid also for a == b
        return self.q + self.eps * (a + b)

    def top_chord(self, u):
        return self.parabola(self.r_min) + self.chord_slope(self.r_min, self.r_max) * (
            u - self.r_min
        )

    def envelope_pieces(self) -> list[tuple[str, Fraction, Fraction]]:
        """("arc", a, b) on support intervals, ("chord", a, b) across gaps."""
        pieces: list[tuple[str, Fraction, Fraction]] = []
        ivs = self.support.intervals
        for j, (lo, hi) in enumerate(ivs):
            pieces.append(("arc", lo, hi))
            if j + 1 < len(ivs):
                pieces.append(("chord", hi, ivs[j + 1][0]))
        return pieces

    def lower_envelope(self, u: Fraction) -> Fraction:
        if u < self.r_min or u > self.r_max:
            raise ValueError(f"{u} outside body range [{self.r_min}, {self.r_max}]")
        if self.support.contains(u):
            return self.parabola(u)
        a, b = self.support.gap_around(u)
        return self.parabola(a) + self.chord_slope(a, b) * (u - a)

    def contains_chart(self, u: Fraction, w: Fraction) -> bool:
        if u < self.r_min or u > self.r_max:
            return False
        if w > self.top_chord(u):
            return False
        return w >= self.lower_envelope(u)

    def y_range(self) -> tuple[Fraction, Fraction]:
        return (self.q + self.eps * self.r_min, self.q + self.eps * self.r_max)

    def slice_point(self, r: Fraction) -> Point3:
        """Where the constant-x ruling line at r meets the body's plane."""
        y = self.q + self.eps * r
        return Point3(r, y, r * y)

    def vertex_points(self) -> list[Point3]:
        """Slice points at the support's interval endpoints.

        These attain the extreme coordinates of the body in every axis, so
        box containment of the body reduces to box containment of these.
        """
        seen = []
        for e in self.support.endpoints():
            if not seen or seen[-1] != e:
                seen.append(e)
        return [self.slice_point(e) for e in seen]


def build_body(q: Fraction, f_index: int, support: IntervalSet, m: int = 0) -> ConvexBody:
    return ConvexBody(q=q, m=m, f_index=f_index, eps=eps_of(f_index), support=support)


class FamilyStream:
    """Lazy deterministic emission of bodies; prefixes are memoized.

    The (m, n) emission order is dovetailed by m+n then m, so every approach
    sequence is revisited infinitely often; the tilt index of a body is its
    global emission position.
    """

    def __init__(self, delta: Fraction):
        if not (0 < delta < 1):
            raise ValueError(f"delta must lie in (0,1), got {delta}")
        self.delta = delta
        self._assigner = SupportAssigner(delta)
        self._registry: set[Fraction] = set()
        self._approachers: dict[int, DyadicApproacher] = {}
        self._bodies: list[ConvexBody] = []
        self._ms = self._dovetail_ms()

    @staticmethod
    def _dovetail_ms():
        s = 2
        while True:
            for m in range(1, s):
                yield m
            s += 1

    def _emit(self) -> None:
        m = next(self._ms)
        approacher = self._approachers.get(m)
        if approacher is None:
            approacher = DyadicApproacher(enumerate_Q0(m))
            self._approachers[m] = approacher
        q = approacher.next_value(self._registry)
        self._registry.add(q)
        support = self._assigner.assign(q, m)
        self._bodies.append(
            build_body(q=q, f_index=len(self._bodies) + 1, support=support, m=m)
        )

    def body_at(self, index: int) -> ConvexBody:
        """0-based; extends the stream as needed."""
        while len(self._bodies) <= index:
            self._emit()
        return self._bodies[index]

    def bodies(self):
        i = 0
        while True:
            yield self.body_at(i)
            i += 1

    def truncate(self, n: int) -> list[ConvexBody]:
        if n < 1:
            raise ValueError(f"truncation size must be positive, got {n}")
        return [self.body_at(i) for i in range(n)]


def truncate_family(stream: FamilyStream, n: int) -> list[ConvexBody]:
    return stream.truncate(n)


def body_to_record(body: ConvexBody) -> dict:
    return {
        "q": format_rational(body.q),
        "m": body.m,
        "f": body.f_index,
        "eps": format_rational(body.eps),
        "support": body.support.to_pairs(),
    }


def body_from_record(record: dict) -> ConvexBody:
    try:
        q = parse_rational(record["q"])
        m = int(record["m"])
        f = int(record["f"])
        eps = parse_rational(record["eps"])
        support = IntervalSet.from_strings(record["support"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed body record: {exc}") from exc
    body = build_body(q=q, f_index=f, support=support, m=m)
    if body.eps != eps:
        raise ValueError(
            f"tilt mismatch in body record: stated {eps}, rule gives {body.eps}"
        )
    return body
