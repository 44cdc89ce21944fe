import json
from fractions import Fraction as F
from itertools import combinations_with_replacement

import pytest

from linepierce.family import (
    DyadicApproacher,
    FamilyStream,
    SupportAssigner,
    body_from_record,
    body_to_record,
    build_body,
    enumerate_Q0,
    eps_of,
    truncate_family,
)
from linepierce.intervals import IntervalSet, make_cover, remove_intervals


class TestBaseEnumeration:
    def test_small_table(self):
        want = [F(0), F(1), F(1, 2), F(1, 3), F(2, 3), F(1, 4), F(3, 4),
                F(1, 5), F(2, 5), F(3, 5), F(4, 5), F(1, 6), F(5, 6)]
        assert [enumerate_Q0(n) for n in range(1, 14)] == want

    def test_injective_to_ten_thousand(self):
        seen = {enumerate_Q0(n) for n in range(1, 10_001)}
        assert len(seen) == 10_000

    def test_all_in_unit_interval_and_reduced(self):
        for n in range(1, 2000):
            q = enumerate_Q0(n)
            assert 0 <= q <= 1

    def test_index_validation(self):
        with pytest.raises(ValueError):
            enumerate_Q0(0)


class TestEpsSequence:
    def test_first_values(self):
        assert eps_of(1) == F(1, 64)
        assert eps_of(2) == F(1, 256)

    def test_strictly_decreasing(self):
        values = [eps_of(n) for n in range(1, 1001)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_eventually_below_any_bound(self):
        assert eps_of(49) < F(1, 4**50)


class TestDyadicApproacher:
    def test_two_sided_target(self):
        gen = DyadicApproacher(F(1, 2))
        registry: set = set()
        got = []
        for _ in range(5):
            v = gen.next_value(registry)
            registry.add(v)
            got.append(v)
        assert got == [F(3, 4), F(1, 4), F(5, 8), F(3, 8), F(9, 16)]

    def test_boundary_target_one_sided(self):
        gen = DyadicApproacher(F(0))
        registry: set = set()
        got = [gen.next_value(registry) for _ in ()] or []
        for _ in range(4):
            v = gen.next_value(registry)
            registry.add(v)
            got.append(v)
        assert got == [F(1, 4), F(1, 8), F(1, 16), F(1, 32)]

    def test_collision_skipped(self):
        gen = DyadicApproacher(F(1, 2))
        registry = {F(3, 4)}
        assert gen.next_value(registry) == F(1, 4)

    def test_never_emits_target(self):
        gen = DyadicApproacher(F(1, 4))
        registry: set = set()
        for _ in range(60):
            v = gen.next_value(registry)
            registry.add(v)
            assert v != F(1, 4)
            assert 0 <= v <= 1

    def test_converges_to_target(self):
        gen = DyadicApproacher(F(2, 3))
        registry: set = set()
        dist = None
        for _ in range(40):
            v = gen.next_value(registry)
            registry.add(v)
            d = abs(v - F(2, 3))
            if dist is not None:
                assert d <= dist
            dist = d
        assert dist < F(1, 1000)


def first_fit_oracle(delta: F, m: int, count: int) -> list[IntervalSet]:
    """Independent re-enumeration: full lexicographic scan per level.

    Materializes every pick multiset of levels 1 and 2; validity is judged
    on the resulting point sets, not on pick indices.
    """
    target = enumerate_Q0(m)
    excluded = [enumerate_Q0(k) for k in range(1, m)]
    out: list[IntervalSet] = []
    seen: set[IntervalSet] = set()
    for level in (1, 2):
        cover = make_cover(delta, level)
        for combo in combinations_with_replacement(
            range(len(cover.centers)), cover.picks_per_set
        ):
            s = remove_intervals(cover, list(combo))
            if not s.contains(target):
                continue
            if any(s.contains(e) for e in excluded):
                continue
            if s in seen:
                continue
            seen.add(s)
            out.append(s)
            if len(out) == count:
                return out
    return out


class TestSupportAssigner:
    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_matches_brute_force_enumeration(self, m):
        delta = F(1, 2)
        assigner = SupportAssigner(delta)
        want = first_fit_oracle(delta, m, 8)
        got = [assigner.assign(F(9000 + k, 10007), m) for k in range(8)]
        assert got == want

    def test_matches_brute_force_across_level_bump(self):
        # the ninth valid set for m=2 forces the move from level 1 to level 2
        delta = F(1, 2)
        assigner = SupportAssigner(delta)
        want = first_fit_oracle(delta, 2, 40)
        got = [assigner.assign(F(5000 + k, 10007), 2) for k in range(40)]
        assert got == want
        levels = {len(s.endpoints()) for s in got}
        assert len(levels) > 1  # sets from both cover levels appear

    def test_first_set_for_m1_starts_at_zero(self):
        s = SupportAssigner(F(1, 2)).assign(F(1, 4), 1)
        assert s.contains(F(0))
        assert s.intervals[0][0] == F(0)

    def test_m3_membership_constraints(self):
        assigner = SupportAssigner(F(1, 2))
        for k in range(6):
            s = assigner.assign(F(100 + k, 1009), 3)
            assert s.contains(F(1, 2))
            assert not s.contains(F(0))
            assert not s.contains(F(1))

    def test_distinct_values_get_distinct_sets(self):
        assigner = SupportAssigner(F(1, 2))
        sets = [assigner.assign(F(k, 101), 2) for k in range(1, 30)]
        assert len(set(sets)) == len(sets)

    def test_memoized_by_value(self):
        assigner = SupportAssigner(F(1, 2))
        a = assigner.assign(F(1, 7), 1)
        b = assigner.assign(F(1, 7), 1)
        assert a == b

    def test_measure_bound(self):
        assigner = SupportAssigner(F(3, 4))
        for m in (1, 2, 3, 5, 8):
            for k in range(4):
                s = assigner.assign(F(400 + 10 * m + k, 2003), m)
                assert s.measure() >= F(3, 4)


class TestBuildBody:
    def test_full_support_shape(self):
        body = build_body(F(1, 2), 1, IntervalSet.unit())
        assert body.eps == F(1, 64)
        assert (body.r_min, body.r_max) == (F(0), F(1))
        # extremes on the constant-x lines at 0 and 1
        lo = body.slice_point(F(0))
        hi = body.slice_point(F(1))
        assert (lo.x, lo.y, lo.z) == (F(0), F(1, 2), F(0))
        assert (hi.x, hi.y, hi.z) == (F(1), F(33, 64), F(33, 64))
        assert body.top_chord(F(0)) == body.parabola(F(0))
        assert body.top_chord(F(1)) == body.parabola(F(1))
        assert body.top_chord(F(1, 2)) > body.parabola(F(1, 2))

    def test_single_point_support_degenerates(self):
        support = IntervalSet.from_pairs([(F(1, 2), F(1, 2))])
        body = build_body(F(1, 3), 2, support)
        assert body.r_min == body.r_max == F(1, 2)
        w = body.parabola(F(1, 2))
        assert body.contains_chart(F(1, 2), w)
        assert not body.contains_chart(F(1, 2), w + F(1, 10**9))
        assert not body.contains_chart(F(1, 4), w)

    def test_gap_chord_strictly_above_parabola(self):
        support = IntervalSet.from_pairs([(F(0), F(1, 4)), (F(3, 4), F(1))])
        body = build_body(F(1, 2), 1, support)
        u = F(1, 2)
        assert body.lower_envelope(u) > body.parabola(u)
        # chord endpoints rejoin the parabola
        assert body.lower_envelope(F(1, 4)) == body.parabola(F(1, 4))
        assert body.lower_envelope(F(3, 4)) == body.parabola(F(3, 4))

    def test_empty_support_rejected(self):
        with pytest.raises(ValueError):
            build_body(F(1, 2), 1, IntervalSet.empty())

    def test_record_round_trip(self):
        body = build_body(F(2, 5), 3, IntervalSet.from_pairs([(F(0), F(1, 3))]), m=2)
        again = body_from_record(body_to_record(body))
        assert again == body

    def test_record_tilt_mismatch_rejected(self):
        body = build_body(F(2, 5), 3, IntervalSet.from_pairs([(F(0), F(1, 3))]), m=2)
        record = body_to_record(body)
        record["eps"] = "1/64"
        with pytest.raises(ValueError, match="tilt"):
            body_from_record(record)


class TestFamilyStream:
    def test_prefix_is_memoized_and_stable(self):
        stream = FamilyStream(F(1, 2))
        first = truncate_family(stream, 10)
        second = truncate_family(stream, 10)
        assert first == second

    def test_fresh_streams_agree_byte_for_byte(self):
        a = FamilyStream(F(1, 2)).truncate(15)
        b = FamilyStream(F(1, 2)).truncate(15)
        blob_a = json.dumps([body_to_record(x) for x in a], sort_keys=True)
        blob_b = json.dumps([body_to_record(x) for x in b], sort_keys=True)
        assert blob_a == blob_b

    def test_emitted_values_distinct(self):
        bodies = FamilyStream(F(1, 2)).truncate(80)
        values = [b.q for b in bodies]
        assert len(set(values)) == len(values)

    def test_tilt_indices_follow_emission_order(self):
        bodies = FamilyStream(F(1, 2)).truncate(40)
        assert [b.f_index for b in bodies] == list(range(1, 41))
        eps = [b.eps for b in bodies]
        assert all(a > b for a, b in zip(eps, eps[1:]))

    def test_membership_constraints_hold(self):
        bodies = FamilyStream(F(1, 2)).truncate(60)
        for body in bodies:
            target = enumerate_Q0(body.m)
            assert body.support.contains(target)
            for k in range(1, body.m):
                assert not body.support.contains(enumerate_Q0(k))

    def test_supports_meet_measure_bound(self):
        for delta in (F(1, 2), F(3, 4)):
            bodies = FamilyStream(delta).truncate(30)
            assert all(b.support.measure() >= delta for b in bodies)

    def test_bodies_inside_box(self):
        bodies = FamilyStream(F(1, 2)).truncate(60)
        for body in bodies:
            for pt in body.vertex_points():
                assert 0 <= pt.x <= 2 and 0 <= pt.y <= 2 and 0 <= pt.z <= 2

    def test_every_sequence_revisited(self):
        bodies = FamilyStream(F(1, 2)).truncate(60)
        per_m = {}
        for b in bodies:
            per_m.setdefault(b.m, []).append(b.q)
        assert len(per_m[1]) > 5
        assert set(per_m) == set(range(1, 11))
        for m, values in per_m.items():
            target = enumerate_Q0(m)
            dists = [abs(v - target) for v in values]
            assert all(a >= b for a, b in zip(dists, dists[1:]))

    def test_extreme_points_leave_hull_when_interval_removed(self):
        bodies = [b for b in FamilyStream(F(1, 2)).truncate(30)
                  if len(b.support.intervals) >= 2]
        assert bodies
        for body in bodies[:10]:
            for j, (lo, hi) in enumerate(body.support.intervals):
                rest = [iv for i, iv in enumerate(body.support.intervals) if i != j]
                reduced = build_body(
                    body.q, body.f_index, IntervalSet.from_pairs(rest), m=body.m
                )
                probe = (lo + hi) / 2
                assert not reduced.contains_chart(probe, body.parabola(probe))

    def test_bad_delta_rejected(self):
        with pytest.raises(ValueError):
            FamilyStream(F(1))
        with pytest.raises(ValueError):
            FamilyStream(F(0))
