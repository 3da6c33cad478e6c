"""Tests for core- and Droop-core verification."""

import itertools
import random
from fractions import Fraction

import pytest

from pavcore.elections import (
    CandidateSet,
    ElectionInstance,
    EnumerationLimitError,
    Profile,
)
from pavcore.stability import (
    Quota,
    check_special_deviations,
    deviation_support,
    find_deviation,
)

from conftest import cs


def brute_force_deviations(instance, committee, quota):
    """Independent full scan: every successful deviation, combinatorics only."""
    profile, k, m = instance.profile, instance.k, instance.m
    hits = []
    for size in range(1, k + 1):
        for combo in itertools.combinations(range(m), size):
            t = CandidateSet.from_indices(combo, m)
            support = Fraction(0)
            for ballot, weight in profile.items():
                if len(ballot & t) > len(ballot & committee):
                    support += weight
            bar = (
                Fraction(size, k) if quota is Quota.HARE else Fraction(size, k + 1)
            )
            ok = support >= bar if quota is Quota.HARE else support > bar
            if ok:
                hits.append((t, support))
    return hits


def random_instance(rng, max_m=7, max_ballots=5):
    m = rng.randint(2, max_m)
    ballots = {}
    for _ in range(rng.randint(1, max_ballots)):
        mask = rng.randint(1, (1 << m) - 1)
        ballots[mask] = ballots.get(mask, 0) + rng.randint(1, 5)
    profile = Profile.from_counts(m, ballots)
    k = rng.randint(1, m)
    return ElectionInstance(profile, k)


class TestQuota:
    def test_thresholds(self):
        assert Quota.HARE.threshold(4, 8) == Fraction(1, 2)
        assert Quota.DROOP.threshold(4, 6) == Fraction(4, 7)

    def test_success_conditions(self):
        assert Quota.HARE.succeeds(Fraction(1, 2), 4, 8)
        assert not Quota.HARE.succeeds(Fraction(39, 80), 4, 8)
        assert not Quota.DROOP.succeeds(Fraction(4, 7), 4, 6)
        assert Quota.DROOP.succeeds(Fraction(14, 24), 4, 6)


class TestDeviationSupport:
    def test_tied_pair_support(self, tied_pair_8):
        blue = cs([1, 2, 5, 6, 7, 8, 9, 10], 10)
        t = cs([1, 2, 3, 4], 10)
        assert deviation_support(tied_pair_8.profile, blue, t) == Fraction(1, 2)

    def test_droop_instance_support(self, droop_6):
        committee = cs([1, 2, 5, 6, 7, 8], 8)
        t = cs([1, 2, 3, 4], 8)
        assert deviation_support(droop_6.profile, committee, t) == Fraction(14, 24)

    def test_subset_of_committee_has_no_support(self, tied_pair_8):
        blue = cs([1, 2, 5, 6, 7, 8, 9, 10], 10)
        for size in (1, 2, 3):
            for combo in itertools.combinations([0, 1, 4, 5, 6], size):
                t = CandidateSet.from_indices(combo, 10)
                assert deviation_support(tied_pair_8.profile, blue, t) == 0


class TestFindDeviation:
    def test_tied_pair_blue_fails_hare(self, tied_pair_8):
        blue = cs([1, 2, 5, 6, 7, 8, 9, 10], 10)
        report = find_deviation(tied_pair_8, blue, Quota.HARE)
        assert report is not None
        assert report.deviation == cs([1, 2, 3, 4], 10)
        assert report.support == Fraction(1, 2)
        assert report.threshold == Fraction(1, 2)

    def test_tied_pair_alternative_is_stable(self, tied_pair_8):
        alt = cs([1, 2, 3, 5, 6, 7, 8, 9], 10)
        assert find_deviation(tied_pair_8, alt, Quota.HARE) is None
        assert not brute_force_deviations(tied_pair_8, alt, Quota.HARE)

    def test_droop_committee(self, droop_6):
        committee = cs([1, 2, 5, 6, 7, 8], 8)
        report = find_deviation(droop_6, committee, Quota.DROOP)
        assert report is not None
        assert report.deviation == cs([1, 2, 3, 4], 8)
        assert report.support == Fraction(14, 24)
        assert report.support > Fraction(4, 7) == report.threshold

    def test_unique_9_fails_at_equality(self, unique_9):
        committee = cs([1, 2, 5, 6, 7, 8, 9, 10, 11], 11)
        report = find_deviation(unique_9, committee, Quota.HARE)
        assert report is not None
        assert report.deviation == cs([1, 2, 3, 4], 11)
        assert report.support == Fraction(12, 27) == Fraction(4, 9)
        assert report.threshold == Fraction(4, 9)

    def test_m_cap(self, tied_pair_8):
        blue = cs([1, 2, 5, 6, 7, 8, 9, 10], 10)
        with pytest.raises(EnumerationLimitError):
            find_deviation(tied_pair_8, blue, Quota.HARE, max_m=9)

    def test_agrees_with_brute_force(self):
        rng = random.Random(99)
        for _ in range(120):
            instance = random_instance(rng)
            committee = CandidateSet.from_indices(
                rng.sample(range(instance.m), instance.k), instance.m
            )
            for quota in (Quota.HARE, Quota.DROOP):
                hits = brute_force_deviations(instance, committee, quota)
                report = find_deviation(instance, committee, quota)
                if report is None:
                    assert not hits
                else:
                    assert (report.deviation, report.support) == hits[0]
                    assert report.supporters == tuple(
                        b
                        for b, _ in instance.profile.items()
                        if len(b & report.deviation) > len(b & committee)
                    )

    def test_droop_stable_implies_hare_stable(self):
        rng = random.Random(12345)
        for _ in range(150):
            instance = random_instance(rng)
            committee = CandidateSet.from_indices(
                rng.sample(range(instance.m), instance.k), instance.m
            )
            if find_deviation(instance, committee, Quota.DROOP) is None:
                assert find_deviation(instance, committee, Quota.HARE) is None


class TestSpecialDeviations:
    def test_unique_9_committee_clean(self, unique_9):
        committee = cs([1, 2, 5, 6, 7, 8, 9, 10, 11], 11)
        assert check_special_deviations(unique_9, committee) == []

    def test_tied_pair_blue_clean(self, tied_pair_8):
        # The committee does fail the core, but its deviation adds two
        # outsiders, so the restricted scan must come back empty.
        blue = cs([1, 2, 5, 6, 7, 8, 9, 10], 10)
        assert check_special_deviations(tied_pair_8, blue) == []

    def test_full_committee_vacuous(self):
        p = Profile(4, {cs([1, 2], 4): 1})
        instance = ElectionInstance(p, k=4)
        assert check_special_deviations(instance, CandidateSet.full(4)) == []

    def test_catches_planted_violation(self):
        # A committee ignoring a unanimous ballot: the singleton deviation
        # {c4} is disjoint from the committee and is backed by everyone.
        p = Profile(4, {cs([4], 4): 1})
        instance = ElectionInstance(p, k=2)
        committee = cs([1, 2], 4)
        hits = check_special_deviations(instance, committee)
        assert any(r.deviation == cs([4], 4) for r in hits)
