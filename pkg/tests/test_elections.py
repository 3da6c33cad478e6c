"""Unit tests for the exact election data model."""

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pavcore.elections import (
    CandidateSet,
    ElectionInstance,
    Profile,
    harmonic,
    pav_score,
    restrict_profile,
    swap_delta,
    utility,
)

from conftest import cs


class TestCandidateSet:
    def test_set_algebra(self):
        a = CandidateSet.from_indices([0, 1, 2], 5)
        b = CandidateSet.from_indices([2, 3], 5)
        assert (a & b).indices() == (2,)
        assert (a | b).indices() == (0, 1, 2, 3)
        assert (a - b).indices() == (0, 1)
        assert len(a) == 3
        assert 1 in a and 3 not in a
        assert b <= (a | b)

    def test_universe_mismatch_rejected(self):
        with pytest.raises(ValueError):
            CandidateSet.from_indices([0], 3) & CandidateSet.from_indices([0], 4)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            CandidateSet.from_indices([5], 5)
        with pytest.raises(ValueError):
            CandidateSet(1 << 5, 5)

    def test_labels_are_one_indexed(self):
        assert CandidateSet.from_indices([0, 4], 6).labels() == ("c1", "c5")

    def test_hashable_and_immutable(self):
        a = CandidateSet.from_indices([1], 3)
        assert {a: 1}[CandidateSet(2, 3)] == 1
        with pytest.raises(AttributeError):
            a.mask = 5


class TestProfile:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            Profile(3, {cs([1], 3): Fraction(1, 2)})

    def test_zero_weight_entries_dropped(self):
        p = Profile(3, {cs([1], 3): 1, cs([2], 3): 0})
        assert p.ballots() == (cs([1], 3),)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            Profile(3, {cs([1], 3): Fraction(3, 2), cs([2], 3): Fraction(-1, 2)})

    def test_empty_ballot_rejected(self):
        with pytest.raises(ValueError):
            Profile(3, {CandidateSet.empty(3): 1})

    def test_from_counts_merges_and_normalizes(self):
        p = Profile.from_counts(4, {cs([1, 2], 4): 2, 0b0011: 1, cs([3], 4): 1})
        assert p.weight(cs([1, 2], 4)) == Fraction(3, 4)
        assert p.weight(cs([3], 4)) == Fraction(1, 4)

    def test_instance_validates_k(self):
        p = Profile(3, {cs([1], 3): 1})
        with pytest.raises(ValueError):
            ElectionInstance(p, k=0)
        with pytest.raises(ValueError):
            ElectionInstance(p, k=4)


class TestHarmonic:
    @pytest.mark.parametrize(
        "n,expected",
        [(0, 0), (1, 1), (4, Fraction(25, 12)), (6, Fraction(49, 20))],
    )
    def test_known_values(self, n, expected):
        assert harmonic(n) == expected

    def test_difference_is_reciprocal(self):
        for n in range(1, 21):
            assert harmonic(n) - harmonic(n - 1) == Fraction(1, n)


class TestUtilityAndScore:
    def test_utility_examples(self, tied_pair_8):
        m = 10
        v1 = cs([1, 2, 3], m)
        blue = cs([1, 2, 5, 6, 7, 8, 9, 10], m)
        assert utility(v1, blue) == 2
        assert utility(v1, CandidateSet.empty(m)) == 0
        assert utility(v1, v1) == 3

    def test_pav_score_of_tied_committees(self, tied_pair_8):
        profile = tied_pair_8.profile
        blue = cs([1, 2, 5, 6, 7, 8, 9, 10], 10)
        alt = cs([1, 2, 3, 5, 6, 7, 8, 9], 10)
        assert pav_score(profile, None, blue) == Fraction(79, 40)
        assert pav_score(profile, None, alt) == Fraction(79, 40)

    def test_pav_score_zero_when_disjoint(self):
        p = Profile(6, {cs([1, 2], 6): 1})
        assert pav_score(p, None, cs([5, 6], 6)) == 0

    def test_active_restriction(self, tied_pair_8):
        profile = tied_pair_8.profile
        blue = cs([1, 2, 5, 6, 7, 8, 9, 10], 10)
        only_big = [cs([5, 6, 7, 8, 9, 10], 10)]
        assert pav_score(profile, only_big, blue) == Fraction(1, 2) * harmonic(6)


class TestSwapDelta:
    def test_near_stable_swap_is_one_fortieth(self, near_stable_6):
        committee = cs([1, 4, 5, 6, 7, 8], 8)
        assert swap_delta(near_stable_6.profile, None, committee, 3, 1) == Fraction(
            1, 40
        )

    def test_zero_when_neither_candidate_approved(self):
        p = Profile(6, {cs([1, 2], 6): 1})
        committee = cs([1, 2, 5], 6)
        assert swap_delta(p, None, committee, 4, 5) == 0

    def test_tied_swap_in_tied_pair_instance(self, tied_pair_8):
        blue = cs([1, 2, 5, 6, 7, 8, 9, 10], 10)
        assert swap_delta(tied_pair_8.profile, None, blue, 9, 2) == 0

    def test_precondition_violations(self, tied_pair_8):
        blue = cs([1, 2, 5, 6, 7, 8, 9, 10], 10)
        with pytest.raises(ValueError):
            swap_delta(tied_pair_8.profile, None, blue, 2, 3)
        with pytest.raises(ValueError):
            swap_delta(tied_pair_8.profile, None, blue, 0, 1)

    def test_matches_score_difference_exhaustively(self):
        rng = random.Random(20240811)
        for _ in range(60):
            m = rng.randint(2, 6)
            ballots = {}
            for _ in range(rng.randint(1, 5)):
                mask = rng.randint(1, (1 << m) - 1)
                ballots[mask] = ballots.get(mask, 0) + rng.randint(1, 4)
            profile = Profile.from_counts(m, ballots)
            k = rng.randint(1, m)
            for combo in itertools.combinations(range(m), k):
                w_mask = sum(1 << i for i in combo)
                committee = CandidateSet(w_mask, m)
                for x in combo:
                    for y in range(m):
                        if (w_mask >> y) & 1:
                            continue
                        swapped = CandidateSet((w_mask & ~(1 << x)) | (1 << y), m)
                        assert pav_score(profile, None, swapped) - pav_score(
                            profile, None, committee
                        ) == swap_delta(profile, None, committee, x, y)


class TestRestrictProfile:
    def test_identity_restriction(self, tied_pair_8):
        profile = tied_pair_8.profile
        res = restrict_profile(profile, CandidateSet.full(10))
        assert res.inactive_mass == 0
        assert res.index_map == {i: i for i in range(10)}
        assert dict(res.weights) == dict(profile.items())

    def test_partial_restriction(self, tied_pair_8):
        res = restrict_profile(tied_pair_8.profile, cs([1, 2, 3, 4], 10))
        assert res.m == 4
        assert res.inactive_mass == Fraction(1, 2)
        assert res.weights[cs([1, 2, 3], 4)] == Fraction(1, 4)
        assert res.weights[cs([1, 2, 4], 4)] == Fraction(1, 4)

    def test_everything_dropped(self):
        p = Profile(3, {cs([1], 3): 1})
        res = restrict_profile(p, cs([2], 3))
        assert res.inactive_mass == 1
        assert not res.weights
        with pytest.raises(ValueError):
            res.renormalized()

    def test_swap_delta_invariant_under_restriction(self):
        rng = random.Random(7)
        for _ in range(40):
            m = rng.randint(3, 7)
            ballots = {}
            for _ in range(rng.randint(1, 4)):
                mask = rng.randint(1, (1 << m) - 1)
                ballots[mask] = ballots.get(mask, 0) + rng.randint(1, 3)
            profile = Profile.from_counts(m, ballots)
            k = rng.randint(1, m - 1)
            w = CandidateSet.from_indices(rng.sample(range(m), k), m)
            outside = [i for i in range(m) if i not in w]
            y = rng.choice(outside)
            x = rng.choice(list(w))
            keep_extra = [i for i in outside if i != y and rng.random() < 0.5]
            keep = w | CandidateSet.from_indices([y] + keep_extra, m)
            res = restrict_profile(profile, keep)
            w_new = CandidateSet.from_indices(
                [res.index_map[i] for i in w], res.m
            )
            assert swap_delta(profile, None, w, x, y) == swap_delta(
                res, None, w_new, res.index_map[x], res.index_map[y]
            )

    @given(st.integers(min_value=0, max_value=40))
    @settings(max_examples=41, deadline=None)
    def test_harmonic_monotone(self, n):
        assert harmonic(n + 1) > harmonic(n)
