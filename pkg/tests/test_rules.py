"""Tests for local, global, and recursive PAV committee computation."""

import random
from fractions import Fraction

import pytest

from pavcore.elections import (
    CandidateSet,
    ElectionInstance,
    EnumerationLimitError,
    Profile,
    pav_score,
    swap_delta,
)
from pavcore.rules import (
    SearchConfig,
    all_local_pav,
    global_pav,
    local_pav,
    recursive_pav,
)
from pavcore.stability import Quota, check_special_deviations, find_deviation

from conftest import cs
from test_stability import random_instance


def assert_swap_stable(instance, committee, fixed=None, active=None, epsilon=0):
    fixed_mask = fixed.mask if fixed is not None else 0
    for x in committee:
        if (fixed_mask >> x) & 1:
            continue
        for y in range(instance.m):
            if y in committee:
                continue
            assert swap_delta(
                instance.profile, active, committee, x, y
            ) <= epsilon


class TestLocalPav:
    def test_single_ballot_k1(self):
        p = Profile(3, {cs([1], 3): 1})
        instance = ElectionInstance(p, k=1)
        assert local_pav(instance) == cs([1], 3)

    def test_single_ballot_takes_lowest_indices(self):
        p = Profile(6, {cs([1, 3, 5, 6], 6): 1})
        instance = ElectionInstance(p, k=2)
        assert local_pav(instance) == cs([1, 3], 6)

    def test_tied_pair_unconstrained(self, tied_pair_8):
        committee = local_pav(tied_pair_8)
        assert pav_score(tied_pair_8.profile, None, committee) == Fraction(79, 40)
        assert_swap_stable(tied_pair_8, committee)

    def test_tied_pair_fixed_prefix(self, tied_pair_8):
        fixed = cs([1, 2, 3, 4], 10)
        active = [cs([5, 6, 7, 8, 9, 10], 10)]
        committee = local_pav(tied_pair_8, fixed=fixed, active=active)
        assert committee == cs([1, 2, 3, 4, 5, 6, 7, 8], 10)
        assert_swap_stable(tied_pair_8, committee, fixed=fixed, active=active)

    def test_contains_fixed_and_has_size_k(self):
        rng = random.Random(4242)
        for _ in range(80):
            instance = random_instance(rng)
            fixed_size = rng.randint(0, instance.k)
            fixed = CandidateSet.from_indices(
                rng.sample(range(instance.m), fixed_size), instance.m
            )
            committee = local_pav(instance, fixed=fixed)
            assert len(committee) == instance.k
            assert fixed <= committee
            assert_swap_stable(instance, committee, fixed=fixed)

    def test_start_committee_respected(self, near_stable_6):
        start = cs([1, 4, 5, 6, 7, 8], 8)
        # With a large tolerance the start committee is already stable.
        config = SearchConfig(epsilon=Fraction(1, 36), start=start)
        assert local_pav(near_stable_6, config=config) == start
        # With exact tolerance the 1/40 improvement is taken.
        exact = local_pav(near_stable_6, config=SearchConfig(start=start))
        assert exact != start
        assert_swap_stable(near_stable_6, exact)

    def test_epsilon_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            SearchConfig(epsilon=Fraction(-1, 2))


class TestGlobalPav:
    def test_single_ballot(self):
        p = Profile(3, {cs([1, 2], 3): 1})
        assert global_pav(ElectionInstance(p, k=2)) == {cs([1, 2], 3)}

    def test_tied_pair_has_both_optima(self, tied_pair_8):
        winners = global_pav(tied_pair_8)
        assert cs([1, 2, 5, 6, 7, 8, 9, 10], 10) in winners
        assert cs([1, 2, 3, 5, 6, 7, 8, 9], 10) in winners
        scores = {pav_score(tied_pair_8.profile, None, w) for w in winners}
        assert scores == {Fraction(79, 40)}

    def test_unique_9_is_unique(self, unique_9):
        assert global_pav(unique_9) == {cs([1, 2, 5, 6, 7, 8, 9, 10, 11], 11)}

    def test_cap_refusal(self, tied_pair_8):
        with pytest.raises(EnumerationLimitError):
            global_pav(tied_pair_8, max_committees=10)


class TestAllLocalPav:
    def test_unique_9_unique_local(self, unique_9):
        assert all_local_pav(unique_9) == {cs([1, 2, 5, 6, 7, 8, 9, 10, 11], 11)}

    def test_droop_6_unique_global_and_local(self, droop_6):
        expected = {cs([1, 2, 5, 6, 7, 8], 8)}
        assert all_local_pav(droop_6) == expected
        assert global_pav(droop_6) == expected

    def test_single_heavy_ballot(self):
        p = Profile(5, {cs([1, 2, 3, 4], 5): 1})
        instance = ElectionInstance(p, k=3)
        locals_ = all_local_pav(instance)
        # Exactly the committees maximizing overlap with the ballot.
        assert locals_ == {
            CandidateSet.from_indices(c, 5)
            for c in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
        }

    def test_global_subset_of_local(self):
        rng = random.Random(31337)
        for _ in range(60):
            instance = random_instance(rng, max_m=6)
            assert global_pav(instance) <= all_local_pav(instance)


class TestRecursivePav:
    def test_stable_first_round_returns_empty_trace(self, droop_6):
        outcome = recursive_pav(droop_6, Quota.HARE)
        assert outcome.succeeded
        assert outcome.trace == ()
        assert find_deviation(droop_6, outcome.committee, Quota.HARE) is None

    def test_tied_pair_fixes_blocking_coalition(self, tied_pair_8):
        outcome = recursive_pav(tied_pair_8, Quota.HARE)
        assert outcome.succeeded
        assert cs([1, 2, 3, 4], 10) <= outcome.committee
        assert find_deviation(tied_pair_8, outcome.committee, Quota.HARE) is None
        assert outcome.trace == (
            (cs([1, 2, 5, 6, 7, 8, 9, 10], 10), cs([1, 2, 3, 4], 10)),
        )

    def test_near_stable_single_round(self, near_stable_6):
        outcome = recursive_pav(near_stable_6, Quota.HARE)
        assert outcome.succeeded
        assert outcome.trace == ()
        assert find_deviation(near_stable_6, outcome.committee, Quota.HARE) is None

    def test_trace_containment_invariant(self):
        rng = random.Random(550)
        for _ in range(100):
            instance = random_instance(rng, max_m=7)
            outcome = recursive_pav(instance, Quota.HARE)
            assert outcome.succeeded, "small instances must never fail"
            committees = [w for w, _ in outcome.trace] + [outcome.committee]
            fixed = CandidateSet.empty(instance.m)
            for (w, t), w_next in zip(outcome.trace, committees[1:]):
                fixed = fixed | t
                assert fixed <= w_next


class TestLocalImpliesCore:
    def test_small_committees_are_core_stable(self):
        # Every swap-stable committee passes core verification when k <= 7.
        rng = random.Random(777)
        checked = 0
        for _ in range(60):
            instance = random_instance(rng, max_m=7)
            if instance.k > 7:
                continue
            for committee in all_local_pav(instance):
                assert find_deviation(instance, committee, Quota.HARE) is None
                checked += 1
        assert checked > 50

    def test_no_special_shape_deviations_up_to_k8(self):
        rng = random.Random(778)
        for _ in range(60):
            instance = random_instance(rng, max_m=8)
            if instance.k > 8:
                continue
            for committee in all_local_pav(instance):
                assert check_special_deviations(instance, committee) == []
