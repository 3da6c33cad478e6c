"""Shared election instances used across the test suite.

``tied_pair_8`` is the 4-voter, 10-candidate instance with two tied optimal
committees at k = 8 (one core stable, one not). ``unique_9`` is the 27-voter,
11-candidate instance whose unique optimal committee fails the core at k = 9.
``droop_6`` is the 24-voter, 8-candidate instance whose unique optimal
committee fails the Droop core at k = 6. ``near_stable_6`` is the small
profile whose committee {a, d, e, f, g, h} is swap-stable only up to 1/40.
"""

from fractions import Fraction

import pytest

from pavcore.elections import CandidateSet, ElectionInstance, Profile


def cs(indices_1based, m):
    return CandidateSet.from_indices([i - 1 for i in indices_1based], m)


@pytest.fixture(scope="session")
def tied_pair_8() -> ElectionInstance:
    profile = Profile.from_counts(
        10,
        {
            cs([1, 2, 3], 10): 1,
            cs([1, 2, 4], 10): 1,
            cs([5, 6, 7, 8, 9, 10], 10): 2,
        },
    )
    return ElectionInstance(profile, k=8)


@pytest.fixture(scope="session")
def unique_9() -> ElectionInstance:
    profile = Profile.from_counts(
        11,
        {
            cs([1, 2, 3], 11): 6,
            cs([1, 2, 4], 11): 6,
            cs([5, 6, 7, 8, 9, 10, 11], 11): 15,
        },
    )
    return ElectionInstance(profile, k=9)


@pytest.fixture(scope="session")
def droop_6() -> ElectionInstance:
    profile = Profile.from_counts(
        8,
        {
            cs([1, 2, 3], 8): 7,
            cs([1, 2, 4], 8): 7,
            cs([5, 6, 7, 8], 8): 10,
        },
    )
    return ElectionInstance(profile, k=6)


@pytest.fixture(scope="session")
def near_stable_6() -> ElectionInstance:
    profile = Profile(
        8,
        {
            cs([1, 2], 8): Fraction(1, 4),
            cs([1, 3], 8): Fraction(1, 4),
            cs([4, 5, 6, 7, 8], 8): Fraction(1, 2),
        },
    )
    return ElectionInstance(profile, k=6)
