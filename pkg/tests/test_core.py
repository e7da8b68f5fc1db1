import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_doubly_stochastic, random_pref, random_profile
from uniassign.core import (
    AssignmentMatrix,
    Matching,
    Profile,
    SdOrder,
    UniformPreference,
    assignments_equivalent,
    class_prefix_sums,
    enumerate_uniform_prefs,
    matrix_sd_dominates,
    sd_compare,
)

F = Fraction


# -- preferences -------------------------------------------------------------


def test_preference_from_classes_roundtrip():
    pref = UniformPreference.from_classes([[1], [2, 3], [4]])
    assert pref.boundaries == (1, 3, 4)
    assert pref.classes == ((1,), (2, 3), (4,))
    assert pref.label() == "o1,{o2 o3},o4"


def test_preference_rejects_disorder():
    with pytest.raises(ValueError):
        UniformPreference.from_classes([[2], [1], [3]])
    with pytest.raises(ValueError):
        UniformPreference.from_classes([[1], [3]])
    with pytest.raises(ValueError):
        UniformPreference(n=3, boundaries=(1, 2))


def test_enumerate_uniform_prefs_small():
    assert [p.boundaries for p in enumerate_uniform_prefs(1)] == [(1,)]
    labels = [p.label() for p in enumerate_uniform_prefs(3)]
    assert labels == ["o1,o2,o3", "o1,{o2 o3}", "{o1 o2},o3", "{o1 o2 o3}"]
    assert len(enumerate_uniform_prefs(4)) == 8


@pytest.mark.parametrize("n", range(1, 13))
def test_enumerate_uniform_prefs_counts_and_uniqueness(n):
    prefs = enumerate_uniform_prefs(n)
    assert len(prefs) == 2 ** (n - 1)
    assert len(set(prefs)) == len(prefs)


def test_enumerate_rejects_zero():
    with pytest.raises(ValueError):
        enumerate_uniform_prefs(0)


# -- prefix sums and the SD order ---------------------------------------------


def test_class_prefix_sums_examples():
    strict = UniformPreference(n=3, boundaries=(1, 2, 3))
    assert class_prefix_sums((F(1, 3), F(1, 2), F(1, 6)), strict) == (
        F(1, 3),
        F(5, 6),
        F(1),
    )
    front = UniformPreference(n=3, boundaries=(2, 3))
    assert class_prefix_sums((F(0), F(3, 4), F(1, 4)), front) == (F(3, 4), F(1))
    single = UniformPreference(n=3, boundaries=(3,))
    assert class_prefix_sums((F(1, 2), F(1, 4), F(1, 4)), single) == (F(1),)


def test_class_prefix_sums_size_mismatch():
    with pytest.raises(ValueError):
        class_prefix_sums((F(1),), UniformPreference(n=2, boundaries=(1, 2)))


def test_sd_compare_examples():
    front = UniformPreference(n=3, boundaries=(2, 3))
    strict = UniformPreference(n=3, boundaries=(1, 2, 3))
    p = (F(1, 3), F(1, 2), F(1, 6))
    q = (F(0), F(3, 4), F(1, 4))
    assert sd_compare(p, q, front) is SdOrder.DOMINATES_STRICTLY
    assert sd_compare(q, p, front) is SdOrder.DOMINATED
    assert sd_compare(p, p, front) is SdOrder.DOMINATES_WEAKLY_EQUAL
    # prefix sums cross: 1/2 > 0 at o1 but 1/2 < 1 at o2
    assert (
        sd_compare((F(1, 2), F(0), F(1, 2)), (F(0), F(1), F(0)), strict)
        is SdOrder.INCOMPARABLE
    )


@st.composite
def _pref_and_rows(draw):
    n = draw(st.integers(min_value=1, max_value=5))
    seed = draw(st.integers(min_value=0, max_value=10**6))
    rng = random.Random(seed)
    pref = random_pref(rng, n)

    def row():
        cuts = sorted(rng.randint(0, 24) for _ in range(n - 1))
        parts = [a - b for a, b in zip(cuts + [24], [0] + cuts)]
        return tuple(F(x, 24) for x in parts)

    return pref, row(), row(), row()


@given(_pref_and_rows())
@settings(max_examples=200, deadline=None)
def test_sd_compare_is_a_partial_order(data):
    pref, a, b, c = data
    # reflexive (weak form)
    assert sd_compare(a, a, pref) is SdOrder.DOMINATES_WEAKLY_EQUAL
    # antisymmetric on prefix vectors
    ab = sd_compare(a, b, pref)
    ba = sd_compare(b, a, pref)
    mirror = {
        SdOrder.DOMINATES_STRICTLY: SdOrder.DOMINATED,
        SdOrder.DOMINATED: SdOrder.DOMINATES_STRICTLY,
        SdOrder.DOMINATES_WEAKLY_EQUAL: SdOrder.DOMINATES_WEAKLY_EQUAL,
        SdOrder.INCOMPARABLE: SdOrder.INCOMPARABLE,
    }
    assert ba is mirror[ab]
    if ab is SdOrder.DOMINATES_WEAKLY_EQUAL:
        assert class_prefix_sums(a, pref) == class_prefix_sums(b, pref)
    # transitive
    weak = (SdOrder.DOMINATES_STRICTLY, SdOrder.DOMINATES_WEAKLY_EQUAL)
    if ab in weak and sd_compare(b, c, pref) in weak:
        assert sd_compare(a, c, pref) in weak


# -- matrices ------------------------------------------------------------------


def test_matrix_validation():
    AssignmentMatrix.from_rows([["1/2", "1/2"], ["1/2", "1/2"]])
    with pytest.raises(ValueError):
        AssignmentMatrix.from_rows([["1/2", "1/2"], ["1/3", "2/3"]])  # col sums
    with pytest.raises(ValueError):
        AssignmentMatrix.from_rows([["3/4", "1/2"], ["1/4", "1/2"]])  # row sums
    with pytest.raises(ValueError):
        AssignmentMatrix.from_rows([["2", "-1"], ["-1", "2"]])  # range


def test_matching_matrix_and_validation():
    m = Matching(assignment=(1, 0, 2))
    assert m.to_matrix().rows[0] == (F(0), F(1), F(0))
    with pytest.raises(ValueError):
        Matching(assignment=(0, 0, 2))


def test_profile_requires_square_problems():
    strict = UniformPreference(n=3, boundaries=(1, 2, 3))
    with pytest.raises(ValueError):
        Profile(prefs=(strict, strict))


def test_matrix_sd_dominates_examples():
    # deterministic split beats the half-half split when one agent is strict
    profile = Profile(
        prefs=(
            UniformPreference(n=2, boundaries=(1, 2)),
            UniformPreference(n=2, boundaries=(2,)),
        )
    )
    ident = AssignmentMatrix.from_rows([[1, 0], [0, 1]])
    half = AssignmentMatrix.uniform(2)
    assert matrix_sd_dominates(ident, half, profile)
    assert not matrix_sd_dominates(half, ident, profile)
    assert not matrix_sd_dominates(ident, ident, profile)


def test_matrix_sd_dominates_is_asymmetric_randomized(rng):
    for _ in range(60):
        n = rng.randint(2, 5)
        profile = random_profile(rng, n)
        p = random_doubly_stochastic(rng, n)
        q = random_doubly_stochastic(rng, n)
        assert not (
            matrix_sd_dominates(p, q, profile) and matrix_sd_dominates(q, p, profile)
        )


def test_example31_matrices_not_equivalent_but_disagree_on_direction():
    from uniassign.repro import (
        example31_alternative_matrix,
        example31_eps_matrix,
        example31_profile,
    )

    profile = example31_profile()
    first = example31_alternative_matrix()
    second = example31_eps_matrix()
    assert not assignments_equivalent(first, second, profile)
    # agents 1, 2 strictly prefer the eating outcome; agents 3, 4 the other
    assert not matrix_sd_dominates(first, second, profile)
    assert not matrix_sd_dominates(second, first, profile)
    for agent in (0, 1):
        assert (
            sd_compare(second.rows[agent], first.rows[agent], profile[agent])
            is SdOrder.DOMINATES_STRICTLY
        )
    for agent in (2, 3):
        assert (
            sd_compare(first.rows[agent], second.rows[agent], profile[agent])
            is SdOrder.DOMINATES_STRICTLY
        )


def test_assignments_equivalent_column_swap_within_class():
    single = UniformPreference(n=2, boundaries=(2,))
    profile = Profile(prefs=(single, single))
    p = AssignmentMatrix.from_rows([[1, 0], [0, 1]])
    q = AssignmentMatrix.from_rows([[0, 1], [1, 0]])
    assert assignments_equivalent(p, q, profile)
    assert assignments_equivalent(p, p, profile)


def test_assignments_equivalent_is_an_equivalence_relation(rng):
    for _ in range(40):
        n = rng.randint(2, 5)
        profile = random_profile(rng, n)
        p = random_doubly_stochastic(rng, n)
        q = random_doubly_stochastic(rng, n)
        r = random_doubly_stochastic(rng, n)
        assert assignments_equivalent(p, p, profile)
        if assignments_equivalent(p, q, profile):
            assert assignments_equivalent(q, p, profile)
        if assignments_equivalent(p, q, profile) and assignments_equivalent(
            q, r, profile
        ):
            assert assignments_equivalent(p, r, profile)
