import itertools
import random
from fractions import Fraction

import pytest

from conftest import random_profile
from uniassign.axioms import (
    envy_free,
    equal_treatment,
    ex_post_efficient,
    ordinally_efficient,
    pareto_efficient,
)
from uniassign.core import (
    AssignmentMatrix,
    Profile,
    UniformPreference,
    assignments_equivalent,
)
from uniassign.mechanisms import (
    DeadlineDomainError,
    eps_assign,
    ps_strict,
    rp_assign,
    rp_assign_sampled,
    serial_dictatorship,
)
from uniassign.repro import example31_eps_matrix, example31_profile, pref, theorem1_profiles

F = Fraction


# -- the eating mechanism -------------------------------------------------------


def test_eps_single_agent():
    matrix, trace = eps_assign(Profile(prefs=(UniformPreference(n=1, boundaries=(1,)),)))
    assert matrix.rows == ((F(1),),)
    assert len(trace.stages) == 1


def test_eps_reproduces_the_four_agent_example():
    matrix, trace = eps_assign(example31_profile(), bottleneck_engine="both")
    assert matrix == example31_eps_matrix()
    stage1 = trace.stages[0]
    assert stage1.bottleneck.ratio == F(1, 2)
    assert stage1.bottleneck.agents == (1, 2, 3, 4)


def test_eps_all_strict_identical_gives_uniform():
    profile = Profile(prefs=tuple(pref(1, 2, 3, 4) for _ in range(4)))
    matrix, _ = eps_assign(profile, bottleneck_engine="both")
    assert matrix == AssignmentMatrix.uniform(4)


def test_eps_three_stage_run():
    _, p2 = theorem1_profiles()
    matrix, trace = eps_assign(p2, bottleneck_engine="both")
    assert matrix == AssignmentMatrix.from_rows(
        [["1/2", "1/4", "1/4"], ["1/2", "0", "1/2"], ["0", "3/4", "1/4"]]
    )
    assert len(trace.stages) == 3
    assert [st.bottleneck.ratio for st in trace.stages] == [F(1, 2), F(1, 4), F(1, 4)]
    assert trace.stages[0].bottleneck.agents == (1, 2)
    assert trace.stages[1].bottleneck.agents == (1, 3)


def test_eps_trace_accounting(rng):
    for _ in range(25):
        n = rng.randint(1, 6)
        profile = random_profile(rng, n)
        matrix, trace = eps_assign(profile)
        trace.audit(n)
        total = sum(st.bottleneck.ratio for st in trace.stages)
        assert total == 1
        for st in trace.stages:
            lam = st.bottleneck.ratio
            star = set(st.bottleneck.agents)
            star_objects = set(st.bottleneck.objects)
            for agent in range(1, n + 1):
                eaten = sum(st.consumed[agent].values(), F(0))
                assert eaten == lam
                if agent in star:
                    assert set(st.consumed[agent]) <= star_objects
        assert assignments_equivalent(matrix, matrix, profile)


def test_eps_outputs_satisfy_the_axioms(rng):
    for _ in range(40):
        n = rng.randint(2, 5)
        profile = random_profile(rng, n)
        matrix, _ = eps_assign(profile)
        assert ordinally_efficient(matrix, profile).holds
        assert envy_free(matrix, profile).holds
        assert equal_treatment(matrix, profile).holds


# -- the strict-preference eating special case -----------------------------------


def deadline_profile(deadlines):
    n = len(deadlines)
    prefs = []
    for d in deadlines:
        boundaries = tuple(range(1, d + 1))
        if d < n:
            boundaries += (n,)
        prefs.append(UniformPreference(n=n, boundaries=boundaries))
    return Profile(prefs=tuple(prefs))


def test_ps_identical_strict_agents():
    profile = deadline_profile([3, 3, 3])
    assert ps_strict(profile) == AssignmentMatrix.uniform(3)


def test_ps_two_agents():
    profile = deadline_profile([2, 2])
    assert ps_strict(profile) == AssignmentMatrix.uniform(2)


def test_ps_rejects_non_deadline_profiles():
    bad = Profile(prefs=(pref(2, 3), pref(1, 2, 3), pref(1, 2, 3)))
    with pytest.raises(DeadlineDomainError) as err:
        ps_strict(bad)
    assert "agent 1" in str(err.value)


def test_ps_matches_eps_class_on_named_example():
    profile = deadline_profile([3, 3, 1])
    assert assignments_equivalent(
        ps_strict(profile), eps_assign(profile)[0], profile
    )


@pytest.mark.parametrize("n", [2, 3, 4])
def test_ps_matches_eps_class_exhaustively(n):
    for deadlines in itertools.product(range(1, n + 1), repeat=n):
        profile = deadline_profile(list(deadlines))
        ps = ps_strict(profile)
        eps, _ = eps_assign(profile)
        assert assignments_equivalent(ps, eps, profile), deadlines
        assert ps == eps  # canonical representatives coincide


def test_ps_matches_eps_class_randomized_larger(rng):
    for _ in range(12):
        n = rng.randint(5, 8)
        deadlines = [rng.randint(1, n) for _ in range(n)]
        profile = deadline_profile(deadlines)
        assert assignments_equivalent(
            ps_strict(profile), eps_assign(profile)[0], profile
        ), deadlines


# -- random priority --------------------------------------------------------------


def test_rp_identical_strict_agents():
    profile = Profile(prefs=tuple(pref(1, 2, 3) for _ in range(3)))
    assert rp_assign(profile) == AssignmentMatrix.uniform(3)


def test_rp_two_agents_with_an_indifferent_dictator():
    profile = Profile(prefs=(pref(2,), pref(1, 2)))
    matrix = rp_assign(profile)
    assert matrix.entry(2, 1) >= F(1, 2)
    assert ex_post_efficient(matrix, profile).holds


def test_rp_is_ex_post_efficient_but_not_envy_free_on_profile_two():
    _, p2 = theorem1_profiles()
    matrix = rp_assign(p2)
    assert ex_post_efficient(matrix, p2).holds
    assert not envy_free(matrix, p2).holds


def test_every_dictatorship_matching_is_pareto_efficient(rng):
    for _ in range(20):
        n = rng.randint(2, 5)
        profile = random_profile(rng, n)
        for order in itertools.permutations(range(n)):
            m = serial_dictatorship(profile, order)
            assert pareto_efficient(m, profile).holds


def test_rp_outputs_are_ex_post_efficient(rng):
    for _ in range(15):
        n = rng.randint(2, 4)
        profile = random_profile(rng, n)
        assert ex_post_efficient(rp_assign(profile), profile).holds


def test_rp_sampled_returns_a_matrix():
    _, p2 = theorem1_profiles()
    matrix = rp_assign_sampled(p2, rounds=50, seed=7)
    assert matrix.n == 3
