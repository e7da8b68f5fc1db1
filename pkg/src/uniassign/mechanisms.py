"""Assignment mechanisms on the uniform weak-preference domain.

``eps_assign`` runs the extended simultaneous-eating mechanism: at every
stage each active agent consumes an equal amount, the bottleneck agent set
with the least per-capita claim exhausts the union of its best sets, those
objects are removed, and the process recurses.  ``ps_strict`` is the
classical eating mechanism for the deadline-shaped subdomain, implemented as
an independent event simulation.  ``rp_assign`` averages a serial
dictatorship, adapted to indifference classes so that the result stays
ex-post efficient, over every priority order.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import guards
from .core import ONE, ZERO, AssignmentMatrix, Matching, Profile
from .flownet import (
    BottleneckResult,
    canonical_matrix,
    find_bottleneck,
    lexicographic_fill,
)


@dataclass(frozen=True)
class EpsStage:
    """One simultaneous-eating stage: who ate what, and what was left.

    ``consumed`` is the consumption attributed at this stage.  Agents whose
    best set lies inside the exhausted objects account for exactly the stage
    ratio here; the other agents' eating stays promised to their current
    best set and is attributed in a later stage, once a bottleneck pins it.
    """

    best_sets: dict[int, tuple[int, ...]]  # 1-based agent -> 1-based objects
    bottleneck: BottleneckResult
    expired: tuple[int, ...]  # objects exhausted by the end of this stage
    consumed: dict[int, dict[int, Fraction]]  # agent -> object -> amount
    remaining_after: dict[int, Fraction]  # unattributed mass per object


@dataclass(frozen=True)
class EpsTrace:
    stages: tuple[EpsStage, ...]

    def agent_total(self, agent: int) -> Fraction:
        return sum(
            (amt for st in self.stages for amt in st.consumed.get(agent, {}).values()),
            ZERO,
        )

    def object_total(self, obj: int) -> Fraction:
        return sum(
            (
                amts.get(obj, ZERO)
                for st in self.stages
                for amts in st.consumed.values()
            ),
            ZERO,
        )

    def audit(self, n: int) -> None:
        """Every agent and every object must account for exactly one unit."""
        for agent in range(1, n + 1):
            assert self.agent_total(agent) == 1, f"agent {agent} total != 1"
        for obj in range(1, n + 1):
            assert self.object_total(obj) == 1, f"object o{obj} total != 1"


def _best_interval(pref, remaining: dict[int, Fraction]) -> tuple[int, int]:
    """1-based (lo, hi) of the agent's top class still holding mass."""
    for lo, hi in pref.class_intervals:
        if any(remaining.get(o, ZERO) > 0 for o in range(lo, hi + 1)):
            return lo, hi
    raise AssertionError("agent has nothing left to eat (internal bug)")


def eps_assign(
    profile: Profile, bottleneck_engine: str = "parametric"
) -> tuple[AssignmentMatrix, EpsTrace]:
    """Extended simultaneous eating; returns the canonical matrix and trace.

    Any per-stage apportionment yields the same per-agent class masses, so
    the output matrix is canonicalized (per agent, class mass pushed onto
    lowest-indexed objects subject to column feasibility) to make the
    representative deterministic.
    """
    n = profile.n
    remaining: dict[int, Fraction] = {o: ONE for o in range(1, n + 1)}
    eaten: list[dict[int, Fraction]] = [dict() for _ in range(n)]
    stages: list[EpsStage] = []

    while any(v > 0 for v in remaining.values()):
        live = {o: v for o, v in remaining.items() if v > 0}
        cols = sorted(live)
        pos = {o: k for k, o in enumerate(cols)}
        best: dict[int, tuple[int, ...]] = {}
        supplies = []
        for i, pref in enumerate(profile):
            lo, hi = _best_interval(pref, live)
            objs = tuple(o for o in range(lo, hi + 1) if o in live)
            best[i + 1] = objs
            supplies.append((pos[objs[0]], pos[objs[-1]], ZERO))  # amount fixed below
        bott = find_bottleneck(
            agents=list(range(1, n + 1)),
            best_sets=best,
            remaining=live,
            engine=bottleneck_engine,
        )
        lam = bott.ratio
        supplies = [(lo, hi, lam) for lo, hi, _ in supplies]
        fill = lexicographic_fill(supplies, [live[o] for o in cols])
        consumed: dict[int, dict[int, Fraction]] = {}
        for i in range(n):
            per_agent: dict[int, Fraction] = {}
            for k, amt in enumerate(fill[i]):
                if amt > 0:
                    per_agent[cols[k]] = amt
                    remaining[cols[k]] -= amt
                    eaten[i][cols[k]] = eaten[i].get(cols[k], ZERO) + amt
            consumed[i + 1] = per_agent
        for o in bott.objects:
            assert remaining[o] == 0, f"bottleneck object o{o} not exhausted"
        stages.append(
            EpsStage(
                best_sets=best,
                bottleneck=bott,
                consumed=consumed,
                remaining_after={o: v for o, v in remaining.items() if v > 0},
            )
        )

    trace = EpsTrace(stages=tuple(stages))
    trace.audit(n)
    masses = []
    for i, pref in enumerate(profile):
        row = eaten[i]
        masses.append(
            [
                sum((row.get(o, ZERO) for o in range(lo, hi + 1)), ZERO)
                for lo, hi in pref.class_intervals
            ]
        )
    return canonical_matrix(profile, masses), trace


# ---------------------------------------------------------------------------
# Classical eating on the deadline subdomain
# ---------------------------------------------------------------------------


class DeadlineDomainError(ValueError):
    """Profile outside the singleton-classes-then-tail subdomain."""


def ps_strict(profile: Profile) -> AssignmentMatrix:
    """Simultaneous eating for deadline-shaped preferences.

    Agents with a live singleton class all eat the lowest-indexed remaining
    object; agents already in their terminal class stay out of the way by
    eating the highest-indexed remaining object until only the contested one
    is left.  Independent of the bottleneck machinery, but lands in the same
    equivalence class as ``eps_assign`` on this subdomain.
    """
    n = profile.n
    for i, pref in enumerate(profile):
        if not pref.has_deadline_form:
            raise DeadlineDomainError(
                f"agent {i + 1} ({pref.label()}) is outside the deadline "
                "subdomain: classes before the last must be singletons"
            )
    # number of leading singleton classes per agent
    cutoff = [pref.num_classes - 1 for pref in profile]
    remaining: dict[int, Fraction] = {o: ONE for o in range(1, n + 1)}
    eaten: list[dict[int, Fraction]] = [dict() for _ in range(n)]

    while any(v > 0 for v in remaining.values()):
        live = sorted(o for o, v in remaining.items() if v > 0)
        lowest = live[0]
        free = [o for o in live if o != lowest]
        targets: list[int] = []
        for i in range(n):
            if lowest <= cutoff[i]:
                targets.append(lowest)
            else:
                targets.append(free[-1] if free else lowest)
        rates: dict[int, int] = {}
        for t in targets:
            rates[t] = rates.get(t, 0) + 1
        step = min(remaining[o] / Fraction(r) for o, r in rates.items())
        for i, t in enumerate(targets):
            eaten[i][t] = eaten[i].get(t, ZERO) + step
        for o, r in rates.items():
            remaining[o] -= step * r

    masses = []
    for i, pref in enumerate(profile):
        row = eaten[i]
        masses.append(
            [
                sum((row.get(o, ZERO) for o in range(lo, hi + 1)), ZERO)
                for lo, hi in pref.class_intervals
            ]
        )
        assert sum(masses[-1], ZERO) == 1, f"agent {i + 1} ate {sum(masses[-1], ZERO)}"
    return canonical_matrix(profile, masses)


# ---------------------------------------------------------------------------
# Random priority, adapted to indifference classes
# ---------------------------------------------------------------------------


def _claims_feasible(claims: Sequence[tuple[int, int]], n: int) -> bool:
    """Hall's condition for unit interval claims over unit-capacity columns."""
    for l in range(1, n + 1):
        for r in range(l, n + 1):
            inside = sum(1 for lo, hi in claims if l <= lo and hi <= r)
            if inside > r - l + 1:
                return False
    return True


def serial_dictatorship(profile: Profile, order: Sequence[int]) -> Matching:
    """One priority order of the class-greedy dictatorship.

    Each dictator fixes the best indifference class that still admits a
    system of distinct representatives given earlier claims; objects are
    then assigned lowest-index-first subject to the remaining claims staying
    feasible.  Every matching consistent with the greedy claims is Pareto
    efficient, and a residual improving-swap pass guards the invariant.
    """
    n = profile.n
    if sorted(order) != list(range(n)):
        raise ValueError(f"order must be a permutation of 0..{n - 1}: {order}")
    claims: list[tuple[int, int]] = []
    claimed_class: dict[int, tuple[int, int]] = {}
    for agent in order:
        chosen = None
        for lo, hi in profile[agent].class_intervals:
            if _claims_feasible(claims + [(lo, hi)], n):
                chosen = (lo, hi)
                break
        assert chosen is not None, "no feasible class for dictator (internal bug)"
        claims.append(chosen)
        claimed_class[agent] = chosen

    taken: set[int] = set()
    assignment = [-1] * n
    pending = list(order)
    for k, agent in enumerate(order):
        lo, hi = claimed_class[agent]
        rest = [claimed_class[a] for a in pending[k + 1 :]]
        picked = None
        for obj in range(lo, hi + 1):
            if obj in taken:
                continue
            still_free = [o for o in range(1, n + 1) if o not in taken and o != obj]
            # remaining claims must fit in the remaining objects
            ok = True
            for l in range(1, n + 1):
                for r in range(l, n + 1):
                    inside = sum(1 for clo, chi in rest if l <= clo and chi <= r)
                    cap = sum(1 for o in still_free if l <= o <= r)
                    if inside > cap:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                picked = obj
                break
        assert picked is not None, "claim realization failed (internal bug)"
        taken.add(picked)
        assignment[agent] = picked - 1

    # residual safety: apply any remaining Pareto-improving swap
    improved = True
    while improved:
        improved = False
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                oi, oj = assignment[i] + 1, assignment[j] + 1
                ci_now = profile[i].class_of(oi)
                ci_swp = profile[i].class_of(oj)
                cj_now = profile[j].class_of(oj)
                cj_swp = profile[j].class_of(oi)
                if ci_swp < ci_now and cj_swp <= cj_now:
                    assignment[i], assignment[j] = assignment[j], assignment[i]
                    improved = True
    return Matching(assignment=tuple(assignment))


def rp_assign(profile: Profile) -> AssignmentMatrix:
    """Average the class-greedy dictatorship over all n! priority orders."""
    n = profile.n
    guards.check_guard(n, guards.matching_guard(), "random priority enumeration")
    total = [[ZERO] * n for _ in range(n)]
    count = 0
    for order in itertools.permutations(range(n)):
        m = serial_dictatorship(profile, order)
        for i in range(n):
            total[i][m.assignment[i]] += 1
        count += 1
    w = Fraction(1, count)
    return AssignmentMatrix.from_rows(
        [[x * w for x in row] for row in total]
    )


def rp_assign_sampled(profile: Profile, rounds: int, seed: int = 0) -> AssignmentMatrix:
    """Monte-Carlo variant for larger n; not used by certified checks."""
    if rounds < 1:
        raise ValueError("rounds must be positive")
    n = profile.n
    rng = random.Random(seed)
    total = [[ZERO] * n for _ in range(n)]
    for _ in range(rounds):
        order = list(range(n))
        rng.shuffle(order)
        m = serial_dictatorship(profile, order)
        for i in range(n):
            total[i][m.assignment[i]] += 1
    w = Fraction(1, rounds)
    return AssignmentMatrix.from_rows([[x * w for x in row] for row in total])
