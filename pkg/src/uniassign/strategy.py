"""Manipulation search over the uniform preference domain.

Mechanisms are opaque callables from profiles to assignment matrices, so the
same harness audits the eating mechanisms, random priority, and anything a
caller supplies.  Misreports range over the uniform domain only, in the
canonical preference order, which makes every report reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from . import guards
from .core import (
    AssignmentMatrix,
    Profile,
    SdOrder,
    UniformPreference,
    class_prefix_sums,
    enumerate_uniform_prefs,
    sd_compare,
)

Mechanism = Callable[[Profile], AssignmentMatrix]


@dataclass(frozen=True)
class ManipulationReport:
    """One profitable (or incomparable) deviation found for an agent."""

    agent: int  # 1-based
    truth: UniformPreference
    misreport: UniformPreference
    truthful_row: tuple[Fraction, ...]
    misreport_row: tuple[Fraction, ...]
    verdict: str  # sp_violation | weak_sp_violation
    truthful_prefix: tuple[Fraction, ...]
    misreport_prefix: tuple[Fraction, ...]


@dataclass(frozen=True)
class SweepSummary:
    n: int
    profiles: int
    reports_checked: int
    sp_violations: int
    weak_sp_violations: int
    first_sp: ManipulationReport | None
    first_weak_sp: ManipulationReport | None


class _MechanismCache:
    def __init__(self, mechanism: Mechanism):
        self.mechanism = mechanism
        self._cache: dict[Profile, AssignmentMatrix] = {}

    def __call__(self, profile: Profile) -> AssignmentMatrix:
        got = self._cache.get(profile)
        if got is None:
            got = self.mechanism(profile)
            self._cache[profile] = got
        return got


def _reports_for_profile(
    mech: _MechanismCache, profile: Profile, prefs: list[UniformPreference]
) -> Iterable[ManipulationReport]:
    truth_matrix = mech(profile)
    for agent in range(profile.n):
        truth = profile[agent]
        truth_row = truth_matrix.rows[agent]
        for alt in prefs:
            if alt == truth:
                continue
            mis_matrix = mech(profile.replaced(agent, alt))
            mis_row = mis_matrix.rows[agent]
            verdict = sd_compare(truth_row, mis_row, truth)
            if verdict in (SdOrder.DOMINATES_STRICTLY, SdOrder.DOMINATES_WEAKLY_EQUAL):
                continue
            kind = "weak_sp_violation" if verdict is SdOrder.DOMINATED else "sp_violation"
            yield ManipulationReport(
                agent=agent + 1,
                truth=truth,
                misreport=alt,
                truthful_row=truth_row,
                misreport_row=mis_row,
                verdict=kind,
                truthful_prefix=class_prefix_sums(truth_row, truth),
                misreport_prefix=class_prefix_sums(mis_row, truth),
            )


def check_sp(mechanism: Mechanism, profile: Profile) -> list[ManipulationReport]:
    """All strategyproofness violations at one profile.

    A violation is any misreport whose outcome row is not weakly dominated
    by the truthful row under the true preference; the subset where the
    misreport row strictly dominates is additionally flagged as a weak-SP
    violation.  Empty list = strategyproof at this profile.
    """
    n = profile.n
    guards.check_guard(n, guards.matching_guard(), "misreport enumeration")
    prefs = enumerate_uniform_prefs(n)
    return list(_reports_for_profile(_MechanismCache(mechanism), profile, prefs))


def check_weak_sp(mechanism: Mechanism, profile: Profile) -> list[ManipulationReport]:
    """Only the violations where misreporting strictly dominates truth."""
    return [r for r in check_sp(mechanism, profile) if r.verdict == "weak_sp_violation"]


def sweep(mechanism: Mechanism, n: int) -> SweepSummary:
    """Exhaustive audit over all (2^(n-1))^n profiles in lexicographic order."""
    guards.check_guard(n, guards.sweep_guard(), "full-domain sweep")
    prefs = enumerate_uniform_prefs(n)
    mech = _MechanismCache(mechanism)
    sp_count = 0
    weak_count = 0
    first_sp: ManipulationReport | None = None
    first_weak: ManipulationReport | None = None
    profiles = 0
    reports = 0
    import itertools

    for combo in itertools.product(prefs, repeat=n):
        profile = Profile(prefs=combo)
        profiles += 1
        reports += n * (len(prefs) - 1)
        for report in _reports_for_profile(mech, profile, prefs):
            sp_count += 1
            if first_sp is None:
                first_sp = report
            if report.verdict == "weak_sp_violation":
                weak_count += 1
                if first_weak is None:
                    first_weak = report
    return SweepSummary(
        n=n,
        profiles=profiles,
        reports_checked=reports,
        sp_violations=sp_count,
        weak_sp_violations=weak_count,
        first_sp=first_sp,
        first_weak_sp=first_weak,
    )
