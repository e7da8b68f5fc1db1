"""Exact checkers for efficiency and fairness axioms.

Every checker returns an :class:`AxiomVerdict` whose certificate can be
re-verified independently: a failing ordinal-efficiency check carries a
dominating matrix, a failing envy check carries the envious pair and the
violated prefix, a passing ex-post-efficiency check carries hull weights
that recombine to the input exactly, and so on.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import guards
from .core import (
    ZERO,
    AssignmentMatrix,
    Matching,
    Profile,
    SdOrder,
    class_prefix_sums,
    matrix_sd_dominates,
    sd_compare,
)
from .flownet import canonical_matrix
from .ratlp import CertificateEntry, LinearSystem, lp_solve


@dataclass(frozen=True)
class AxiomVerdict:
    holds: bool
    certificate: object = None


@dataclass(frozen=True)
class ParetoImprovement:
    """A matching that makes someone strictly better and nobody worse."""

    matching: Matching


@dataclass(frozen=True)
class DominatingWitness:
    """A matrix that stochastically dominates the one under test."""

    matrix: AssignmentMatrix
    slack_total: Fraction


@dataclass(frozen=True)
class EnvyWitness:
    envious: int  # 1-based agent labels
    envied: int
    boundary: int  # 1-based object index closing the violated prefix
    envious_prefix: Fraction
    envied_prefix: Fraction


@dataclass(frozen=True)
class UnequalTreatmentWitness:
    agent_a: int
    agent_b: int
    boundary: int
    prefix_a: Fraction
    prefix_b: Fraction


@dataclass(frozen=True)
class HullWeights:
    """Convex weights over Pareto-efficient matchings recombining to P."""

    entries: tuple[tuple[Fraction, Matching], ...]


@dataclass(frozen=True)
class HullInfeasibility:
    """Farkas proof that P lies outside the Pareto-efficient hull."""

    certificate: tuple[CertificateEntry, ...]
    system: LinearSystem


def _improves(
    challenger: Matching, incumbent: Matching, profile: Profile
) -> bool:
    strict = False
    for i, pref in enumerate(profile):
        a = pref.class_of(challenger.object_of(i))
        b = pref.class_of(incumbent.object_of(i))
        if a > b:
            return False
        if a < b:
            strict = True
    return strict


def pareto_efficient(matching: Matching, profile: Profile) -> AxiomVerdict:
    """Brute-force Pareto check over all n! alternative matchings."""
    n = profile.n
    guards.check_guard(n, guards.matching_guard(), "Pareto brute force")
    if matching.n != n:
        raise ValueError("matching size does not match profile")
    for perm in itertools.permutations(range(n)):
        other = Matching(assignment=perm)
        if _improves(other, matching, profile):
            return AxiomVerdict(holds=False, certificate=ParetoImprovement(other))
    return AxiomVerdict(holds=True)


def enumerate_pe_matchings(profile: Profile) -> tuple[Matching, ...]:
    """All Pareto-efficient matchings, in lexicographic assignment order."""
    n = profile.n
    guards.check_guard(n, guards.matching_guard(), "Pareto enumeration")
    class_vecs: dict[tuple[int, ...], tuple[int, ...]] = {}
    for perm in itertools.permutations(range(n)):
        class_vecs[perm] = tuple(
            profile[i].class_of(perm[i] + 1) for i in range(n)
        )
    out = []
    for perm, vec in class_vecs.items():
        dominated = False
        for other_vec in class_vecs.values():
            if other_vec is vec:
                continue
            if all(a <= b for a, b in zip(other_vec, vec)) and other_vec != vec:
                dominated = True
                break
        if not dominated:
            out.append(Matching(assignment=perm))
    return tuple(out)


# ---------------------------------------------------------------------------
# Ordinal efficiency
# ---------------------------------------------------------------------------


def oe_improvement_system(
    p: AssignmentMatrix, profile: Profile
) -> tuple[LinearSystem, list[list[str]], list[str]]:
    """Max-total-slack system deciding whether some Q dominates ``p``.

    Candidate assignments are represented through per-class masses; a mass
    vector is realizable as a doubly stochastic matrix exactly when every
    consecutive object interval can carry the classes confined to it, which
    keeps the system small.  Returns (system, mass var names per agent,
    slack var names).
    """
    n = profile.n
    system = LinearSystem()
    mass_names: list[list[str]] = []
    slack_names: list[str] = []
    for i, pref in enumerate(profile):
        names = []
        for c in range(pref.num_classes):
            names.append(system.add_variable(f"m[{i + 1}][{c + 1}]"))
        mass_names.append(names)
        system.add_constraint(
            {name: 1 for name in names}, "=", 1, tag=f"unit-demand:agent{i + 1}"
        )
    for l in range(1, n + 1):
        for r in range(l, n + 1):
            coeffs = {}
            for i, pref in enumerate(profile):
                for c, (lo, hi) in enumerate(pref.class_intervals):
                    if l <= lo and hi <= r:
                        coeffs[mass_names[i][c]] = 1
            if coeffs:
                system.add_constraint(coeffs, "<=", r - l + 1, tag=f"capacity:[{l},{r}]")
    prefixes = [class_prefix_sums(p.rows[i], pref) for i, pref in enumerate(profile)]
    for i, pref in enumerate(profile):
        for t in range(pref.num_classes - 1):
            s = system.add_variable(f"s[{i + 1}][{t + 1}]")
            slack_names.append(s)
            coeffs = {mass_names[i][c]: 1 for c in range(t + 1)}
            coeffs[s] = -1
            system.add_constraint(
                coeffs, "=", prefixes[i][t], tag=f"prefix:agent{i + 1}@{t + 1}"
            )
    system.set_objective("max", {s: 1 for s in slack_names})
    return system, mass_names, slack_names


def ordinally_efficient(p: AssignmentMatrix, profile: Profile) -> AxiomVerdict:
    """LP check: ``p`` is ordinally efficient iff the max total prefix
    improvement over all doubly stochastic matrices is zero."""
    if p.n != profile.n:
        raise ValueError("size mismatch")
    system, mass_names, _ = oe_improvement_system(p, profile)
    outcome = lp_solve(system)
    assert outcome.status == "optimal", f"OE system must be feasible: {outcome.status}"
    if outcome.value == 0:
        return AxiomVerdict(holds=True)
    masses = [
        [outcome.witness[name] for name in names] for names in mass_names
    ]
    q = canonical_matrix(profile, masses)
    assert matrix_sd_dominates(q, p, profile), "OE witness fails to dominate"
    return AxiomVerdict(
        holds=False, certificate=DominatingWitness(matrix=q, slack_total=outcome.value)
    )


def oe_matrix_form_system(
    p: AssignmentMatrix, profile: Profile
) -> LinearSystem:
    """Literal entrywise variant of the dominance LP (cross-check only)."""
    n = profile.n
    system = LinearSystem()
    q = [[system.add_variable(f"q[{i + 1}][{j + 1}]") for j in range(n)] for i in range(n)]
    slacks = []
    for i in range(n):
        system.add_constraint({q[i][j]: 1 for j in range(n)}, "=", 1, tag=f"row{i + 1}")
    for j in range(n):
        system.add_constraint({q[i][j]: 1 for i in range(n)}, "=", 1, tag=f"col{j + 1}")
    prefixes = [class_prefix_sums(p.rows[i], pref) for i, pref in enumerate(profile)]
    for i, pref in enumerate(profile):
        for t, hi in enumerate(pref.boundaries[:-1]):
            s = system.add_variable(f"s[{i + 1}][{t + 1}]")
            slacks.append(s)
            coeffs = {q[i][j]: 1 for j in range(hi)}
            coeffs[s] = -1
            system.add_constraint(coeffs, "=", prefixes[i][t], tag=f"prefix{i + 1}@{t + 1}")
    system.set_objective("max", {s: 1 for s in slacks})
    return system


# ---------------------------------------------------------------------------
# Ex-post efficiency
# ---------------------------------------------------------------------------


def ex_post_efficient(p: AssignmentMatrix, profile: Profile) -> AxiomVerdict:
    """Feasibility of writing ``p`` as a convex combination of
    Pareto-efficient matchings; weights or a Farkas certificate returned."""
    if p.n != profile.n:
        raise ValueError("size mismatch")
    matchings = enumerate_pe_matchings(profile)
    system = LinearSystem()
    w = [system.add_variable(f"w[{k}]") for k in range(len(matchings))]
    system.add_constraint({name: 1 for name in w}, "=", 1, tag="hull:weights")
    n = profile.n
    for i in range(n):
        for j in range(n):
            coeffs = {
                w[k]: 1
                for k, m in enumerate(matchings)
                if m.assignment[i] == j
            }
            system.add_constraint(coeffs, "=", p.rows[i][j], tag=f"hull:p[{i + 1}][{j + 1}]")
    outcome = lp_solve(system)
    if outcome.status == "infeasible":
        return AxiomVerdict(
            holds=False,
            certificate=HullInfeasibility(certificate=outcome.certificate, system=system),
        )
    assert outcome.status == "optimal"
    entries = tuple(
        (outcome.witness[w[k]], matchings[k])
        for k in range(len(matchings))
        if outcome.witness[w[k]] > 0
    )
    recombined = [[ZERO] * n for _ in range(n)]
    for weight, m in entries:
        for i in range(n):
            recombined[i][m.assignment[i]] += weight
    assert all(
        recombined[i][j] == p.rows[i][j] for i in range(n) for j in range(n)
    ), "hull weights fail to recombine"
    return AxiomVerdict(holds=True, certificate=HullWeights(entries=entries))


# ---------------------------------------------------------------------------
# Fairness
# ---------------------------------------------------------------------------


def envy_free(p: AssignmentMatrix, profile: Profile) -> AxiomVerdict:
    """Each agent's row must weakly dominate every other row under the
    agent's own preference; first violating ordered pair is returned."""
    if p.n != profile.n:
        raise ValueError("size mismatch")
    for i, pref in enumerate(profile):
        mine = class_prefix_sums(p.rows[i], pref)
        for j in range(p.n):
            if i == j:
                continue
            theirs = class_prefix_sums(p.rows[j], pref)
            verdict = sd_compare(p.rows[i], p.rows[j], pref)
            if verdict in (SdOrder.DOMINATED, SdOrder.INCOMPARABLE):
                for t, hi in enumerate(pref.boundaries):
                    if mine[t] < theirs[t]:
                        return AxiomVerdict(
                            holds=False,
                            certificate=EnvyWitness(
                                envious=i + 1,
                                envied=j + 1,
                                boundary=hi,
                                envious_prefix=mine[t],
                                envied_prefix=theirs[t],
                            ),
                        )
    return AxiomVerdict(holds=True)


def equal_treatment(p: AssignmentMatrix, profile: Profile) -> AxiomVerdict:
    """Agents reporting identical preferences must have identical
    class-prefix sums at every boundary."""
    if p.n != profile.n:
        raise ValueError("size mismatch")
    for i, j in profile.identical_pref_pairs():
        pref = profile[i]
        a = class_prefix_sums(p.rows[i], pref)
        b = class_prefix_sums(p.rows[j], pref)
        for t, hi in enumerate(pref.boundaries):
            if a[t] != b[t]:
                return AxiomVerdict(
                    holds=False,
                    certificate=UnequalTreatmentWitness(
                        agent_a=i + 1,
                        agent_b=j + 1,
                        boundary=hi,
                        prefix_a=a[t],
                        prefix_b=b[t],
                    ),
                )
    return AxiomVerdict(holds=True)
