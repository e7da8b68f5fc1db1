"""Certified reproductions of the counterexample and both impossibility chains.

Each pipeline rebuilds the relevant profiles, re-derives every claimed
constraint as a tagged linear system (equal treatment, envy-freeness,
certified ordinal-efficiency zeros, strategyproofness links between adjacent
profiles), and resolves the polytope by exact coordinate ranges.  A run ends
in machine-checked uniqueness, an exactly parametrized family, or an
infeasibility with a re-multipliable Farkas certificate.  Any step that
cannot be certified raises :class:`CertificationError` with its tag; there
is no tolerance parameter anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .axioms import (
    enumerate_pe_matchings,
    envy_free,
    equal_treatment,
    ex_post_efficient,
    ordinally_efficient,
)
from .core import (
    AssignmentMatrix,
    Matching,
    Profile,
    SdOrder,
    UniformPreference,
    ZERO,
    assignments_equivalent,
    class_prefix_sums,
    matrix_sd_dominates,
    rat,
    sd_compare,
)
from .mechanisms import eps_assign
from .ratlp import (
    CertificateEntry,
    Constraint,
    LinearSystem,
    coordinate_range,
    functional_range,
    lp_solve,
    verify_infeasibility_certificate,
)

F = Fraction


class CertificationError(RuntimeError):
    """A derivation step failed; the message carries the failed tag."""


def p_name(i: int, j: int) -> str:
    return f"p[{i}][{j}]"


def pref(*boundaries: int) -> UniformPreference:
    return UniformPreference(n=boundaries[-1], boundaries=tuple(boundaries))


# ---------------------------------------------------------------------------
# The profiles as printed
# ---------------------------------------------------------------------------


def example31_profile() -> Profile:
    return Profile(prefs=(pref(1, 3, 4), pref(1, 3, 4), pref(2, 3, 4), pref(2, 3, 4)))


def example31_alternative_matrix() -> AssignmentMatrix:
    q = ["1/4", "0", "1/2", "1/4"]
    r = ["1/4", "1/2", "0", "1/4"]
    return AssignmentMatrix.from_rows([q, q, r, r])


def example31_eps_matrix() -> AssignmentMatrix:
    q = ["1/2", "0", "1/4", "1/4"]
    r = ["0", "1/2", "1/4", "1/4"]
    return AssignmentMatrix.from_rows([q, q, r, r])


def theorem1_profiles() -> tuple[Profile, Profile]:
    p1 = Profile(prefs=(pref(1, 2, 3), pref(1, 3), pref(1, 2, 3)))
    p2 = Profile(prefs=(pref(1, 2, 3), pref(1, 3), pref(2, 3)))
    return p1, p2


def theorem1_padded(which: int, n: int) -> Profile:
    """The n >= 4 extension: same first three agents on o1..o3 with strict
    tails, and agent i >= 4 indifferent among the first i objects."""
    if n < 4:
        raise ValueError("padded profiles need n >= 4")
    core1, core2 = theorem1_profiles()
    core = core1 if which == 1 else core2
    prefs = []
    tail = tuple(range(4, n + 1))
    for agent in range(3):
        prefs.append(
            UniformPreference(n=n, boundaries=core[agent].boundaries[:-1] + (3,) + tail)
        )
    for i in range(4, n + 1):
        prefs.append(UniformPreference(n=n, boundaries=(i,) + tuple(range(i + 1, n + 1))))
    return Profile(prefs=tuple(prefs))


def theorem2_profiles() -> dict[int, Profile]:
    strict = pref(1, 2, 3, 4)
    front = pref(2, 3, 4)  # {o1 o2}, o3, o4
    mid = pref(1, 3, 4)  # o1, {o2 o3}, o4
    return {
        1: Profile(prefs=(strict, strict, strict, strict)),
        2: Profile(prefs=(strict, strict, strict, front)),
        3: Profile(prefs=(strict, strict, front, front)),
        4: Profile(prefs=(front, strict, front, front)),
        5: Profile(prefs=(strict, mid, strict, strict)),
        6: Profile(prefs=(strict, mid, strict, front)),
        7: Profile(prefs=(strict, mid, front, front)),
        8: Profile(prefs=(front, mid, front, front)),
    }


THEOREM2_LINKS: tuple[tuple[int, int, int], ...] = (
    # (source profile, target profile, deviating agent)
    (1, 2, 4),
    (2, 3, 3),
    (3, 4, 1),
    (1, 5, 2),
    (2, 6, 2),
    (5, 6, 4),
    (3, 7, 2),
    (6, 7, 3),
    (4, 8, 2),
    (7, 8, 1),
)


def theorem2_expected_matrices() -> dict[int, AssignmentMatrix]:
    return {
        1: AssignmentMatrix.from_rows([["1/4"] * 4] * 4),
        2: AssignmentMatrix.from_rows(
            [["1/3", "1/6", "1/4", "1/4"]] * 3 + [["0", "1/2", "1/4", "1/4"]]
        ),
        3: AssignmentMatrix.from_rows(
            [["1/2", "0", "1/4", "1/4"]] * 2 + [["0", "1/2", "1/4", "1/4"]] * 2
        ),
        5: AssignmentMatrix.from_rows(
            [
                ["1/4", "1/3", "1/6", "1/4"],
                ["1/4", "0", "1/2", "1/4"],
                ["1/4", "1/3", "1/6", "1/4"],
                ["1/4", "1/3", "1/6", "1/4"],
            ]
        ),
        6: AssignmentMatrix.from_rows(
            [
                ["1/3", "5/24", "5/24", "1/4"],
                ["1/3", "0", "5/12", "1/4"],
                ["1/3", "5/24", "5/24", "1/4"],
                ["0", "7/12", "1/6", "1/4"],
            ]
        ),
    }


# ---------------------------------------------------------------------------
# System builders
# ---------------------------------------------------------------------------


def bistochastic_system(n: int, skip_cols: Sequence[int] = ()) -> LinearSystem:
    """Variables p[i][j] >= 0 with unit row sums and unit column sums."""
    system = LinearSystem()
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            system.add_variable(p_name(i, j))
    for i in range(1, n + 1):
        system.add_constraint(
            {p_name(i, j): 1 for j in range(1, n + 1)}, "=", 1, tag=f"bistochastic:row{i}"
        )
    for j in range(1, n + 1):
        if j in skip_cols:
            continue
        system.add_constraint(
            {p_name(i, j): 1 for i in range(1, n + 1)}, "=", 1, tag=f"bistochastic:col{j}"
        )
    return system


def ete_constraints(profile: Profile) -> list[tuple[Mapping[str, int], str, int, str]]:
    """Equal class-prefix sums for every pair of identical preferences."""
    rows = []
    for i, j in profile.identical_pref_pairs():
        prf = profile[i]
        for hi in prf.boundaries[:-1]:
            coeffs: dict[str, int] = {}
            for k in range(1, hi + 1):
                coeffs[p_name(i + 1, k)] = 1
                coeffs[p_name(j + 1, k)] = -1
            rows.append((coeffs, "=", 0, f"ETE({i + 1}~{j + 1})@o{hi}"))
    return rows


def ef_constraints(profile: Profile) -> list[tuple[Mapping[str, int], str, int, str]]:
    """Every agent's class prefixes dominate every other agent's."""
    rows = []
    for i, prf in enumerate(profile):
        for j in range(profile.n):
            if i == j:
                continue
            for hi in prf.boundaries[:-1]:
                coeffs: dict[str, int] = {}
                for k in range(1, hi + 1):
                    coeffs[p_name(i + 1, k)] = 1
                    coeffs[p_name(j + 1, k)] = -1
                rows.append((coeffs, ">=", 0, f"EF({i + 1}>={j + 1})@o{hi}"))
    return rows


def add_rows(system: LinearSystem, rows) -> None:
    for coeffs, rel, rhs, tag in rows:
        system.add_constraint(coeffs, rel, rhs, tag=tag)


def add_pe_hull(system: LinearSystem, profile: Profile) -> tuple[Matching, ...]:
    """Constrain the p variables to the convex hull of PE matchings."""
    matchings = enumerate_pe_matchings(profile)
    w = [system.add_variable(f"w[{k}]") for k in range(len(matchings))]
    system.add_constraint({name: 1 for name in w}, "=", 1, tag="EPE-hull:weights")
    n = profile.n
    for i in range(n):
        for j in range(n):
            coeffs: dict[str, int] = {p_name(i + 1, j + 1): 1}
            for k, m in enumerate(matchings):
                if m.assignment[i] == j:
                    coeffs[w[k]] = coeffs.get(w[k], 0) - 1
            system.add_constraint(coeffs, "=", 0, tag=f"EPE-hull:p[{i + 1}][{j + 1}]")
    return matchings


# ---------------------------------------------------------------------------
# Certified derivation steps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SwapLemmaInstance:
    """One application of the improving-swap lemma backing an OE zero."""

    strict_agent: int
    indiff_agent: int
    better: int
    worse: int


def improving_swap_witness(
    p: AssignmentMatrix,
    profile: Profile,
    strict_agent: int,
    indiff_agent: int,
    better: int,
    worse: int,
) -> AssignmentMatrix:
    """The epsilon-trade showing ``p`` is not ordinally efficient.

    Requires ``better`` strictly above ``worse`` for the strict agent, the
    two objects tied for the indifferent agent, positive mass of ``worse``
    at the strict agent, and positive mass of ``better`` at the indifferent
    agent (all 1-based labels).
    """
    s, t = strict_agent - 1, indiff_agent - 1
    b, w = better - 1, worse - 1
    if not profile[s].strictly_prefers(better, worse):
        raise ValueError("strict agent does not rank the objects strictly")
    if not profile[t].same_class(better, worse):
        raise ValueError("indifferent agent is not indifferent")
    eps = min(p.rows[s][w], p.rows[t][b])
    if eps <= 0:
        raise ValueError("no mass available for the trade")
    rows = [list(r) for r in p.rows]
    rows[s][w] -= eps
    rows[s][b] += eps
    rows[t][b] -= eps
    rows[t][w] += eps
    q = AssignmentMatrix.from_rows(rows)
    assert matrix_sd_dominates(q, p, profile), "swap failed to dominate"
    return q


@dataclass(frozen=True)
class OeZeroCertificate:
    """Proof that p[agent][obj] = 0 in every ordinally efficient point.

    The restricted program maximizes the target entry subject to every swap
    partner holding none of the traded object.  Optimum zero (or outright
    infeasibility) certifies the claim: any feasible point with a positive
    target then leaves some partner holding, which enables a strict trade.
    """

    agent: int
    obj: int
    lemma_instances: tuple[SwapLemmaInstance, ...]
    restricted_status: str  # "optimum-zero" | "restriction-infeasible"
    farkas: tuple[CertificateEntry, ...] | None = None


def oe_zero_certify(
    profile: Profile, polytope: LinearSystem, agent: int, obj: int
) -> tuple[OeZeroCertificate, Constraint]:
    """Certify an ordinal-efficiency zero and return the constraint to add."""
    prf = profile[agent - 1]
    instances: list[SwapLemmaInstance] = []
    restrictions: list[tuple[int, int]] = []
    for b in range(1, profile.n + 1):
        if b == obj:
            continue
        if prf.same_class(obj, b):
            for i in range(1, profile.n + 1):
                if i != agent and profile[i - 1].strictly_prefers(obj, b):
                    instances.append(
                        SwapLemmaInstance(
                            strict_agent=i, indiff_agent=agent, better=obj, worse=b
                        )
                    )
                    restrictions.append((i, b))
        elif prf.strictly_prefers(b, obj):
            for i in range(1, profile.n + 1):
                if i != agent and profile[i - 1].same_class(obj, b):
                    instances.append(
                        SwapLemmaInstance(
                            strict_agent=agent, indiff_agent=i, better=b, worse=obj
                        )
                    )
                    restrictions.append((i, b))
    tag = f"OE-zero:{p_name(agent, obj)}"
    if not restrictions:
        raise CertificationError(f"{tag}: no swap partners exist")
    restricted = polytope.copy()
    for i, b in restrictions:
        restricted.add_constraint(
            {p_name(i, b): 1}, "=", 0, tag=f"{tag}:partner {p_name(i, b)}=0"
        )
    outcome = lp_solve(restricted, objective=("max", {p_name(agent, obj): 1}))
    if outcome.status == "infeasible":
        cert = OeZeroCertificate(
            agent=agent,
            obj=obj,
            lemma_instances=tuple(instances),
            restricted_status="restriction-infeasible",
            farkas=outcome.certificate,
        )
    elif outcome.status == "optimal" and outcome.value == 0:
        cert = OeZeroCertificate(
            agent=agent,
            obj=obj,
            lemma_instances=tuple(instances),
            restricted_status="optimum-zero",
        )
    else:
        raise CertificationError(
            f"{tag}: restricted maximum is {outcome.value}, not 0 "
            f"(status {outcome.status})"
        )
    constraint = Constraint.make({p_name(agent, obj): 1}, "=", 0, tag=tag)
    return cert, constraint


def sp_link_constraints(
    source_id: str,
    target_id: str,
    deviator: int,
    source_profile: Profile,
    target_profile: Profile,
    source_row: Sequence[Fraction],
) -> list[Constraint]:
    """Strategyproofness both ways across two profiles differing in one agent.

    The deviator's already-pinned source row must dominate the target row at
    every boundary of the source preference (truth in the source profile),
    and the target row must dominate the source row at every boundary of the
    target preference (truth in the target profile).  Both systems are
    emitted as inequalities on the target variables; shared boundaries
    collapse to the equalities used by the chain.
    """
    n = source_profile.n
    diff = [
        i
        for i in range(n)
        if source_profile[i] != target_profile[i]
    ]
    if diff != [deviator - 1]:
        raise ValueError(
            f"profiles must differ exactly in agent {deviator}, differ in "
            f"{[i + 1 for i in diff]}"
        )
    src_pref = source_profile[deviator - 1]
    tgt_pref = target_profile[deviator - 1]
    src_prefix = class_prefix_sums(source_row, src_pref)
    tgt_prefix_of_src = class_prefix_sums(source_row, tgt_pref)
    out: list[Constraint] = []
    base = f"SP-link({source_id}->{target_id},agent{deviator})"
    for t, hi in enumerate(src_pref.boundaries[:-1]):
        coeffs = {p_name(deviator, k): 1 for k in range(1, hi + 1)}
        out.append(
            Constraint.make(coeffs, "<=", src_prefix[t], tag=f"{base}:truth@o{hi}")
        )
    for t, hi in enumerate(tgt_pref.boundaries[:-1]):
        coeffs = {p_name(deviator, k): 1 for k in range(1, hi + 1)}
        out.append(
            Constraint.make(
                coeffs, ">=", tgt_prefix_of_src[t], tag=f"{base}:report@o{hi}"
            )
        )
    return out


# ---------------------------------------------------------------------------
# Resolutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UniquePoint:
    matrix: AssignmentMatrix


@dataclass(frozen=True)
class ParametrizedFamily:
    ranges: dict[str, tuple[Fraction, Fraction]]
    pinned: dict[str, Fraction]
    identities: tuple[tuple[str, Fraction], ...]  # (description, pinned value)


@dataclass(frozen=True)
class InfeasibleResolution:
    certificate: tuple[CertificateEntry, ...]
    narrative: str


@dataclass
class CertifiedDerivation:
    profile_id: str
    profile: Profile
    system: LinearSystem
    steps: list[str] = field(default_factory=list)
    oe_certificates: list[OeZeroCertificate] = field(default_factory=list)
    resolution: object = None

    def pinned_row(self, agent: int) -> tuple[Fraction, ...]:
        """The agent's row, available only when every entry is pinned."""
        n = self.profile.n
        values = []
        for j in range(1, n + 1):
            name = p_name(agent, j)
            if isinstance(self.resolution, UniquePoint):
                values.append(self.resolution.matrix.entry(agent, j))
            elif isinstance(self.resolution, ParametrizedFamily):
                if name not in self.resolution.pinned:
                    raise CertificationError(
                        f"{self.profile_id}: {name} is not pinned; cannot export "
                        "to a strategyproofness link"
                    )
                values.append(self.resolution.pinned[name])
            else:
                raise CertificationError(f"{self.profile_id}: no usable resolution")
        return tuple(values)


def resolve_ranges(system: LinearSystem, n: int) -> dict[str, tuple[Fraction, Fraction]]:
    return {
        p_name(i, j): coordinate_range(system, p_name(i, j))
        for i in range(1, n + 1)
        for j in range(1, n + 1)
    }


def resolution_from_ranges(
    ranges: Mapping[str, tuple[Fraction, Fraction]], n: int
) -> UniquePoint | None:
    if all(lo == hi for lo, hi in ranges.values()):
        rows = [
            [ranges[p_name(i, j)][0] for j in range(1, n + 1)] for i in range(1, n + 1)
        ]
        return UniquePoint(matrix=AssignmentMatrix.from_rows(rows))
    return None


def _check_pinned(
    tag: str, system: LinearSystem, coeffs: Mapping[str, object], expected
) -> None:
    lo, hi = functional_range(system, {k: rat(v) for k, v in coeffs.items()})
    if lo != rat(expected) or hi != rat(expected):
        raise CertificationError(
            f"{tag}: expected the functional pinned at {expected}, got [{lo}, {hi}]"
        )


def _check_range(
    tag: str, system: LinearSystem, coeffs: Mapping[str, object], lo_exp, hi_exp
) -> None:
    lo, hi = functional_range(system, {k: rat(v) for k, v in coeffs.items()})
    if lo != rat(lo_exp) or hi != rat(hi_exp):
        raise CertificationError(
            f"{tag}: expected range [{lo_exp}, {hi_exp}], got [{lo}, {hi}]"
        )


def _cert_json(entries: Sequence[CertificateEntry]) -> list[dict]:
    return [
        {"constraint": e.index, "tag": e.tag, "multiplier": str(e.multiplier)}
        for e in entries
    ]


def _system_json(system: LinearSystem) -> list[dict]:
    return [
        {
            "tag": c.tag,
            "coeffs": {name: str(v) for name, v in c.coeffs},
            "rel": c.rel,
            "rhs": str(c.rhs),
        }
        for c in system.constraints
    ]


# ---------------------------------------------------------------------------
# Theorem 2 pipeline
# ---------------------------------------------------------------------------


@dataclass
class Theorem2Report:
    derivations: dict[int, CertifiedDerivation]
    links_used: tuple[tuple[int, int, int], ...]
    final_certificate: tuple[CertificateEntry, ...]
    final_system: LinearSystem
    column3_pins: dict[str, Fraction]
    column3_total: Fraction
    narrative_certificate: tuple[CertificateEntry, ...]
    narrative_system: LinearSystem
    lines: list[str]

    @property
    def ok(self) -> bool:
        return True  # construction raises on any failed certification

    def transcript(self) -> str:
        return "\n".join(self.lines)

    def to_json(self) -> dict:
        out: dict = {"theorem": "OE+ETE+SP impossibility, n=4", "profiles": {}}
        for pid, d in self.derivations.items():
            entry: dict = {
                "preferences": [p.label() for p in d.profile],
                "steps": list(d.steps),
                "constraints": _system_json(d.system),
            }
            res = d.resolution
            if isinstance(res, UniquePoint):
                entry["resolution"] = {"kind": "unique", "matrix": res.matrix.as_strings()}
            elif isinstance(res, ParametrizedFamily):
                entry["resolution"] = {
                    "kind": "family",
                    "pinned": {k: str(v) for k, v in sorted(res.pinned.items())},
                    "ranges": {
                        k: [str(lo), str(hi)] for k, (lo, hi) in sorted(res.ranges.items())
                    },
                    "identities": [
                        {"functional": desc, "value": str(v)} for desc, v in res.identities
                    ],
                }
            elif isinstance(res, InfeasibleResolution):
                entry["resolution"] = {
                    "kind": "infeasible",
                    "certificate": _cert_json(res.certificate),
                    "narrative": res.narrative,
                }
            out["profiles"][pid] = entry
        out["links"] = [
            {"source": s, "target": t, "deviator": d} for s, t, d in self.links_used
        ]
        out["profile8"] = {
            "farkas_full_system": _cert_json(self.final_certificate),
            "column3_pins": {k: str(v) for k, v in self.column3_pins.items()},
            "column3_total": str(self.column3_total),
            "farkas_column3": _cert_json(self.narrative_certificate),
        }
        return out


def verify_theorem2() -> Theorem2Report:
    """Re-derive the eight-profile chain and certify its final infeasibility."""
    profiles = theorem2_profiles()
    expected = theorem2_expected_matrices()
    derivations: dict[int, CertifiedDerivation] = {}
    links_used: list[tuple[int, int, int]] = []
    lines: list[str] = ["THEOREM 2: OE + ETE + SP is infeasible on four agents", ""]

    def start(pid: int) -> CertifiedDerivation:
        system = bistochastic_system(4)
        add_rows(system, ete_constraints(profiles[pid]))
        d = CertifiedDerivation(
            profile_id=f"P{pid}", profile=profiles[pid], system=system
        )
        d.steps.append("base: bistochastic + ETE")
        derivations[pid] = d
        lines.append(f"PROFILE {pid}: " + "; ".join(p.label() for p in profiles[pid]))
        return d

    def apply_oe_zero(d: CertifiedDerivation, agent: int, obj: int) -> None:
        cert, con = oe_zero_certify(d.profile, d.system, agent, obj)
        d.system.add_constraint(dict(con.coeffs), con.rel, con.rhs, tag=con.tag)
        d.oe_certificates.append(cert)
        msg = (
            f"{con.tag} certified via {len(cert.lemma_instances)} swap partner(s); "
            f"restricted LP: {cert.restricted_status}"
        )
        d.steps.append(msg)
        lines.append("  " + msg)

    def apply_link(src: int, dst: int, deviator: int, d: CertifiedDerivation) -> None:
        row = derivations[src].pinned_row(deviator)
        cons = sp_link_constraints(
            f"P{src}", f"P{dst}", deviator, profiles[src], profiles[dst], row
        )
        for c in cons:
            d.system.add_constraint(dict(c.coeffs), c.rel, c.rhs, tag=c.tag)
        links_used.append((src, dst, deviator))
        msg = (
            f"SP-link P{src}->P{dst} (deviator agent {deviator}), source row "
            f"({', '.join(str(x) for x in row)}): {len(cons)} constraints"
        )
        d.steps.append(msg)
        lines.append("  " + msg)

    def resolve_unique(d: CertifiedDerivation, pid: int) -> None:
        ranges = resolve_ranges(d.system, 4)
        point = resolution_from_ranges(ranges, 4)
        if point is None:
            free = {k: v for k, v in ranges.items() if v[0] != v[1]}
            raise CertificationError(
                f"P{pid}: expected a unique point, free coordinates {free}"
            )
        if point.matrix.rows != expected[pid].rows:
            raise CertificationError(
                f"P{pid}: resolved matrix differs from the printed one"
            )
        ete = equal_treatment(point.matrix, d.profile)
        oe = ordinally_efficient(point.matrix, d.profile)
        if not (ete.holds and oe.holds):
            raise CertificationError(f"P{pid}: resolved matrix fails ETE or OE")
        d.resolution = point
        d.steps.append("resolved: unique point matches the printed matrix (ETE, OE pass)")
        for row in point.matrix.as_strings():
            lines.append("    [" + "  ".join(row) + "]")
        lines.append("")

    # Profile 1: ETE alone pins the uniform matrix
    d1 = start(1)
    resolve_unique(d1, 1)

    # Profile 2
    d2 = start(2)
    apply_oe_zero(d2, 4, 1)
    apply_link(1, 2, 4, d2)
    resolve_unique(d2, 2)

    # Profile 3
    d3 = start(3)
    apply_link(2, 3, 3, d3)
    apply_oe_zero(d3, 3, 1)
    apply_oe_zero(d3, 4, 1)
    resolve_unique(d3, 3)

    # Profile 4: a two-parameter family with row 2 pinned
    d4 = start(4)
    apply_link(3, 4, 1, d4)
    apply_oe_zero(d4, 2, 2)
    ranges4 = resolve_ranges(d4.system, 4)
    half = F(1, 2)
    quarter = F(1, 4)
    pinned4 = {
        p_name(2, 1): half,
        p_name(2, 2): F(0),
        p_name(2, 3): quarter,
        p_name(2, 4): quarter,
        p_name(1, 3): quarter,
        p_name(3, 3): quarter,
        p_name(4, 3): quarter,
        p_name(1, 4): quarter,
        p_name(3, 4): quarter,
        p_name(4, 4): quarter,
    }
    for name, val in pinned4.items():
        if ranges4[name] != (val, val):
            raise CertificationError(f"P4: {name} should be pinned at {val}")
    for name in (p_name(1, 1), p_name(3, 1), p_name(4, 1),
                 p_name(1, 2), p_name(3, 2), p_name(4, 2)):
        if ranges4[name] != (F(0), half):
            raise CertificationError(f"P4: {name} should range over [0, 1/2]")
    identities4 = []
    for desc, coeffs, val in (
        ("p[1][1]+p[1][2]", {p_name(1, 1): 1, p_name(1, 2): 1}, half),
        ("p[3][1]+p[3][2]", {p_name(3, 1): 1, p_name(3, 2): 1}, half),
        ("p[4][1]+p[4][2]", {p_name(4, 1): 1, p_name(4, 2): 1}, half),
        ("x+y+p[4][1]", {p_name(1, 1): 1, p_name(3, 1): 1, p_name(4, 1): 1}, half),
        ("x+y+p[4][1]... column 1", {p_name(2, 1): 1}, half),
    ):
        _check_pinned(f"P4:{desc}", d4.system, coeffs, val)
        identities4.append((desc, rat(val)))
    _check_range("P4:x+y", d4.system, {p_name(1, 1): 1, p_name(3, 1): 1}, 0, half)
    d4.resolution = ParametrizedFamily(
        ranges=ranges4, pinned=pinned4, identities=tuple(identities4)
    )
    d4.steps.append(
        "resolved: family with x=p[1][1], y=p[3][1] free in [0,1/2], x+y<=1/2, "
        "p[4][1]=1/2-x-y, row 2 pinned at (1/2, 0, 1/4, 1/4)"
    )
    lines.append("  resolved: printed (x, y)-family verified; row 2 pinned")
    lines.append("")

    # Profile 5
    d5 = start(5)
    apply_oe_zero(d5, 2, 2)
    apply_link(1, 5, 2, d5)
    resolve_unique(d5, 5)

    # Profile 6
    d6 = start(6)
    apply_link(2, 6, 2, d6)
    apply_oe_zero(d6, 2, 2)
    apply_link(5, 6, 4, d6)
    apply_oe_zero(d6, 4, 1)
    resolve_unique(d6, 6)

    # Profile 7: one-parameter family with rows 1 and 2 pinned
    d7 = start(7)
    apply_link(3, 7, 2, d7)
    apply_oe_zero(d7, 2, 2)
    apply_link(6, 7, 3, d7)
    apply_oe_zero(d7, 1, 2)
    ranges7 = resolve_ranges(d7.system, 4)
    pinned7 = {
        p_name(1, 1): F(5, 12),
        p_name(1, 2): F(0),
        p_name(1, 3): F(1, 3),
        p_name(1, 4): quarter,
        p_name(2, 1): half,
        p_name(2, 2): F(0),
        p_name(2, 3): quarter,
        p_name(2, 4): quarter,
        p_name(3, 3): F(5, 24),
        p_name(4, 3): F(5, 24),
        p_name(3, 4): quarter,
        p_name(4, 4): quarter,
    }
    for name, val in pinned7.items():
        if ranges7[name] != (val, val):
            raise CertificationError(f"P7: {name} should be pinned at {val}")
    twelfth = F(1, 12)
    for name in (p_name(3, 1), p_name(4, 1)):
        if ranges7[name] != (F(0), twelfth):
            raise CertificationError(f"P7: {name} should range over [0, 1/12]")
    for name in (p_name(3, 2), p_name(4, 2)):
        if ranges7[name] != (F(11, 24), F(13, 24)):
            raise CertificationError(f"P7: {name} should range over [11/24, 13/24]")
    identities7 = []
    for desc, coeffs, val in (
        ("z+p[4][1]", {p_name(3, 1): 1, p_name(4, 1): 1}, twelfth),
        ("p[3][1]+p[3][2]", {p_name(3, 1): 1, p_name(3, 2): 1}, F(13, 24)),
        ("p[4][1]+p[4][2]", {p_name(4, 1): 1, p_name(4, 2): 1}, F(13, 24)),
        ("p[4][2]-z", {p_name(4, 2): 1, p_name(3, 1): -1}, F(11, 24)),
    ):
        _check_pinned(f"P7:{desc}", d7.system, coeffs, val)
        identities7.append((desc, rat(val)))
    d7.resolution = ParametrizedFamily(
        ranges=ranges7, pinned=pinned7, identities=tuple(identities7)
    )
    d7.steps.append(
        "resolved: family with z=p[3][1] free in [0,1/12], rows 1 and 2 pinned at "
        "(5/12, 0, 1/3, 1/4) and (1/2, 0, 1/4, 1/4)"
    )
    lines.append("  resolved: printed z-family verified; rows 1, 2 pinned")
    lines.append("")

    # Profile 8: the chain is infeasible
    d8 = start(8)
    apply_link(4, 8, 2, d8)
    apply_oe_zero(d8, 2, 2)
    apply_link(7, 8, 1, d8)
    outcome = lp_solve(d8.system)
    if outcome.status != "infeasible":
        raise CertificationError(f"P8: expected infeasibility, got {outcome.status}")
    if not verify_infeasibility_certificate(d8.system, outcome.certificate):
        raise CertificationError("P8: Farkas certificate failed re-verification")
    lines.append("  full constraint system: INFEASIBLE (Farkas certificate verified)")

    # the column-o3 contradiction: SP, OE and ETE alone pin the third column
    # entrywise (no column sums are needed), and the pins overfill the column
    reduced = bistochastic_system(4, skip_cols=(1, 2, 3, 4))
    add_rows(reduced, ete_constraints(profiles[8]))
    for c in sp_link_constraints(
        "P4", "P8", 2, profiles[4], profiles[8], derivations[4].pinned_row(2)
    ):
        reduced.add_constraint(dict(c.coeffs), c.rel, c.rhs, tag=c.tag)
    reduced.add_constraint({p_name(2, 2): 1}, "=", 0, tag="OE-zero:p[2][2]")
    for c in sp_link_constraints(
        "P7", "P8", 1, profiles[7], profiles[8], derivations[7].pinned_row(1)
    ):
        reduced.add_constraint(dict(c.coeffs), c.rel, c.rhs, tag=c.tag)
    pins: dict[str, Fraction] = {}
    for i in range(1, 5):
        lo, hi = coordinate_range(reduced, p_name(i, 3))
        if lo != hi:
            raise CertificationError(
                f"P8: {p_name(i, 3)} not pinned without the column sum: [{lo}, {hi}]"
            )
        pins[p_name(i, 3)] = lo
    total = sum(pins.values(), ZERO)
    if total != F(5, 4):
        raise CertificationError(f"P8: column 3 pins add to {total}, expected 5/4")
    narrative = LinearSystem()
    for i in range(1, 5):
        narrative.add_variable(p_name(i, 3))
    narrative.add_constraint(
        {p_name(i, 3): 1 for i in range(1, 5)}, "=", 1, tag="bistochastic:col3"
    )
    for i in range(1, 5):
        narrative.add_constraint(
            {p_name(i, 3): 1}, "=", pins[p_name(i, 3)],
            tag=f"derived:{p_name(i, 3)}={pins[p_name(i, 3)]}",
        )
    narrative_outcome = lp_solve(narrative)
    if narrative_outcome.status != "infeasible":
        raise CertificationError("P8: column-3 subsystem unexpectedly feasible")
    if not verify_infeasibility_certificate(narrative, narrative_outcome.certificate):
        raise CertificationError("P8: column-3 certificate failed re-verification")
    d8.resolution = InfeasibleResolution(
        certificate=outcome.certificate,
        narrative=(
            "p[1][3]+p[2][3]+p[3][3]+p[4][3] = "
            + "+".join(str(pins[p_name(i, 3)]) for i in range(1, 5))
            + f" = {total} != 1"
        ),
    )
    d8.steps.append("resolved: infeasible; " + d8.resolution.narrative)
    lines.append(
        "  column o3 pins: "
        + ", ".join(f"{k}={v}" for k, v in pins.items())
        + f"; sum {total} != 1"
    )
    lines.append("")
    lines.append("PROFILE 8: INFEASIBLE")

    if tuple(links_used) != THEOREM2_LINKS:
        raise CertificationError(
            f"SP links used {links_used} differ from the published figure"
        )
    return Theorem2Report(
        derivations=derivations,
        links_used=tuple(links_used),
        final_certificate=outcome.certificate,
        final_system=d8.system,
        column3_pins=pins,
        column3_total=total,
        narrative_certificate=narrative_outcome.certificate,
        narrative_system=narrative,
        lines=lines,
    )


# ---------------------------------------------------------------------------
# Theorem 1 pipeline
# ---------------------------------------------------------------------------


@dataclass
class PaddingReport:
    n: int
    pe_matchings: dict[int, int]  # profile id -> count
    unique: dict[int, AssignmentMatrix]
    dominance_truth: SdOrder
    dominance_misreport_pref: SdOrder


@dataclass
class Theorem1Report:
    n: int
    unique1: AssignmentMatrix
    unique2: AssignmentMatrix
    y_range: tuple[Fraction, Fraction]
    w_range: tuple[Fraction, Fraction]
    z_range: tuple[Fraction, Fraction]
    dominance_truth: SdOrder
    dominance_strict: SdOrder
    paddings: dict[int, PaddingReport]
    lines: list[str]

    @property
    def ok(self) -> bool:
        return True

    def transcript(self) -> str:
        return "\n".join(self.lines)

    def to_json(self) -> dict:
        return {
            "theorem": "EPE+EF implies a weak-SP failure, n>=3",
            "profile1_unique_matrix": self.unique1.as_strings(),
            "profile2_unique_matrix": self.unique2.as_strings(),
            "y_range": [str(x) for x in self.y_range],
            "w_range": [str(x) for x in self.w_range],
            "z_range": [str(x) for x in self.z_range],
            "agent3_dominance_under_truth": self.dominance_truth.value,
            "agent3_dominance_under_misreport_pref": self.dominance_strict.value,
            "paddings": {
                str(k): {
                    "pe_matching_counts": v.pe_matchings,
                    "unique_matrices": {
                        str(pid): m.as_strings() for pid, m in v.unique.items()
                    },
                    "dominance_under_truth": v.dominance_truth.value,
                }
                for k, v in self.paddings.items()
            },
        }


def _ef_epe_unique(profile: Profile, tag: str) -> AssignmentMatrix:
    """The unique envy-free point of the Pareto-efficient hull.

    Works in hull-weight coordinates: a convex combination of permutation
    matchings is doubly stochastic for free, so only the envy constraints
    and the simplex constraint remain and every range query is tiny.
    """
    n = profile.n
    matchings = enumerate_pe_matchings(profile)
    system = LinearSystem()
    w = [system.add_variable(f"w[{k}]") for k in range(len(matchings))]
    system.add_constraint({name: 1 for name in w}, "=", 1, tag="EPE-hull:weights")
    for i, prf in enumerate(profile):
        for j in range(n):
            if i == j:
                continue
            for hi in prf.boundaries[:-1]:
                coeffs: dict[str, int] = {}
                for k, m in enumerate(matchings):
                    c = int(m.object_of(i) <= hi) - int(m.object_of(j) <= hi)
                    if c:
                        coeffs[w[k]] = c
                if coeffs:
                    system.add_constraint(
                        coeffs, ">=", 0, tag=f"EF({i + 1}>={j + 1})@o{hi}"
                    )
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            coeffs = {
                w[k]: 1 for k, m in enumerate(matchings) if m.assignment[i] == j
            }
            if not coeffs:
                row.append(F(0))
                continue
            lo, hi = functional_range(system, coeffs)
            if lo != hi:
                raise CertificationError(
                    f"{tag}: EF+EPE polytope is not a point; "
                    f"p[{i + 1}][{j + 1}] ranges over [{lo}, {hi}]"
                )
            row.append(lo)
        rows.append(row)
    matrix = AssignmentMatrix.from_rows(rows)
    ef = envy_free(matrix, profile)
    epe = ex_post_efficient(matrix, profile)
    if not (ef.holds and epe.holds):
        raise CertificationError(f"{tag}: unique point fails EF or EPE")
    return matrix


def verify_theorem1(n: int = 3) -> Theorem1Report:
    """Certify the envy-free polytopes, the EPE intersections, and the forced
    weak-strategyproofness failure, padding up to ``n`` agents."""
    if n < 3:
        raise ValueError("the construction needs n >= 3")
    guard = 5
    import os

    if os.environ.get("UA_GUARD_N"):
        guard = int(os.environ["UA_GUARD_N"])
    if n > guard:
        raise ValueError(f"n = {n} above the certification guard {guard}")

    lines = ["THEOREM 1: EPE + EF forces a weak-SP failure", ""]
    prof1, prof2 = theorem1_profiles()
    half = F(1, 2)
    third = F(1, 3)

    # Profile 1: the envy-free polytope is the printed y-family
    sys1 = bistochastic_system(3)
    add_rows(sys1, ef_constraints(prof1))
    for i in range(1, 4):
        _check_pinned(f"T1-P1:p[{i}][1]", sys1, {p_name(i, 1): 1}, third)
    y_lo, y_hi = functional_range(sys1, {p_name(2, 2): F(1, 2)})
    if (y_lo, y_hi) != (F(0), F(1, 6)):
        raise CertificationError(f"T1-P1: y ranges over [{y_lo}, {y_hi}], not [0, 1/6]")
    for desc, coeffs, val in (
        ("p[1][2]+y", {p_name(1, 2): 1, p_name(2, 2): F(1, 2)}, half),
        ("p[1][3]-y", {p_name(1, 3): 1, p_name(2, 2): F(-1, 2)}, F(1, 6)),
        ("p[2][3]+2y", {p_name(2, 3): 1, p_name(2, 2): 1}, F(2, 3)),
        ("row3=row1 (o2)", {p_name(3, 2): 1, p_name(1, 2): -1}, 0),
        ("row3=row1 (o3)", {p_name(3, 3): 1, p_name(1, 3): -1}, 0),
    ):
        _check_pinned(f"T1-P1:{desc}", sys1, coeffs, val)
    lines.append("Profile 1 (o1,o2,o3; o1,{o2 o3}; o1,o2,o3):")
    lines.append("  EF polytope = printed family, y in [0, 1/6]  (verified)")

    unique1 = _ef_epe_unique(prof1, "T1-P1")
    expected1 = AssignmentMatrix.from_rows(
        [["1/3", "1/2", "1/6"], ["1/3", "0", "2/3"], ["1/3", "1/2", "1/6"]]
    )
    if unique1.rows != expected1.rows:
        raise CertificationError("T1-P1: EF+EPE point differs from the printed matrix")
    lines.append("  EF & EPE pin y = 0: unique matrix")
    for row in unique1.as_strings():
        lines.append("    [" + "  ".join(row) + "]")
    lines.append("")

    # Profile 2: the w, z family
    sys2 = bistochastic_system(3)
    add_rows(sys2, ef_constraints(prof2))
    lo, hi = functional_range(sys2, {p_name(1, 1): 1})
    w_range = (half - hi, half - lo)
    if w_range != (F(0), F(1, 6)):
        raise CertificationError(f"T1-P2: w ranges over {w_range}, not [0, 1/6]")
    lo, hi = functional_range(sys2, {p_name(1, 3): 1})
    z_range = (lo - F(1, 4), hi - F(1, 4))
    # The printed family bounds z below by 0, but the envy-free region is
    # exactly 0 <= w <= 1/6, -w/2 <= z <= 1/12: the w = 1/6, z = -1/12 corner
    # is the unique point of the first profile and is envy-free here too.
    if z_range != (F(-1, 12), F(1, 12)):
        raise CertificationError(f"T1-P2: z ranges over {z_range}, not [-1/12, 1/12]")
    lo, hi = functional_range(sys2, {p_name(1, 3): 1, p_name(3, 1): F(1, 4)})
    if (lo - F(1, 4), hi - F(1, 4)) != (F(0), F(1, 6)):
        raise CertificationError("T1-P2: z + w/2 should range over [0, 1/6]")
    for desc, coeffs, val in (
        ("p[2][1]=p[1][1]", {p_name(2, 1): 1, p_name(1, 1): -1}, 0),
        ("p[1][1]+w", {p_name(1, 1): 1, p_name(3, 1): F(1, 2)}, half),
        ("p[1][2]-w+z", {p_name(1, 2): 1, p_name(3, 1): F(-1, 2), p_name(1, 3): 1}, half),
        ("p[2][2]-w-2z", {p_name(2, 2): 1, p_name(3, 1): F(-1, 2), p_name(1, 3): -2}, -half),
        ("p[2][3]+2z", {p_name(2, 3): 1, p_name(1, 3): 2}, 1),
        ("p[3][2]+2w+z", {p_name(3, 2): 1, p_name(3, 1): 1, p_name(1, 3): 1}, 1),
        ("p[3][3]-z", {p_name(3, 3): 1, p_name(1, 3): -1}, 0),
    ):
        _check_pinned(f"T1-P2:{desc}", sys2, coeffs, val)
    lines.append("Profile 2 (o1,o2,o3; o1,{o2 o3}; {o1 o2},o3):")
    lines.append(
        "  EF polytope = printed family shape with w in [0, 1/6]; the exact "
        "z-bounds are -w/2 <= z <= 1/12"
    )
    lines.append(
        "  note: the printed lower bound 0 <= z is loose; z reaches -1/12 at "
        "w = 1/6 (the other profile's unique matrix, which is envy-free here "
        "but not ex-post efficient, so the pinned point below is unaffected)"
    )

    unique2 = _ef_epe_unique(prof2, "T1-P2")
    expected2 = AssignmentMatrix.from_rows(
        [["1/2", "1/4", "1/4"], ["1/2", "0", "1/2"], ["0", "3/4", "1/4"]]
    )
    if unique2.rows != expected2.rows:
        raise CertificationError("T1-P2: EF+EPE point differs from the printed matrix")
    lines.append("  EF & EPE pin w = z = 0: unique matrix")
    for row in unique2.as_strings():
        lines.append("    [" + "  ".join(row) + "]")
    lines.append("")

    # agent 3 gains by reporting the strict order when the truth is {o1 o2},o3
    dom_truth = sd_compare(unique1.rows[2], unique2.rows[2], prof2[2])
    dom_strict = sd_compare(unique1.rows[2], unique2.rows[2], prof1[2])
    if dom_truth is not SdOrder.DOMINATES_STRICTLY:
        raise CertificationError("T1: dominance under the truthful preference failed")
    if dom_strict is not SdOrder.DOMINATES_STRICTLY:
        raise CertificationError("T1: dominance under the strict preference failed")
    lines.append(
        "Agent 3, truth {o1 o2},o3: misreporting o1,o2,o3 turns the forced row "
        f"{tuple(str(x) for x in unique2.rows[2])} into "
        f"{tuple(str(x) for x in unique1.rows[2])}, which strictly dominates "
        "under the truth -> any EPE+EF mechanism fails weak strategyproofness."
    )
    lines.append("")

    # paddings
    paddings: dict[int, PaddingReport] = {}
    for k in range(4, n + 1):
        pk1 = theorem1_padded(1, k)
        pk2 = theorem1_padded(2, k)
        counts: dict[int, int] = {}
        for pid, prof in ((1, pk1), (2, pk2)):
            matchings = enumerate_pe_matchings(prof)
            counts[pid] = len(matchings)
            for m in matchings:
                for agent in range(3, k):
                    if m.object_of(agent) != agent + 1:
                        raise CertificationError(
                            f"T1 padding n={k}: a PE matching gives agent "
                            f"{agent + 1} object o{m.object_of(agent)}"
                        )
        uniques: dict[int, AssignmentMatrix] = {}
        for pid, prof, core in ((1, pk1, expected1), (2, pk2, expected2)):
            got = _ef_epe_unique(prof, f"T1 padding n={k} P{pid}")
            embedded = [
                [core.rows[i][j] if i < 3 and j < 3 else
                 (F(1) if i == j and i >= 3 else F(0))
                 for j in range(k)]
                for i in range(k)
            ]
            if got.rows != AssignmentMatrix.from_rows(embedded).rows:
                raise CertificationError(
                    f"T1 padding n={k} P{pid}: point is not the embedded core matrix"
                )
            uniques[pid] = got
        dom_t = sd_compare(uniques[1].rows[2], uniques[2].rows[2], pk2[2])
        dom_m = sd_compare(uniques[1].rows[2], uniques[2].rows[2], pk1[2])
        if dom_t is not SdOrder.DOMINATES_STRICTLY or dom_m is not SdOrder.DOMINATES_STRICTLY:
            raise CertificationError(f"T1 padding n={k}: dominance failed")
        paddings[k] = PaddingReport(
            n=k,
            pe_matchings=counts,
            unique=uniques,
            dominance_truth=dom_t,
            dominance_misreport_pref=dom_m,
        )
        lines.append(
            f"Padding n={k}: every PE matching fixes agents 4..{k} on their own "
            "objects; EF+EPE stays unique and the dominance persists."
        )
    lines.append("")
    lines.append("THEOREM 1: VERIFIED")
    return Theorem1Report(
        n=n,
        unique1=unique1,
        unique2=unique2,
        y_range=(y_lo, y_hi),
        w_range=w_range,
        z_range=z_range,
        dominance_truth=dom_truth,
        dominance_strict=dom_strict,
        paddings=paddings,
        lines=lines,
    )


# ---------------------------------------------------------------------------
# Non-uniqueness example
# ---------------------------------------------------------------------------


@dataclass
class Example31Report:
    profile: Profile
    alternative: AssignmentMatrix
    eps_matrix: AssignmentMatrix
    lines: list[str]

    @property
    def ok(self) -> bool:
        return True

    def transcript(self) -> str:
        return "\n".join(self.lines)

    def to_json(self) -> dict:
        return {
            "claim": "ordinally efficient + envy-free assignments are not unique",
            "preferences": [p.label() for p in self.profile],
            "alternative_matrix": self.alternative.as_strings(),
            "eps_matrix": self.eps_matrix.as_strings(),
        }


def verify_example31() -> Example31Report:
    """Both printed matrices are OE and EF, they are inequivalent, and the
    eating mechanism lands on the second one's class."""
    profile = example31_profile()
    alt = example31_alternative_matrix()
    eps_expected = example31_eps_matrix()
    lines = ["EXAMPLE: two inequivalent OE + EF assignments", ""]
    lines.append("profile: " + "; ".join(p.label() for p in profile))
    for name, matrix in (("alternative", alt), ("EPS", eps_expected)):
        oe = ordinally_efficient(matrix, profile)
        ef = envy_free(matrix, profile)
        if not oe.holds:
            raise CertificationError(f"example: {name} matrix is not OE")
        if not ef.holds:
            raise CertificationError(f"example: {name} matrix is not EF")
        lines.append(f"{name} matrix: ordinally efficient and envy-free (verified)")
    if assignments_equivalent(alt, eps_expected, profile):
        raise CertificationError("example: the two matrices are equivalent")
    lines.append("the two matrices are NOT equivalent (class masses differ)")
    got, _ = eps_assign(profile)
    if got.rows != eps_expected.rows:
        raise CertificationError("example: eating mechanism output differs")
    if not assignments_equivalent(got, eps_expected, profile):
        raise CertificationError("example: eating mechanism output class differs")
    lines.append("eating mechanism reproduces the second matrix exactly")
    lines.append("")
    lines.append("EXAMPLE 3.1: VERIFIED")
    return Example31Report(
        profile=profile, alternative=alt, eps_matrix=got, lines=lines
    )
