"""Command-line front end.

Instances are small JSON documents::

    {"n": 4, "agents": [{"name": "1", "classes": [[1], [2, 3], [4]]}, ...]}

Matrices are JSON arrays of arrays of exact "a/b" strings.  Exit codes:
0 = ran and every checked property holds, 1 = ran but a property is false
(failed axiom, manipulation found, infeasible decomposition), 2 = usage or
parse error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .axioms import (
    envy_free,
    equal_treatment,
    ex_post_efficient,
    ordinally_efficient,
    pareto_efficient,
)
from .core import (
    AssignmentMatrix,
    Matching,
    Profile,
    UniformPreference,
)
from .lottery import Lottery, bvn_decompose, pe_decompose
from .mechanisms import DeadlineDomainError, eps_assign, ps_strict, rp_assign
from .repro import verify_example31, verify_theorem1, verify_theorem2
from .strategy import check_sp, sweep


class ProfileParseError(ValueError):
    pass


def parse_profile(text: str) -> Profile:
    """Parse and validate an instance document; errors carry locations."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "agents" not in doc:
        raise ProfileParseError('instance must be an object with an "agents" list')
    agents = doc["agents"]
    if not isinstance(agents, list) or not agents:
        raise ProfileParseError('"agents" must be a non-empty list')
    n = doc.get("n", len(agents))
    if n != len(agents):
        raise ProfileParseError(
            f'instance declares n={n} but lists {len(agents)} agents; '
            "add dummy agents or objects to balance the problem first"
        )
    prefs = []
    for idx, agent in enumerate(agents):
        where = f'agent {idx + 1} ({agent.get("name", idx + 1)!r})' if isinstance(
            agent, dict
        ) else f"agent {idx + 1}"
        if not isinstance(agent, dict) or "classes" not in agent:
            raise ProfileParseError(f'{where}: missing "classes"')
        try:
            pref = UniformPreference.from_classes(agent["classes"])
        except (ValueError, TypeError) as exc:
            raise ProfileParseError(f"{where}: {exc}") from exc
        if pref.n != n:
            raise ProfileParseError(
                f"{where}: classes cover {pref.n} objects, expected {n}"
            )
        prefs.append(pref)
    return Profile(prefs=tuple(prefs))


def serialize_profile(profile: Profile) -> str:
    doc = {
        "n": profile.n,
        "agents": [
            {"name": str(i + 1), "classes": [list(c) for c in pref.classes]}
            for i, pref in enumerate(profile)
        ],
    }
    return json.dumps(doc, indent=1) + "\n"


def parse_matrix(text: str, n: int | None = None) -> AssignmentMatrix:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise ProfileParseError("matrix must be a JSON array of arrays")
    try:
        matrix = AssignmentMatrix.from_rows(doc)
    except (ValueError, TypeError) as exc:
        raise ProfileParseError(f"bad matrix: {exc}") from exc
    if n is not None and matrix.n != n:
        raise ProfileParseError(f"matrix is {matrix.n}x{matrix.n}, instance has n={n}")
    return matrix


def serialize_matrix(matrix: AssignmentMatrix) -> str:
    return json.dumps(matrix.as_strings()) + "\n"


def jobs_to_profile(deadlines: list[int]) -> Profile:
    """Deadline scheduling instance -> uniform profile.

    A job with deadline d strictly prefers earlier slots up to slot d and is
    indifferent among the later ones, so its classes are the singletons
    {o1}..{od} followed by one terminal class.
    """
    n = len(deadlines)
    if n == 0:
        raise ProfileParseError("no jobs")
    prefs = []
    for j, d in enumerate(deadlines):
        if not isinstance(d, int) or not 1 <= d <= n:
            raise ProfileParseError(f"job {j + 1}: deadline {d!r} outside 1..{n}")
        boundaries = tuple(range(1, d + 1))
        if d < n:
            boundaries += (n,)
        prefs.append(UniformPreference(n=n, boundaries=boundaries))
    return Profile(prefs=tuple(prefs))


def _lottery_json(lottery: Lottery) -> list[dict]:
    return [
        {"weight": str(w), "matching": [o + 1 for o in m.assignment]}
        for w, m in lottery.entries
    ]


def _verdict_json(verdict) -> dict:
    cert = verdict.certificate
    out: dict = {"holds": verdict.holds}
    if cert is None:
        return out
    kind = type(cert).__name__
    if kind == "DominatingWitness":
        out["dominating_matrix"] = cert.matrix.as_strings()
    elif kind == "EnvyWitness":
        out["envy"] = {
            "envious": cert.envious,
            "envied": cert.envied,
            "boundary": cert.boundary,
            "envious_prefix": str(cert.envious_prefix),
            "envied_prefix": str(cert.envied_prefix),
        }
    elif kind == "UnequalTreatmentWitness":
        out["unequal_pair"] = {
            "agents": [cert.agent_a, cert.agent_b],
            "boundary": cert.boundary,
            "prefixes": [str(cert.prefix_a), str(cert.prefix_b)],
        }
    elif kind == "HullWeights":
        out["weights"] = [
            {"weight": str(w), "matching": [o + 1 for o in m.assignment]}
            for w, m in cert.entries
        ]
    elif kind == "HullInfeasibility":
        out["farkas"] = [
            {"constraint": e.index, "tag": e.tag, "multiplier": str(e.multiplier)}
            for e in cert.certificate
        ]
    elif kind == "ParetoImprovement":
        out["improving_matching"] = [o + 1 for o in cert.matching.assignment]
    return out


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProfileParseError(f"cannot read {path}: {exc}") from exc


MECHANISMS = {
    "eps": lambda profile: eps_assign(profile)[0],
    "ps": ps_strict,
    "rp": rp_assign,
}


def _cmd_solve(args) -> int:
    profile = parse_profile(_read(args.instance))
    matrix = MECHANISMS[args.mechanism](profile)
    sys.stdout.write(serialize_matrix(matrix))
    return 0


def _cmd_check(args) -> int:
    profile = parse_profile(_read(args.instance))
    matrix = parse_matrix(_read(args.matrix), n=profile.n)
    if args.axiom == "oe":
        verdict = ordinally_efficient(matrix, profile)
    elif args.axiom == "epe":
        verdict = ex_post_efficient(matrix, profile)
    elif args.axiom == "ef":
        verdict = envy_free(matrix, profile)
    elif args.axiom == "ete":
        verdict = equal_treatment(matrix, profile)
    else:  # pe: the matrix must be a matching
        cols = []
        for i, row in enumerate(matrix.rows):
            ones = [j for j, x in enumerate(row) if x == 1]
            if len(ones) != 1:
                raise ProfileParseError(
                    f"row {i + 1} is not deterministic; 'pe' checks matchings"
                )
            cols.append(ones[0])
        verdict = pareto_efficient(Matching(assignment=tuple(cols)), profile)
    sys.stdout.write(json.dumps(_verdict_json(verdict), indent=1) + "\n")
    return 0 if verdict.holds else 1


def _cmd_decompose(args) -> int:
    profile = parse_profile(_read(args.instance))
    matrix = parse_matrix(_read(args.matrix), n=profile.n)
    if args.pe:
        result = pe_decompose(matrix, profile)
        if isinstance(result, Lottery):
            sys.stdout.write(json.dumps(_lottery_json(result), indent=1) + "\n")
            return 0
        payload = {
            "infeasible": True,
            "farkas": [
                {"constraint": e.index, "tag": e.tag, "multiplier": str(e.multiplier)}
                for e in result.certificate
            ],
        }
        sys.stdout.write(json.dumps(payload, indent=1) + "\n")
        return 1
    lottery = bvn_decompose(matrix)
    sys.stdout.write(json.dumps(_lottery_json(lottery), indent=1) + "\n")
    return 0


def _report_json(report) -> dict:
    return {
        "agent": report.agent,
        "truth": report.truth.label(),
        "misreport": report.misreport.label(),
        "truthful_row": [str(x) for x in report.truthful_row],
        "misreport_row": [str(x) for x in report.misreport_row],
        "verdict": report.verdict,
    }


def _cmd_manipulate(args) -> int:
    mech = MECHANISMS[args.mechanism]
    if args.sweep is not None:
        summary = sweep(mech, args.sweep)
        payload = {
            "n": summary.n,
            "profiles": summary.profiles,
            "reports_checked": summary.reports_checked,
            "sp_violations": summary.sp_violations,
            "weak_sp_violations": summary.weak_sp_violations,
            "first_sp": _report_json(summary.first_sp) if summary.first_sp else None,
            "first_weak_sp": (
                _report_json(summary.first_weak_sp) if summary.first_weak_sp else None
            ),
        }
        sys.stdout.write(json.dumps(payload, indent=1) + "\n")
        return 1 if summary.sp_violations else 0
    if args.instance is None:
        raise ProfileParseError("manipulate needs an instance unless --sweep is given")
    profile = parse_profile(_read(args.instance))
    reports = check_sp(mech, profile)
    sys.stdout.write(json.dumps([_report_json(r) for r in reports], indent=1) + "\n")
    return 1 if reports else 0


def _cmd_repro(args) -> int:
    if args.pipeline == "example31":
        report = verify_example31()
    elif args.pipeline == "thm1":
        report = verify_theorem1(args.n)
    else:
        report = verify_theorem2()
    transcript = report.transcript()
    sys.stdout.write(transcript + "\n")
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"repro_{args.pipeline}_transcript.txt").write_text(
            transcript + "\n", encoding="utf-8"
        )
        (out / f"repro_{args.pipeline}_certificates.json").write_text(
            json.dumps(report.to_json(), indent=1) + "\n", encoding="utf-8"
        )
    return 0


def _cmd_jobs2profile(args) -> int:
    try:
        doc = json.loads(_read(args.jobs))
    except json.JSONDecodeError as exc:
        raise ProfileParseError(f"invalid JSON: {exc}") from exc
    if isinstance(doc, dict) and "deadlines" in doc:
        deadlines = doc["deadlines"]
    elif isinstance(doc, list):
        deadlines = doc
    else:
        raise ProfileParseError('jobs file must be a list or {"deadlines": [...]}')
    profile = jobs_to_profile(deadlines)
    sys.stdout.write(serialize_profile(profile))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uniassign",
        description="assignment mechanisms and axiom checks, in exact arithmetic",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run a mechanism on an instance")
    p.add_argument("--mechanism", choices=sorted(MECHANISMS), required=True)
    p.add_argument("instance")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("check", help="check an axiom for a matrix")
    p.add_argument("--axiom", choices=["oe", "epe", "ef", "ete", "pe"], required=True)
    p.add_argument("instance")
    p.add_argument("matrix")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("decompose", help="decompose a matrix into a lottery")
    p.add_argument("--pe", action="store_true", help="restrict support to PE matchings")
    p.add_argument("instance")
    p.add_argument("matrix")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("manipulate", help="search for profitable misreports")
    p.add_argument("--mechanism", choices=sorted(MECHANISMS), required=True)
    p.add_argument("--sweep", type=int, default=None, metavar="N",
                   help="audit every profile of size N instead of one instance")
    p.add_argument("instance", nargs="?")
    p.set_defaults(func=_cmd_manipulate)

    p = sub.add_parser("repro", help="replay a certified derivation")
    p.add_argument("pipeline", choices=["example31", "thm1", "thm2"])
    p.add_argument("--n", type=int, default=3, help="padding size for thm1")
    p.add_argument("--out", default=None, metavar="DIR",
                   help="also write transcript and certificates JSON here")
    p.set_defaults(func=_cmd_repro)

    p = sub.add_parser("jobs2profile", help="deadline instance -> uniform profile")
    p.add_argument("jobs")
    p.set_defaults(func=_cmd_jobs2profile)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ProfileParseError, DeadlineDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
