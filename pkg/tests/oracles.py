"""Independent brute-force oracles used to cross-check the solvers.

Nothing here shares code with the implementations under test: linear
programs are optimized by enumerating basic solutions with Gaussian
elimination, and dominance searches enumerate rational grids of candidate
matrices built from lotteries over all permutations.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

from uniassign.core import (
    AssignmentMatrix,
    Matching,
    Profile,
    class_prefix_sums,
)
from uniassign.ratlp import LinearSystem

F = Fraction


def gauss_solve(rows: list[list[Fraction]], rhs: list[Fraction]):
    """Solve a square rational system; None when singular."""
    n = len(rows)
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def _system_rows(system: LinearSystem):
    """All constraints plus nonnegativity rows, as (coeffs, rel, rhs)."""
    names = system.variables
    index = {name: k for k, name in enumerate(names)}
    rows = []
    for con in system.constraints:
        vec = [F(0)] * len(names)
        for name, c in con.coeffs:
            vec[index[name]] += c
        rows.append((vec, con.rel, con.rhs))
    for name in names:
        if system.is_nonneg(name):
            vec = [F(0)] * len(names)
            vec[index[name]] = F(1)
            rows.append((vec, ">=", F(0)))
    return names, rows


def _feasible(point, rows) -> bool:
    for vec, rel, rhs in rows:
        lhs = sum(c * x for c, x in zip(vec, point))
        if rel == "=" and lhs != rhs:
            return False
        if rel == "<=" and lhs > rhs:
            return False
        if rel == ">=" and lhs < rhs:
            return False
    return True


def _independent_subset(rows, idx: list[int]) -> list[int]:
    """Indices of a maximal linearly independent subset of the given rows."""
    kept: list[int] = []
    basis: list[list[Fraction]] = []
    for k in idx:
        vec = list(rows[k][0])
        for b in basis:
            lead = next((c for c, x in enumerate(b) if x != 0), None)
            if lead is not None and vec[lead] != 0:
                f = vec[lead] / b[lead]
                vec = [x - f * y for x, y in zip(vec, b)]
        if any(x != 0 for x in vec):
            kept.append(k)
            basis.append(vec)
    return kept


def enumerate_vertices(system: LinearSystem):
    """All basic feasible points of a small system (assumes a pointed,
    bounded feasible region, e.g. box-constrained test systems)."""
    names, rows = _system_rows(system)
    d = len(names)
    verts = []
    seen = set()
    eq_idx = _independent_subset(
        rows, [k for k, (_, rel, _) in enumerate(rows) if rel == "="]
    )
    other_idx = [
        k for k, (_, rel, _) in enumerate(rows) if rel != "=" and k not in eq_idx
    ]
    need = d - len(eq_idx)
    if need < 0:
        need = 0
    for extra in itertools.combinations(other_idx, need):
        chosen = eq_idx + list(extra)
        if len(chosen) != d:
            continue
        mat = [rows[k][0] for k in chosen]
        rhs = [rows[k][2] for k in chosen]
        point = gauss_solve(mat, rhs)
        if point is None:
            continue
        key = tuple(point)
        if key in seen:
            continue
        seen.add(key)
        if _feasible(point, rows):
            verts.append(point)
    return names, verts


def lp_oracle(system: LinearSystem, sense: str, coeffs: dict[str, Fraction]):
    """(status, value) by brute-force vertex enumeration."""
    names, verts = enumerate_vertices(system)
    if not verts:
        return "infeasible", None
    index = {name: k for k, name in enumerate(names)}
    values = [
        sum(coeffs.get(name, F(0)) * v[index[name]] for name in coeffs)
        for v in verts
    ]
    return "optimal", (max(values) if sense == "max" else min(values))


def random_box_system(rng, nvars: int, big: bool = False):
    """A box-bounded random system (pointed and bounded, oracle-friendly)."""
    s = LinearSystem()
    names = [s.add_variable(f"v{k}") for k in range(nvars)]
    for name in names:
        s.add_constraint({name: 1}, "<=", F(rng.randint(1, 4)), tag=f"box:{name}")
    extra = rng.randint(0, 2 if big else 3)
    for k in range(extra):
        coeffs = {
            name: F(rng.randint(-3, 3)) for name in names if rng.random() < 0.8
        }
        coeffs = {k2: v for k2, v in coeffs.items() if v}
        if not coeffs:
            continue
        rel = rng.choice(["<=", ">=", "="])
        s.add_constraint(
            coeffs, rel, F(rng.randint(-4, 6), rng.randint(1, 3)), tag=f"c{k}"
        )
    obj = (
        rng.choice(["max", "min"]),
        {name: F(rng.randint(-3, 3)) for name in names},
    )
    return s, obj


# ---------------------------------------------------------------------------
# Brute-force dominance search
# ---------------------------------------------------------------------------


def _dominates(q_rows, p: AssignmentMatrix, profile: Profile) -> bool:
    strict = False
    for i, pref in enumerate(profile):
        qq = class_prefix_sums(q_rows[i], pref)
        pp = class_prefix_sums(p.rows[i], pref)
        for a, b in zip(qq, pp):
            if a < b:
                return False
            if a > b:
                strict = True
    return strict


def grid_dominator(
    p: AssignmentMatrix, profile: Profile, denominator: int
):
    """Search lotteries over all n! permutations with weights on the
    1/denominator grid for a matrix that stochastically dominates ``p``.

    Complete for dominators whose entries have denominators dividing the
    grid (every such doubly stochastic matrix is a grid lottery).
    """
    n = p.n
    perms = list(itertools.permutations(range(n)))
    matrices = []
    for perm in perms:
        rows = [[F(0)] * n for _ in range(n)]
        for i, j in enumerate(perm):
            rows[i][j] = F(1)
        matrices.append(rows)
    unit = F(1, denominator)
    for combo in _compositions(denominator, len(perms)):
        q_rows = [[F(0)] * n for _ in range(n)]
        for k, count in enumerate(combo):
            if count == 0:
                continue
            wt = count * unit
            mk = matrices[k]
            for i in range(n):
                for j in range(n):
                    if mk[i][j]:
                        q_rows[i][j] += wt
        if _dominates(q_rows, p, profile):
            return AssignmentMatrix.from_rows(q_rows)
    return None


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def two_by_two_dominator(p: AssignmentMatrix, profile: Profile):
    """Exact dominance decision for 2x2 matrices.

    Doubly stochastic 2x2 matrices form the segment a -> [[a, 1-a], [1-a, a]];
    the dominating set is a subinterval computed exactly, so a strict
    dominator exists iff that interval contains more than the point for p.
    """
    a_p = p.rows[0][0]
    lo, hi = F(0), F(1)
    for i, pref in enumerate(profile):
        if pref.is_strict:
            # prefix at o1 of row i: a for agent 1, 1 - a for agent 2
            target = p.rows[i][0]
            if i == 0:
                lo = max(lo, target)
            else:
                hi = min(hi, 1 - target)
    if lo > hi:
        return None
    if lo == hi == a_p:
        return None
    a = hi if hi != a_p else lo
    return AssignmentMatrix.from_rows([[a, 1 - a], [1 - a, a]])
