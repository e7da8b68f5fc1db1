"""Lotteries over matchings: Birkhoff-von Neumann style decompositions.

``bvn_decompose`` peels perfect matchings off the positive support of a
doubly stochastic matrix; ``pe_decompose`` restricts the support to
Pareto-efficient matchings by reusing the ex-post efficiency checker's hull
weights.  Both recombine to the input with exact rational equality.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .axioms import HullInfeasibility, ex_post_efficient
from .core import ZERO, AssignmentMatrix, Matching, Profile


@dataclass(frozen=True)
class Lottery:
    """Positive weights on matchings, summing to one."""

    entries: tuple[tuple[Fraction, Matching], ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("empty lottery")
        total = sum((w for w, _ in self.entries), ZERO)
        if total != 1:
            raise ValueError(f"weights sum to {total}, not 1")
        for w, _ in self.entries:
            if w <= 0:
                raise ValueError(f"non-positive weight {w}")

    def matrix(self) -> AssignmentMatrix:
        n = self.entries[0][1].n
        rows = [[ZERO] * n for _ in range(n)]
        for w, m in self.entries:
            for i in range(n):
                rows[i][m.assignment[i]] += w
        return AssignmentMatrix.from_rows(rows)

    def __len__(self) -> int:
        return len(self.entries)


def _lex_perfect_matching(support: list[list[bool]]) -> list[int] | None:
    """Lexicographically smallest perfect matching on a 0/1 support."""
    n = len(support)

    def feasible(row: int, used: set[int]) -> bool:
        # Kuhn's algorithm on the remaining rows/columns
        match: dict[int, int] = {}

        def try_row(r: int, seen: set[int]) -> bool:
            for c in range(n):
                if c in used or not support[r][c] or c in seen:
                    continue
                seen.add(c)
                if c not in match or try_row(match[c], seen):
                    match[c] = r
                    return True
            return False

        for r in range(row, n):
            if not try_row(r, set()):
                return False
        return True

    used: set[int] = set()
    out: list[int] = []
    for r in range(n):
        chosen = -1
        for c in range(n):
            if c in used or not support[r][c]:
                continue
            used.add(c)
            if feasible(r + 1, used):
                chosen = c
                break
            used.remove(c)
        if chosen < 0:
            return None
        out.append(chosen)
    return out


def bvn_decompose(p: AssignmentMatrix) -> Lottery:
    """Peel a lottery out of ``p``: repeatedly remove the minimum entry along
    the lexicographically smallest matching in the positive support.

    Deterministic; at most n^2 - 2n + 2 entries.
    """
    n = p.n
    residual = [list(row) for row in p.rows]
    left = Fraction(1)
    entries: list[tuple[Fraction, Matching]] = []
    max_entries = n * n - 2 * n + 2
    while left > 0:
        support = [[residual[i][j] > 0 for j in range(n)] for i in range(n)]
        perm = _lex_perfect_matching(support)
        assert perm is not None, "doubly stochastic residual lost its matching"
        theta = min(residual[i][perm[i]] for i in range(n))
        assert theta > 0
        entries.append((theta, Matching(assignment=tuple(perm))))
        for i in range(n):
            residual[i][perm[i]] -= theta
        left -= theta
        assert len(entries) <= max_entries, "Birkhoff bound exceeded"
    assert all(x == 0 for row in residual for x in row)
    return Lottery(entries=tuple(entries))


def pe_decompose(p: AssignmentMatrix, profile: Profile):
    """Lottery supported on Pareto-efficient matchings, or the Farkas
    certificate showing none exists.

    Returns a :class:`Lottery` when ``p`` is ex-post efficient and the
    :class:`HullInfeasibility` certificate otherwise.
    """
    verdict = ex_post_efficient(p, profile)
    if not verdict.holds:
        assert isinstance(verdict.certificate, HullInfeasibility)
        return verdict.certificate
    lottery = Lottery(entries=verdict.certificate.entries)
    assert lottery.matrix().rows == p.rows, "PE lottery fails to recombine"
    return lottery
