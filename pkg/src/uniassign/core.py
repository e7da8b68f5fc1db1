"""Domain types for random assignment under uniform weak preferences.

All agents rank the objects o_1, o_2, ..., o_n in the same fixed order and
differ only in how they split that order into consecutive indifference
classes.  Every quantity in this package is an exact rational
(``fractions.Fraction``); floats are never used, so equality tests and the
certified pipelines built on top of these types are bit-exact.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence, Union

#: The only numeric scalar in the system.  Always in canonical form
#: (positive denominator, reduced), courtesy of ``fractions.Fraction``.
Rational = Fraction

RationalLike = Union[Fraction, int, str]


def rat(value: RationalLike) -> Fraction:
    """Coerce an int, ``a/b`` string or Fraction to an exact Rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class UniformPreference:
    """A weak order on o_1 ... o_n made of consecutive indifference classes.

    ``boundaries`` lists the last object index of each class, so the
    preference ``o1, {o2 o3}, o4`` is stored as ``(1, 3, 4)``.  Boundaries
    are strictly increasing and end at ``n``, which makes classes
    consecutive, non-empty, disjoint and covering.
    """

    n: int
    boundaries: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need at least one object, got n={self.n}")
        b = tuple(self.boundaries)
        object.__setattr__(self, "boundaries", b)
        if not b or b[-1] != self.n:
            raise ValueError(f"boundaries must end at n={self.n}: {b}")
        prev = 0
        for x in b:
            if not isinstance(x, int) or x <= prev:
                raise ValueError(f"boundaries must be strictly increasing: {b}")
            prev = x

    @classmethod
    def from_classes(cls, classes: Sequence[Sequence[int]]) -> "UniformPreference":
        """Build from explicit classes like ``[[1], [2, 3], [4]]`` (1-based)."""
        flat: list[int] = []
        boundaries: list[int] = []
        for k, group in enumerate(classes):
            group = list(group)
            if not group:
                raise ValueError(f"class {k + 1} is empty")
            if group != list(range(len(flat) + 1, len(flat) + len(group) + 1)):
                raise ValueError(
                    f"class {k + 1} = {group} breaks the common object order"
                )
            flat.extend(group)
            boundaries.append(flat[-1])
        return cls(n=len(flat), boundaries=tuple(boundaries))

    @classmethod
    def strict(cls, n: int) -> "UniformPreference":
        return cls(n=n, boundaries=tuple(range(1, n + 1)))

    @property
    def num_classes(self) -> int:
        return len(self.boundaries)

    @property
    def classes(self) -> tuple[tuple[int, ...], ...]:
        """Classes as tuples of 1-based object indices."""
        out = []
        lo = 1
        for hi in self.boundaries:
            out.append(tuple(range(lo, hi + 1)))
            lo = hi + 1
        return tuple(out)

    @property
    def class_intervals(self) -> tuple[tuple[int, int], ...]:
        """Each class as an inclusive 1-based index interval (lo, hi)."""
        out = []
        lo = 1
        for hi in self.boundaries:
            out.append((lo, hi))
            lo = hi + 1
        return tuple(out)

    def class_of(self, obj: int) -> int:
        """0-based index of the class containing object ``obj`` (1-based)."""
        if not 1 <= obj <= self.n:
            raise ValueError(f"object o{obj} out of range 1..{self.n}")
        for k, hi in enumerate(self.boundaries):
            if obj <= hi:
                return k
        raise AssertionError("unreachable")

    def same_class(self, a: int, b: int) -> bool:
        return self.class_of(a) == self.class_of(b)

    def strictly_prefers(self, a: int, b: int) -> bool:
        return self.class_of(a) < self.class_of(b)

    @property
    def is_strict(self) -> bool:
        return self.num_classes == self.n

    @property
    def has_deadline_form(self) -> bool:
        """True when every class but the last is a singleton."""
        return all(hi == k + 1 for k, hi in enumerate(self.boundaries[:-1]))

    def label(self) -> str:
        parts = []
        for group in self.classes:
            if len(group) == 1:
                parts.append(f"o{group[0]}")
            else:
                parts.append("{" + " ".join(f"o{j}" for j in group) + "}")
        return ",".join(parts)

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return self.label()


def enumerate_uniform_prefs(n: int) -> list[UniformPreference]:
    """All 2^(n-1) uniform preferences on n objects.

    Deterministic canonical order: lexicographic by boundary tuple, so the
    all-strict order comes first and the single-class order last.
    """
    if n < 1:
        raise ValueError(f"need at least one object, got n={n}")
    boundary_sets = []
    for r in range(n):
        for inner in itertools.combinations(range(1, n), r):
            boundary_sets.append(tuple(inner) + (n,))
    boundary_sets.sort()
    return [UniformPreference(n=n, boundaries=b) for b in boundary_sets]


@dataclass(frozen=True)
class Profile:
    """A square assignment problem: one uniform preference per agent."""

    prefs: tuple[UniformPreference, ...]

    def __post_init__(self) -> None:
        prefs = tuple(self.prefs)
        object.__setattr__(self, "prefs", prefs)
        if not prefs:
            raise ValueError("profile needs at least one agent")
        n = prefs[0].n
        for i, p in enumerate(prefs):
            if p.n != n:
                raise ValueError(
                    f"agent {i + 1} ranks {p.n} objects, expected {n}"
                )
        if len(prefs) != n:
            raise ValueError(
                f"{len(prefs)} agents for {n} objects; balance the problem "
                "with dummy agents or objects before building a profile"
            )

    @property
    def n(self) -> int:
        return self.prefs[0].n

    def __iter__(self):
        return iter(self.prefs)

    def __getitem__(self, agent: int) -> UniformPreference:
        return self.prefs[agent]

    def replaced(self, agent: int, pref: UniformPreference) -> "Profile":
        """Copy of the profile with one agent's report swapped out."""
        if pref.n != self.n:
            raise ValueError("replacement preference has wrong size")
        prefs = list(self.prefs)
        prefs[agent] = pref
        return Profile(prefs=tuple(prefs))

    def identical_pref_pairs(self) -> list[tuple[int, int]]:
        """Ordered pairs (i, j), i < j, of agents with identical preferences."""
        return [
            (i, j)
            for i in range(self.n)
            for j in range(i + 1, self.n)
            if self.prefs[i] == self.prefs[j]
        ]


Row = tuple[Fraction, ...]


def _coerce_row(row: Iterable[RationalLike]) -> Row:
    return tuple(rat(x) for x in row)


@dataclass(frozen=True)
class AssignmentMatrix:
    """A doubly stochastic matrix of exact rationals.

    Entry ``rows[i][j]`` is the probability that agent ``i+1`` receives
    object ``o_{j+1}``.  Row and column sums are validated to equal one
    exactly at construction time.
    """

    rows: tuple[Row, ...]

    def __post_init__(self) -> None:
        rows = tuple(_coerce_row(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows)
        if n == 0:
            raise ValueError("empty matrix")
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ValueError(f"row {i + 1} has length {len(row)}, expected {n}")
            for j, x in enumerate(row):
                if x < 0 or x > 1:
                    raise ValueError(f"entry ({i + 1},{j + 1}) = {x} outside [0, 1]")
            if sum(row) != 1:
                raise ValueError(f"row {i + 1} sums to {sum(row)}, not 1")
        for j in range(n):
            col = sum(row[j] for row in rows)
            if col != 1:
                raise ValueError(f"column {j + 1} sums to {col}, not 1")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[RationalLike]]) -> "AssignmentMatrix":
        return cls(rows=tuple(_coerce_row(r) for r in rows))

    @classmethod
    def uniform(cls, n: int) -> "AssignmentMatrix":
        w = Fraction(1, n)
        return cls(rows=tuple(tuple(w for _ in range(n)) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    def row(self, agent: int) -> Row:
        return self.rows[agent]

    def entry(self, agent: int, obj: int) -> Fraction:
        """1-based accessor matching the p[i][j] notation."""
        return self.rows[agent - 1][obj - 1]

    def class_masses(self, profile: Profile) -> tuple[tuple[Fraction, ...], ...]:
        """Per-agent mass on each of their indifference classes."""
        out = []
        for i, pref in enumerate(profile):
            row = self.rows[i]
            masses = []
            lo = 0
            for hi in pref.boundaries:
                masses.append(sum(row[lo:hi], ZERO))
                lo = hi
            out.append(tuple(masses))
        return tuple(out)

    def as_strings(self) -> list[list[str]]:
        return [[str(x) for x in row] for row in self.rows]


@dataclass(frozen=True)
class Matching:
    """A deterministic assignment: agent ``i`` gets object ``assignment[i]+1``."""

    assignment: tuple[int, ...]

    def __post_init__(self) -> None:
        a = tuple(self.assignment)
        object.__setattr__(self, "assignment", a)
        if sorted(a) != list(range(len(a))):
            raise ValueError(f"not a permutation of 0..{len(a) - 1}: {a}")

    @property
    def n(self) -> int:
        return len(self.assignment)

    def object_of(self, agent: int) -> int:
        """1-based object index assigned to 0-based ``agent``."""
        return self.assignment[agent] + 1

    def to_matrix(self) -> AssignmentMatrix:
        n = self.n
        rows = tuple(
            tuple(ONE if j == self.assignment[i] else ZERO for j in range(n))
            for i in range(n)
        )
        return AssignmentMatrix(rows=rows)


class SdOrder(Enum):
    """Outcome of comparing two rows in the stochastic-dominance order."""

    DOMINATES_STRICTLY = "dominates_strictly"
    DOMINATES_WEAKLY_EQUAL = "dominates_weakly_equal"
    INCOMPARABLE = "incomparable"
    DOMINATED = "dominated"


def class_prefix_sums(row: Sequence[Fraction], pref: UniformPreference) -> Row:
    """Cumulative row mass at each class boundary of ``pref``.

    The last value equals the full row sum; for an assignment-matrix row it
    is exactly one.
    """
    if len(row) != pref.n:
        raise ValueError(f"row length {len(row)} does not match n={pref.n}")
    out = []
    acc = ZERO
    lo = 0
    for hi in pref.boundaries:
        acc += sum(row[lo:hi], ZERO)
        out.append(acc)
        lo = hi
    return tuple(out)


def sd_compare(
    row_p: Sequence[Fraction], row_q: Sequence[Fraction], pref: UniformPreference
) -> SdOrder:
    """Compare two rows under ``pref``'s stochastic-dominance partial order.

    ``row_p`` dominates strictly when every class-prefix sum is at least the
    corresponding sum of ``row_q`` and at least one is larger; equal prefix
    vectors are weak dominance; opposite strict inequalities at different
    boundaries make the rows incomparable.
    """
    pp = class_prefix_sums(row_p, pref)
    qq = class_prefix_sums(row_q, pref)
    p_ahead = any(a > b for a, b in zip(pp, qq))
    q_ahead = any(a < b for a, b in zip(pp, qq))
    if p_ahead and q_ahead:
        return SdOrder.INCOMPARABLE
    if p_ahead:
        return SdOrder.DOMINATES_STRICTLY
    if q_ahead:
        return SdOrder.DOMINATED
    return SdOrder.DOMINATES_WEAKLY_EQUAL


def matrix_sd_dominates(p: AssignmentMatrix, q: AssignmentMatrix, profile: Profile) -> bool:
    """True iff every agent weakly prefers their row of ``p``, one strictly."""
    if p.n != q.n or p.n != profile.n:
        raise ValueError("size mismatch")
    some_strict = False
    for i, pref in enumerate(profile):
        verdict = sd_compare(p.rows[i], q.rows[i], pref)
        if verdict in (SdOrder.INCOMPARABLE, SdOrder.DOMINATED):
            return False
        if verdict is SdOrder.DOMINATES_STRICTLY:
            some_strict = True
    return some_strict


def assignments_equivalent(
    p: AssignmentMatrix, q: AssignmentMatrix, profile: Profile
) -> bool:
    """True iff every agent gets the same mass on each indifference class."""
    if p.n != q.n or p.n != profile.n:
        raise ValueError("size mismatch")
    return p.class_masses(profile) == q.class_masses(profile)
