"""Exact rational linear programming over small dense systems.

A dense two-phase simplex with Bland's anti-cycling rule.  Everything is a
``fractions.Fraction``: optima are exact, witnesses satisfy constraints with
rational equality, and infeasibility comes with Farkas multipliers that are
re-verified by multiplication before being returned.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import ZERO, Rational, rat

RELATIONS = ("=", "<=", ">=")


@dataclass(frozen=True)
class Constraint:
    """A single linear constraint with a justification tag."""

    coeffs: tuple[tuple[str, Fraction], ...]
    rel: str
    rhs: Fraction
    tag: str = ""

    @classmethod
    def make(cls, coeffs: Mapping[str, object], rel: str, rhs, tag: str = "") -> "Constraint":
        if rel not in RELATIONS:
            raise ValueError(f"unknown relation {rel!r}")
        items = tuple(
            (name, rat(value)) for name, value in coeffs.items() if rat(value) != 0
        )
        return cls(coeffs=items, rel=rel, rhs=rat(rhs), tag=tag)

    def coeff_map(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def evaluate(self, point: Mapping[str, Fraction]) -> Fraction:
        return sum((c * point[name] for name, c in self.coeffs), ZERO)

    def satisfied_by(self, point: Mapping[str, Fraction]) -> bool:
        lhs = self.evaluate(point)
        if self.rel == "=":
            return lhs == self.rhs
        if self.rel == "<=":
            return lhs <= self.rhs
        return lhs >= self.rhs


class LinearSystem:
    """Named variables, tagged constraints and an optional objective."""

    def __init__(self) -> None:
        self._nonneg: dict[str, bool] = {}
        self.constraints: list[Constraint] = []
        self.objective: tuple[str, dict[str, Fraction]] | None = None

    # -- construction ------------------------------------------------------
    def add_variable(self, name: str, nonneg: bool = True) -> str:
        if name in self._nonneg:
            raise ValueError(f"variable {name!r} already declared")
        self._nonneg[name] = nonneg
        return name

    def add_constraint(
        self, coeffs: Mapping[str, object], rel: str, rhs, tag: str = ""
    ) -> Constraint:
        con = Constraint.make(coeffs, rel, rhs, tag)
        for name, _ in con.coeffs:
            if name not in self._nonneg:
                raise ValueError(f"constraint uses undeclared variable {name!r}")
        self.constraints.append(con)
        return con

    def set_objective(self, sense: str, coeffs: Mapping[str, object]) -> None:
        if sense not in ("max", "min"):
            raise ValueError(f"objective sense must be max or min, got {sense!r}")
        for name in coeffs:
            if name not in self._nonneg:
                raise ValueError(f"objective uses undeclared variable {name!r}")
        self.objective = (sense, {k: rat(v) for k, v in coeffs.items()})

    # -- introspection ------------------------------------------------------
    @property
    def variables(self) -> list[str]:
        return list(self._nonneg)

    def is_nonneg(self, name: str) -> bool:
        return self._nonneg[name]

    def copy(self) -> "LinearSystem":
        out = LinearSystem()
        out._nonneg = dict(self._nonneg)
        out.constraints = list(self.constraints)
        out.objective = None if self.objective is None else (
            self.objective[0],
            dict(self.objective[1]),
        )
        return out


@dataclass(frozen=True)
class CertificateEntry:
    """One Farkas multiplier, keyed by constraint index and tag."""

    index: int
    tag: str
    multiplier: Fraction


@dataclass(frozen=True)
class LpOutcome:
    status: str  # optimal | infeasible | unbounded
    value: Fraction | None = None
    witness: dict[str, Fraction] | None = None
    certificate: tuple[CertificateEntry, ...] | None = None


class InfeasibleError(ValueError):
    """An operation needed a feasible system; carries the Farkas certificate."""

    def __init__(self, certificate: tuple[CertificateEntry, ...]):
        super().__init__("system is infeasible")
        self.certificate = certificate


def verify_infeasibility_certificate(
    system: LinearSystem, entries: Sequence[CertificateEntry]
) -> bool:
    """Re-multiply a Farkas certificate and check it derives a contradiction.

    The combination sum_i mu_i * (a_i . x  rel_i  b_i), with mu <= 0 on
    "<=" rows and mu >= 0 on ">=" rows, must produce combined coefficients
    that are <= 0 on nonnegative variables (zero on free ones) while the
    combined right-hand side is strictly positive.
    """
    combined: dict[str, Fraction] = {}
    rhs = ZERO
    for entry in entries:
        con = system.constraints[entry.index]
        mu = entry.multiplier
        if con.rel == "<=" and mu > 0:
            return False
        if con.rel == ">=" and mu < 0:
            return False
        for name, c in con.coeffs:
            combined[name] = combined.get(name, ZERO) + mu * c
        rhs += mu * con.rhs
    if rhs <= 0:
        return False
    for name, c in combined.items():
        if system.is_nonneg(name):
            if c > 0:
                return False
        elif c != 0:
            return False
    return True


# ---------------------------------------------------------------------------
# Simplex internals
# ---------------------------------------------------------------------------


class _Tableau:
    def __init__(self, system: LinearSystem):
        self.system = system
        # column layout: structural columns first (one per nonneg variable,
        # two per free variable), then slacks, then artificials
        self.col_of: dict[str, int] = {}
        self.neg_col_of: dict[str, int] = {}
        ncols = 0
        for name in system.variables:
            self.col_of[name] = ncols
            ncols += 1
            if not system.is_nonneg(name):
                self.neg_col_of[name] = ncols
                ncols += 1
        self.nstruct = ncols

        m = len(system.constraints)
        rows: list[list[Fraction]] = []
        rhs: list[Fraction] = []
        sigma: list[int] = []
        slack_col: list[int | None] = []
        for con in system.constraints:
            row = [ZERO] * ncols
            for name, c in con.coeffs:
                row[self.col_of[name]] += c
                if name in self.neg_col_of:
                    row[self.neg_col_of[name]] -= c
            rows.append(row)
            rhs.append(con.rhs)
            sigma.append(1)
            slack_col.append(None)

        # one slack per inequality
        for i, con in enumerate(system.constraints):
            if con.rel == "=":
                continue
            col = ncols
            ncols += 1
            for row in rows:
                row.append(ZERO)
            rows[i][col] = Fraction(1) if con.rel == "<=" else Fraction(-1)
            slack_col[i] = col
        self.nslack_end = ncols

        # normalize nonnegative right-hand sides
        for i in range(m):
            if rhs[i] < 0:
                rows[i] = [-x for x in rows[i]]
                rhs[i] = -rhs[i]
                sigma[i] = -1

        # initial basis: a +1 slack when available, otherwise an artificial
        basis: list[int] = []
        init_col: list[int] = []
        self.artificials: list[int] = []
        for i in range(m):
            sc = slack_col[i]
            if sc is not None and rows[i][sc] == 1:
                basis.append(sc)
                init_col.append(sc)
                continue
            col = ncols
            ncols += 1
            for row in rows:
                row.append(ZERO)
            rows[i][col] = Fraction(1)
            self.artificials.append(col)
            basis.append(col)
            init_col.append(col)

        self.rows = rows
        self.rhs = rhs
        self.sigma = sigma
        self.basis = basis
        self.init_col = init_col
        self.ncols = ncols
        self.art_set = set(self.artificials)

    # -- pivoting -----------------------------------------------------------
    def pivot(self, r: int, c: int) -> None:
        rows, rhs = self.rows, self.rhs
        prow = rows[r]
        piv = prow[c]
        if piv != 1:
            inv = 1 / piv
            rows[r] = prow = [x * inv for x in prow]
            rhs[r] *= inv
        nz = [(j, x) for j, x in enumerate(prow) if x != 0]
        for k in range(len(rows)):
            if k == r:
                continue
            f = rows[k][c]
            if f != 0:
                rowk = rows[k]
                for j, x in nz:
                    rowk[j] -= f * x
                rhs[k] -= f * rhs[r]
        self.basis[r] = c

    def _reduced_costs(self, costs: list[Fraction]) -> tuple[list[Fraction], Fraction]:
        z = list(costs)
        val = ZERO
        for r, bc in enumerate(self.basis):
            cb = costs[bc]
            if cb != 0:
                row = self.rows[r]
                for j in range(self.ncols):
                    if row[j] != 0:
                        z[j] -= cb * row[j]
                val += cb * self.rhs[r]
        return z, val

    def minimize(self, costs: list[Fraction], forbidden: set[int]) -> str:
        """Bland's-rule simplex; returns 'optimal' or 'unbounded'."""
        z, _ = self._reduced_costs(costs)
        while True:
            enter = -1
            for j in range(self.ncols):
                if j not in forbidden and z[j] < 0:
                    enter = j
                    break
            if enter < 0:
                return "optimal"
            leave = -1
            best: Fraction | None = None
            for r in range(len(self.rows)):
                a = self.rows[r][enter]
                if a > 0:
                    ratio = self.rhs[r] / a
                    if best is None or ratio < best or (
                        ratio == best and self.basis[r] < self.basis[leave]
                    ):
                        best = ratio
                        leave = r
            if leave < 0:
                return "unbounded"
            self.pivot(leave, enter)
            # update reduced costs from the pivot row
            zc = z[enter]
            prow = self.rows[leave]
            for j in range(self.ncols):
                if prow[j] != 0:
                    z[j] -= zc * prow[j]
            z[enter] = ZERO
        # not reached

    def objective_value(self, costs: list[Fraction]) -> Fraction:
        return sum(
            (costs[bc] * self.rhs[r] for r, bc in enumerate(self.basis) if costs[bc] != 0),
            ZERO,
        )

    def drop_row(self, r: int) -> None:
        del self.rows[r]
        del self.rhs[r]
        del self.basis[r]
        del self.sigma[r]
        del self.init_col[r]

    def drive_out_artificials(self) -> None:
        r = 0
        while r < len(self.rows):
            if self.basis[r] in self.art_set:
                assert self.rhs[r] == 0, "basic artificial with positive value"
                target = -1
                for j in range(self.ncols):
                    if j not in self.art_set and self.rows[r][j] != 0:
                        target = j
                        break
                if target < 0:
                    self.drop_row(r)  # redundant constraint
                    continue
                self.pivot(r, target)
            r += 1

    def solution(self) -> dict[int, Fraction]:
        values: dict[int, Fraction] = {}
        for r, bc in enumerate(self.basis):
            values[bc] = self.rhs[r]
        return values


def _extract_farkas(tab: _Tableau, cost1: list[Fraction]) -> tuple[CertificateEntry, ...]:
    """Dual multipliers from the optimal phase-1 basis."""
    entries = []
    for i in range(len(tab.rows)):
        y_i = ZERO
        col = tab.init_col[i]
        for r, bc in enumerate(tab.basis):
            cb = cost1[bc]
            if cb != 0 and tab.rows[r][col] != 0:
                y_i += cb * tab.rows[r][col]
        mu = tab.sigma[i] * y_i
        if mu != 0:
            con = tab.system.constraints[i]
            entries.append(CertificateEntry(index=i, tag=con.tag, multiplier=mu))
    return tuple(entries)


def lp_solve(
    system: LinearSystem,
    objective: tuple[str, Mapping[str, object]] | None = None,
) -> LpOutcome:
    """Exact optimum, or infeasibility with a checked Farkas certificate.

    With no objective (neither here nor on the system) this is a pure
    feasibility solve.  Deterministic for a fixed declaration order.
    """
    if objective is None:
        objective = system.objective
    if objective is None:
        objective = ("max", {})
    sense, obj_coeffs = objective
    obj_coeffs = {k: rat(v) for k, v in obj_coeffs.items()}
    for name in obj_coeffs:
        if name not in system._nonneg:
            raise ValueError(f"objective uses undeclared variable {name!r}")

    tab = _Tableau(system)

    # phase 1: minimize the artificial mass
    cost1 = [ZERO] * tab.ncols
    for c in tab.artificials:
        cost1[c] = Fraction(1)
    status = tab.minimize(cost1, forbidden=set())
    assert status == "optimal", "phase 1 cannot be unbounded"
    if tab.objective_value(cost1) > 0:
        entries = _extract_farkas(tab, cost1)
        assert verify_infeasibility_certificate(system, entries), (
            "extracted Farkas certificate failed re-verification"
        )
        return LpOutcome(status="infeasible", certificate=entries)

    tab.drive_out_artificials()

    # phase 2
    cost2 = [ZERO] * tab.ncols
    for name, c in obj_coeffs.items():
        c2 = -c if sense == "max" else c
        cost2[tab.col_of[name]] += c2
        if name in tab.neg_col_of:
            cost2[tab.neg_col_of[name]] -= c2
    status = tab.minimize(cost2, forbidden=tab.art_set)
    if status == "unbounded":
        return LpOutcome(status="unbounded")

    col_values = tab.solution()
    witness: dict[str, Fraction] = {}
    for name in system.variables:
        v = col_values.get(tab.col_of[name], ZERO)
        if name in tab.neg_col_of:
            v -= col_values.get(tab.neg_col_of[name], ZERO)
        witness[name] = v
    for con in system.constraints:
        assert con.satisfied_by(witness), (
            f"witness violates constraint {con.tag or con} (solver bug)"
        )
    value = sum((c * witness[name] for name, c in obj_coeffs.items()), ZERO)
    return LpOutcome(status="optimal", value=value, witness=witness)


def functional_range(
    system: LinearSystem, coeffs: Mapping[str, object]
) -> tuple[Fraction, Fraction]:
    """Exact (min, max) of a linear functional over the feasible region."""
    lo = lp_solve(system, objective=("min", coeffs))
    if lo.status == "infeasible":
        raise InfeasibleError(lo.certificate)
    if lo.status == "unbounded":
        raise ValueError("functional unbounded below")
    hi = lp_solve(system, objective=("max", coeffs))
    if hi.status == "unbounded":
        raise ValueError("functional unbounded above")
    return lo.value, hi.value


def coordinate_range(system: LinearSystem, var: str) -> tuple[Fraction, Fraction]:
    """Exact (min, max) of one variable over the feasible region."""
    if var not in system._nonneg:
        raise ValueError(f"unknown variable {var!r}")
    return functional_range(system, {var: 1})
