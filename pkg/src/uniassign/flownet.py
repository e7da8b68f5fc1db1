"""Exact max-flow, bottleneck-set search, and interval transportation fills.

The networks here are tiny (at most 2n + 2 nodes), so max flow is plain
breadth-first augmentation over rational capacities.  The bottleneck search
finds, among subsets S of active agents, the minimum of
remaining-mass(C(S)) / |S| where C(S) is the union of best sets, and returns
the maximal minimizing subset; minimizers are closed under union, which is
asserted rather than assumed.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

from .core import ZERO, AssignmentMatrix, Profile, rat

Node = Hashable


class FlowNetwork:
    """A directed network with rational arc capacities and fixed endpoints."""

    def __init__(self, source: Node, sink: Node):
        self.source = source
        self.sink = sink
        self.adj: dict[Node, dict[Node, Fraction]] = {source: {}, sink: {}}

    def add_arc(self, u: Node, v: Node, capacity) -> None:
        capacity = rat(capacity)
        if capacity < 0:
            raise ValueError(f"negative capacity on arc {u}->{v}: {capacity}")
        self.adj.setdefault(u, {})
        self.adj.setdefault(v, {})
        self.adj[u][v] = self.adj[u].get(v, ZERO) + capacity

    @property
    def nodes(self) -> list[Node]:
        return list(self.adj)


def max_flow(net: FlowNetwork) -> tuple[Fraction, dict[tuple[Node, Node], Fraction]]:
    """Exact maximum flow via shortest augmenting paths.

    Returns the flow value and per-arc flows on the arcs of ``net``.
    Deterministic: neighbours are scanned in arc insertion order.
    """
    residual: dict[Node, dict[Node, Fraction]] = {u: {} for u in net.adj}
    for u, arcs in net.adj.items():
        for v, cap in arcs.items():
            residual[u][v] = residual[u].get(v, ZERO) + cap
            residual[v].setdefault(u, ZERO)

    s, t = net.source, net.sink
    if s not in residual or t not in residual:
        raise ValueError("network lacks source or sink")
    value = ZERO
    while True:
        parent: dict[Node, Node] = {s: s}
        q = deque([s])
        while q and t not in parent:
            u = q.popleft()
            for v, cap in residual[u].items():
                if cap > 0 and v not in parent:
                    parent[v] = u
                    q.append(v)
        if t not in parent:
            break
        path = []
        v = t
        while v != s:
            u = parent[v]
            path.append((u, v))
            v = u
        bottleneck = min(residual[u][v] for u, v in path)
        for u, v in path:
            residual[u][v] -= bottleneck
            residual[v][u] += bottleneck
        value += bottleneck

    flows: dict[tuple[Node, Node], Fraction] = {}
    for u, arcs in net.adj.items():
        for v, cap in arcs.items():
            used = cap - residual[u][v]
            flows[(u, v)] = used if used > 0 else ZERO
    return value, flows


def _residual_sink_side(
    residual: Mapping[Node, Mapping[Node, Fraction]], sink: Node
) -> set[Node]:
    """Nodes that can still reach the sink in the residual network."""
    reverse: dict[Node, list[Node]] = {u: [] for u in residual}
    for u, arcs in residual.items():
        for v, cap in arcs.items():
            if cap > 0:
                reverse.setdefault(v, []).append(u)
    seen = {sink}
    q = deque([sink])
    while q:
        v = q.popleft()
        for u in reverse.get(v, ()):
            if u not in seen:
                seen.add(u)
                q.append(u)
    return seen


@dataclass(frozen=True)
class BottleneckResult:
    """The minimum claim ratio with its maximal minimizing agent set."""

    ratio: Fraction
    agents: tuple[Hashable, ...]
    objects: tuple[Hashable, ...]


def _claim_mass(
    subset: Iterable[Hashable],
    best_sets: Mapping[Hashable, Sequence[Hashable]],
    remaining: Mapping[Hashable, Fraction],
) -> tuple[Fraction, frozenset]:
    objs = frozenset(o for a in subset for o in best_sets[a])
    return sum((remaining[o] for o in objs), ZERO), objs

def _validate_stage(agents, best_sets, remaining) -> None:
    for a in agents:
        best = list(best_sets[a])
        assert best, f"agent {a} has an empty best set (internal bug)"
        for o in best:
            assert remaining[o] > 0, (
                f"agent {a} claims exhausted object {o} (internal bug)"
            )


def _bottleneck_enumerate(agents, best_sets, remaining) -> BottleneckResult:
    agents = sorted(agents)
    k = len(agents)
    if k > 20:
        raise ValueError(f"subset enumeration guard exceeded: {k} agents")
    best_ratio: Fraction | None = None
    minimizers: list[frozenset] = []
    for mask in range(1, 1 << k):
        subset = [agents[i] for i in range(k) if mask >> i & 1]
        mass, _ = _claim_mass(subset, best_sets, remaining)
        ratio = mass / len(subset)
        if best_ratio is None or ratio < best_ratio:
            best_ratio = ratio
            minimizers = [frozenset(subset)]
        elif ratio == best_ratio:
            minimizers.append(frozenset(subset))
    star: frozenset = frozenset().union(*minimizers)
    mass, objs = _claim_mass(star, best_sets, remaining)
    assert mass == best_ratio * len(star), "minimizers not closed under union"
    return BottleneckResult(
        ratio=best_ratio, agents=tuple(sorted(star)), objects=tuple(sorted(objs))
    )


def _bottleneck_parametric(agents, best_sets, remaining) -> BottleneckResult:
    agents = sorted(agents)
    total = sum((remaining[o] for o in remaining), ZERO)
    big = total + 1
    lam, _ = _claim_mass(agents, best_sets, remaining)
    lam /= len(agents)

    def solve(lam: Fraction):
        net = FlowNetwork("s", "t")
        for a in agents:
            net.add_arc("s", ("a", a), lam)
            for o in best_sets[a]:
                net.add_arc(("a", a), ("o", o), big)
        objs = {o for a in agents for o in best_sets[a]}
        for o in sorted(objs):
            net.add_arc(("o", o), "t", remaining[o])
        # replicate max_flow but keep the residual for the cut extraction
        residual: dict[Node, dict[Node, Fraction]] = {u: {} for u in net.adj}
        for u, arcs in net.adj.items():
            for v, cap in arcs.items():
                residual[u][v] = residual[u].get(v, ZERO) + cap
                residual[v].setdefault(u, ZERO)
        value = ZERO
        while True:
            parent = {"s": "s"}
            q = deque(["s"])
            while q and "t" not in parent:
                u = q.popleft()
                for v, cap in residual[u].items():
                    if cap > 0 and v not in parent:
                        parent[v] = u
                        q.append(v)
            if "t" not in parent:
                break
            path = []
            v = "t"
            while v != "s":
                u = parent[v]
                path.append((u, v))
                v = u
            push = min(residual[u][v] for u, v in path)
            for u, v in path:
                residual[u][v] -= push
                residual[v][u] += push
            value += push
        return value, residual

    while True:
        value, residual = solve(lam)
        if value < lam * len(agents):
            # some subset is tighter than lam; read it off the min cut
            sink_side = _residual_sink_side(residual, "t")
            cut_agents = [a for a in agents if ("a", a) not in sink_side]
            assert cut_agents, "saturating cut without agents (internal bug)"
            mass, _ = _claim_mass(cut_agents, best_sets, remaining)
            new_lam = mass / len(cut_agents)
            assert new_lam < lam, "parametric search failed to decrease"
            lam = new_lam
            continue
        # lam is feasible for everyone: the maximal tight set is the
        # complement of the residual ancestors of the sink
        sink_side = _residual_sink_side(residual, "t")
        star = [a for a in agents if ("a", a) not in sink_side]
        assert star, "no tight set at the optimal ratio (internal bug)"
        mass, objs = _claim_mass(star, best_sets, remaining)
        assert mass == lam * len(star), "tight set mismatch (internal bug)"
        return BottleneckResult(
            ratio=lam, agents=tuple(sorted(star)), objects=tuple(sorted(objs))
        )


Slot = tuple[frozenset, Fraction]  # (object support, committed amount)


def _committed(past: Sequence[Slot], t: frozenset) -> Fraction:
    return sum((amt for sup, amt in past if sup <= t), ZERO)


def _tight_enumerate(masses, past, supports):
    objects = sorted(masses)
    if len(objects) > 16:
        raise ValueError(f"object-subset enumeration guard exceeded: {len(objects)}")
    best: Fraction | None = None
    minimizers: list[frozenset] = []
    for mask in range(1, 1 << len(objects)):
        t = frozenset(objects[k] for k in range(len(objects)) if mask >> k & 1)
        currents = sum(1 for sup in supports.values() if sup <= t)
        if currents == 0:
            continue
        ratio = (sum((masses[o] for o in t), ZERO) - _committed(past, t)) / currents
        if best is None or ratio < best:
            best, minimizers = ratio, [t]
        elif ratio == best:
            minimizers.append(t)
    star: frozenset = frozenset().union(*minimizers)
    currents = sum(1 for sup in supports.values() if sup <= star)
    mass = sum((masses[o] for o in star), ZERO)
    assert mass - _committed(past, star) == best * currents, (
        "tight object sets not closed under union"
    )
    return best, star


def _tight_parametric(masses, past, supports):
    slots: list[tuple[Hashable, frozenset, Fraction | None]] = []
    for k, (sup, amt) in enumerate(past):
        slots.append((("p", k), sup, amt))
    agents = sorted(supports)
    for a in agents:
        slots.append((("c", a), supports[a], None))
    total_mass = sum(masses.values(), ZERO)
    big = total_mass + 1

    def residual_at(ell: Fraction):
        adj: dict[Hashable, dict[Hashable, Fraction]] = {"s": {}, "t": {}}

        def add(u, v, cap):
            adj.setdefault(u, {})
            adj.setdefault(v, {})
            adj[u][v] = adj[u].get(v, ZERO) + cap
            adj[v].setdefault(u, ZERO)

        required = ZERO
        for node, sup, amt in slots:
            cap = ell if amt is None else amt
            required += cap
            add("s", node, cap)
            for o in sorted(sup):
                add(node, ("o", o), big)
        for o in sorted(masses):
            add(("o", o), "t", masses[o])
        value = ZERO
        while True:
            parent = {"s": "s"}
            q = deque(["s"])
            while q and "t" not in parent:
                u = q.popleft()
                for v, cap in adj[u].items():
                    if cap > 0 and v not in parent:
                        parent[v] = u
                        q.append(v)
            if "t" not in parent:
                break
            path = []
            v = "t"
            while v != "s":
                u = parent[v]
                path.append((u, v))
                v = u
            push = min(adj[u][v] for u, v in path)
            for u, v in path:
                adj[u][v] -= push
                adj[v][u] += push
            value += push
        return value, required, adj

    # start from the ratio of the whole object set, then cut downward
    currents_all = len(agents)
    ell = (total_mass - _committed(past, frozenset(masses))) / currents_all
    while True:
        value, required, residual = residual_at(ell)
        if value == required:
            break
        reachable = {"s"}
        q = deque(["s"])
        while q:
            u = q.popleft()
            for v, cap in residual[u].items():
                if cap > 0 and v not in reachable:
                    reachable.add(v)
                    q.append(v)
        t_cut = frozenset(o for o in masses if ("o", o) in reachable)
        currents = sum(1 for sup in supports.values() if sup <= t_cut)
        assert currents > 0, "past-only Hall violation (internal bug)"
        new_ell = (
            sum((masses[o] for o in t_cut), ZERO) - _committed(past, t_cut)
        ) / currents
        assert new_ell < ell, "parametric search failed to decrease"
        ell = new_ell
    sink_side = _residual_sink_side(residual, "t")
    star = frozenset(o for o in masses if ("o", o) not in sink_side)
    currents = sum(1 for sup in supports.values() if sup <= star)
    assert currents > 0, "no current slot stalls at the optimum (internal bug)"
    mass = sum((masses[o] for o in star), ZERO)
    assert mass - _committed(past, star) == ell * currents, "tight set mismatch"
    return ell, star


def find_bottleneck_committed(
    masses: Mapping[Hashable, Fraction],
    past: Sequence[Slot],
    supports: Mapping[Hashable, frozenset],
    engine: str = "parametric",
) -> tuple[Fraction, frozenset]:
    """Stage length and maximal tight object set under deferred accounting.

    ``past`` carries consumption already promised to earlier best sets but
    not yet attributed to specific objects; a set of objects is exhausted
    when its mass equals the committed amounts confined to it plus an equal
    share for every agent whose current best set it contains.  Returns the
    minimum such share and the largest saturated object set.
    """
    for a, sup in supports.items():
        assert sup and sup <= set(masses), f"agent {a} has a bad support"
    if engine == "parametric":
        return _tight_parametric(masses, past, supports)
    if engine == "enumerate":
        return _tight_enumerate(masses, past, supports)
    if engine == "both":
        a = _tight_parametric(masses, past, supports)
        b = _tight_enumerate(masses, past, supports)
        assert a == b, f"committed bottleneck engines disagree: {a} vs {b}"
        return a
    raise ValueError(f"unknown engine {engine!r}")


def find_bottleneck(
    agents: Sequence[Hashable],
    best_sets: Mapping[Hashable, Sequence[Hashable]],
    remaining: Mapping[Hashable, Fraction],
    engine: str = "parametric",
) -> BottleneckResult:
    """Minimum of remaining(C(S))/|S| with the maximal minimizing S.

    ``engine`` selects the parametric max-flow search, plain subset
    enumeration, or ``both`` (cross-validated, used by the test suite).
    """
    if not agents:
        raise ValueError("no active agents")
    _validate_stage(agents, best_sets, remaining)
    if engine == "parametric":
        return _bottleneck_parametric(agents, best_sets, remaining)
    if engine == "enumerate":
        return _bottleneck_enumerate(agents, best_sets, remaining)
    if engine == "both":
        a = _bottleneck_parametric(agents, best_sets, remaining)
        b = _bottleneck_enumerate(agents, best_sets, remaining)
        assert a == b, f"bottleneck engines disagree: {a} vs {b}"
        return a
    raise ValueError(f"unknown engine {engine!r}")


# ---------------------------------------------------------------------------
# Interval transportation fills.
#
# Supplies sit on consecutive column intervals, so Hall's condition reduces
# to consecutive intervals of columns: a set of columns decomposes into
# maximal runs, and any supply interval inside the set lies inside one run.
# ---------------------------------------------------------------------------


IntervalSupply = tuple[int, int, Fraction]  # (lo, hi, amount), inclusive 0-based


def _interval_feasible(supplies: Sequence[IntervalSupply], caps: Sequence[Fraction]) -> bool:
    m = len(caps)
    prefix = [ZERO]
    for c in caps:
        prefix.append(prefix[-1] + c)
    for l in range(m):
        for r in range(l, m):
            demand = sum(
                (amt for lo, hi, amt in supplies if l <= lo and hi <= r), ZERO
            )
            if demand > prefix[r + 1] - prefix[l]:
                return False
    return True


def lexicographic_fill(
    supplies: Sequence[IntervalSupply], caps: Sequence[Fraction]
) -> list[list[Fraction]]:
    """Greedy transportation fill, lexicographic in (supply order, column).

    Each supply is pushed onto the lowest-indexed columns of its interval,
    each time taking the largest amount that keeps the remaining problem
    feasible.  Feasibility is tracked through interval slacks: assigning to
    a column only tightens intervals that contain the column but not the
    whole supply interval.
    """
    caps = [rat(c) for c in caps]
    supplies = [(lo, hi, rat(a)) for lo, hi, a in supplies]
    m = len(caps)
    for lo, hi, amt in supplies:
        if not (0 <= lo <= hi < m):
            raise ValueError(f"supply interval ({lo},{hi}) out of range")
        if amt < 0:
            raise ValueError("negative supply")
    if not _interval_feasible(supplies, caps):
        raise ValueError("transportation instance is infeasible")

    remaining = [amt for _, _, amt in supplies]
    out = [[ZERO] * m for _ in supplies]
    for idx, (lo, hi, _) in enumerate(supplies):
        for col in range(lo, hi + 1):
            if remaining[idx] == 0:
                break
            if caps[col] == 0:
                continue
            delta = min(remaining[idx], caps[col])
            # tightest interval through col that does not contain [lo, hi]
            for l in range(col + 1):
                for r in range(col, m):
                    if l <= lo and hi <= r:
                        continue
                    cap_sum = sum(caps[l : r + 1], ZERO)
                    demand = sum(
                        (
                            remaining[k]
                            for k, (klo, khi, _) in enumerate(supplies)
                            if k != idx and l <= klo and khi <= r
                        ),
                        ZERO,
                    )
                    slack = cap_sum - demand
                    if slack < delta:
                        delta = slack
            if delta > 0:
                out[idx][col] = delta
                caps[col] -= delta
                remaining[idx] -= delta
    for idx, left in enumerate(remaining):
        assert left == 0, f"supply {idx} not exhausted (fill bug): {left} left"
    return out


def canonical_matrix(
    profile: Profile, class_masses: Sequence[Sequence[Fraction]]
) -> AssignmentMatrix:
    """Deterministic doubly stochastic representative of a class-mass vector.

    Agents are processed in label order, classes in preference order, and
    each class mass is pushed onto its lowest-indexed objects subject to
    column feasibility.  Equivalent matrices therefore canonicalize to the
    same representative.
    """
    n = profile.n
    supplies: list[IntervalSupply] = []
    owners: list[int] = []
    for i, pref in enumerate(profile):
        masses = class_masses[i]
        intervals = pref.class_intervals
        if len(masses) != len(intervals):
            raise ValueError(f"agent {i + 1} has {len(masses)} class masses")
        for (lo, hi), amt in zip(intervals, masses):
            supplies.append((lo - 1, hi - 1, rat(amt)))
            owners.append(i)
    fill = lexicographic_fill(supplies, [Fraction(1)] * n)
    rows = [[ZERO] * n for _ in range(n)]
    for owner, alloc in zip(owners, fill):
        for j, amt in enumerate(alloc):
            rows[owner][j] += amt
    return AssignmentMatrix.from_rows(rows)
