"""Supervisor synthesis under partial observation.

The target language of every synthesis problem is ``E || Lm(G)``: the
specification recognizer synchronized with the plant. The partial-observation
supremal is computed against a fixed ambient ``C``. By default ``C`` is the
supremal controllable sublanguage of the target; ``ambient="target"`` selects
the target itself. Because ``C`` never shrinks, every removal found on the
way is necessary and the fixpoint is the supremal controllable, C-observable
element below ``C``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .automata import (
    AutomatonError,
    EventTable,
    Generator,
    ObservationMask,
    build,
    edit,
    is_nonblocking,
    language_equal,
    meet_states,
    minimize,
    sync,
    sync_states,
    trim,
    trim_states,
)


class SynthesisError(AutomatonError):
    """A synthesis precondition failed; ``witness`` carries the evidence."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class SynthesisProblem:
    plant: Generator
    spec: Generator
    mask: ObservationMask
    table: EventTable

    def __post_init__(self):
        extra = self.spec.alphabet - self.plant.alphabet
        if extra:
            raise SynthesisError(f"spec {self.spec.name} uses events {sorted(extra)} outside the plant")
        self.table.covers(self.plant)

    @classmethod
    def of(cls, plant: Generator, spec: Generator, table: EventTable) -> "SynthesisProblem":
        return cls(plant, spec, table.mask(), table)

    @property
    def uncontrollable(self) -> frozenset[int]:
        return self.table.uncontrollable & self.plant.alphabet

    @property
    def unobservable(self) -> frozenset[int]:
        return self.plant.alphabet - self.mask.observable


@dataclass(frozen=True)
class Verdict:
    """Outcome of a property check; falsy when the property fails."""

    holds: bool
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.holds


# --------------------------------------------------------------------------
# annotated recognizers: a generator plus the plant state behind each state


def _ambient(p: SynthesisProblem) -> tuple[Generator, list[int]]:
    """Trim recognizer of E || Lm(G) with the plant state of each of its states."""
    prod, tuples = sync_states([p.spec, p.plant], name=f"C({p.spec.name})")
    c, order = trim_states(prod)
    return c, [tuples[o][1] for o in order]


def ambient_language(p: SynthesisProblem, ambient: Generator | str = "controllable") -> tuple[Generator, list[int]]:
    """Trim recognizer of the ambient C with the plant state of each of its states."""
    f, f_plant = _ambient(p)
    if isinstance(ambient, Generator):
        prod, tuples = meet_states([ambient, p.plant])
        c, order = trim_states(prod)
        return c, [tuples[o][1] for o in order]
    if ambient == "target":
        return f, f_plant
    if ambient == "controllable":
        c, order = _prune(f, f_plant, p.plant, p.uncontrollable)
        return c, [f_plant[o] for o in order]
    raise SynthesisError(f"unknown ambient {ambient!r}")


def _prune(
    g: Generator,
    plant_of: list[int],
    plant: Generator,
    uncontrollable: frozenset[int],
) -> tuple[Generator, list[int]]:
    """Delete states that are not coreachable or admit a forbidden uncontrollable event.

    Returns the trimmed result and the old id behind each surviving state.
    """
    if g.is_empty:
        return g, []
    alive = set(range(g.state_count))
    delta, pdelta = g.delta, plant.delta
    markers = g.markers
    while True:
        bad = set()
        for x in alive:
            row = delta[x]
            for e in pdelta[plant_of[x]]:
                if e in uncontrollable:
                    t = row.get(e)
                    if t is None or t not in alive:
                        bad.add(x)
                        break
        alive -= bad
        # coreachability inside the surviving set
        back: dict[int, list[int]] = {}
        for x in alive:
            for t in delta[x].values():
                if t in alive:
                    back.setdefault(t, []).append(x)
        co = {x for x in alive if x in markers}
        stack = list(co)
        while stack:
            q = stack.pop()
            for r in back.get(q, ()):
                if r not in co:
                    co.add(r)
                    stack.append(r)
        # reachability from the initial state
        reach = set()
        if g.initial in co:
            reach.add(g.initial)
            stack = [g.initial]
            while stack:
                q = stack.pop()
                for t in delta[q].values():
                    if t in co and t not in reach:
                        reach.add(t)
                        stack.append(t)
        if reach == alive and not bad:
            break
        if not reach:
            return Generator.empty(g.name, g.alphabet), []
        alive = reach
    return edit(g, alive)


def _with_plant(k: Generator, plant: Generator) -> tuple[Generator, list[int], list[int]]:
    """Intersect ``k`` with ``plant``; returns the product, its k-states and plant-states."""
    prod, tuples = meet_states([k, plant], name=k.name)
    return prod, [t[0] for t in tuples], [t[1] for t in tuples]


def _rebase(k: Generator, c: Generator, c_plant: list[int]) -> tuple[Generator, list[int], list[int]]:
    """Minimize ``k`` and re-intersect with the ambient so states carry ambient/plant ids."""
    kmin = minimize(k)
    prod, tuples = meet_states([kmin, c], name=k.name)
    cm = [t[1] for t in tuples]
    return prod, cm, [c_plant[x] for x in cm]


# --------------------------------------------------------------------------
# property checks


def is_controllable(k: Generator, plant: Generator, table: EventTable) -> Verdict:
    """Closure of ``k`` followed by an uncontrollable plant event stays in the closure.

    Witness is ``(s, sigma)`` for the shortest violation.
    """
    if k.is_empty:
        return Verdict(True)
    unc = table.uncontrollable
    start = (k.initial, plant.initial)
    paths = {start: ()}
    queue = deque([start])
    kd, pd = k.delta, plant.delta
    while queue:
        x = queue.popleft()
        q, g = x
        s = paths[x]
        for e in sorted(set(kd[q]) | set(pd[g])):
            t, u = kd[q].get(e), pd[g].get(e)
            if u is None:
                if t is not None:
                    raise SynthesisError(f"{k.name} is not contained in L({plant.name})", s + (e,))
                continue
            if t is None:
                if e in unc:
                    return Verdict(False, (s, e))
                continue
            y = (t, u)
            if y not in paths:
                paths[y] = s + (e,)
                queue.append(y)
    return Verdict(True)


def check_relative_observability(
    k: Generator,
    ambient: Generator,
    plant: Generator,
    mask: ObservationMask,
) -> Verdict:
    """Decide C-observability of ``Lm(k)`` with C = ``Lm(ambient)``.

    Explores lookalike pairs ``(s, s')`` with ``s`` in the closure of K and
    ``s'`` in the closure of C: observable events move both sides, unobservable
    events move one side at a time. Witness is ``(s, s', sigma)`` for a
    transition violation or ``(s, s', None)`` for a marking violation.
    """
    if k.is_empty:
        return Verdict(True)
    k = trim(k)
    ambient = trim(ambient)
    if k.is_empty or ambient.is_empty:
        return Verdict(True)
    obs = mask.observable
    kd, cd, pd = k.delta, ambient.delta, plant.delta
    NONE = -1

    def step_other(c, g, k2, e):
        c2 = cd[c].get(e)
        if c2 is None:
            return None
        g2 = pd[g].get(e)
        if g2 is None:
            return None
        k3 = NONE if k2 == NONE else kd[k2].get(e, NONE)
        return c2, g2, k3

    start = (k.initial, ambient.initial, plant.initial, k.initial)
    paths = {start: ((), ())}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        x, c, g, k2 = node
        s, s2 = paths[node]
        for e in sorted(kd[x]):
            if e in pd[g] and (k2 == NONE or e not in kd[k2]):
                return Verdict(False, (s, s2, e))
        if x in k.markers and g in plant.markers and (k2 == NONE or k2 not in k.markers):
            return Verdict(False, (s, s2, None))
        moves = []
        for e in sorted(kd[x]):
            if e not in obs:
                moves.append(((kd[x][e], c, g, k2), (s + (e,), s2)))
        for e in sorted(cd[c]):
            if e not in obs:
                nxt = step_other(c, g, k2, e)
                if nxt is not None:
                    moves.append(((x,) + nxt, (s, s2 + (e,))))
        for e in sorted(kd[x]):
            if e in obs:
                nxt = step_other(c, g, k2, e)
                if nxt is not None:
                    moves.append(((kd[x][e],) + nxt, (s + (e,), s2 + (e,))))
        for y, p in moves:
            if y not in paths:
                paths[y] = p
                queue.append(y)
    return Verdict(True)


# --------------------------------------------------------------------------
# supremal computations


def supcon(p: SynthesisProblem, name: str | None = None) -> Generator:
    """Trim recognizer of the supremal controllable sublanguage of E || Lm(G)."""
    c, c_plant = _ambient(p)
    k, _ = _prune(c, c_plant, p.plant, p.uncontrollable)
    return k.renamed(name or f"{p.spec.name}SUPCON")


def _uncertainty_closure(seed, cd, kd, unobs):
    """Close a set of (ambient, k-or-None) pairs under unobservable ambient moves."""
    out = set(seed)
    stack = list(seed)
    while stack:
        c, k2 = stack.pop()
        for e, c2 in cd[c].items():
            if e in unobs:
                k3 = None if k2 is None else kd[k2].get(e)
                y = (c2, k3)
                if y not in out:
                    out.add(y)
                    stack.append(y)
    return frozenset(out)


def _observer_product(k: Generator, k_amb: list[int], amb: Generator, unobs: frozenset[int]):
    """Refine ``k`` by the set of (ambient, k) pairs reachable through lookalike strings.

    The returned generator's states are ``(x, U)``; every string reaching a
    state shares the same ``U``, so per-state decisions are exact.
    """
    kd, cd = k.delta, amb.delta
    u0 = _uncertainty_closure({(k_amb[k.initial], k.initial)}, cd, kd, unobs)

    def successors(node):
        x, u = node
        out = []
        for e, x2 in kd[x].items():
            if e in unobs:
                out.append((e, (x2, u)))
            else:
                moved = set()
                for c, k2 in u:
                    c2 = cd[c].get(e)
                    if c2 is not None:
                        moved.add((c2, None if k2 is None else kd[k2].get(e)))
                out.append((e, (x2, _uncertainty_closure(moved, cd, kd, unobs))))
        return out

    return build(k.name, k.alphabet, (k.initial, u0), successors, lambda n: n[0] in k.markers)


def sup_rco(
    p: SynthesisProblem,
    name: str | None = None,
    ambient: Generator | str = "controllable",
    max_rounds: int = 10_000,
) -> Generator:
    """Supremal controllable and relatively observable sublanguage of E || Lm(G).

    ``ambient`` is the language C the observability conditions are relative
    to: ``"controllable"`` (the supremal controllable sublanguage of the
    target), ``"target"`` (E || Lm(G) itself) or an explicit generator over
    the plant alphabet whose marked language contains the supcon result.
    """
    name = name or f"{p.spec.name}K"
    c, c_plant = ambient_language(p, ambient)
    if c.is_empty:
        return Generator.empty(name, p.plant.alphabet)
    unc, unobs = p.uncontrollable, p.unobservable
    f, f_plant = _ambient(p)
    k, _ = _prune(f, f_plant, p.plant, unc)
    k, k_amb, _ = _rebase(k, c, c_plant)
    pdelta, pmark = p.plant.delta, p.plant.markers
    for _ in range(max_rounds):
        if k.is_empty:
            return k.renamed(name)
        refined, nodes = _observer_product(k, k_amb, c, unobs)
        kd = k.delta
        drop, unmark = set(), set()
        for i, (x, u) in enumerate(nodes):
            for e in kd[x]:
                for cc, k2 in u:
                    if e in pdelta[c_plant[cc]] and (k2 is None or e not in kd[k2]):
                        drop.add((i, e))
                        break
            if x in k.markers:
                for cc, k2 in u:
                    if c_plant[cc] in pmark and (k2 is None or k2 not in k.markers):
                        unmark.add(i)
                        break
        if not drop and not unmark:
            return trim(k, name)
        r, r_order = edit(refined, drop_transitions=drop, unmark=unmark)
        r_plant = [c_plant[k_amb[nodes[o][0]]] for o in r_order]
        r, _ = _prune(r, r_plant, p.plant, unc)
        k, k_amb, _ = _rebase(r, c, c_plant)
        k, t_order = trim_states(k)
        k_amb = [k_amb[o] for o in t_order]
    raise SynthesisError(f"sup_rco did not converge for {p.spec.name}")


def sup_cn(p: SynthesisProblem, name: str | None = None, max_rounds: int = 10_000) -> Generator:
    """Supremal controllable sublanguage of E || Lm(G) that is normal in both L(G) and Lm(G).

    Used only as a permissiveness comparator.
    """
    name = name or f"{p.spec.name}CN"
    c, c_plant = _ambient(p)
    unc, unobs = p.uncontrollable, p.unobservable
    plant = p.plant
    k, order = _prune(c, c_plant, plant, unc)
    k_amb = list(order)
    for _ in range(max_rounds):
        if k.is_empty:
            return k.renamed(name)
        # lookalike strings range over L(G): pair the plant with k
        kd, gd = k.delta, plant.delta
        u0 = _uncertainty_closure({(plant.initial, k.initial)}, gd, kd, unobs)

        def successors(node, kd=kd, gd=gd):
            x, u = node
            out = []
            for e, x2 in kd[x].items():
                if e in unobs:
                    out.append((e, (x2, u)))
                else:
                    moved = set()
                    for g, k2 in u:
                        g2 = gd[g].get(e)
                        if g2 is not None:
                            moved.add((g2, None if k2 is None else kd[k2].get(e)))
                    out.append((e, (x2, _uncertainty_closure(moved, gd, kd, unobs))))
            return out

        refined, nodes = build(k.name, k.alphabet, (k.initial, u0), successors, lambda n: n[0] in k.markers)
        bad = {i for i, (x, u) in enumerate(nodes) if any(k2 is None for _, k2 in u)}
        unmark = {
            i
            for i, (x, u) in enumerate(nodes)
            if x in k.markers and any(g in plant.markers and k2 not in k.markers for g, k2 in u)
        }
        if not bad and not unmark:
            return trim(k, name)
        keep = set(range(refined.state_count)) - bad
        r, r_order = edit(refined, keep, unmark=unmark - bad)
        r_plant = [c_plant[k_amb[nodes[o][0]]] for o in r_order]
        r, _ = _prune(r, r_plant, plant, unc)
        k, k_amb, _ = _rebase(r, c, c_plant)
        k, t_order = trim_states(k)
        k_amb = [k_amb[o] for o in t_order]
    raise SynthesisError(f"sup_cn did not converge for {p.spec.name}")


# --------------------------------------------------------------------------
# realization


@dataclass(frozen=True)
class POSupervisor:
    """Uncertainty-set realization of a controllable, observable language.

    ``uncertainty[x]`` lists the recognizer states the supervisor may be in
    after the observations leading to ``x``; ``plant_states[x]`` the matching
    plant states. Unobservable events only ever appear as selfloops.
    """

    automaton: Generator
    disabled_map: tuple[frozenset[int], ...]
    uncertainty: tuple[frozenset[int], ...]
    plant_states: tuple[frozenset[int], ...]
    plant_name: str = ""

    @property
    def name(self) -> str:
        return self.automaton.name

    @property
    def state_count(self) -> int:
        return self.automaton.state_count

    def enabled(self, x: int) -> frozenset[int]:
        return self.automaton.enabled(x)

    def eligible(self, x: int, plant: Generator) -> frozenset[int]:
        out: set[int] = set()
        for g in self.plant_states[x]:
            out |= plant.delta[g].keys()
        return frozenset(out)

    def plant_marked(self, x: int, plant: Generator) -> bool:
        return any(g in plant.markers for g in self.plant_states[x])

    @classmethod
    def from_automaton(cls, sup: Generator, plant: Generator, table: EventTable) -> "POSupervisor":
        """Recover the plant annotations of a stored supervisor from ``plant || sup``.

        ``uncertainty`` then holds the ids of the product states behind each
        supervisor state rather than recognizer states.
        """
        if sup.is_empty:
            return cls(sup, (), (), (), plant.name)
        prod, tuples = sync_states([plant, sup])
        unc: list[set[int]] = [set() for _ in range(sup.state_count)]
        ps: list[set[int]] = [set() for _ in range(sup.state_count)]
        for i, (g, x) in enumerate(tuples):
            unc[x].add(i)
            ps[x].add(g)
        con, pd = table.controllable, plant.delta
        disabled = []
        for x in range(sup.state_count):
            eligible = {e for g in ps[x] for e in pd[g] if e in con}
            disabled.append(frozenset(eligible - sup.delta[x].keys()))
        return cls(
            sup,
            tuple(disabled),
            tuple(frozenset(u) for u in unc),
            tuple(frozenset(p) for p in ps),
            plant.name,
        )


def build_po_supervisor(
    k: Generator,
    plant: Generator,
    mask: ObservationMask,
    table: EventTable,
    name: str | None = None,
    ambient: Generator | None = None,
    check: bool = True,
) -> POSupervisor:
    """Realize ``Lm(k)`` by a feasible supervisor whose states are uncertainty sets.

    ``ambient`` defaults to ``k`` itself, which makes the observability check
    the classical one: exactly what a feasible realization needs.
    """
    name = name or f"{k.name}SUP"
    if check:
        v = is_controllable(k, plant, table)
        if not v:
            raise SynthesisError(f"{k.name} is not controllable", v.witness)
        v = check_relative_observability(k, ambient if ambient is not None else k, plant, mask)
        if not v:
            raise SynthesisError(f"{k.name} is not observable", v.witness)
    if k.is_empty:
        empty = Generator.empty(name, plant.alphabet)
        return POSupervisor(empty, (), (), (), plant.name)
    kp, kstates, pstates = _with_plant(k, plant)
    obs = mask.observable
    unobs = plant.alphabet - obs
    kd = kp.delta
    con = table.controllable

    def closure(seed):
        out = set(seed)
        stack = list(seed)
        while stack:
            q = stack.pop()
            for e, t in kd[q].items():
                if e in unobs and t not in out:
                    out.add(t)
                    stack.append(t)
        return frozenset(out)

    def successors(u):
        out = {}
        for q in u:
            for e, t in kd[q].items():
                if e in obs:
                    out.setdefault(e, set()).add(t)
        res = [(e, closure(ts)) for e, ts in out.items()]
        loops = {e for q in u for e in kd[q] if e in unobs}
        res.extend((e, u) for e in loops)
        return res

    gen, subsets = build(
        name,
        plant.alphabet,
        closure({kp.initial}),
        successors,
        lambda u: any(q in kp.markers for q in u),
        lambda u: "{" + ",".join(str(kstates[q]) for q in sorted(u)) + "}",
    )
    pd = plant.delta
    disabled, unc_sets, plant_sets = [], [], []
    for i, u in enumerate(subsets):
        ps = frozenset(pstates[q] for q in u)
        eligible = set()
        for g in ps:
            eligible |= pd[g].keys()
        disabled.append(frozenset(e for e in eligible if e in con) - gen.delta[i].keys())
        unc_sets.append(frozenset(kstates[q] for q in u))
        plant_sets.append(ps)
    return POSupervisor(gen, tuple(disabled), tuple(unc_sets), tuple(plant_sets), plant.name)


def realization_check(sup: POSupervisor, k: Generator, plant: Generator):
    """``L(G) & L(SUP)`` equals the closure of K and ``Lm(G) & Lm(SUP)`` equals K."""
    return language_equal(sync([plant, sup.automaton]), k)


def nonconflict(gs: Sequence[Generator]) -> bool:
    return bool(is_nonblocking(sync(gs)))


def synthesize(p: SynthesisProblem, name: str) -> tuple[Generator, POSupervisor]:
    """sup_rco followed by the uncertainty-set realization."""
    k = sup_rco(p, name=f"{name}_K")
    sup = build_po_supervisor(k, p.plant, p.mask, p.table, name=name, check=False)
    return k, sup


__all__ = [
    "POSupervisor",
    "SynthesisError",
    "SynthesisProblem",
    "Verdict",
    "ambient_language",
    "build_po_supervisor",
    "check_relative_observability",
    "is_controllable",
    "nonconflict",
    "realization_check",
    "sup_cn",
    "sup_rco",
    "supcon",
    "synthesize",
]
