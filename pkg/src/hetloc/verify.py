"""Oracles and a closed-loop harness.

Everything here works on strings and joint states directly, without the
product constructions of the core module, so the two can check each other.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .automata import EventTable, Generator, ObservationMask, project_string
from .synthesis import Verdict

String = tuple[int, ...]


def enumerate_language(g: Generator, depth: int) -> tuple[set[String], set[String]]:
    """All strings of ``L(g)`` and ``Lm(g)`` of length at most ``depth``."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    closed: set[String] = set()
    marked: set[String] = set()
    if g.is_empty:
        return closed, marked
    frontier = [((), g.initial)]
    delta = g.delta
    for d in range(depth + 1):
        nxt = []
        for s, q in frontier:
            closed.add(s)
            if q in g.markers:
                marked.add(s)
            if d < depth:
                for e, t in delta[q].items():
                    nxt.append((s + (e,), t))
        frontier = nxt
    return closed, marked


@dataclass(frozen=True)
class Refusal:
    event: int
    component: str
    reason: str  # "ineligible" for the plant, "disabled" for a controller
    controllable: bool | None = None

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"refused {self.event} by {self.component} ({self.reason})"


@dataclass(frozen=True)
class ClosedLoop:
    """Plant components and controllers stepping together.

    An event runs iff every plant component and controller that has it in
    its alphabet can execute it. The plant is a list of components so large
    products never need to be built.
    """

    plants: tuple[Generator, ...]
    controllers: tuple[Generator, ...]
    mask: ObservationMask | None = None
    table: EventTable | None = None
    plant_states: tuple[int, ...] = ()
    controller_states: tuple[int, ...] = ()
    trace: String = ()

    @classmethod
    def start(
        cls,
        plants: Sequence[Generator] | Generator,
        controllers: Iterable = (),
        mask: ObservationMask | None = None,
        table: EventTable | None = None,
    ) -> "ClosedLoop":
        plants = (plants,) if isinstance(plants, Generator) else tuple(plants)
        ctrl = tuple(getattr(c, "automaton", c) for c in controllers)
        return cls(plants, ctrl, mask, table, tuple(p.initial for p in plants), tuple(c.initial for c in ctrl))

    @property
    def alphabet(self) -> frozenset[int]:
        out: set[int] = set()
        for p in self.plants:
            out |= p.alphabet
        return frozenset(out)

    @property
    def state(self) -> tuple[int, ...]:
        return self.plant_states + self.controller_states

    @property
    def marked(self) -> bool:
        parts = zip(self.plants + self.controllers, self.state)
        return all(q in g.markers for g, q in parts)

    def step(self, event: int) -> "ClosedLoop | Refusal":
        if event not in self.alphabet:
            return Refusal(event, "plant", "ineligible")
        ps = list(self.plant_states)
        for i, g in enumerate(self.plants):
            if event in g.alphabet:
                t = g.delta[ps[i]].get(event)
                if t is None:
                    return Refusal(event, g.name, "ineligible")
                ps[i] = t
        cs = list(self.controller_states)
        for i, g in enumerate(self.controllers):
            if event in g.alphabet:
                t = g.delta[cs[i]].get(event)
                if t is None:
                    con = self.table[event].controllable if self.table is not None and event in self.table else None
                    return Refusal(event, g.name, "disabled", con)
                cs[i] = t
        return ClosedLoop(
            self.plants, self.controllers, self.mask, self.table, tuple(ps), tuple(cs), self.trace + (event,)
        )

    def run(self, s: Iterable[int]) -> "ClosedLoop | Refusal":
        cur: ClosedLoop | Refusal = self
        for e in s:
            cur = cur.step(e)
            if isinstance(cur, Refusal):
                return cur
        return cur

    def eligible(self) -> list[int]:
        return [e for e in sorted(self.alphabet) if not isinstance(self.step(e), Refusal)]


@dataclass
class ExploreReport:
    depth: int
    states: int
    closed: set[String] = field(default_factory=set)
    marked: set[String] = field(default_factory=set)
    blocking: list[String] = field(default_factory=list)
    safety: list[String] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.blocking and not self.safety


def exhaustive_explore(
    loop: ClosedLoop,
    depth: int,
    specs: Sequence[Generator] = (),
    collect: bool = True,
) -> ExploreReport:
    """Breadth-first exploration of joint states up to ``depth`` events.

    A string is a safety violation when some spec that owns the event cannot
    follow it. A joint state is reported blocking only when everything
    reachable from it was explored and none of it is marked.
    """
    events = sorted(loop.alphabet)
    start = (loop.state, tuple(s.initial for s in specs))
    first: dict = {start: ((), loop)}
    succ: dict = {}
    rep = ExploreReport(depth, 0)
    frontier = deque([(start, 0)])
    while frontier:
        node, d = frontier.popleft()
        s, cur = first[node]
        if d == depth:
            continue
        out = []
        for e in events:
            nxt = cur.step(e)
            if isinstance(nxt, Refusal):
                continue
            sp = list(node[1])
            for i, g in enumerate(specs):
                if e in g.alphabet:
                    t = g.delta[sp[i]].get(e)
                    if t is None:
                        rep.safety.append(s + (e,))
                        break
                    sp[i] = t
            else:
                key = (nxt.state, tuple(sp))
                out.append((e, key))
                if key not in first:
                    first[key] = (s + (e,), nxt)
                    frontier.append((key, d + 1))
        succ[node] = out
    rep.states = len(first)

    def is_marked(n):
        return first[n][1].marked and all(q in g.markers for g, q in zip(specs, n[1]))

    if collect:
        layer = [((), start)]
        for d in range(depth + 1):
            nxt_layer = []
            for s, n in layer:
                rep.closed.add(s)
                if is_marked(n):
                    rep.marked.add(s)
                if d < depth:
                    nxt_layer.extend((s + (e,), m) for e, m in succ.get(n, ()))
            layer = nxt_layer
    # coreachability inside the explored graph
    good = {n for n in first if is_marked(n)}
    back: dict = {}
    for n, outs in succ.items():
        for _, m in outs:
            back.setdefault(m, []).append(n)
    stack = list(good)
    while stack:
        m = stack.pop()
        for n in back.get(m, ()):
            if n not in good:
                good.add(n)
                stack.append(n)
    # keep only nodes whose forward closure was fully expanded
    complete = set(succ)
    changed = True
    while changed:
        changed = False
        for n in list(complete):
            if any(m not in complete for _, m in succ[n]):
                complete.discard(n)
                changed = True
    rep.blocking = sorted(first[n][0] for n in complete if n not in good)
    return rep


def check_feasibility(
    controllers: Sequence,
    mask: ObservationMask,
    samples: int = 200,
    seed: int = 0,
    length: int = 12,
) -> Verdict:
    """Unobservable transitions are selfloops, plus random lookalike spot checks."""
    gens = [getattr(c, "automaton", c) for c in controllers]
    for g in gens:
        for a, e, b in g.transitions:
            if e not in mask and a != b:
                return Verdict(False, (g.name, (a, e, b)))
    rng = random.Random(seed)
    for g in gens:
        if g.is_empty:
            continue
        unobs = sorted(e for e in g.alphabet if e not in mask)
        for _ in range(samples if unobs else 0):
            s = _random_walk(g, rng, length)
            t = _mutate(g, s, unobs, rng)
            if t is None or project_string(s, mask) != project_string(t, mask):
                continue
            x, y = g.run(s), g.run(t)
            if g.enabled(x) != g.enabled(y):
                return Verdict(False, (g.name, s, t))
    return Verdict(True)


def _random_walk(g: Generator, rng: random.Random, length: int) -> String:
    q, out = g.initial, []
    for _ in range(rng.randint(0, length)):
        row = g.delta[q]
        if not row:
            break
        e = rng.choice(sorted(row))
        out.append(e)
        q = row[e]
    return tuple(out)


def _mutate(g: Generator, s: String, unobs: list[int], rng: random.Random) -> String | None:
    """Insert or delete an unobservable event where the result stays in ``L(g)``."""
    for _ in range(8):
        t = list(s)
        if t and rng.random() < 0.5:
            idx = [i for i, e in enumerate(t) if e in unobs]
            if not idx:
                continue
            del t[rng.choice(idx)]
        else:
            t.insert(rng.randint(0, len(t)), rng.choice(unobs))
        if g.run(t) is not None:
            return tuple(t)
    return None


__all__ = [
    "ClosedLoop",
    "ExploreReport",
    "Refusal",
    "check_feasibility",
    "enumerate_language",
    "exhaustive_explore",
]
