"""Finite-state generators and the language operations built on them.

A generator is a deterministic automaton with a partial transition function
and a set of marker states. Its closed language is every executable string,
its marked language the executable strings ending in a marker state. All
values here are immutable; every operation returns a new generator with
states renumbered in breadth-first order (events scanned in increasing id),
which makes outputs reproducible and byte-stable when serialized.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels

Event = int
Transition = tuple[int, int, int]


class AutomatonError(ValueError):
    """Raised for malformed generators or violated operation preconditions."""


@dataclass(frozen=True)
class EventAttributes:
    controllable: bool
    observable: bool = True


class EventTable:
    """Registry of event attributes shared by every generator of a model."""

    def __init__(self, entries: Mapping[int, EventAttributes] | None = None):
        self._entries: dict[int, EventAttributes] = dict(entries or {})

    @classmethod
    def from_sets(
        cls,
        events: Iterable[int],
        controllable: Iterable[int] = (),
        unobservable: Iterable[int] = (),
    ) -> "EventTable":
        con, uo = set(controllable), set(unobservable)
        return cls({e: EventAttributes(e in con, e not in uo) for e in events})

    def __contains__(self, event: int) -> bool:
        return event in self._entries

    def __getitem__(self, event: int) -> EventAttributes:
        try:
            return self._entries[event]
        except KeyError:
            raise AutomatonError(f"event {event} is not registered") from None

    def __iter__(self):
        return iter(sorted(self._entries))

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, EventTable) and self._entries == other._entries

    def items(self):
        return sorted(self._entries.items())

    def register(self, event: int, attrs: EventAttributes) -> None:
        old = self._entries.get(event)
        if old is not None and old != attrs:
            raise AutomatonError(f"event {event} registered with conflicting attributes")
        self._entries[event] = attrs

    def merged(self, other: "EventTable") -> "EventTable":
        out = EventTable(self._entries)
        for e, a in other.items():
            out.register(e, a)
        return out

    @property
    def events(self) -> frozenset[int]:
        return frozenset(self._entries)

    @property
    def controllable(self) -> frozenset[int]:
        return frozenset(e for e, a in self._entries.items() if a.controllable)

    @property
    def uncontrollable(self) -> frozenset[int]:
        return frozenset(e for e, a in self._entries.items() if not a.controllable)

    @property
    def observable(self) -> frozenset[int]:
        return frozenset(e for e, a in self._entries.items() if a.observable)

    @property
    def unobservable(self) -> frozenset[int]:
        return frozenset(e for e, a in self._entries.items() if not a.observable)

    def mask(self) -> "ObservationMask":
        return ObservationMask(self.observable)

    def covers(self, g: "Generator") -> None:
        missing = sorted(g.alphabet - self.events)
        if missing:
            raise AutomatonError(f"{g.name}: events {missing} missing from the event table")

    def __repr__(self) -> str:
        return f"EventTable({len(self)} events, c={sorted(self.controllable)}, uo={sorted(self.unobservable)})"


@dataclass(frozen=True)
class ObservationMask:
    """Natural projection onto the observable events."""

    observable: frozenset[int]

    def __init__(self, observable: Iterable[int]):
        object.__setattr__(self, "observable", frozenset(observable))

    def __contains__(self, event: int) -> bool:
        return event in self.observable

    def project(self, s: Sequence[int]) -> tuple[int, ...]:
        return project_string(s, self)


@dataclass(frozen=True, eq=True)
class Generator:
    """Deterministic finite generator with dense integer states.

    ``labels`` holds optional per-state provenance strings; they are carried
    for debugging and DOT export only and never take part in comparisons.
    """

    name: str
    state_count: int
    initial: int
    markers: frozenset[int]
    alphabet: frozenset[int]
    transitions: tuple[Transition, ...]
    labels: tuple[str, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "markers", frozenset(self.markers))
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        object.__setattr__(self, "transitions", tuple(sorted((int(a), int(e), int(b)) for a, e, b in self.transitions)))
        n = self.state_count
        if n < 0:
            raise AutomatonError(f"{self.name}: negative state count")
        if n == 0:
            if self.markers or self.transitions:
                raise AutomatonError(f"{self.name}: empty generator with markers or transitions")
            return
        if not 0 <= self.initial < n:
            raise AutomatonError(f"{self.name}: initial state {self.initial} out of range")
        for m in self.markers:
            if not 0 <= m < n:
                raise AutomatonError(f"{self.name}: marker {m} out of range")
        seen = set()
        for a, e, b in self.transitions:
            if not (0 <= a < n and 0 <= b < n):
                raise AutomatonError(f"{self.name}: transition ({a}, {e}, {b}) out of range")
            if e not in self.alphabet:
                raise AutomatonError(f"{self.name}: transition event {e} outside alphabet")
            if (a, e) in seen:
                raise AutomatonError(f"{self.name}: nondeterministic transition at ({a}, {e})")
            seen.add((a, e))
        if self.labels is not None and len(self.labels) != n:
            object.__setattr__(self, "labels", None)

    @classmethod
    def empty(cls, name: str = "EMPTY", alphabet: Iterable[int] = ()) -> "Generator":
        return cls(name, 0, 0, frozenset(), frozenset(alphabet), ())

    @classmethod
    def create(
        cls,
        name: str,
        states: int,
        transitions: Iterable[Transition],
        markers: Iterable[int] = (0,),
        initial: int = 0,
        alphabet: Iterable[int] | None = None,
    ) -> "Generator":
        """Build from a transition list; the alphabet defaults to the events used."""
        transitions = list(transitions)
        if alphabet is None:
            alphabet = {e for _, e, _ in transitions}
        return cls(name, states, initial, frozenset(markers), frozenset(alphabet), tuple(transitions))

    @property
    def is_empty(self) -> bool:
        return self.state_count == 0

    def renamed(self, name: str) -> "Generator":
        return Generator(name, self.state_count, self.initial, self.markers, self.alphabet, self.transitions, self.labels)

    @cached_property
    def delta(self) -> tuple[dict[int, int], ...]:
        out: list[dict[int, int]] = [{} for _ in range(self.state_count)]
        for a, e, b in self.transitions:
            out[a][e] = b
        return tuple(out)

    @cached_property
    def events(self) -> tuple[int, ...]:
        """Alphabet in increasing order; the column order of :meth:`table`."""
        return tuple(sorted(self.alphabet))

    def table(self, events: Sequence[int] | None = None, foreign: bool = False) -> np.ndarray:
        """Dense ``[state, event]`` table over ``events`` (default: own alphabet).

        Columns for events outside the alphabet hold ``FOREIGN`` when
        ``foreign`` is set, else ``UNDEFINED``.
        """
        events = self.events if events is None else tuple(events)
        out = np.full((max(self.state_count, 1), len(events)), kernels.UNDEFINED, dtype=np.int32)
        col = {e: i for i, e in enumerate(events)}
        if foreign:
            for e, i in col.items():
                if e not in self.alphabet:
                    out[:, i] = kernels.FOREIGN
        for a, e, b in self.transitions:
            i = col.get(e)
            if i is not None:
                out[a, i] = b
        return out

    def step(self, state: int, event: int) -> int | None:
        return self.delta[state].get(event)

    def run(self, s: Iterable[int], start: int | None = None) -> int | None:
        """State reached by ``s`` from ``start`` (default initial), or None."""
        if self.is_empty:
            return None
        q = self.initial if start is None else start
        for e in s:
            q = self.delta[q].get(e)
            if q is None:
                return None
        return q

    def accepts(self, s: Iterable[int]) -> bool:
        q = self.run(s)
        return q is not None and q in self.markers

    def enabled(self, state: int) -> frozenset[int]:
        return frozenset(self.delta[state])

    def __repr__(self) -> str:
        return (
            f"Generator({self.name!r}, states={self.state_count}, "
            f"transitions={len(self.transitions)}, events={len(self.alphabet)})"
        )


def build(
    name: str,
    alphabet: Iterable[int],
    initial,
    successors,
    is_marked,
    label=None,
) -> tuple[Generator, list]:
    """Breadth-first construction from an implicit automaton.

    ``successors(x)`` yields ``(event, target)`` pairs over hashable states.
    Returns the generator and the list of implicit states in index order.
    """
    alphabet = frozenset(alphabet)
    index = {initial: 0}
    order = [initial]
    trans = []
    head = 0
    while head < len(order):
        x = order[head]
        for e, y in sorted(successors(x), key=lambda p: p[0]):
            j = index.get(y)
            if j is None:
                j = len(order)
                index[y] = j
                order.append(y)
            trans.append((head, e, j))
        head += 1
    markers = frozenset(i for i, x in enumerate(order) if is_marked(x))
    labels = tuple(label(x) for x in order) if label else None
    return Generator(name, len(order), 0, markers, alphabet, tuple(trans), labels), order


def renumber(g: Generator, name: str | None = None) -> Generator:
    """BFS-canonical renumbering restricted to reachable states."""
    if g.is_empty:
        return g if name is None else g.renamed(name)
    delta = g.delta
    out, order = build(
        name or g.name,
        g.alphabet,
        g.initial,
        lambda q: delta[q].items(),
        lambda q: q in g.markers,
        (lambda q: g.labels[q]) if g.labels else None,
    )
    return out


def reachable(g: Generator) -> set[int]:
    if g.is_empty:
        return set()
    seen = {g.initial}
    stack = [g.initial]
    while stack:
        q = stack.pop()
        for t in g.delta[q].values():
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return seen


def coreachable(g: Generator) -> set[int]:
    back: dict[int, list[int]] = {}
    for a, _, b in g.transitions:
        back.setdefault(b, []).append(a)
    seen = set(g.markers)
    stack = list(seen)
    while stack:
        q = stack.pop()
        for p in back.get(q, ()):
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def restrict(g: Generator, keep: set[int], name: str | None = None) -> Generator:
    """Sub-generator on ``keep`` (reachable part, renumbered); empty if initial dropped."""
    name = name or g.name
    if g.is_empty or g.initial not in keep:
        return Generator.empty(name, g.alphabet)
    delta = g.delta
    out, _ = build(
        name,
        g.alphabet,
        g.initial,
        lambda q: [(e, t) for e, t in delta[q].items() if t in keep],
        lambda q: q in g.markers,
        (lambda q: g.labels[q]) if g.labels else None,
    )
    return out


def trim(g: Generator, name: str | None = None) -> Generator:
    """Reachable and coreachable part of ``g``."""
    if g.is_empty:
        return g if name is None else g.renamed(name)
    return restrict(g, reachable(g) & coreachable(g), name)


def shortest_paths(g: Generator) -> dict[int, tuple[int, ...]]:
    """Shortest (then lexicographically least) string reaching each reachable state."""
    if g.is_empty:
        return {}
    paths = {g.initial: ()}
    queue = deque([g.initial])
    while queue:
        q = queue.popleft()
        for e in sorted(g.delta[q]):
            t = g.delta[q][e]
            if t not in paths:
                paths[t] = paths[q] + (e,)
                queue.append(t)
    return paths


@dataclass(frozen=True)
class BlockingReport:
    nonblocking: bool
    state: int | None = None
    string: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.nonblocking


def is_nonblocking(g: Generator) -> BlockingReport:
    """Every reachable state can reach a marker; otherwise report the first offender."""
    if g.is_empty:
        return BlockingReport(True)
    co = coreachable(g)
    paths = shortest_paths(g)
    bad = [q for q in paths if q not in co]
    if not bad:
        return BlockingReport(True)
    q = min(bad, key=lambda x: (len(paths[x]), paths[x]))
    return BlockingReport(False, q, paths[q])


def sync(gs: Sequence[Generator], name: str | None = None, labels: bool = False) -> Generator:
    """Reachable synchronous product: shared events move all owners together."""
    gs = list(gs)
    if not gs:
        raise AutomatonError("sync of an empty list")
    name = name or "||".join(g.name for g in gs)
    alphabet = frozenset().union(*(g.alphabet for g in gs))
    if any(g.is_empty for g in gs):
        return Generator.empty(name, alphabet)
    events = tuple(sorted(alphabet))
    tables = [g.table(events, foreign=True) for g in gs]
    marked = []
    for g in gs:
        m = np.zeros(g.state_count, dtype=np.uint8)
        m[list(g.markers)] = 1
        marked.append(m)
    states, trans, markers = kernels.sync_product(tables, [g.initial for g in gs], marked)
    out_labels = None
    if labels:
        out_labels = tuple(",".join(str(c) for c in s) for s in states)
    return Generator(
        name,
        len(states),
        0,
        frozenset(markers),
        alphabet,
        tuple((a, events[e], b) for a, e, b in trans),
        out_labels,
    )


def sync_states(gs: Sequence[Generator], name: str | None = None) -> tuple[Generator, list[tuple[int, ...]]]:
    """Like :func:`sync` but also returns the component-state tuple of each product state."""
    gs = list(gs)
    name = name or "||".join(g.name for g in gs)
    alphabet = frozenset().union(*(g.alphabet for g in gs))
    if any(g.is_empty for g in gs):
        return Generator.empty(name, alphabet), []
    events = tuple(sorted(alphabet))
    tables = [g.table(events, foreign=True) for g in gs]
    marked = []
    for g in gs:
        m = np.zeros(g.state_count, dtype=np.uint8)
        m[list(g.markers)] = 1
        marked.append(m)
    states, trans, markers = kernels.sync_product(tables, [g.initial for g in gs], marked)
    g = Generator(name, len(states), 0, frozenset(markers), alphabet, tuple((a, events[e], b) for a, e, b in trans))
    return g, [tuple(s) for s in states]


def project_string(s: Sequence[int], mask: ObservationMask | Iterable[int]) -> tuple[int, ...]:
    keep = mask.observable if isinstance(mask, ObservationMask) else frozenset(mask)
    return tuple(e for e in s if e in keep)


def determinize(g: Generator, keep: Iterable[int], name: str | None = None) -> tuple[Generator, list[tuple[int, ...]]]:
    """Subset construction over ``keep``; unkept events act as silent moves.

    A subset is marked iff it contains a marker. Returns the generator and the
    subset (as a sorted state tuple) behind each of its states.
    """
    keep = frozenset(keep) & g.alphabet
    name = name or f"P({g.name})"
    if g.is_empty:
        return Generator.empty(name, keep), []
    events = g.events
    col = {e: i for i, e in enumerate(events)}
    eps = [col[e] for e in events if e not in keep]
    kept = [col[e] for e in events if e in keep]
    subsets, trans = kernels.subset_construction(g.table(events), eps, kept, [g.initial])
    markers = frozenset(i for i, s in enumerate(subsets) if any(q in g.markers for q in s))
    out = Generator(name, len(subsets), 0, markers, keep, tuple((a, events[e], b) for a, e, b in trans))
    return out, [tuple(s) for s in subsets]


def minimize(g: Generator, name: str | None = None) -> Generator:
    """State-minimal generator with the same closed and marked languages."""
    name = name or g.name
    if g.is_empty:
        return g.renamed(name)
    g = renumber(g)
    init = [1 if q in g.markers else 0 for q in range(g.state_count)]
    blocks = kernels.refine_partition(g.table(), init)
    quotient = {}
    for a, e, b in g.transitions:
        quotient[(blocks[a], e)] = blocks[b]
    q = Generator(
        name,
        max(blocks) + 1,
        blocks[g.initial],
        frozenset(blocks[m] for m in g.markers),
        g.alphabet,
        tuple((a, e, b) for (a, e), b in quotient.items()),
    )
    return renumber(q)


def project_generator(g: Generator, keep: Iterable[int], name: str | None = None) -> Generator:
    """Minimal deterministic recognizer of the natural projection of ``g`` onto ``keep``."""
    d, _ = determinize(g, keep, name)
    return minimize(d)


@dataclass(frozen=True)
class LanguageComparison:
    closed_equal: bool
    marked_equal: bool
    closed_witness: tuple[int, ...] | None = None
    marked_witness: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.closed_equal and self.marked_equal

    @property
    def witness(self) -> tuple[int, ...] | None:
        cands = [w for w in (self.closed_witness, self.marked_witness) if w is not None]
        return min(cands, key=lambda w: (len(w), w)) if cands else None


def _pair_bfs(g1: Generator, g2: Generator, closed: bool) -> tuple[int, ...] | None:
    """Shortest string separating ``g1`` and ``g2`` (None = equal).

    With ``closed`` the closed languages are compared, else the marked
    languages. Either side may fall off its automaton (state ``None``).
    """
    d1, d2 = g1.delta, g2.delta
    m1, m2 = g1.markers, g2.markers
    events = sorted(g1.alphabet | g2.alphabet)
    start = (None if g1.is_empty else g1.initial, None if g2.is_empty else g2.initial)
    if start == (None, None):
        return None
    paths = {start: ()}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        p1, p2 = x
        s = paths[x]
        if closed:
            if (p1 is None) != (p2 is None):
                return s
        elif (p1 is not None and p1 in m1) != (p2 is not None and p2 in m2):
            return s
        for e in events:
            t1 = None if p1 is None else d1[p1].get(e)
            t2 = None if p2 is None else d2[p2].get(e)
            if t1 is None and t2 is None:
                continue
            y = (t1, t2)
            if y not in paths:
                paths[y] = s + (e,)
                queue.append(y)
    return None


def language_equal(g1: Generator, g2: Generator) -> LanguageComparison:
    """Compare closed and marked languages; witnesses are shortest distinguishing strings."""
    closed_w = _pair_bfs(g1, g2, closed=True)
    marked_w = _pair_bfs(trim(g1), trim(g2), closed=False)
    return LanguageComparison(closed_w is None, marked_w is None, closed_w, marked_w)


def isomorphic(g1: Generator, g2: Generator) -> bool:
    """Structural identity after BFS renumbering (ignores names and labels)."""
    a, b = renumber(g1), renumber(g2)
    return (
        a.state_count == b.state_count
        and a.alphabet == b.alphabet
        and a.markers == b.markers
        and a.transitions == b.transitions
        and (a.is_empty or a.initial == b.initial)
    )


def selfloop(g: Generator, events: Iterable[int], name: str | None = None) -> Generator:
    """Add a selfloop for each of ``events`` at every state."""
    events = frozenset(events)
    name = name or g.name
    if not events:
        return g.renamed(name)
    for a, e, b in g.transitions:
        if e in events and a != b:
            raise AutomatonError(f"{g.name}: event {e} already used in a non-selfloop transition")
    new = set(g.transitions)
    for q in range(g.state_count):
        for e in events:
            if e not in g.delta[q]:
                new.add((q, e, q))
    return Generator(name, g.state_count, g.initial, g.markers, g.alphabet | events, tuple(new), g.labels)


def meet_states(gs: Sequence[Generator], name: str | None = None) -> tuple[Generator, list[tuple[int, ...]]]:
    """Product in which every event must be defined in every operand (language intersection)."""
    gs = list(gs)
    name = name or "&".join(g.name for g in gs)
    alphabet = frozenset().union(*(g.alphabet for g in gs))
    if any(g.is_empty for g in gs):
        return Generator.empty(name, alphabet), []
    events = tuple(sorted(alphabet))
    tables = [g.table(events, foreign=False) for g in gs]
    marked = []
    for g in gs:
        m = np.zeros(g.state_count, dtype=np.uint8)
        m[list(g.markers)] = 1
        marked.append(m)
    states, trans, markers = kernels.sync_product(tables, [g.initial for g in gs], marked)
    g = Generator(name, len(states), 0, frozenset(markers), alphabet, tuple((a, events[e], b) for a, e, b in trans))
    return g, [tuple(s) for s in states]


def meet(gs: Sequence[Generator], name: str | None = None) -> Generator:
    return meet_states(gs, name)[0]


def edit(
    g: Generator,
    keep: set[int] | None = None,
    drop_transitions: set[tuple[int, int]] = frozenset(),
    unmark: set[int] = frozenset(),
    name: str | None = None,
) -> tuple[Generator, list[int]]:
    """Remove states/transitions and unmark states, then keep the reachable part.

    Returns the new generator and, for each new state, the old state id.
    """
    name = name or g.name
    if g.is_empty or (keep is not None and g.initial not in keep):
        return Generator.empty(name, g.alphabet), []
    delta = g.delta
    out, order = build(
        name,
        g.alphabet,
        g.initial,
        lambda q: [
            (e, t)
            for e, t in delta[q].items()
            if (keep is None or t in keep) and (q, e) not in drop_transitions
        ],
        lambda q: q in g.markers and q not in unmark,
        (lambda q: g.labels[q]) if g.labels else None,
    )
    return out, order


def trim_states(g: Generator, name: str | None = None) -> tuple[Generator, list[int]]:
    """:func:`trim` that also returns the old id of each surviving state."""
    if g.is_empty:
        return g if name is None else g.renamed(name), []
    return edit(g, reachable(g) & coreachable(g), name=name)
