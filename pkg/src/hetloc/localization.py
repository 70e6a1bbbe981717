"""Per-event local controllers from a partial-observation supervisor.

A local controller for a controllable event ``alpha`` tracks a quotient of
the supervisor's state space and decides only whether ``alpha`` is enabled.
Two supervisor states may share a quotient cell when they never disagree on
``alpha`` (one enabling it while the other disables it) and, where both can be
reached by plant-marked strings, agree on marking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .automata import (
    AutomatonError,
    EventTable,
    Generator,
    ObservationMask,
    build,
    language_equal,
    sync,
)
from .synthesis import POSupervisor, Verdict


class LocalizationError(AutomatonError):
    pass


@dataclass(frozen=True)
class ControlData:
    """Per-state control information of a supervisor for one event."""

    event: int
    enabled: tuple[bool, ...]
    disabled: tuple[bool, ...]
    marked_sup: tuple[bool, ...]
    marked_plant: tuple[bool, ...]

    def __len__(self) -> int:
        return len(self.enabled)

    @property
    def ever_disabled(self) -> bool:
        return any(self.disabled)


@dataclass(frozen=True)
class LocalController:
    automaton: Generator
    event: int
    source: str = ""

    @property
    def name(self) -> str:
        return self.automaton.name

    @property
    def alphabet(self) -> frozenset[int]:
        return self.automaton.alphabet

    @property
    def state_count(self) -> int:
        return self.automaton.state_count


@dataclass(frozen=True)
class Cover:
    """Cells of supervisor states plus the successor cell per (cell, event)."""

    cells: tuple[frozenset[int], ...]
    successor: dict
    cell_of: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class Localization:
    supervisor: str
    controllers: dict[int, LocalController]
    trivially_enabled: tuple[int, ...]

    def __iter__(self):
        return iter(self.controllers[e] for e in sorted(self.controllers))

    def __len__(self) -> int:
        return len(self.controllers)


def _base_name(name: str) -> str:
    return name[:-3] if name.endswith("SUP") and len(name) > 3 else name


def compute_control_data(sup: POSupervisor, plant: Generator, alpha: int, table: EventTable) -> ControlData:
    if not table[alpha].controllable:
        raise LocalizationError(f"event {alpha} is not controllable")
    g = sup.automaton
    en, dis, ms, mp = [], [], [], []
    for x in range(g.state_count):
        e = alpha in g.delta[x]
        en.append(e)
        dis.append((not e) and alpha in sup.eligible(x, plant))
        ms.append(x in g.markers)
        mp.append(sup.plant_marked(x, plant))
    return ControlData(alpha, tuple(en), tuple(dis), tuple(ms), tuple(mp))


def control_consistent(x: int, y: int, d: ControlData) -> bool:
    if d.enabled[x] and d.disabled[y]:
        return False
    if d.disabled[x] and d.enabled[y]:
        return False
    if d.marked_plant[x] and d.marked_plant[y] and d.marked_sup[x] != d.marked_sup[y]:
        return False
    return True


def _consistency_matrix(datas: Sequence[ControlData], n: int) -> np.ndarray:
    ok = np.ones((n, n), dtype=np.uint8)
    mp = np.zeros(n, dtype=bool)
    ms = np.zeros(n, dtype=bool)
    if datas:
        mp[:] = datas[0].marked_plant
        ms[:] = datas[0].marked_sup
    for d in datas:
        en = np.asarray(d.enabled, dtype=bool)
        di = np.asarray(d.disabled, dtype=bool)
        ok &= ~(np.outer(en, di) | np.outer(di, en))
    ok &= ~(np.outer(mp, mp) & (ms[:, None] != ms[None, :]))
    return ok


def _cover_from_blocks(g: Generator, blocks: list[int]) -> Cover:
    reps = sorted(set(blocks))
    idx = {r: i for i, r in enumerate(reps)}
    cell_of = tuple(idx[b] for b in blocks)
    cells = [set() for _ in reps]
    for q, c in enumerate(cell_of):
        cells[c].add(q)
    succ: dict[tuple[int, int], int] = {}
    for a, e, b in g.transitions:
        key = (cell_of[a], e)
        prev = succ.setdefault(key, cell_of[b])
        if prev != cell_of[b]:
            raise LocalizationError("partition is not closed under successors")
    return Cover(tuple(frozenset(c) for c in cells), succ, cell_of)


def build_control_cover(sup: POSupervisor, d: ControlData | Sequence[ControlData]) -> Cover:
    """Greedy control-consistent, successor-closed partition of the supervisor states."""
    datas = [d] if isinstance(d, ControlData) else list(d)
    g = sup.automaton
    if g.is_empty:
        return Cover((), {}, ())
    compat = _consistency_matrix(datas, g.state_count)
    blocks = kernels.greedy_partition(g.table(), compat)
    return _cover_from_blocks(g, blocks)


def check_cover(sup: POSupervisor, cover: Cover, datas: Sequence[ControlData]) -> Verdict:
    """Every cell pairwise consistent and every cell/event successor set inside one cell."""
    g = sup.automaton
    for cell in cover.cells:
        members = sorted(cell)
        for i, x in enumerate(members):
            for y in members[i:]:
                for d in datas:
                    if not control_consistent(x, y, d):
                        return Verdict(False, ("inconsistent", x, y, d.event))
    for ci, cell in enumerate(cover.cells):
        for e in g.alphabet:
            targets = {g.delta[x][e] for x in cell if e in g.delta[x]}
            if not targets:
                continue
            dst = cover.successor.get((ci, e))
            if dst is None or not targets <= cover.cells[dst]:
                return Verdict(False, ("not follower-closed", ci, e))
    return Verdict(True)


def _cell_marking(cover: Cover, datas: Sequence[ControlData]) -> list[bool]:
    d = datas[0]
    return [not any(d.marked_plant[x] and not d.marked_sup[x] for x in cell) for cell in cover.cells]


def induce_local_controller(
    sup: POSupervisor,
    cover: Cover,
    alpha: int,
    data: ControlData,
    mask: ObservationMask | None = None,
    name: str | None = None,
) -> LocalController:
    """Quotient of the supervisor by ``cover``, keeping only events ``alpha`` needs."""
    g = sup.automaton
    name = name or f"{_base_name(sup.name)}_{alpha}"
    if g.is_empty:
        return LocalController(Generator.empty(name, {alpha}), alpha, sup.name)
    check = check_cover(sup, cover, [data])
    if not check:
        raise LocalizationError(f"invalid cover: {check.witness}")
    moving = {e for (c, e), t in cover.successor.items() if t != c}
    if mask is not None:
        leaks = {e for e in moving if e not in mask and e != alpha}
        if leaks:
            raise LocalizationError(f"unobservable events {sorted(leaks)} change cells")
    alphabet = frozenset(moving | {alpha})
    n = len(cover.cells)
    trans = {}
    for (c, e), t in cover.successor.items():
        if e in alphabet:
            trans[(c, e)] = t
    for c in range(n):
        for e in alphabet:
            if e != alpha and (c, e) not in trans:
                trans[(c, e)] = c
    marked = _cell_marking(cover, [data])
    out, _ = build(
        name,
        alphabet,
        cover.cell_of[g.initial],
        lambda c: [(e, t) for (cc, e), t in trans.items() if cc == c],
        lambda c: marked[c],
    )
    return LocalController(out, alpha, sup.name)


def localize(
    sup: POSupervisor,
    plant: Generator,
    table: EventTable,
    events: Iterable[int] | None = None,
) -> Localization:
    """One local controller per controllable event the supervisor ever disables."""
    g = sup.automaton
    if g.is_empty:
        raise LocalizationError(f"{sup.name} is empty; no controller can realize the empty language")
    candidates = sorted(table.controllable & g.alphabet if events is None else events)
    mask = table.mask()
    out: dict[int, LocalController] = {}
    trivial = []
    datas = {}
    for alpha in candidates:
        d = datas[alpha] = compute_control_data(sup, plant, alpha, table)
        if not d.ever_disabled:
            trivial.append(alpha)
            continue
        cover = build_control_cover(sup, d)
        out[alpha] = induce_local_controller(sup, cover, alpha, d, mask)
    if not out and restricts_marking(sup, plant):
        # nothing is disabled but the marking must still be carried somewhere
        if not trivial:
            raise LocalizationError(f"{sup.name} restricts marking but has no controllable event to carry it")
        alpha = trivial.pop(0)
        d = datas[alpha]
        out[alpha] = induce_local_controller(sup, build_control_cover(sup, d), alpha, d, mask)
    return Localization(sup.name, out, tuple(trivial))


def restricts_marking(sup: POSupervisor, plant: Generator) -> bool:
    """Some supervisor state over a marked plant state is itself unmarked."""
    g = sup.automaton
    return any(sup.plant_marked(x, plant) and x not in g.markers for x in range(g.state_count))


def check_local_controller(loc: LocalController, mask: ObservationMask) -> Verdict:
    """Alphabet scope, unobservable selfloops and "only alpha is ever disabled"."""
    g = loc.automaton
    alpha = loc.event
    if alpha not in g.alphabet:
        return Verdict(False, ("alphabet lacks controlled event", alpha))
    extra = {e for e in g.alphabet if e != alpha and e not in mask}
    if extra:
        return Verdict(False, ("unobservable events in alphabet", tuple(sorted(extra))))
    for a, e, b in g.transitions:
        if e not in mask and a != b:
            return Verdict(False, ("unobservable transition changes state", (a, e, b)))
    for q in range(g.state_count):
        for e in g.alphabet:
            if e != alpha and e not in g.delta[q]:
                return Verdict(False, ("disables a foreign event", (q, e)))
    return Verdict(True)


def merge_local_controllers(locs: Sequence[LocalController], alpha: int, name: str | None = None) -> LocalController:
    """Synchronous product of every local controller for ``alpha``."""
    locs = list(locs)
    if not locs:
        raise LocalizationError("nothing to merge")
    wrong = [l.name for l in locs if l.event != alpha]
    if wrong:
        raise LocalizationError(f"controllers {wrong} do not control event {alpha}")
    name = name or f"LOC_{alpha}"
    if len(locs) == 1:
        return LocalController(locs[0].automaton.renamed(name), alpha, locs[0].source)
    return LocalController(sync([l.automaton for l in locs], name=name), alpha, "+".join(l.source for l in locs))


def verify_control_equivalence(plant: Generator, sup: POSupervisor | Generator, locs: Iterable[LocalController]):
    """Compare ``plant || locs`` with ``plant || sup`` on closed and marked languages."""
    sup_gen = sup.automaton if isinstance(sup, POSupervisor) else sup
    loc_gens = [l.automaton for l in locs]
    return language_equal(sync([plant] + loc_gens), sync([plant, sup_gen]))


def reduce_supervisor(sup: POSupervisor, plant: Generator, table: EventTable, name: str | None = None) -> Generator:
    """Control-equivalent quotient over all controllable events at once.

    Events that never change cells and are never disabled are dropped from the
    alphabet. Falls back to the supervisor itself if the check fails.
    """
    g = sup.automaton
    name = name or f"{_base_name(sup.name)}SIM"
    if g.is_empty or g.state_count == 1:
        return g.renamed(name)
    events = sorted(table.controllable & g.alphabet)
    datas = [compute_control_data(sup, plant, a, table) for a in events]
    if not datas:
        datas = [
            ControlData(
                -1,
                (False,) * g.state_count,
                (False,) * g.state_count,
                tuple(x in g.markers for x in range(g.state_count)),
                tuple(sup.plant_marked(x, plant) for x in range(g.state_count)),
            )
        ]
    compat = _consistency_matrix(datas, g.state_count)
    blocks = kernels.greedy_partition(g.table(), compat)
    cover = _cover_from_blocks(g, blocks)
    disabled = {d.event for d in datas if d.ever_disabled}
    moving = {e for (c, e), t in cover.successor.items() if t != c}
    alphabet = frozenset(moving | disabled)
    marked = _cell_marking(cover, datas)
    trans = {k: t for k, t in cover.successor.items() if k[1] in alphabet}
    out, _ = build(
        name,
        alphabet,
        cover.cell_of[g.initial],
        lambda c: [(e, t) for (cc, e), t in trans.items() if cc == c],
        lambda c: marked[c],
    )
    if out.state_count > g.state_count or not verify_control_equivalence(plant, g, [LocalController(out, -1)]):
        return g.renamed(name)
    return out


__all__ = [
    "ControlData",
    "Cover",
    "LocalController",
    "Localization",
    "LocalizationError",
    "build_control_cover",
    "check_cover",
    "check_local_controller",
    "compute_control_data",
    "control_consistent",
    "induce_local_controller",
    "localize",
    "merge_local_controllers",
    "reduce_supervisor",
    "restricts_marking",
    "verify_control_equivalence",
]
