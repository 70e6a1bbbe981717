"""Heterarchical synthesis and localization pipeline.

The stages, in order:

1. one partial-observation supervisor per specification, built against the
   plant components it shares events with;
2. subsystems composed from a manifest-given grouping, with a coordinator
   for every blocking subsystem;
3. the shared alphabet of the subsystems and in-between supervisors, its
   observer extension, subsystem abstractions and reduced in-between
   supervisors;
4. a coordinator for the abstracted top group when it blocks;
5. (one top group, so the abstraction loop ends after one pass);
6. per-event local controllers for every supervisor and coordinator, merged
   per event and grouped per plant component.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from . import kernels
from .automata import (
    AutomatonError,
    EventTable,
    Generator,
    ObservationMask,
    determinize,
    is_nonblocking,
    language_equal,
    project_generator,
    sync,
    trim,
)
from .localization import (
    LocalController,
    Localization,
    check_local_controller,
    localize,
    merge_local_controllers,
    reduce_supervisor,
    verify_control_equivalence,
)
from .synthesis import (
    POSupervisor,
    SynthesisError,
    SynthesisProblem,
    Verdict,
    build_po_supervisor,
    check_relative_observability,
    is_controllable,
    realization_check,
    sup_rco,
)
from .verify import ClosedLoop, check_feasibility, exhaustive_explore

log = logging.getLogger(__name__)


class PipelineError(AutomatonError):
    def __init__(self, stage: str, message: str, witness=None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.witness = witness


@dataclass(frozen=True)
class Group:
    name: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class PipelineManifest:
    plants: tuple[Generator, ...]
    specs: tuple[Generator, ...]
    table: EventTable
    groups: tuple[Group, ...] = ()
    between: tuple[str, ...] = ()
    abstraction_seed: frozenset[int] | None = None
    depth: int = 12
    state_budget: int = 10**7

    def __post_init__(self):
        names = [g.name for g in self.plants + self.specs]
        if len(set(names)) != len(names):
            raise PipelineError("manifest", "duplicate generator names")
        for g in self.plants + self.specs:
            self.table.covers(g)
        for p in self.plants:
            if not any(p.alphabet & s.alphabet for s in self.specs):
                raise PipelineError("manifest", f"plant {p.name} is coupled to no specification")
        known = set(self.module_names)
        for grp in self.groups:
            for m in grp.members:
                if m not in known:
                    raise PipelineError("manifest", f"group {grp.name} references unknown module {m}")
        for m in self.between:
            if m not in known:
                raise PipelineError("manifest", f"unknown in-between module {m}")

    @property
    def mask(self) -> ObservationMask:
        return self.table.mask()

    @property
    def module_names(self) -> list[str]:
        return [p.name for p in self.plants] + [supervisor_name(s) for s in self.specs]

    def plant(self, name: str) -> Generator:
        for p in self.plants:
            if p.name == name:
                return p
        raise KeyError(name)


def supervisor_name(spec: Generator | str) -> str:
    return f"{getattr(spec, 'name', spec)}SUP"


@dataclass(frozen=True)
class Decentralized:
    spec: Generator
    plant: Generator
    components: tuple[str, ...]
    language: Generator
    supervisor: POSupervisor


@dataclass(frozen=True)
class Subsystem:
    name: str
    members: tuple[str, ...]
    automaton: Generator
    coordinator: POSupervisor | None
    nonblocking: Generator


@dataclass
class HeterarchicalArray:
    table: EventTable
    decentralized: dict[str, Decentralized] = field(default_factory=dict)
    subsystems: dict[str, Subsystem] = field(default_factory=dict)
    coordinators: dict[str, tuple[POSupervisor, Generator]] = field(default_factory=dict)
    shared: frozenset[int] = frozenset()
    extended: frozenset[int] = frozenset()
    abstractions: dict[str, Generator] = field(default_factory=dict)
    reduced: dict[str, Generator] = field(default_factory=dict)
    top: Generator | None = None
    localizations: dict[str, Localization] = field(default_factory=dict)
    merged: dict[int, LocalController] = field(default_factory=dict)
    by_component: dict[str, list[str]] = field(default_factory=dict)
    report: list[dict] = field(default_factory=list)

    @property
    def supervisors(self) -> dict[str, POSupervisor]:
        return {n: d.supervisor for n, d in self.decentralized.items()}

    def controllers(self) -> list[LocalController]:
        return [c for loc in self.localizations.values() for c in loc]

    def controlled_components(self) -> list[Generator]:
        """Every supervisor and coordinator automaton."""
        out = [d.supervisor.automaton for d in self.decentralized.values()]
        out += [co.automaton for co, _ in self.coordinators.values()]
        return out

    @property
    def ok(self) -> bool:
        return all(c["pass"] for entry in self.report for c in entry["checks"])


def _check(name: str, verdict) -> dict:
    witness = getattr(verdict, "witness", None)
    if witness is None:
        witness = getattr(verdict, "string", None)
    passed = bool(verdict)
    return {"name": name, "pass": passed, "witness": None if passed else _jsonable(witness)}


def _jsonable(w):
    if w is None or isinstance(w, (bool, int, str)):
        return w
    if isinstance(w, (tuple, list)):
        return [_jsonable(x) for x in w]
    if isinstance(w, (set, frozenset)):
        return sorted(_jsonable(x) for x in w)
    return str(w)


def _entry(stage: str, artifact: str, states: int, checks: Sequence[dict] = ()) -> dict:
    return {"stage": stage, "artifact": artifact, "states": states, "checks": list(checks)}


# --------------------------------------------------------------------------
# step 1


def coupled_plants(spec: Generator, plants: Sequence[Generator]) -> list[Generator]:
    return [p for p in plants if p.alphabet & spec.alphabet]


def build_decentralized_plant(spec: Generator, plants: Sequence[Generator]) -> Generator:
    """Synchronous product of the plant components sharing events with ``spec``."""
    comps = coupled_plants(spec, plants)
    if not comps:
        raise PipelineError("step1", f"specification {spec.name} is coupled to no plant")
    return sync(comps, name="||".join(p.name for p in comps))


def synthesize_decentralized(manifest: PipelineManifest) -> dict[str, Decentralized]:
    out = {}
    for spec in manifest.specs:
        plant = build_decentralized_plant(spec, manifest.plants)
        name = supervisor_name(spec)
        p = SynthesisProblem(plant, spec, manifest.mask, manifest.table)
        k = sup_rco(p, name=f"{spec.name}K")
        if k.is_empty:
            raise PipelineError("step1", f"{name}: empty supremal sublanguage")
        sup = build_po_supervisor(k, plant, manifest.mask, manifest.table, name=name, check=False)
        comps = tuple(c.name for c in coupled_plants(spec, manifest.plants))
        out[name] = Decentralized(spec, plant, comps, k, sup)
    return out


# --------------------------------------------------------------------------
# step 2


def compose_subsystem(members: Sequence[str], modules: Mapping[str, Generator], name: str = "SUB") -> Generator:
    if not members:
        raise PipelineError("step2", f"group {name} is empty")
    missing = [m for m in members if m not in modules]
    if missing:
        raise PipelineError("step2", f"group {name} references unknown modules {missing}")
    return sync([modules[m] for m in members], name=name)


def identity_coordinator(sub: Generator, name: str) -> POSupervisor:
    gen = Generator.create(name, 1, [(0, e, 0) for e in sorted(sub.alphabet)], alphabet=sub.alphabet)
    states = frozenset(range(sub.state_count))
    return POSupervisor(gen, (frozenset(),), (frozenset({0}),), (states,), sub.name)


def synthesize_coordinator(
    sub: Generator, mask: ObservationMask, table: EventTable, name: str = "CO"
) -> POSupervisor:
    """Partial-observation coordinator removing the blocking strings of ``sub``."""
    if sub.is_empty:
        raise SynthesisError(f"{name}: subsystem {sub.name} is empty")
    if is_nonblocking(sub):
        return identity_coordinator(sub, name)
    p = SynthesisProblem(sub, trim(sub), mask, table)
    k = sup_rco(p, name=f"{name}K")
    if k.is_empty:
        raise SynthesisError(f"{name}: no nonblocking partial-observation coordinator for {sub.name}")
    return build_po_supervisor(k, sub, mask, table, name=name, check=False)


# --------------------------------------------------------------------------
# step 3


def shared_alphabet(gs: Sequence[Generator]) -> frozenset[int]:
    """Union of the pairwise alphabet intersections."""
    if len(gs) < 2:
        raise ValueError("shared_alphabet needs at least two generators")
    out: set[int] = set()
    for a, b in combinations(gs, 2):
        out |= a.alphabet & b.alphabet
    return frozenset(out)


def _marked_inclusion(a: Generator, a0: int, d_rows, d_marked, d0: int) -> tuple[int, ...] | None:
    """Shortest string marked from ``a0`` in ``a`` but not from ``d0`` in ``d``."""
    ad = a.delta
    start = (a0, d0)
    paths = {start: ()}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        x, y = node
        if x in a.markers and (y < 0 or not d_marked[y]):
            return paths[node]
        for e in sorted(ad[x]):
            y2 = -1 if y < 0 else d_rows[y].get(e, -1)
            nxt = (ad[x][e], y2)
            if nxt not in paths:
                paths[nxt] = paths[node] + (e,)
                queue.append(nxt)
    return None


def check_natural_observer(g: Generator, keep: Iterable[int]) -> Verdict:
    """Whether the natural projection onto ``keep`` is an Lm(g)-observer.

    For every string ``s`` of ``L(g)`` and every continuation ``t`` such that
    ``P(s)t`` lies in ``P(Lm(g))``, some extension ``u`` of ``s`` with
    ``P(u) = t`` must end in a marker. The witness is ``(s, t)``.
    """
    keep = frozenset(keep) & g.alphabet
    if g.is_empty:
        return Verdict(True)
    a, _ = determinize(g, keep)
    events = g.events
    col = {e: i for i, e in enumerate(events)}
    eps = [col[e] for e in events if e not in keep]
    kept = [col[e] for e in events if e in keep]
    table = g.table(events)
    cache: dict[int, tuple] = {}

    def local(q):
        # abstraction of g restarted at q
        r = cache.get(q)
        if r is None:
            subsets, trans = kernels.subset_construction(table, eps, kept, [q])
            rows: list[dict[int, int]] = [{} for _ in subsets]
            for x, e, y in trans:
                rows[x][events[e]] = y
            marked = [any(p in g.markers for p in s) for s in subsets]
            r = cache[q] = (rows, marked)
        return r

    gd, ad = g.delta, a.delta
    start = (g.initial, a.initial)
    paths = {start: ()}
    queue = deque([start])
    checked = set()
    while queue:
        node = queue.popleft()
        q, x = node
        if node not in checked:
            checked.add(node)
            rows, marked = local(q)
            bad = _marked_inclusion(a, x, rows, marked, 0)
            if bad is not None:
                return Verdict(False, (paths[node], bad))
        for e in sorted(gd[q]):
            nxt = (gd[q][e], ad[x][e] if e in keep else x)
            if nxt not in paths:
                paths[nxt] = paths[node] + (e,)
                queue.append(nxt)
    return Verdict(True)


def minimal_observer_extension(gs: Sequence[Generator], seed: Iterable[int]) -> frozenset[int]:
    """Grow ``seed`` until the projection is an observer for every generator.

    Each round adds the smallest unkept event leaving the state reached by a
    violation witness (or, failing that, the smallest unkept event of that
    generator). The result is a reasonable extension, not a minimum one.
    """
    keep = set(seed)
    while True:
        for g in gs:
            v = check_natural_observer(g, keep)
            if v:
                continue
            s, _ = v.witness
            q = g.run(s)
            local = sorted(e for e in g.delta[q] if e not in keep) if q is not None else []
            pool = local or sorted(g.alphabet - keep)
            keep.add(pool[0])
            break
        else:
            return frozenset(keep)


# --------------------------------------------------------------------------
# pipeline


def _localize_all(array: HeterarchicalArray, targets: list[tuple[POSupervisor, Generator]], table: EventTable):
    for sup, plant in targets:
        loc = localize(sup, plant, table)
        array.localizations[sup.name] = loc
        checks = [_check("control equivalence", verify_control_equivalence(plant, sup, loc))]
        for c in loc:
            checks.append(_check(f"{c.name} invariants", check_local_controller(c, table.mask())))
        array.report.append(
            _entry("step6", f"{sup.name}:localization", sup.state_count, checks) | {"controllers": len(loc)}
        )
        for c in loc:
            array.report.append(_entry("step6", c.name, c.state_count))
        if loc.trivially_enabled:
            array.report.append(
                _entry("step6", f"{sup.name}:trivially-enabled", len(loc.trivially_enabled))
                | {"events": list(loc.trivially_enabled)}
            )


def run_pipeline(manifest: PipelineManifest, out: str | None = None) -> HeterarchicalArray:
    """Run every stage; optionally write all artifacts and the report to ``out``."""
    table, mask = manifest.table, manifest.mask
    array = HeterarchicalArray(table)

    # step 1
    try:
        array.decentralized = synthesize_decentralized(manifest)
    except SynthesisError as exc:
        raise PipelineError("step1", str(exc), exc.witness) from exc
    for name, d in array.decentralized.items():
        checks = [
            _check("controllable", is_controllable(d.language, d.plant, table)),
            _check("relatively observable", check_relative_observability(d.language, d.language, d.plant, mask)),
            _check("realization", realization_check(d.supervisor, d.language, d.plant)),
            _check("feasible", check_feasibility([d.supervisor.automaton], mask, samples=50)),
        ]
        array.report.append(_entry("step1", name, d.supervisor.state_count, checks))
    log.info("step 1: %d supervisors", len(array.decentralized))

    # step 2
    modules: dict[str, Generator] = {p.name: p for p in manifest.plants}
    modules.update({n: d.supervisor.automaton for n, d in array.decentralized.items()})
    groups = list(manifest.groups)
    if not groups:
        groups = [Group("SYS", tuple(modules))]
    n_co = 0
    for grp in groups:
        sub = compose_subsystem(grp.members, modules, grp.name)
        nb = is_nonblocking(sub)
        checks = []
        co = None
        result = sub
        if not nb:
            n_co += 1
            co = synthesize_coordinator(sub, mask, table, name=f"CO{n_co}")
            result = trim(sync([sub, co.automaton]), name=f"N{grp.name}")
            array.coordinators[co.name] = (co, sub)
            checks.append(_check(f"{co.name} realization", language_equal(sync([sub, co.automaton]), result)))
            checks.append(_check(f"N{grp.name} nonblocking", is_nonblocking(result)))
            array.report.append(_entry("step2", co.name, co.state_count))
        array.subsystems[grp.name] = Subsystem(grp.name, grp.members, sub, co, result)
        array.report.append(_entry("step2", grp.name, sub.state_count, checks) | {"nonblocking": bool(nb)})
        if co is not None:
            array.report.append(_entry("step2", result.name, result.state_count))

    # steps 3 and 4
    nets = [s.nonblocking for s in array.subsystems.values()]
    between = list(manifest.between)
    if len(nets) + len(between) >= 2:
        for name in between:
            d = array.decentralized[name]
            red = reduce_supervisor(d.supervisor, d.plant, table, name=name.removesuffix("SUP") + "SIM")
            array.reduced[name] = red
            eq = verify_control_equivalence(d.plant, d.supervisor, [LocalController(red, -1)])
            array.report.append(_entry("step3", red.name, red.state_count, [_check("control equivalence", eq)]))
        inputs = nets + list(array.reduced.values())
        seed = manifest.abstraction_seed
        array.shared = frozenset(seed) if seed is not None else shared_alphabet(inputs)
        array.extended = minimal_observer_extension(inputs, array.shared)
        obs_checks = [_check(f"observer {g.name}", check_natural_observer(g, array.extended)) for g in inputs]
        array.report.append(
            _entry("step3", "shared-alphabet", len(array.extended), obs_checks)
            | {"shared": sorted(array.shared), "extended": sorted(array.extended)}
        )
        for g in nets:
            qc = project_generator(g, array.extended, name=f"QC_{g.name}").renamed(f"QC_{g.name}")
            array.abstractions[qc.name] = qc
            array.report.append(_entry("step3", qc.name, qc.state_count))
        top = sync(list(array.abstractions.values()) + list(array.reduced.values()), name="TOP")
        array.top = top
        nb = is_nonblocking(top)
        array.report.append(_entry("step4", "TOP", top.state_count) | {"nonblocking": bool(nb)})
        if not nb:
            n_co += 1
            co = synthesize_coordinator(top, mask, table, name=f"CO{n_co}")
            array.coordinators[co.name] = (co, top)
            ok = is_nonblocking(sync([top, co.automaton]))
            array.report.append(_entry("step4", co.name, co.state_count, [_check("top nonblocking", ok)]))

    # step 6
    targets = [(d.supervisor, d.plant) for d in array.decentralized.values()]
    targets += list(array.coordinators.values())
    _localize_all(array, targets, table)
    per_event: dict[int, list[LocalController]] = {}
    for c in array.controllers():
        per_event.setdefault(c.event, []).append(c)
    for e in sorted(per_event):
        m = merge_local_controllers(per_event[e], e, name=f"LOC_{e}")
        array.merged[e] = m
        owner = [p.name for p in manifest.plants if e in p.alphabet]
        for p in owner:
            array.by_component.setdefault(p, []).extend(c.name for c in per_event[e])
        inv = check_local_controller(m, mask)
        array.report.append(_entry("step6", m.name, m.state_count, [_check("invariants", inv)]))
    if out is not None:
        from .io import write_array

        write_array(array, manifest, out)
    return array


# --------------------------------------------------------------------------
# global verification


@dataclass
class GlobalReport:
    mode: str
    states: int
    checks: list[dict]

    @property
    def ok(self) -> bool:
        return all(c["pass"] for c in self.checks)


def _count_reachable(gs: Sequence[Generator], limit: int) -> int:
    """Reachable joint states of ``sync(gs)``, or ``limit + 1`` once exceeded."""
    loop = ClosedLoop.start(gs)
    events = sorted(loop.alphabet)
    seen = {loop.state}
    stack = [loop]
    while stack:
        cur = stack.pop()
        for e in events:
            nxt = cur.step(e)
            if nxt and nxt.state not in seen:
                seen.add(nxt.state)
                if len(seen) > limit:
                    return limit + 1
                stack.append(nxt)
    return len(seen)


def verify_global_equivalence(
    array: HeterarchicalArray,
    manifest: PipelineManifest,
    budget: int | None = None,
    depth: int | None = None,
) -> GlobalReport:
    """Safety, nonblocking and LOC-versus-SUP equality on the whole system."""
    budget = manifest.state_budget if budget is None else budget
    depth = manifest.depth if depth is None else depth
    plants = list(manifest.plants)
    sups = array.controlled_components()
    locs = [m.automaton for m in array.merged.values()]
    checks = []
    for name, loc in array.localizations.items():
        if name in array.decentralized:
            d = array.decentralized[name]
            sup, plant = d.supervisor, d.plant
        else:
            sup, plant = array.coordinators[name]
        checks.append(_check(f"{name} localization", verify_control_equivalence(plant, sup, loc)))
    checks.append(_check("feasibility", check_feasibility(array.controllers() + locs, manifest.mask)))
    size = _count_reachable(plants + sups, budget)
    if size <= budget:
        sys_sup = sync(plants + sups, name="SYS_SUP")
        sys_loc = sync(plants + locs, name="SYS_LOC")
        checks.append(_check("safety", language_equal(sync([sys_loc] + list(manifest.specs)), sys_loc)))
        checks.append(_check("nonblocking", is_nonblocking(sys_loc)))
        checks.append(_check("LOC equals SUP", language_equal(sys_loc, sys_sup)))
        return GlobalReport("exact", sys_sup.state_count, checks)
    r_sup = exhaustive_explore(ClosedLoop.start(plants, sups), depth, manifest.specs)
    r_loc = exhaustive_explore(ClosedLoop.start(plants, locs), depth, manifest.specs)
    checks.append(_check("safety", Verdict(not r_loc.safety, r_loc.safety[:1])))
    checks.append(_check("nonblocking", Verdict(not r_loc.blocking, r_loc.blocking[:1])))
    same = r_loc.closed == r_sup.closed and r_loc.marked == r_sup.marked
    diff = sorted((r_loc.closed ^ r_sup.closed) | (r_loc.marked ^ r_sup.marked), key=lambda s: (len(s), s))
    checks.append(_check("LOC equals SUP", Verdict(same, diff[:1])))
    return GlobalReport(f"bounded-depth-{depth}", r_sup.states, checks)


__all__ = [
    "Decentralized",
    "GlobalReport",
    "Group",
    "HeterarchicalArray",
    "PipelineError",
    "PipelineManifest",
    "Subsystem",
    "build_decentralized_plant",
    "check_natural_observer",
    "compose_subsystem",
    "coupled_plants",
    "identity_coordinator",
    "minimal_observer_extension",
    "reduce_supervisor",
    "run_pipeline",
    "shared_alphabet",
    "supervisor_name",
    "synthesize_coordinator",
    "synthesize_decentralized",
    "verify_global_equivalence",
]
