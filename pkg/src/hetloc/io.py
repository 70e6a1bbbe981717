"""JSON automaton and manifest files, DOT export, artifact directories.

Automaton files are canonical: keys in a fixed order, events sorted by id,
transitions sorted by (source, event), one transition per line. Saving the
same generator twice yields the same bytes.
"""

from __future__ import annotations

import json
import os
import shutil
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping

from .automata import AutomatonError, EventAttributes, EventTable, Generator
from .heterarchical import (
    Decentralized,
    Group,
    HeterarchicalArray,
    PipelineManifest,
    Subsystem,
    build_decentralized_plant,
    coupled_plants,
    supervisor_name,
)
from .localization import LocalController, Localization
from .synthesis import POSupervisor


class FormatError(AutomatonError):
    """Malformed input file; ``where`` names the file and field."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


# --------------------------------------------------------------------------
# automaton files


def _dump(value: Any) -> str:
    return json.dumps(value, separators=(", ", ": "))


def dumps_automaton(g: Generator, table: EventTable, annotations: Mapping | None = None) -> str:
    lines = ["{"]
    lines.append(f'  "name": {_dump(g.name)},')
    lines.append(f'  "states": {g.state_count},')
    lines.append(f'  "initial": {g.initial},')
    lines.append(f'  "marker": {_dump(sorted(g.markers))},')
    events = []
    for e in sorted(g.alphabet):
        a = table[e]
        events.append({"id": e, "controllable": a.controllable, "observable": a.observable})
    if events:
        lines.append('  "events": [')
        lines.append(",\n".join(f"    {_dump(ev)}" for ev in events))
        lines.append("  ],")
    else:
        lines.append('  "events": [],')
    trans = sorted(g.transitions)
    tail = "," if annotations else ""
    if trans:
        lines.append('  "transitions": [')
        lines.append(",\n".join(f"    {_dump(list(t))}" for t in trans))
        lines.append("  ]" + tail)
    else:
        lines.append('  "transitions": []' + tail)
    if annotations:
        lines.append(f'  "annotations": {json.dumps(annotations, sort_keys=True)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _require(doc: Mapping, key: str, kind, where: str):
    if key not in doc:
        raise FormatError(where, f"missing field '{key}'")
    value = doc[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise FormatError(where, f"field '{key}' must be an integer")
    if kind is not int and not isinstance(value, kind):
        raise FormatError(where, f"field '{key}' must be {kind.__name__}")
    return value


def _parse(text: str, where: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(where, f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def loads_automaton(text: str, where: str = "<string>") -> tuple[Generator, EventTable, dict]:
    doc = _parse(text, where)
    if not isinstance(doc, dict):
        raise FormatError(where, "top level must be an object")
    name = _require(doc, "name", str, where)
    states = _require(doc, "states", int, where)
    initial = _require(doc, "initial", int, where)
    marker = _require(doc, "marker", list, where)
    events = _require(doc, "events", list, where)
    trans = _require(doc, "transitions", list, where)
    if states < 0:
        raise FormatError(f"{where}:states", "must be non-negative")
    table = EventTable()
    for i, ev in enumerate(events):
        w = f"{where}:events[{i}]"
        if not isinstance(ev, dict):
            raise FormatError(w, "must be an object")
        eid = _require(ev, "id", int, w)
        con = _require(ev, "controllable", bool, w)
        obs = _require(ev, "observable", bool, w)
        if eid < 0:
            raise FormatError(w, "event ids must be non-negative")
        if eid in table:
            raise FormatError(w, f"event {eid} declared twice")
        table.register(eid, EventAttributes(con, obs))
    seen = set()
    triples = []
    for i, t in enumerate(trans):
        w = f"{where}:transitions[{i}]"
        if not (isinstance(t, list) and len(t) == 3 and all(isinstance(x, int) and not isinstance(x, bool) for x in t)):
            raise FormatError(w, "must be [source, event, target]")
        a, e, b = t
        if not (0 <= a < states and 0 <= b < states):
            raise FormatError(w, f"state index out of range 0..{states - 1}")
        if e not in table:
            raise FormatError(w, f"event {e} is not declared")
        if (a, e) in seen:
            raise FormatError(w, f"duplicate transition for state {a} and event {e}")
        seen.add((a, e))
        triples.append((a, e, b))
    for i, m in enumerate(marker):
        if not isinstance(m, int) or not 0 <= m < states:
            raise FormatError(f"{where}:marker[{i}]", "state index out of range")
    if states == 0:
        if marker or triples:
            raise FormatError(where, "an empty generator has no markers or transitions")
        g = Generator.empty(name, table.events)
    else:
        if not 0 <= initial < states:
            raise FormatError(f"{where}:initial", "state index out of range")
        g = Generator.create(name, states, triples, marker, initial, table.events)
    ann = doc.get("annotations") or {}
    if not isinstance(ann, dict):
        raise FormatError(f"{where}:annotations", "must be an object")
    return g, table, ann


def save_automaton(path: str | os.PathLike, g: Generator, table: EventTable, annotations: Mapping | None = None):
    Path(path).write_text(dumps_automaton(g, table, annotations))


def load_automaton(path: str | os.PathLike) -> tuple[Generator, EventTable, dict]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise FormatError(str(p), exc.strerror or "cannot read") from None
    return loads_automaton(text, str(p))


def load_generators(paths: Iterable[str | os.PathLike]) -> tuple[list[Generator], EventTable]:
    gens, table = [], EventTable()
    for p in paths:
        g, t, _ = load_automaton(p)
        try:
            table = table.merged(t)
        except AutomatonError as exc:
            raise FormatError(str(p), str(exc)) from None
        gens.append(g)
    return gens, table


# --------------------------------------------------------------------------
# manifests


def load_manifest(path: str | os.PathLike) -> tuple[PipelineManifest, str | None]:
    """Returns the manifest and its output directory (resolved, or None)."""
    path = Path(path)
    try:
        doc = _parse(path.read_text(), str(path))
    except OSError as exc:
        raise FormatError(str(path), exc.strerror or "cannot read") from None
    where = str(path)
    if not isinstance(doc, dict):
        raise FormatError(where, "top level must be an object")
    base = path.parent

    def resolve(items, key):
        if not all(isinstance(x, str) for x in items):
            raise FormatError(f"{where}:{key}", "entries must be paths")
        return [base / x for x in items]

    plants, t1 = load_generators(resolve(_require(doc, "plants", list, where), "plants"))
    specs, t2 = load_generators(resolve(_require(doc, "specs", list, where), "specs"))
    try:
        table = t1.merged(t2)
    except AutomatonError as exc:
        raise FormatError(where, str(exc)) from None
    unobs = doc.get("unobservable")
    if unobs is not None:
        if not isinstance(unobs, list) or not all(isinstance(e, int) for e in unobs):
            raise FormatError(f"{where}:unobservable", "must be a list of event ids")
        unknown = sorted(set(unobs) - table.events)
        if unknown:
            raise FormatError(f"{where}:unobservable", f"unknown events {unknown}")
        table = EventTable({e: EventAttributes(a.controllable, e not in unobs) for e, a in table.items()})
    groups = []
    for i, grp in enumerate(doc.get("groups", [])):
        w = f"{where}:groups[{i}]"
        if not isinstance(grp, dict):
            raise FormatError(w, "must be an object")
        members = _require(grp, "members", list, w)
        groups.append(Group(_require(grp, "name", str, w), tuple(members)))
    between = doc.get("between", [])
    flags = doc.get("flags", {}) or {}
    if flags.get("harmless_removal"):
        raise FormatError(f"{where}:flags", "harmless_removal is not supported")
    seed = doc.get("abstraction_seed")
    known = {g.name for g in plants} | {supervisor_name(s) for s in specs}
    for grp in groups:
        dangling = [m for m in grp.members if m not in known]
        if dangling:
            raise FormatError(f"{where}:groups", f"group {grp.name} references unknown modules {dangling}")
    dangling = [m for m in between if m not in known]
    if dangling:
        raise FormatError(f"{where}:between", f"unknown modules {dangling}")
    try:
        manifest = PipelineManifest(
            tuple(plants),
            tuple(specs),
            table,
            tuple(groups),
            tuple(between),
            frozenset(seed) if seed is not None else None,
            int(flags.get("depth", 12)),
            int(flags.get("state_budget", 10**7)),
        )
    except AutomatonError as exc:
        raise FormatError(where, str(exc)) from None
    out = doc.get("out")
    return manifest, (str(base / out) if out else None)


# --------------------------------------------------------------------------
# DOT


def export_dot(g: Generator, table: EventTable | None = None) -> str:
    """Graphviz text: double circles for markers, an entry arrow, dashed unobservable edges."""
    name = json.dumps(g.name)
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    if not g.is_empty:
        lines.append('  __start [shape=point, label=""];')
        for q in range(g.state_count):
            shape = "doublecircle" if q in g.markers else "circle"
            lines.append(f"  {q} [shape={shape}];")
        lines.append(f"  __start -> {g.initial};")
        for a, e, b in sorted(g.transitions):
            attrs = [f'label="{e}"']
            if table is not None and e in table:
                if table[e].controllable:
                    attrs.append('arrowhead=empty')
                else:
                    attrs.append('arrowhead=normal')
                if not table[e].observable:
                    attrs.append("style=dashed")
            lines.append(f"  {a} -> {b} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# artifact directories

_ROLES = ("languages", "supervisors", "subsystems", "coordinators", "abstractions", "reduced", "local", "merged", "dot")


def _sup_annotations(sup: POSupervisor) -> dict:
    return {
        "plant": sup.plant_name,
        "uncertainty": [sorted(u) for u in sup.uncertainty],
        "disabled": [sorted(d) for d in sup.disabled_map],
    }


def write_array(array: HeterarchicalArray, manifest: PipelineManifest, out: str | os.PathLike) -> None:
    out = Path(out)
    for role in _ROLES:
        (out / role).mkdir(parents=True, exist_ok=True)
    table = array.table

    def put(role, g, ann=None):
        save_automaton(out / role / f"{g.name}.json", g, table, ann)
        (out / "dot" / f"{g.name}.dot").write_text(export_dot(g, table))

    for d in array.decentralized.values():
        put("languages", d.language)
        put("supervisors", d.supervisor.automaton, _sup_annotations(d.supervisor))
    coord_plants = {}
    for sub in array.subsystems.values():
        put("subsystems", sub.automaton)
        if sub.coordinator is not None:
            put("subsystems", sub.nonblocking)
    if array.top is not None:
        put("subsystems", array.top)
    for name, (co, plant) in array.coordinators.items():
        put("coordinators", co.automaton, _sup_annotations(co))
        coord_plants[name] = plant.name
    for g in array.abstractions.values():
        put("abstractions", g)
    for g in array.reduced.values():
        put("reduced", g)
    for c in array.controllers():
        put("local", c.automaton, {"event": c.event, "source": c.source})
    for e, m in array.merged.items():
        put("merged", m.automaton, {"event": e})
    index = {
        "supervisors": {n: list(d.components) for n, d in array.decentralized.items()},
        "coordinators": coord_plants,
        "subsystems": {n: list(s.members) for n, s in array.subsystems.items()},
        "localizations": {
            n: {"controllers": [c.name for c in loc], "trivially_enabled": list(loc.trivially_enabled)}
            for n, loc in array.localizations.items()
        },
        "merged": {str(e): m.name for e, m in array.merged.items()},
        "by_component": array.by_component,
        "shared": sorted(array.shared),
        "extended": sorted(array.extended),
    }
    (out / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
    (out / "report.json").write_text(json.dumps(array.report, indent=2, sort_keys=True) + "\n")


def read_array(path: str | os.PathLike, manifest: PipelineManifest) -> HeterarchicalArray:
    """Rebuild a pipeline result from a directory written by ``write_array``."""
    path = Path(path)
    index_path = path / "index.json"
    try:
        index = _parse(index_path.read_text(), str(index_path))
    except OSError as exc:
        raise FormatError(str(index_path), exc.strerror or "cannot read") from None
    table = manifest.table
    array = HeterarchicalArray(table)

    def get(role, name) -> Generator:
        g, _, _ = load_automaton(path / role / f"{name}.json")
        return g

    specs = {supervisor_name(s): s for s in manifest.specs}
    for name in index["supervisors"]:
        spec = specs[name]
        plant = build_decentralized_plant(spec, manifest.plants)
        sup = POSupervisor.from_automaton(get("supervisors", name), plant, table)
        lang = get("languages", f"{spec.name}K")
        comps = tuple(c.name for c in coupled_plants(spec, manifest.plants))
        array.decentralized[name] = Decentralized(spec, plant, comps, lang, sup)
    for name, members in index["subsystems"].items():
        sub = get("subsystems", name)
        array.subsystems[name] = Subsystem(name, tuple(members), sub, None, sub)
    for name, plant_name in index["coordinators"].items():
        plant = get("subsystems", plant_name)
        array.coordinators[name] = (POSupervisor.from_automaton(get("coordinators", name), plant, table), plant)
    for name, entry in index["localizations"].items():
        ctrls = {}
        for cname in entry["controllers"]:
            g, _, ann = load_automaton(path / "local" / f"{cname}.json")
            ctrls[ann["event"]] = LocalController(g, ann["event"], ann.get("source", name))
        array.localizations[name] = Localization(name, ctrls, tuple(entry["trivially_enabled"]))
    for e, mname in index["merged"].items():
        array.merged[int(e)] = LocalController(get("merged", mname), int(e), "")
    array.by_component = {k: list(v) for k, v in index["by_component"].items()}
    array.shared = frozenset(index["shared"])
    array.extended = frozenset(index["extended"])
    return array




# --------------------------------------------------------------------------
# AGV corpus


def agv_manifest_dict() -> dict:
    from . import agv

    return {
        "plants": [f"{g.name}.json" for g in agv.plants()],
        "specs": [f"{g.name}.json" for g in agv.specs()],
        "unobservable": sorted(agv.UNOBSERVABLE),
        "groups": [{"name": g["name"], "members": list(g["members"])} for g in agv.GROUPS],
        "between": list(agv.BETWEEN),
        "flags": {"harmless_removal": False, "depth": 12, "state_budget": 10**7},
        "out": "out",
    }


def write_agv_fixtures(out: str | os.PathLike) -> list[Path]:
    """Write the AGV plants, specifications and manifest (``agv.json``) to ``out``."""
    from . import agv

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    table = agv.event_table()
    written = []
    for g in agv.plants() + agv.specs():
        p = out / f"{g.name}.json"
        save_automaton(p, g, table)
        written.append(p)
    p = out / "agv.json"
    p.write_text(json.dumps(agv_manifest_dict(), indent=2) + "\n")
    written.append(p)
    return written


def agv_fixture_dir() -> Path:
    """Directory of the frozen AGV corpus shipped with the package."""
    return Path(str(resources.files("hetloc") / "data" / "agv"))


def copy_agv_fixtures(out: str | os.PathLike) -> list[Path]:
    """Copy the frozen AGV corpus to ``out``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for src in sorted(agv_fixture_dir().glob("*.json")):
        dst = out / src.name
        shutil.copyfile(src, dst)
        written.append(dst)
    return written


__all__ = [
    "FormatError",
    "agv_fixture_dir",
    "copy_agv_fixtures",
    "dumps_automaton",
    "export_dot",
    "load_automaton",
    "load_generators",
    "load_manifest",
    "loads_automaton",
    "read_array",
    "agv_manifest_dict",
    "save_automaton",
    "write_agv_fixtures",
    "write_array",
]
