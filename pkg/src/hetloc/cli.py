"""Command-line interface. Each subcommand wraps one library operation.

Exit codes: 0 success, 1 a property check failed (witness on stderr),
2 bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import automata, heterarchical, io, localization, synthesis
from .automata import AutomatonError, EventTable, Generator
from .verify import ClosedLoop, Refusal


class CheckFailed(Exception):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


def _events(text: str) -> frozenset[int]:
    text = text.strip()
    if not text:
        return frozenset()
    try:
        return frozenset(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated event ids, got {text!r}") from None


def _load(path) -> tuple[Generator, EventTable]:
    g, t, _ = io.load_automaton(path)
    return g, t


def _load_many(paths) -> tuple[list[Generator], EventTable]:
    return io.load_generators(paths)


def _emit(g: Generator, table: EventTable, out: str | None, annotations=None):
    text = io.dumps_automaton(g, table, annotations)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _verdict(v, what: str):
    if not v:
        raise CheckFailed(what, getattr(v, "witness", None))
    print(f"{what}: ok")


def _problem(args) -> synthesis.SynthesisProblem:
    (plant, spec), table = _load_many([args.plant, args.spec])
    return synthesis.SynthesisProblem.of(plant, spec, table)


# --------------------------------------------------------------------------
# subcommands


def cmd_sync(args):
    gs, table = _load_many(args.files)
    _emit(automata.sync(gs, name=args.name), table, args.output)


def cmd_trim(args):
    g, table = _load(args.file)
    _emit(automata.trim(g), table, args.output)


def cmd_supcon(args):
    p = _problem(args)
    _emit(synthesis.supcon(p, name=args.name), p.table, args.output)


def cmd_suprco(args):
    p = _problem(args)
    _emit(synthesis.sup_rco(p, name=args.name, ambient=args.ambient), p.table, args.output)


def cmd_posup(args):
    (k, plant), table = _load_many([args.language, args.plant])
    sup = synthesis.build_po_supervisor(k, plant, table.mask(), table, name=args.name)
    _emit(sup.automaton, table, args.output, io._sup_annotations(sup))


def cmd_coord(args):
    sub, table = _load(args.file)
    co = heterarchical.synthesize_coordinator(sub, table.mask(), table, name=args.name)
    _emit(co.automaton, table, args.output, io._sup_annotations(co))


def cmd_observer_check(args):
    g, _ = _load(args.file)
    _verdict(heterarchical.check_natural_observer(g, args.keep), "natural observer")


def cmd_minext(args):
    gs, _ = _load_many(args.files)
    ext = heterarchical.minimal_observer_extension(gs, args.seed)
    print(",".join(str(e) for e in sorted(ext)))


def cmd_abstract(args):
    g, table = _load(args.file)
    _emit(automata.project_generator(g, args.keep, name=args.name), table, args.output)


def _po(args) -> tuple[synthesis.POSupervisor, Generator, EventTable]:
    (sup, plant), table = _load_many([args.sup, args.plant])
    return synthesis.POSupervisor.from_automaton(sup, plant, table), plant, table


def cmd_reduce(args):
    sup, plant, table = _po(args)
    _emit(localization.reduce_supervisor(sup, plant, table, name=args.name), table, args.output)


def cmd_localize(args):
    sup, plant, table = _po(args)
    loc = localization.localize(sup, plant, table)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for c in loc:
        io.save_automaton(out / f"{c.name}.json", c.automaton, table, {"event": c.event, "source": c.source})
        print(f"{c.name} {c.state_count}")
    if loc.trivially_enabled:
        print("trivially enabled: " + ",".join(map(str, loc.trivially_enabled)))
    _verdict(localization.verify_control_equivalence(plant, sup, loc), "control equivalence")


def cmd_merge_loc(args):
    gs, table = _load_many(args.files)
    locs = []
    for path, g in zip(args.files, gs):
        ann = io.load_automaton(path)[2]
        locs.append(localization.LocalController(g, int(ann.get("event", args.event)), ann.get("source", "")))
    merged = localization.merge_local_controllers(locs, args.event, name=args.name)
    _emit(merged.automaton, table, args.output, {"event": args.event})


def cmd_verify(args):
    manifest, _ = io.load_manifest(args.manifest)
    array = io.read_array(args.artifacts, manifest)
    rep = heterarchical.verify_global_equivalence(array, manifest)
    for c in rep.checks:
        print(f"{'PASS' if c['pass'] else 'FAIL'} {c['name']}")
    print(f"mode: {rep.mode}, states: {rep.states}")
    if not rep.ok:
        bad = [c for c in rep.checks if not c["pass"]]
        raise CheckFailed("global verification failed", [(c["name"], c["witness"]) for c in bad])


def cmd_simulate(args):
    if args.manifest:
        manifest, out = io.load_manifest(args.manifest)
        array = io.read_array(args.artifacts or out, manifest)
        plants = list(manifest.plants)
        ctrls = [m.automaton for m in array.merged.values()]
        table = manifest.table
    else:
        plants, t1 = _load_many(args.plant)
        ctrls, t2 = _load_many(args.controller or [])
        table = t1.merged(t2)
    loop = ClosedLoop.start(plants, ctrls, table.mask(), table)
    for line in sys.stdin:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            e = int(line)
        except ValueError:
            print(f"error not an event id: {line}")
            continue
        nxt = loop.step(e)
        if isinstance(nxt, Refusal):
            print(str(nxt))
        else:
            loop = nxt
            print(f"ok {e}")
        sys.stdout.flush()


def cmd_pipeline(args):
    manifest, out = io.load_manifest(args.manifest)
    out = args.output or out
    array = heterarchical.run_pipeline(manifest, out=out)
    for entry in array.report:
        flag = "" if all(c["pass"] for c in entry["checks"]) else "  FAIL"
        print(f"{entry['stage']:6} {entry['artifact']:28} {entry['states']:6}{flag}")
    if not array.ok:
        bad = [(e["artifact"], c["name"], c["witness"]) for e in array.report for c in e["checks"] if not c["pass"]]
        raise CheckFailed("pipeline checks failed", bad)


def cmd_dot(args):
    g, table = _load(args.file)
    text = io.export_dot(g, table)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_fixtures(args):
    if args.corpus != "agv":
        raise AutomatonError(f"unknown corpus {args.corpus}")
    for p in io.copy_agv_fixtures(args.output):
        print(p)


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hetloc", description="Partial-observation heterarchical supervisor localization.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        return p

    def out(p, required=False):
        p.add_argument("-o", "--output", required=required)

    p = add("sync", cmd_sync, "synchronous product")
    p.add_argument("files", nargs="+")
    p.add_argument("--name")
    out(p)
    p = add("trim", cmd_trim, "reachable and coreachable part")
    p.add_argument("file")
    out(p)
    for name, func, help_ in (
        ("supcon", cmd_supcon, "supremal controllable sublanguage"),
        ("suprco", cmd_suprco, "supremal controllable relatively observable sublanguage"),
    ):
        p = add(name, func, help_)
        p.add_argument("--plant", required=True)
        p.add_argument("--spec", required=True)
        p.add_argument("--name")
        if name == "suprco":
            p.add_argument("--ambient", choices=("controllable", "target"), default="controllable")
        out(p)
    p = add("posup", cmd_posup, "uncertainty-set supervisor realizing a language")
    p.add_argument("--language", required=True)
    p.add_argument("--plant", required=True)
    p.add_argument("--name")
    out(p)
    p = add("coord", cmd_coord, "coordinator for a subsystem")
    p.add_argument("file")
    p.add_argument("--name", default="CO")
    out(p)
    p = add("observer-check", cmd_observer_check, "natural observer check")
    p.add_argument("file")
    p.add_argument("--keep", type=_events, required=True)
    p = add("minext", cmd_minext, "observer extension of an event set")
    p.add_argument("files", nargs="+")
    p.add_argument("--seed", type=_events, required=True)
    p = add("abstract", cmd_abstract, "natural projection onto kept events")
    p.add_argument("file")
    p.add_argument("--keep", type=_events, required=True)
    p.add_argument("--name")
    out(p)
    for name, func, help_ in (
        ("reduce", cmd_reduce, "control-equivalent reduced supervisor"),
        ("localize", cmd_localize, "per-event local controllers"),
    ):
        p = add(name, func, help_)
        p.add_argument("--sup", required=True)
        p.add_argument("--plant", required=True)
        if name == "reduce":
            p.add_argument("--name")
        out(p, required=name == "localize")
    p = add("merge-loc", cmd_merge_loc, "merge local controllers of one event")
    p.add_argument("files", nargs="+")
    p.add_argument("--event", type=int, required=True)
    p.add_argument("--name")
    out(p)
    p = add("verify", cmd_verify, "global verification of a pipeline artifact directory")
    p.add_argument("manifest")
    p.add_argument("artifacts")
    p = add("simulate", cmd_simulate, "replay events from stdin through the closed loop")
    p.add_argument("--manifest")
    p.add_argument("--artifacts")
    p.add_argument("--plant", action="append")
    p.add_argument("--controller", action="append")
    p = add("pipeline", cmd_pipeline, "run the full pipeline on a manifest")
    p.add_argument("manifest")
    out(p)
    p = add("dot", cmd_dot, "Graphviz export")
    p.add_argument("file")
    out(p)
    p = add("fixtures", cmd_fixtures, "emit a bundled corpus")
    p.add_argument("corpus", choices=("agv",))
    p.add_argument("-o", "--output", default=".")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "simulate" and not args.manifest and not args.plant:
        print("simulate needs --manifest or --plant", file=sys.stderr)
        return 2
    try:
        args.func(args)
    except CheckFailed as exc:
        print(f"{exc}", file=sys.stderr)
        print(f"witness: {json.dumps(exc.witness, default=str)}", file=sys.stderr)
        return 1
    except synthesis.SynthesisError as exc:
        print(f"{exc}", file=sys.stderr)
        print(f"witness: {json.dumps(exc.witness, default=str)}", file=sys.stderr)
        return 1
    except (AutomatonError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
