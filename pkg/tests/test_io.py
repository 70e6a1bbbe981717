import json

import pytest
from hypothesis import given, settings

from hetloc import agv, io
from hetloc.automata import EventTable, Generator

from conftest import generators

TABLE = agv.event_table()


def test_round_trip_is_byte_stable(tmp_path):
    for g in agv.plants() + agv.specs():
        text = io.dumps_automaton(g, TABLE)
        h, t, _ = io.loads_automaton(text)
        assert h == g
        assert io.dumps_automaton(h, t) == text


@settings(max_examples=200)
@given(generators(frozenset({10, 11, 12}), 5))
def test_round_trip_random(g):
    t = EventTable.from_sets(g.alphabet, {11}, {12})
    h, t2, ann = io.loads_automaton(io.dumps_automaton(g, t, {"k": 1}))
    assert h == g and t2 == t and ann == {"k": 1}


def test_transitions_are_sorted():
    g = Generator.create("G", 2, [(1, 11, 0), (0, 12, 1), (0, 11, 1)])
    doc = json.loads(io.dumps_automaton(g, EventTable.from_sets({11, 12})))
    assert doc["transitions"] == sorted(doc["transitions"])
    assert list(doc) == ["name", "states", "initial", "marker", "events", "transitions"]


def _doc(**over):
    doc = {
        "name": "G",
        "states": 2,
        "initial": 0,
        "marker": [0],
        "events": [{"id": 11, "controllable": True, "observable": True}],
        "transitions": [[0, 11, 1]],
    }
    doc.update(over)
    return json.dumps(doc)


@pytest.mark.parametrize(
    "text,fragment",
    [
        (_doc(transitions=[[0, 11, 1], [0, 11, 0]]), "duplicate"),
        (_doc(transitions=[[0, 11, 7]]), "out of range"),
        (_doc(transitions=[[0, 12, 1]]), "not declared"),
        (_doc(marker=[5]), "marker"),
        (_doc(initial=4), "initial"),
        (_doc(states="two"), "states"),
        ('{"name": "G",\n "states": 2,,}', "line 2"),
        ("[]", "top level"),
    ],
)
def test_malformed_files_rejected(text, fragment):
    with pytest.raises(io.FormatError) as exc:
        io.loads_automaton(text, "f.json")
    assert fragment in str(exc.value)


def test_agv_a1_fixture():
    g, t, _ = io.load_automaton(io.agv_fixture_dir() / "A1.json")
    assert g.name == "A1"
    assert not t[13].observable and t[13].controllable
    assert t.unobservable == {13}


def test_shipped_fixtures_match_transcription(tmp_path):
    io.write_agv_fixtures(tmp_path)
    for p in io.agv_fixture_dir().glob("*.json"):
        assert (tmp_path / p.name).read_text() == p.read_text()


def test_fixture_corpus_attributes():
    manifest, _ = io.load_manifest(io.agv_fixture_dir() / "agv.json")
    t = manifest.table
    assert t.unobservable == {13, 23, 31, 42, 53}
    assert t.controllable == {11, 13, 21, 23, 31, 33, 41, 43, 51, 53}


def _write_manifest(d, **over):
    doc = io.agv_manifest_dict()
    doc.update(over)
    io.copy_agv_fixtures(d)
    p = d / "agv.json"
    p.write_text(json.dumps(doc))
    return p


def test_manifest_dangling_member(tmp_path):
    p = _write_manifest(tmp_path, groups=[{"name": "G", "members": ["A1", "NOPE"]}])
    with pytest.raises(io.FormatError, match="NOPE"):
        io.load_manifest(p)


def test_manifest_missing_file(tmp_path):
    p = _write_manifest(tmp_path, plants=["A1.json", "A9.json"])
    with pytest.raises(io.FormatError):
        io.load_manifest(p)


def test_manifest_rejects_harmless_removal(tmp_path):
    p = _write_manifest(tmp_path, flags={"harmless_removal": True})
    with pytest.raises(io.FormatError):
        io.load_manifest(p)


def test_manifest_unobservable_override(tmp_path):
    p = _write_manifest(tmp_path, unobservable=[13])
    m, out = io.load_manifest(p)
    assert m.table.unobservable == {13}
    assert out == str(tmp_path / "out")


def test_array_round_trip(tmp_path, agv_manifest, agv_array):
    io.write_array(agv_array, agv_manifest, tmp_path)
    back = io.read_array(tmp_path, agv_manifest)
    assert set(back.merged) == set(agv_array.merged)
    for e, c in agv_array.merged.items():
        assert back.merged[e].automaton == c.automaton
    for n, d in agv_array.decentralized.items():
        assert back.decentralized[n].supervisor.automaton == d.supervisor.automaton
    report = json.loads((tmp_path / "report.json").read_text())
    assert all({"stage", "artifact", "states", "checks"} <= set(e) for e in report)


# ---------------------------------------------------------------- dot


def test_dot_empty():
    text = io.export_dot(Generator.empty("E"), TABLE)
    assert "->" not in text and text.strip().startswith("digraph")


def test_dot_structure(agv_array):
    pydot = pytest.importorskip("pydot")
    c = agv_array.localizations["Z1SUP"].controllers[11]
    text = io.export_dot(c.automaton, TABLE)
    (graph,) = pydot.graph_from_dot_data(text)
    nodes = {n.get_name().strip('"') for n in graph.get_nodes()} - {"node", "edge", "graph", "__start"}
    assert nodes == {"0", "1"}
    labels = {e.get("label").strip('"') for e in graph.get_edges() if e.get("label")}
    assert labels == {str(e) for e in c.automaton.alphabet}
    for n in graph.get_nodes():
        if n.get_name().strip('"') in {str(m) for m in c.automaton.markers}:
            assert n.get("shape") == "doublecircle"


def test_dot_styles():
    pydot = pytest.importorskip("pydot")
    g = Generator.create("G", 2, [(0, 13, 0), (0, 11, 1), (1, 12, 0)], markers={1})
    (graph,) = pydot.graph_from_dot_data(io.export_dot(g, TABLE))
    styles = {e.get("label").strip('"'): (e.get("style"), e.get("arrowhead")) for e in graph.get_edges() if e.get("label")}
    assert styles["13"][0] == "dashed"
    assert styles["11"][1] == "empty" and styles["12"][1] != "empty"


@settings(max_examples=100)
@given(generators(frozenset({10, 11, 13}), 5))
def test_dot_parses(g):
    pydot = pytest.importorskip("pydot")
    (graph,) = pydot.graph_from_dot_data(io.export_dot(g, TABLE))
    assert len(graph.get_edges()) == len(g.transitions) + 1
