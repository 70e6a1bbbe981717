import dataclasses

from hypothesis import given, settings

from hetloc import agv
from hetloc.automata import Generator, sync, trim
from hetloc.localization import LocalController
from hetloc.verify import ClosedLoop, Refusal, check_feasibility, enumerate_language, exhaustive_explore

from conftest import generators
from oracles import strings

TABLE = agv.event_table()
MASK = TABLE.mask()


def test_enumerate_depth_zero():
    g = Generator.create("G", 1, [(0, 10, 0)], markers={0})
    assert enumerate_language(g, 0) == ({()}, {()})
    h = Generator.create("H", 1, [(0, 10, 0)], markers=())
    assert enumerate_language(h, 0) == ({()}, set())


def test_enumerate_cycle():
    g = Generator.create("G", 1, [(0, 10, 0)])
    closed, _ = enumerate_language(g, 3)
    assert closed == {(), (10,), (10, 10), (10, 10, 10)}


@settings(max_examples=200)
@given(generators(frozenset({10, 11}), 5))
def test_enumerate_marked_invariant_under_trim(g):
    assert enumerate_language(g, 6)[1] == enumerate_language(trim(g), 6)[1]
    assert enumerate_language(g, 6) == strings(g, 6)


def test_step_advances_every_owner():
    plants = agv.plants()
    loop = ClosedLoop.start(plants)
    nxt = loop.step(11)
    owners = [i for i, p in enumerate(plants) if 11 in p.alphabet]
    for i, p in enumerate(plants):
        moved = nxt.plant_states[i] != loop.plant_states[i]
        assert moved == (i in owners)
    assert nxt.trace == (11,)


def test_refusal_reasons():
    loop = ClosedLoop.start(agv.plants(), mask=MASK, table=TABLE)
    r = loop.step(10)
    assert isinstance(r, Refusal) and not r and r.reason == "ineligible" and r.component == "A1"
    r = loop.step(999)
    assert isinstance(r, Refusal) and r.component == "plant"


def test_scenario_refuses_33_until_26(agv_array, agv_manifest):
    loop = ClosedLoop.start(agv_manifest.plants, agv_array.controllers(), MASK, TABLE).run(agv.SCENARIO)
    assert not isinstance(loop, Refusal)
    r = loop.step(33)
    assert isinstance(r, Refusal)
    assert r.component == "Z2_33" and r.reason == "disabled" and r.controllable
    after = loop.run((23, 24, 26))
    assert not isinstance(after, Refusal)
    assert not isinstance(after.step(33), Refusal)


def test_refusing_component_matches_membership(agv_array, agv_manifest):
    comps = list(agv_manifest.plants) + [c.automaton for c in agv_array.controllers()]
    loop = ClosedLoop.start(agv_manifest.plants, agv_array.controllers(), MASK, TABLE).run(agv.SCENARIO)
    for e in sorted(loop.alphabet):
        r = loop.step(e)
        s = agv.SCENARIO + (e,)
        blockers = [g.name for g in comps if e in g.alphabet and g.run([x for x in s if x in g.alphabet]) is None]
        if isinstance(r, Refusal):
            assert r.component == blockers[0]
        else:
            assert not blockers


def test_explore_with_supervisors_matches_product(agv_array, agv_manifest):
    plants = list(agv_manifest.plants)
    sups = agv_array.controlled_components()[:3]
    rep = exhaustive_explore(ClosedLoop.start(plants, sups), 7)
    assert (rep.closed, rep.marked) == enumerate_language(sync(plants + sups), 7)


def test_localized_matches_supervised_at_depth(agv_array, agv_manifest):
    plants = list(agv_manifest.plants)
    depth = 12
    r_sup = exhaustive_explore(ClosedLoop.start(plants, agv_array.controlled_components()), depth, agv_manifest.specs)
    r_loc = exhaustive_explore(ClosedLoop.start(plants, agv_array.controllers()), depth, agv_manifest.specs)
    assert r_sup.closed == r_loc.closed and r_sup.marked == r_loc.marked
    assert r_loc.ok


def test_extra_uncontrollable_event_breaks_safety(agv_array, agv_manifest):
    plants = list(agv_manifest.plants)
    a1 = plants[0]
    # A1 may now jump straight from its initial state into zone 1 via uncontrollable 12
    shortcut = dataclasses.replace(a1, transitions=a1.transitions + ((0, 12, a1.delta[a1.delta[0][11]][10]),))
    plants[0] = shortcut
    rep = exhaustive_explore(ClosedLoop.start(plants, agv_array.controllers()), 10, agv_manifest.specs)
    assert rep.safety


def test_feasibility():
    full = LocalController(Generator.create("F", 2, [(0, 11, 1), (1, 12, 0)]), 11)
    assert check_feasibility([full], TABLE.mask())


def test_agv_controllers_are_feasible(agv_array):
    assert check_feasibility(agv_array.controllers(), MASK)
    assert check_feasibility(list(agv_array.merged.values()), MASK)


def test_injected_unobservable_move_is_infeasible(agv_array):
    c = agv_array.localizations["WS2SUP"].controllers[13]
    g = c.automaton
    bad = Generator.create(g.name, 2, [(0, 13, 1), (1, 13, 1), (0, 33, 0), (1, 33, 1)], alphabet={13, 33})
    v = check_feasibility([LocalController(bad, 13)], MASK)
    assert not v and v.witness[1] == (0, 13, 1)
