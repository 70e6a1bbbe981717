import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetloc import agv
from hetloc.automata import (
    AutomatonError,
    EventAttributes,
    EventTable,
    Generator,
    ObservationMask,
    determinize,
    is_nonblocking,
    isomorphic,
    language_equal,
    minimize,
    project_generator,
    project_string,
    selfloop,
    sync,
    trim,
)
from hetloc.verify import enumerate_language

from conftest import generators
from oracles import projected_strings, strings

A = frozenset({10, 11})
AGV_MASK = ObservationMask(set(range(100)) - agv.UNOBSERVABLE)


def chain(marked=(0,)):
    return Generator.create("C", 2, [(0, 10, 1)], markers=marked)


# ---------------------------------------------------------------- types


def test_event_table_partitions():
    t = EventTable.from_sets({10, 11, 12}, controllable={11}, unobservable={12})
    assert t.controllable | t.uncontrollable == t.events
    assert not t.controllable & t.uncontrollable
    assert t.observable | t.unobservable == t.events
    assert t.unobservable == {12}


def test_event_table_rejects_conflicting_registration():
    t = EventTable.from_sets({10}, controllable={10})
    with pytest.raises(AutomatonError):
        t.register(10, EventAttributes(False, True))
    with pytest.raises(AutomatonError):
        t[99]


def test_event_table_covers_generator():
    g = Generator.create("G", 1, [(0, 12, 0)])
    with pytest.raises(AutomatonError):
        EventTable.from_sets({10}).covers(g)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(state_count=2, initial=2),
        dict(state_count=2, markers={3}),
        dict(state_count=2, transitions=((0, 10, 5),)),
        dict(state_count=2, transitions=((0, 99, 1),)),
        dict(state_count=2, transitions=((0, 10, 1), (0, 10, 0))),
    ],
)
def test_generator_rejects_malformed(kwargs):
    base = dict(name="G", state_count=1, initial=0, markers=(), alphabet=A, transitions=())
    base.update(kwargs)
    with pytest.raises(AutomatonError):
        Generator(**base)


def test_empty_generator_convention():
    e = Generator.empty("E", A)
    assert e.is_empty and e.state_count == 0
    assert trim(e).is_empty
    assert is_nonblocking(e)
    assert enumerate_language(e, 3) == (set(), set())


# ---------------------------------------------------------------- trim / blocking


def test_trim_keeps_trim_generator():
    g = Generator.create("G", 1, [], markers={0}, alphabet=A)
    assert isomorphic(trim(g), g)


def test_trim_drops_noncoreachable_state():
    t = trim(chain())
    assert t.state_count == 1 and t.transitions == ()


def test_trim_removes_everything_when_initial_dies():
    assert trim(chain(marked=())).is_empty


def test_agv_plants_are_trim_cycles():
    for p in agv.plants():
        assert isomorphic(trim(p), p)
        assert is_nonblocking(p)


def test_nonblocking_witness():
    r = is_nonblocking(chain())
    assert not r and r.state == 1 and r.string == (10,)


# ---------------------------------------------------------------- sync


def test_sync_single_is_copy():
    g = agv.plants()[0]
    assert isomorphic(sync([g]), g)


def test_sync_disjoint_cycles_interleave():
    a = Generator.create("A", 2, [(0, 10, 1), (1, 10, 0)])
    b = Generator.create("B", 2, [(0, 11, 1), (1, 11, 0)])
    s = sync([a, b])
    assert s.state_count == 4
    assert s.markers == {0}


def test_sync_shared_event_moves_together():
    a = Generator.create("A", 2, [(0, 10, 1), (1, 11, 0)], markers={0, 1})
    b = Generator.create("B", 1, [(0, 10, 0)], markers={0})
    s = sync([a, b])
    c, _ = strings(s, 3)
    assert c == {(), (10,), (10, 11), (10, 11, 10)}


def _inverse_projected(gs, depth, alphabet):
    """Strings over the union alphabet whose projections lie in every operand's language."""
    out_c, out_m = {()}, set()
    layer = [()]
    for _ in range(depth):
        nxt = [s + (e,) for s in layer for e in sorted(alphabet)]
        layer = [s for s in nxt if all(g.run([e for e in s if e in g.alphabet]) is not None for g in gs)]
        out_c.update(layer)
    for s in out_c:
        if all(g.accepts([e for e in s if e in g.alphabet]) for g in gs):
            out_m.add(s)
    return out_c, out_m


def test_sync_matches_inverse_projection_on_agv_zone():
    gs = [*agv.plants()[:2], agv.specs()[0]]
    alphabet = set().union(*(g.alphabet for g in gs))
    assert strings(sync(gs), 6) == _inverse_projected(gs, 6, alphabet)


def test_sync_of_all_agv_components_bounded():
    gs = agv.plants() + agv.specs()
    s = sync(gs)
    closed, marked = enumerate_language(s, 8)
    alphabet = set().union(*(g.alphabet for g in gs))
    assert (closed, marked) == _inverse_projected(gs, 8, alphabet)


@settings(max_examples=150)
@given(st.data())
def test_sync_commutative_and_associative(data):
    gs = [data.draw(generators(frozenset(data.draw(st.sets(st.sampled_from([10, 11, 12]), min_size=1))), 4, n)) for n in "abc"]
    a, b, c = gs
    assert isomorphic(minimize(sync([a, b])), minimize(sync([b, a])))
    assert isomorphic(minimize(sync([sync([a, b]), c])), minimize(sync([a, sync([b, c])])))


# ---------------------------------------------------------------- projection


def test_project_string_examples():
    assert project_string([], AGV_MASK) == ()
    assert project_string([11, 10, 13, 12], AGV_MASK) == (11, 10, 12)
    assert project_string([1, 2, 3], ObservationMask({1, 2, 3})) == (1, 2, 3)


@given(st.lists(st.integers(10, 15)), st.lists(st.integers(10, 15)), st.sets(st.integers(10, 15)))
def test_project_string_is_idempotent_morphism(s, t, obs):
    m = ObservationMask(obs)
    assert project_string(s + t, m) == project_string(s, m) + project_string(t, m)
    assert project_string(project_string(s, m), m) == project_string(s, m)


def test_project_identity_is_minimize():
    for g in agv.specs():
        assert isomorphic(project_generator(g, g.alphabet), minimize(g))


@settings(max_examples=200)
@given(generators(frozenset({10, 11, 12}), 5), st.sets(st.sampled_from([10, 11, 12])))
def test_projection_language_is_projected_language(g, keep):
    p = project_generator(g, keep)
    depth = 4
    c, m = strings(g, depth)
    pc, pm = strings(p, depth)
    assert {project_string(s, keep) for s in c} <= pc
    assert {project_string(s, keep) for s in m} <= pm
    assert (pc, pm) == projected_strings(g, keep, depth)


def test_determinize_marks_subsets_meeting_markers():
    g = Generator.create("N", 3, [(0, 13, 1), (0, 10, 2)], markers={1})
    d, subsets = determinize(g, {10})
    assert 0 in d.markers and d.state_count == 2
    assert set(subsets[0]) == {0, 1}


# ---------------------------------------------------------------- minimize


def test_minimize_merges_lookalike_branches():
    g = Generator.create("G", 5, [(0, 10, 1), (0, 11, 2), (1, 12, 3), (2, 12, 4)], markers={3, 4})
    m = minimize(g)
    assert m.state_count == 3
    assert strings(m, 4) == strings(g, 4)


def test_minimize_keeps_minimal():
    g = agv.plants()[0]
    assert isomorphic(minimize(g), g)


@settings(max_examples=200)
@given(generators(frozenset({10, 11}), 5))
def test_minimize_idempotent_and_equivalent(g):
    m = minimize(g)
    assert isomorphic(minimize(m), m)
    assert language_equal(m, g)
    assert m.state_count <= g.state_count


@settings(max_examples=200)
@given(generators(frozenset({10, 11}), 5))
def test_trim_idempotent(g):
    assert isomorphic(trim(trim(g)), trim(g))


# ---------------------------------------------------------------- language_equal


def test_language_equal_examples():
    g = chain()
    r = language_equal(g, trim(g))
    assert r.marked_equal and not r.closed_equal and r.closed_witness == (10,)
    for p in agv.plants():
        assert language_equal(p, sync([p]))


@settings(max_examples=300)
@given(generators(frozenset({10, 11}), 4, "a"), generators(frozenset({10, 11}), 4, "b"))
def test_language_equal_matches_enumeration(a, b):
    r = language_equal(a, b)
    ca, ma = strings(a, 10)
    cb, mb = strings(b, 10)
    assert r.closed_equal == (ca == cb)
    assert r.marked_equal == (strings(trim(a), 10)[1] == strings(trim(b), 10)[1])
    if not r.closed_equal:
        w = r.closed_witness
        assert (w in ca) != (w in cb)
        assert not any(len(s) < len(w) for s in ca ^ cb)


# ---------------------------------------------------------------- selfloop


def test_selfloop_examples():
    g = chain()
    assert isomorphic(selfloop(g, ()), g)
    star = selfloop(Generator.create("S", 1, [], markers={0}, alphabet=()), {10, 11})
    assert strings(star, 3)[1] == {s for s in strings(star, 3)[0]}
    assert len(strings(star, 3)[0]) == 1 + 2 + 4 + 8
    with pytest.raises(AutomatonError):
        selfloop(g, {10})


def test_selfloop_then_project_restores_language():
    g = agv.specs()[0]
    extra = {90, 91}
    assert language_equal(project_generator(selfloop(g, extra), g.alphabet), minimize(g))
