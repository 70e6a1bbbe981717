import os
import sys
import shutil

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from hetloc import heterarchical, io
from hetloc.automata import EventTable, Generator

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

EVENT_POOL = list(range(10, 16))


@st.composite
def generators(draw, alphabet, max_states=5, name="G", min_states=1, min_markers=1):
    n = draw(st.integers(min_states, max_states))
    trans = []
    for q in range(n):
        for e in sorted(alphabet):
            if draw(st.booleans()):
                trans.append((q, e, draw(st.integers(0, n - 1))))
    markers = draw(st.sets(st.integers(0, n - 1), min_size=min_markers, max_size=n))
    return Generator(name, n, 0, markers, alphabet, trans)


@st.composite
def instances(draw, max_plant=5, max_spec=3, max_events=6, max_unobs=2):
    """Random (plant, spec, table): plant over up to 6 events, spec over a subset."""
    k = draw(st.integers(1, max_events))
    alphabet = frozenset(EVENT_POOL[:k])
    con = draw(st.sets(st.sampled_from(sorted(alphabet))))
    uo = draw(st.sets(st.sampled_from(sorted(alphabet)), max_size=max_unobs))
    table = EventTable.from_sets(alphabet, con, uo)
    plant = draw(generators(alphabet, max_plant, "G"))
    sub = draw(st.sets(st.sampled_from(sorted(alphabet)), min_size=1))
    spec = draw(generators(frozenset(sub), max_spec, "E"))
    return plant, spec, table


@pytest.fixture(scope="session")
def agv_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("agv")
    for p in io.agv_fixture_dir().glob("*.json"):
        shutil.copyfile(p, d / p.name)
    return d


@pytest.fixture(scope="session")
def agv_manifest(agv_dir):
    manifest, _ = io.load_manifest(agv_dir / "agv.json")
    return manifest


@pytest.fixture(scope="session")
def agv_array(agv_manifest):
    return heterarchical.run_pipeline(agv_manifest)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance")
        for line in lines:
            terminalreporter.write_line(line)
