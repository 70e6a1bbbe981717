"""AGV workcell corpus: five vehicles, four shared zones, four buffer specs.

Vehicle routes (odd event ids are controllable):

* A1: IPS1 -> WS2 through Zone 1 (11 enter, 10 load at IPS1, 13 re-enter, 12 unload at WS2)
* A2: IPS2 -> WS3 through Zones 3, 2, 1 and back (21, 18, 20, 22, 23, 24, 26, 28)
* A3: WS2 -> WS1 through Zone 2 (33, 34, 31, 32)
* A4: WS3 -> WS1 through Zones 3, 4 (41, 40, 42, 43, 44, 46)
* A5: WS1 -> CPS through Zone 4 (51, 50, 53, 52)

Each vehicle has one unobservable event: 13, 23, 31, 42, 53.
"""

from __future__ import annotations

from .automata import EventTable, Generator

UNOBSERVABLE = frozenset({13, 23, 31, 42, 53})


def _cycle(name: str, events: list[int]) -> Generator:
    n = len(events)
    return Generator.create(name, n, [(i, e, (i + 1) % n) for i, e in enumerate(events)])


def _zone(name: str, enter_a: tuple[int, int], exit_a: tuple[int, int], enter_b, exit_b) -> Generator:
    # state 0 free, 1 held by the first vehicle, 2 held by the second
    trans = [(0, e, 1) for e in enter_a] + [(1, e, 0) for e in exit_a]
    trans += [(0, e, 2) for e in enter_b] + [(2, e, 0) for e in exit_b]
    return Generator.create(name, 3, trans)


def _buffer(name: str, put: int, take: int) -> Generator:
    return Generator.create(name, 2, [(0, put, 1), (1, take, 0)])


def plants() -> list[Generator]:
    return [
        _cycle("A1", [11, 10, 13, 12]),
        _cycle("A2", [21, 18, 20, 22, 23, 24, 26, 28]),
        _cycle("A3", [33, 34, 31, 32]),
        _cycle("A4", [41, 40, 42, 43, 44, 46]),
        _cycle("A5", [51, 50, 53, 52]),
    ]


def specs() -> list[Generator]:
    ips = Generator.create("IPS", 3, [(0, 10, 1), (1, 13, 0), (0, 22, 2), (2, 23, 0)])
    return [
        _zone("Z1", (11, 13), (10, 12), (20, 23), (22, 24)),
        _zone("Z2", (18, 24), (20, 26), (31, 33), (32, 34)),
        _zone("Z3", (21, 26), (18, 28), (41, 44), (40, 46)),
        _zone("Z4", (40, 43), (42, 44), (51, 53), (50, 52)),
        _buffer("WS13", 32, 50),
        _buffer("WS14", 46, 50),
        _buffer("WS2", 12, 34),
        _buffer("WS3", 28, 42),
        ips,
    ]


def event_table() -> EventTable:
    events = set()
    for g in plants():
        events |= g.alphabet
    return EventTable.from_sets(events, {e for e in events if e % 2}, UNOBSERVABLE)


GROUPS = [
    {"name": "SUB1", "members": ["A2", "A4", "A5", "WS3SUP", "WS14SUP", "Z3SUP", "Z4SUP"]},
    {"name": "SUB2", "members": ["A1", "A3", "A5", "WS2SUP", "WS13SUP"]},
]
BETWEEN = ["IPSSUP", "Z1SUP", "Z2SUP"]

# reported sizes, used by the acceptance suite
SUPERVISOR_SIZES = {
    "Z1SUP": 13, "Z2SUP": 11, "Z3SUP": 26, "Z4SUP": 9, "WS13SUP": 15,
    "WS14SUP": 19, "WS2SUP": 15, "WS3SUP": 26, "IPSSUP": 13,
}
COORDINATOR_SIZES = {"CO1": 36, "CO2": 123}
ABSTRACTION_SIZES = {"NSUB1": 50, "QC_NSUB1": 19, "SUB2": 574, "QC_SUB2": 56}
SHARED_ALPHABET = frozenset({11, 12, 21, 24, 26, 32, 33, 50, 51, 52, 53})
CONTROLLER_SIZES = {
    ("Z1SUP", 11): 2, ("Z1SUP", 21): 2,
    ("Z2SUP", 21): 2, ("Z2SUP", 33): 2,
    ("Z3SUP", 21): 2, ("Z3SUP", 23): 3, ("Z3SUP", 41): 2, ("Z3SUP", 43): 3,
    ("Z4SUP", 41): 2, ("Z4SUP", 51): 2,
    ("WS13SUP", 31): 2, ("WS13SUP", 51): 2,
    ("WS14SUP", 43): 2, ("WS14SUP", 51): 2,
    ("WS2SUP", 13): 2, ("WS2SUP", 33): 2,
    ("WS3SUP", 21): 2, ("WS3SUP", 41): 2,
    ("IPSSUP", 11): 2, ("IPSSUP", 21): 2,
    ("CO1", 41): 2,
    ("CO2", 11): 6, ("CO2", 33): 4,
}
SCENARIO = (11, 10, 13, 12, 21, 18, 20, 22)
