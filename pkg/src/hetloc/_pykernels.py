"""Pure-Python implementations of the hot loops.

Every kernel takes dense transition tables: a 2-D int array indexed by
``[state, event_index]`` holding the target state, ``-1`` when the event is
undefined at that state and (for product operands only) ``-2`` when the event
lies outside the operand's alphabet. The compiled twin in ``_ckernels.pyx``
must return bit-identical results; ``tests/test_kernels.py`` holds them to it.
"""

from __future__ import annotations

from collections import deque

import numpy as np

UNDEFINED = -1
FOREIGN = -2


def sync_product(tables, initials, marked):
    """Reachable synchronous product of several operands.

    ``marked`` is a list of boolean arrays, one per operand. Returns
    ``(states, transitions, markers)`` where ``states`` lists the component
    tuples in BFS discovery order (events scanned in increasing index).
    """
    rows = [np.asarray(t).tolist() for t in tables]
    marks = [np.asarray(m).tolist() for m in marked]
    k = len(rows)
    n_events = len(rows[0][0]) if rows and rows[0] else 0
    start = tuple(int(s) for s in initials)
    index = {start: 0}
    states = [start]
    transitions = []
    head = 0
    while head < len(states):
        cur = states[head]
        for e in range(n_events):
            nxt = []
            for i in range(k):
                t = rows[i][cur[i]][e]
                if t == UNDEFINED:
                    break
                nxt.append(cur[i] if t == FOREIGN else t)
            else:
                key = tuple(nxt)
                dst = index.get(key)
                if dst is None:
                    dst = len(states)
                    index[key] = dst
                    states.append(key)
                transitions.append((head, e, dst))
        head += 1
    markers = [i for i, s in enumerate(states) if all(marks[j][s[j]] for j in range(k))]
    return states, transitions, markers


def _closure(rows, seed, epsilon):
    seen = set(seed)
    stack = list(seed)
    while stack:
        q = stack.pop()
        row = rows[q]
        for e in epsilon:
            t = row[e]
            if t >= 0 and t not in seen:
                seen.add(t)
                stack.append(t)
    return tuple(sorted(seen))


def subset_construction(table, epsilon, keep, initial):
    """Determinize along ``keep`` events, treating ``epsilon`` events as silent.

    ``initial`` is an iterable of start states (closed under ``epsilon`` here).
    Returns ``(subsets, transitions)``; subsets are sorted tuples in BFS order.
    """
    rows = np.asarray(table).tolist()
    epsilon = list(epsilon)
    keep = list(keep)
    start = _closure(rows, list(initial), epsilon)
    index = {start: 0}
    subsets = [start]
    transitions = []
    head = 0
    while head < len(subsets):
        cur = subsets[head]
        for e in keep:
            targets = {rows[q][e] for q in cur}
            targets.discard(UNDEFINED)
            if not targets:
                continue
            key = _closure(rows, targets, epsilon)
            dst = index.get(key)
            if dst is None:
                dst = len(subsets)
                index[key] = dst
                subsets.append(key)
            transitions.append((head, e, dst))
        head += 1
    return subsets, transitions


def refine_partition(table, initial_blocks):
    """Coarsest partition refining ``initial_blocks`` that is stable under the table.

    Block ids are renumbered by first occurrence so the result is canonical.
    """
    rows = np.asarray(table).tolist()
    cls = list(initial_blocks)
    count = -1
    while True:
        sigs = {}
        new = []
        for q, row in enumerate(rows):
            sig = (cls[q], tuple(cls[t] if t >= 0 else -1 for t in row))
            b = sigs.get(sig)
            if b is None:
                b = len(sigs)
                sigs[sig] = b
            new.append(b)
        if len(sigs) == count:
            return new
        count = len(sigs)
        cls = new


def _try_merge(rows, compat, blocks, members, a, b):
    """Merge the blocks of ``a`` and ``b`` plus every merge it forces.

    Returns ``(blocks, members)`` for the merged partition, or ``None`` when a
    forced merge would put two incompatible states in one block. Block ids are
    the smallest member state, so results do not depend on merge order.
    """
    n_events = len(rows[0]) if rows else 0
    parent = {}
    local = {}

    def find(x):
        while x in parent:
            x = parent[x]
        return x

    def mem(x):
        m = local.get(x)
        return members[x] if m is None else m

    pending = deque([(blocks[a], blocks[b])])
    while pending:
        x, y = pending.popleft()
        rx, ry = find(x), find(y)
        if rx == ry:
            continue
        mx, my = mem(rx), mem(ry)
        for p in mx:
            row = compat[p]
            for q in my:
                if not row[q]:
                    return None
        if rx > ry:
            rx, ry = ry, rx
        parent[ry] = rx
        merged = mx + my
        local[rx] = merged
        local[ry] = []
        for e in range(n_events):
            first = -1
            for q in merged:
                t = rows[q][e]
                if t >= 0:
                    bt = find(blocks[t])
                    if first < 0:
                        first = bt
                    elif bt != first:
                        pending.append((first, bt))
    new_blocks = [find(blk) for blk in blocks]
    new_members = dict(members)
    for x, m in local.items():
        if m:
            new_members[x] = sorted(m)
        else:
            new_members.pop(x, None)
    return new_blocks, new_members


def greedy_partition(table, compatible):
    """Greedy control-congruence: merge state pairs in index order when consistent.

    ``compatible`` is a symmetric boolean matrix. The result is a partition,
    given as the block representative (smallest member) of each state, that is
    pairwise compatible within blocks and closed under successors: all members
    of a block move to one block under each event.
    """
    rows = np.asarray(table).tolist()
    compat = np.asarray(compatible).tolist()
    n = len(rows)
    blocks = list(range(n))
    members = {q: [q] for q in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            if blocks[i] == blocks[j]:
                continue
            res = _try_merge(rows, compat, blocks, members, i, j)
            if res is not None:
                blocks, members = res
    return blocks
