"""Independent reference implementations used only by the tests.

These work on plain dicts and explicit string sets and deliberately avoid
the library's product, trim and partition code.
"""

from itertools import product

from hetloc.automata import Generator


def dict_delta(g):
    d = {q: {} for q in range(g.state_count)}
    for a, e, b in g.transitions:
        d[a][e] = b
    return d


def product_dict(spec, plant):
    """Reachable spec x plant product where the spec alphabet is a subset of the plant's."""
    sd, pd = dict_delta(spec), dict_delta(plant)
    if spec.is_empty or plant.is_empty:
        return {}, None, set(), {}
    start = (spec.initial, plant.initial)
    delta, seen, todo = {}, {start}, [start]
    while todo:
        x = todo.pop()
        s, p = x
        delta[x] = {}
        for e, p2 in pd[p].items():
            if e in spec.alphabet:
                s2 = sd[s].get(e)
                if s2 is None:
                    continue
            else:
                s2 = s
            y = (s2, p2)
            delta[x][e] = y
            if y not in seen:
                seen.add(y)
                todo.append(y)
    marked = {x for x in delta if x[0] in spec.markers and x[1] in plant.markers}
    return delta, start, marked, pd


def _trim_subset(delta, start, marked, keep):
    if start not in keep:
        return set()
    reach, todo = {start}, [start]
    while todo:
        x = todo.pop()
        for y in delta[x].values():
            if y in keep and y not in reach:
                reach.add(y)
                todo.append(y)
    co = {x for x in reach if x in marked}
    changed = True
    while changed:
        changed = False
        for x in reach - co:
            if any(y in co for y in delta[x].values() if y in keep):
                co.add(x)
                changed = True
    return co


def brute_force_supcon(spec, plant, uncontrollable):
    """Largest trim, controllable subautomaton of spec x plant, by exhaustive search.

    Returns the surviving state set and the product (delta, start, marked).
    """
    delta, start, marked, pd = product_dict(spec, plant)
    states = sorted(delta)
    best = set()
    for bits in product((0, 1), repeat=len(states)):
        keep = {x for x, b in zip(states, bits) if b}
        t = _trim_subset(delta, start, marked, keep)
        if t != keep or not keep:
            continue
        ok = all(
            delta[x].get(e) in keep
            for x in keep
            for e in pd[x[1]]
            if e in uncontrollable
        )
        if ok and len(keep) > len(best):
            best = keep
    return best, (delta, start, marked)


def subautomaton(name, alphabet, delta, start, marked, keep):
    """Generator for the product restricted to ``keep``."""
    if not keep:
        return Generator.empty(name, alphabet)
    idx = {x: i for i, x in enumerate(sorted(keep))}
    trans = [(idx[x], e, idx[y]) for x in keep for e, y in delta[x].items() if y in keep]
    return Generator(name, len(idx), idx[start], {idx[x] for x in keep if x in marked}, alphabet, trans)


def strings(g, depth):
    """Closed and marked strings of length at most ``depth``."""
    closed, marked = set(), set()
    if g.is_empty:
        return closed, marked
    d = dict_delta(g)
    layer = [((), g.initial)]
    for i in range(depth + 1):
        nxt = []
        for s, q in layer:
            closed.add(s)
            if q in g.markers:
                marked.add(s)
            if i < depth:
                nxt.extend((s + (e,), t) for e, t in d[q].items())
        layer = nxt
    return closed, marked


def marked_included(a, b):
    """Lm(a) is a subset of Lm(b), by walking a's coreachable part against b."""
    if a.is_empty:
        return True
    ad, bd = dict_delta(a), dict_delta(b)
    co = set(a.markers)
    changed = True
    while changed:
        changed = False
        for q in range(a.state_count):
            if q not in co and any(t in co for t in ad[q].values()):
                co.add(q)
                changed = True
    if a.initial not in co:
        return True
    start = (a.initial, None if b.is_empty else b.initial)
    seen, todo = {start}, [start]
    while todo:
        x, y = todo.pop()
        if x in a.markers and (y is None or y not in b.markers):
            return False
        for e, t in ad[x].items():
            if t not in co:
                continue
            z = (t, None if y is None else bd[y].get(e))
            if z not in seen:
                seen.add(z)
                todo.append(z)
    return True


def marked_equal(a, b):
    return marked_included(a, b) and marked_included(b, a)


def projected_strings(g, keep, depth):
    """Projections of g's closed and marked strings that have length at most ``depth``."""
    closed, marked = set(), set()
    if g.is_empty:
        return closed, marked
    d = dict_delta(g)
    start = (g.initial, ())
    seen, todo = {start}, [start]
    while todo:
        q, s = todo.pop()
        closed.add(s)
        if q in g.markers:
            marked.add(s)
        for e, t in d[q].items():
            s2 = s + (e,) if e in keep else s
            if len(s2) <= depth and (t, s2) not in seen:
                seen.add((t, s2))
                todo.append((t, s2))
    return closed, marked
