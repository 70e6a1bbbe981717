# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same contracts and outputs as ``_pykernels``."""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc, realloc
from libc.string cimport memcpy

cnp.import_array()

UNDEFINED = -1
FOREIGN = -2


def sync_product(tables, initials, marked):
    cdef Py_ssize_t k = len(tables)
    cdef Py_ssize_t cap = 1024
    cdef Py_ssize_t count = 1, head = 0, i, e, dst
    cdef int t, cur_i
    cdef cnp.int64_t key
    cdef bint ok, radix = True
    cdef int *st
    cdef int *nxt
    cdef Py_ssize_t n_events
    cdef cnp.int32_t[::1] flat
    cdef cnp.int64_t[::1] off
    cdef cnp.int64_t[::1] mult
    if k == 0:
        return [()], [], [0]
    arrs = [np.ascontiguousarray(tb, dtype=np.int32) for tb in tables]
    n_events = arrs[0].shape[1] if arrs[0].ndim == 2 else 0
    sizes = [a.shape[0] for a in arrs]
    offs = np.zeros(k, dtype=np.int64)
    for i in range(1, k):
        offs[i] = offs[i - 1] + sizes[i - 1] * n_events
    flat = np.concatenate([a.ravel() for a in arrs]).astype(np.int32) if n_events else np.zeros(1, dtype=np.int32)
    off = offs
    mults = np.ones(k, dtype=np.int64)
    total = 1
    for i in range(k):
        total *= max(int(sizes[i]), 1)
    if total >= (1 << 62):
        radix = False
    else:
        for i in range(k - 2, -1, -1):
            mults[i] = mults[i + 1] * max(int(sizes[i + 1]), 1)
    mult = mults

    st = <int *> malloc(cap * k * sizeof(int))
    nxt = <int *> malloc(k * sizeof(int))
    index = {}
    transitions = []
    try:
        for i in range(k):
            st[i] = int(initials[i])
        if radix:
            key = 0
            for i in range(k):
                key += st[i] * mult[i]
            index[key] = 0
        else:
            index[tuple(st[i] for i in range(k))] = 0
        while head < count:
            for e in range(n_events):
                ok = True
                for i in range(k):
                    cur_i = st[head * k + i]
                    t = flat[off[i] + cur_i * n_events + e]
                    if t == -1:
                        ok = False
                        break
                    nxt[i] = cur_i if t == -2 else t
                if not ok:
                    continue
                if radix:
                    key = 0
                    for i in range(k):
                        key += nxt[i] * mult[i]
                    pykey = key
                else:
                    pykey = tuple(nxt[i] for i in range(k))
                found = index.get(pykey)
                if found is None:
                    dst = count
                    index[pykey] = dst
                    if count == cap:
                        cap *= 2
                        st = <int *> realloc(st, cap * k * sizeof(int))
                    memcpy(&st[count * k], nxt, k * sizeof(int))
                    count += 1
                else:
                    dst = found
                transitions.append((head, e, dst))
            head += 1
        states = [tuple(st[j * k + i] for i in range(k)) for j in range(count)]
    finally:
        free(st)
        free(nxt)
    marks = [np.asarray(m).tolist() for m in marked]
    markers = [j for j, s in enumerate(states) if all(marks[i][s[i]] for i in range(k))]
    return states, transitions, markers


cdef tuple _closure(cnp.int32_t[:, ::1] rows, list seed, int[:] eps, unsigned char *mark, int *stack):
    cdef Py_ssize_t n_eps = eps.shape[0], top = 0, j
    cdef int q, t
    members = []
    for q in seed:
        if not mark[q]:
            mark[q] = 1
            stack[top] = q
            top += 1
            members.append(q)
    while top:
        top -= 1
        q = stack[top]
        for j in range(n_eps):
            t = rows[q, eps[j]]
            if t >= 0 and not mark[t]:
                mark[t] = 1
                stack[top] = t
                top += 1
                members.append(t)
    for q in members:
        mark[q] = 0
    members.sort()
    return tuple(members)


def subset_construction(table, epsilon, keep, initial):
    cdef cnp.int32_t[:, ::1] rows = np.ascontiguousarray(table, dtype=np.int32)
    cdef Py_ssize_t n = rows.shape[0]
    cdef int[:] eps = np.asarray(list(epsilon), dtype=np.intc)
    cdef int[:] kept = np.asarray(list(keep), dtype=np.intc)
    cdef Py_ssize_t n_keep = kept.shape[0], j, head = 0
    cdef unsigned char *mark = <unsigned char *> malloc(max(n, 1))
    cdef int *stack = <int *> malloc(max(n, 1) * sizeof(int))
    cdef int e, t
    for j in range(n):
        mark[j] = 0
    try:
        start = _closure(rows, list(initial), eps, mark, stack)
        index = {start: 0}
        subsets = [start]
        transitions = []
        while head < len(subsets):
            cur = subsets[head]
            for j in range(n_keep):
                e = kept[j]
                targets = []
                for q in cur:
                    t = rows[q, e]
                    if t >= 0 and not mark[t]:
                        mark[t] = 1
                        targets.append(t)
                for t in targets:
                    mark[t] = 0
                if not targets:
                    continue
                key = _closure(rows, targets, eps, mark, stack)
                dst = index.get(key)
                if dst is None:
                    dst = len(subsets)
                    index[key] = dst
                    subsets.append(key)
                transitions.append((head, e, dst))
            head += 1
    finally:
        free(mark)
        free(stack)
    return subsets, transitions


def refine_partition(table, initial_blocks):
    cdef cnp.int32_t[:, ::1] rows = np.ascontiguousarray(table, dtype=np.int32)
    cdef Py_ssize_t n = rows.shape[0], m = rows.shape[1] if rows.ndim == 2 else 0, q, e
    cdef cnp.int64_t[::1] cls = np.asarray(list(initial_blocks), dtype=np.int64)
    cdef cnp.int64_t[::1] new = np.zeros(n, dtype=np.int64)
    cdef Py_ssize_t count = -1
    cdef int t
    while True:
        sigs = {}
        for q in range(n):
            sig = [cls[q]]
            for e in range(m):
                t = rows[q, e]
                sig.append(cls[t] if t >= 0 else -1)
            key = tuple(sig)
            b = sigs.get(key)
            if b is None:
                b = len(sigs)
                sigs[key] = b
            new[q] = b
        if len(sigs) == count:
            return [int(new[q]) for q in range(n)]
        count = len(sigs)
        cls[:] = new


cdef inline int _find(int *parent, int x) nogil:
    while parent[x] != x:
        x = parent[x]
    return x


def greedy_partition(table, compatible):
    cdef cnp.int32_t[:, ::1] rows = np.ascontiguousarray(table, dtype=np.int32)
    cdef cnp.uint8_t[:, ::1] compat = np.ascontiguousarray(compatible, dtype=np.uint8)
    cdef int n = rows.shape[0]
    cdef int m = rows.shape[1] if rows.ndim == 2 else 0
    if n == 0:
        return []
    cdef size_t nb = n * sizeof(int)
    cdef int *blk = <int *> malloc(nb)
    cdef int *head = <int *> malloc(nb)
    cdef int *tail = <int *> malloc(nb)
    cdef int *nxt = <int *> malloc(nb)
    cdef int *whead = <int *> malloc(nb)
    cdef int *wtail = <int *> malloc(nb)
    cdef int *wnxt = <int *> malloc(nb)
    cdef int *parent = <int *> malloc(nb)
    cdef Py_ssize_t qcap = 4 * n + 16
    cdef int *queue = <int *> malloc(qcap * 2 * sizeof(int))
    cdef int i, j, q, p, x, y, rx, ry, e, t, bt, first, tmp
    cdef Py_ssize_t qh, qt
    cdef bint fail
    try:
        for q in range(n):
            blk[q] = q
            head[q] = q
            tail[q] = q
            nxt[q] = -1
            parent[q] = q
        memcpy(whead, head, nb)
        memcpy(wtail, tail, nb)
        memcpy(wnxt, nxt, nb)
        for i in range(n):
            for j in range(i + 1, n):
                if blk[i] == blk[j]:
                    continue
                qh = 0
                qt = 1
                queue[0] = blk[i]
                queue[1] = blk[j]
                fail = False
                while qh < qt and not fail:
                    x = queue[2 * qh]
                    y = queue[2 * qh + 1]
                    qh += 1
                    rx = _find(parent, x)
                    ry = _find(parent, y)
                    if rx == ry:
                        continue
                    p = whead[rx]
                    while p >= 0 and not fail:
                        q = whead[ry]
                        while q >= 0:
                            if not compat[p, q]:
                                fail = True
                                break
                            q = wnxt[q]
                        p = wnxt[p]
                    if fail:
                        break
                    if rx > ry:
                        tmp = rx
                        rx = ry
                        ry = tmp
                    parent[ry] = rx
                    wnxt[wtail[rx]] = whead[ry]
                    wtail[rx] = wtail[ry]
                    whead[ry] = -1
                    for e in range(m):
                        first = -1
                        p = whead[rx]
                        while p >= 0:
                            t = rows[p, e]
                            if t >= 0:
                                bt = _find(parent, blk[t])
                                if first < 0:
                                    first = bt
                                elif bt != first:
                                    if qt == qcap:
                                        qcap *= 2
                                        queue = <int *> realloc(queue, qcap * 2 * sizeof(int))
                                    queue[2 * qt] = first
                                    queue[2 * qt + 1] = bt
                                    qt += 1
                            p = wnxt[p]
                if fail:
                    memcpy(whead, head, nb)
                    memcpy(wtail, tail, nb)
                    memcpy(wnxt, nxt, nb)
                else:
                    for q in range(n):
                        blk[q] = _find(parent, blk[q])
                    memcpy(head, whead, nb)
                    memcpy(tail, wtail, nb)
                    memcpy(nxt, wnxt, nb)
                for q in range(n):
                    parent[q] = q
        return [blk[q] for q in range(n)]
    finally:
        free(blk)
        free(head)
        free(tail)
        free(nxt)
        free(whead)
        free(wtail)
        free(wnxt)
        free(parent)
        free(queue)
