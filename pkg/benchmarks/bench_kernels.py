"""Compare the compiled and pure-Python kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times each kernel on inputs taken from the AGV pipeline (the products and
localization problems it actually solves) plus one larger random product,
and checks that both backends return the same result.
"""

import argparse
import time

import numpy as np

from hetloc import _pykernels, heterarchical, io
from hetloc.localization import _consistency_matrix, compute_control_data

try:
    from hetloc import _ckernels
except ImportError:
    _ckernels = None


def _dense(gs, events):
    col = {e: i for i, e in enumerate(events)}
    tabs = []
    for g in gs:
        t = np.full((g.state_count, len(events)), -2, dtype=np.int32)
        for e in g.alphabet:
            t[:, col[e]] = -1
        for a, e, b in g.transitions:
            t[a, col[e]] = b
        tabs.append(t)
    marks = [np.array([q in g.markers for q in range(g.state_count)]) for g in gs]
    return tabs, [g.initial for g in gs], marks


def cases():
    manifest, _ = io.load_manifest(io.agv_fixture_dir() / "agv.json")
    gs = list(manifest.plants) + list(manifest.specs)
    events = sorted(set().union(*(g.alphabet for g in gs)))
    tabs, inits, marks = _dense(gs, events)
    yield "sync_product AGV plants+specs", "sync_product", (tabs, inits, marks)

    rng = np.random.default_rng(0)
    rtabs, rinits, rmarks = [], [], []
    for _ in range(4):
        t = rng.integers(-1, 12, size=(12, 8)).astype(np.int32)
        rtabs.append(t)
        rinits.append(0)
        rmarks.append(rng.random(12) < 0.5)
    yield "sync_product random 4x12", "sync_product", (rtabs, rinits, rmarks)

    array = heterarchical.run_pipeline(manifest)
    sub2 = array.subsystems["SUB2"].automaton
    ev = sorted(sub2.alphabet)
    (t2,), _, _ = _dense([sub2], ev)
    t2[t2 == -2] = -1
    keep = [i for i, e in enumerate(ev) if e in array.extended]
    eps = [i for i, e in enumerate(ev) if e not in array.extended]
    yield "subset_construction SUB2", "subset_construction", (t2, eps, keep, [sub2.initial])
    blocks = [int(q in sub2.markers) for q in range(sub2.state_count)]
    yield "refine_partition SUB2", "refine_partition", (t2, blocks)

    co, plant = array.coordinators["CO2"]
    sup = co.automaton
    ev = sorted(sup.alphabet)
    (t3,), _, _ = _dense([sup], ev)
    t3[t3 == -2] = -1
    data = [compute_control_data(co, plant, 11, manifest.table)]
    compat = _consistency_matrix(data, sup.state_count)
    yield "greedy_partition CO2 alpha=11", "greedy_partition", (t3, compat)


def bench(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'case':36} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for label, name, inp in cases():
        tp, rp = bench(getattr(_pykernels, name), inp, args.repeat)
        if _ckernels is None:
            print(f"{label:36} {tp * 1e3:10.2f} {'n/a':>10} {'':>8}")
            continue
        tc, rc = bench(getattr(_ckernels, name), inp, args.repeat)
        if rp != rc:
            raise SystemExit(f"{label}: backends disagree")
        print(f"{label:36} {tp * 1e3:10.2f} {tc * 1e3:10.2f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
