"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
are produced; they are also repeated in the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from conftest import make_two_bus, unlimited
from secdispatch.cli import main
from secdispatch.dispatch import check_n1_security, price_of_security
from secdispatch.experiments import (
    ABLATION_VARIANTS,
    SweepSpec,
    ablation_network,
    ablation_suite,
    capacity_sweep,
    run_sweep,
    simplex_split,
)
from secdispatch.network import InputInstance, load_case
from secdispatch.twobus import TwoBusParams, best_demand_split, closed_form_costs, closed_form_pos

RESULTS = {}

# (network, instance, PosReport) triples gathered by every suite for the N-1 audit
AUDIT = []


def record(key, ok, detail):
    line = f"criterion {key}: {'PASS' if ok else 'FAIL'} | {detail}"
    RESULTS[key] = line
    print(line)
    return ok


def random_two_bus(rng):
    a1, a2 = np.sort(rng.uniform(0.1, 10, 2))
    limits = rng.uniform(10, 300, 2)
    b = rng.uniform(0.2, 5, 2)
    return make_two_bus(a1, a2, tuple(limits), tuple(b))


# -- 1 -------------------------------------------------------------------------

def test_oracle_equivalence(two_bus):
    p = TwoBusParams.from_network(two_bus)
    t0 = time.perf_counter()
    worst = 0.0
    for d1 in range(0, 301, 10):
        for d2 in range(0, 301, 10):
            inst = unlimited(d1, d2)
            rep = price_of_security(two_bus, inst)
            c_ed, c_sc = closed_form_costs(p, d1, d2)
            worst = max(worst, abs(rep.c_ed - c_ed), abs(rep.c_sc - c_sc))
            AUDIT.append((two_bus, inst, rep))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 5.0
    assert record(1, ok, f"961 points, max |LP - closed form| = {worst:.3g} (<= 1e-6), {elapsed:.2f} s (< 5 s)")


# -- 2 -------------------------------------------------------------------------

def test_worst_case_reproduction(tmp_path):
    out = tmp_path / "wc.csv"
    main(["worst-case", "--case", "2bus", "--dstep", "10", "--dmax", "300", "--output", str(out)])
    d1, d2, _, _, pos = (float(v) for v in out.read_text().splitlines()[1].split(","))
    p = TwoBusParams.from_network(load_case("2bus"))
    bound = p.alpha2 / p.alpha1 - (p.alpha2 - p.alpha1) * p.f_sc / (p.alpha1 * p.f_ed)
    ok = (d1, d2) == (0.0, 200.0) and abs(pos - 1.5) <= 1e-9 and abs(bound - 1.5) <= 1e-9
    assert record(2, ok, f"maximiser ({d1:g},{d2:g}), PoS {pos:.12g}, closed-form bound {bound:.12g}, "
                         f"f_ed={p.f_ed:g} f_sc={p.f_sc:g}")


# -- 3 -------------------------------------------------------------------------

SLACK = 1e-9
N_PROPERTY = 1000


def _capacity_monotone(rng):
    net = random_two_bus(rng)
    f_sc = min(net.limits)
    d1, d2 = rng.uniform(0, 400, 2)
    lo = max(0.0, d1 - f_sc)  # smallest cheap capacity keeping SCED feasible
    q1 = lo + rng.uniform(0, 500)
    q1_small = rng.uniform(lo, q1)
    big_inst = InputInstance([q1, math.inf], [d1, d2])
    small_inst = InputInstance([q1_small, math.inf], [d1, d2])
    big, small = price_of_security(net, big_inst), price_of_security(net, small_inst)
    AUDIT.extend([(net, big_inst, big), (net, small_inst, small)])
    return small.pos - big.pos


def _cheap_demand_monotone(rng):
    net = random_two_bus(rng)
    d1, d2 = rng.uniform(0, 400, 2)
    extra = rng.uniform(0, 200)
    cap = [d1 + extra + d2, math.inf]
    before_inst = InputInstance(cap, [d1, d2])
    after_inst = InputInstance(cap, [d1 + extra, d2])
    before, after = price_of_security(net, before_inst), price_of_security(net, after_inst)
    AUDIT.extend([(net, before_inst, before), (net, after_inst, after)])
    return after.pos - before.pos


def _worst_split(rng):
    net = random_two_bus(rng)
    p = TwoBusParams.from_network(net)
    d = rng.uniform(1, 600)
    best = best_demand_split(p, d)
    inst = p.instance(net, best.d1, best.d2, cheap_capacity=d)
    rep = price_of_security(net, inst)
    AUDIT.append((net, inst, rep))
    gap = abs(rep.pos - best.pos)
    # LP at boundary, kink and random splits; closed form on the full d/100 scan
    splits = [0.0, d, min(d, p.f_sc), min(d, p.f_ed)] + list(rng.uniform(0, d, 9))
    worst = max(price_of_security(net, p.instance(net, d - d2, d2, cheap_capacity=d)).pos for d2 in splits)
    scan = max(closed_form_pos(p, d - d2, d2) for d2 in np.linspace(0, d, 101))
    return max(gap, worst - rep.pos, scan - best.pos)


def test_property_suites():
    t0 = time.perf_counter()
    failures = {}
    checks = (_capacity_monotone, _cheap_demand_monotone, _worst_split)
    for k, check in enumerate(checks):
        rng = np.random.default_rng(101 + k)
        name = check.__name__.lstrip("_")
        failures[name] = int(sum(check(rng) > SLACK for _ in range(N_PROPERTY)))
    elapsed = time.perf_counter() - t0
    ok = not any(failures.values()) and elapsed < 30.0
    assert record(3, ok, f"{N_PROPERTY} instances per property, failures {failures}, {elapsed:.1f} s (< 30 s)")


# -- 4 -------------------------------------------------------------------------

def test_capacity_sweep_shape(two_bus):
    spec = SweepSpec("2bus", "capacity-sweep", 100, 300, 10, demand={1: 0, 2: 200})
    result = capacity_sweep(spec, two_bus)
    q1, pos = result.column("cheap_capacity"), result.column("pos")
    nondecreasing = bool(np.all(np.diff(pos) >= -1e-9))
    flat = float(np.ptp(pos[q1 >= 200]))
    terminal = float(pos[-1])
    ok = nondecreasing and flat <= 1e-9 and abs(terminal - 1.5) <= 1e-6
    for q, v in zip(q1, pos):
        inst = InputInstance([q, math.inf], [0, 200])
        AUDIT.append((two_bus, inst, price_of_security(two_bus, inst)))
    assert record(4, ok, f"nondecreasing={nondecreasing}, spread for q1>=200 = {flat:.2g}, "
                         f"terminal PoS {terminal:.9g} (1.5 +- 1e-6)")


# -- 6 -------------------------------------------------------------------------

PEAK_TARGETS = (1.47, 1.53, 1.55, 1.75)


@pytest.fixture(scope="module")
def ablation():
    return {v: ablation_suite(v, runs=500, seed=0) for v in ABLATION_VARIANTS}


def test_pjm5_mandatory(ablation):
    full = ablation["full"]
    demand, pos = full.column("d_expensive"), full.column("pos_max")
    flat_low = bool(np.all(np.abs(pos[demand <= 200] - 1.0) <= 1e-6))
    meta = [ablation[v].metadata for v in ABLATION_VARIANTS]
    peak_at = full.metadata["peak"]
    after = pos[demand >= peak_at]
    decays = bool(after[-1] < after[0] - 1e-6)
    rises = [m["first_rise"] for m in meta]
    peaks = [m["peak"] for m in meta]
    ordered = bool(np.all(np.diff(rises) >= 0) and np.all(np.diff(peaks) >= 0))
    ok = flat_low and decays and ordered
    assert record("6 (mandatory)", ok,
                  f"PoS=1 for D<=200: {flat_low}; decay after peak at {peak_at:g} MW: {decays}; "
                  f"first rise {rises} and peak location {peaks} nondecreasing: {ordered}")


def test_pjm5_numeric_targets(ablation):
    meta = [ablation[v].metadata for v in ABLATION_VARIANTS]
    values = [m["peak_pos"] for m in meta]
    near = [abs(v - t) <= 0.05 for v, t in zip(values, PEAK_TARGETS)]
    increasing = bool(np.all(np.diff(values) > 0))
    full_peak_near_400 = abs(meta[0]["peak"] - 400) <= 50
    ok = all(near) and increasing and full_peak_near_400
    detail = (f"peaks {[f'{v:.3f}' for v in values]} vs {list(PEAK_TARGETS)} +- 0.05 -> {near}; "
              f"increasing={increasing}; full peak at {meta[0]['peak']:g} MW (target ~400)")
    record("6 (numeric, conditional)", ok, detail)
    if not ok:
        pytest.xfail("numeric targets not reachable with the reconstructed pjm5 data; "
                     "the criterion makes them conditional, see the mandatory check")


# -- 5 -------------------------------------------------------------------------

def _pjm5_audit_cases(n_per_variant=60, seed=7):
    rng = np.random.default_rng(seed)
    for variant in ABLATION_VARIANTS:
        net = ablation_network(variant)
        expensive = [net.bus_index(b) for b in net.region("expensive")]
        for _ in range(n_per_variant):
            d = np.zeros(net.n)
            d[expensive] = simplex_split(rng, rng.uniform(0, 1000), len(expensive))
            inst = InputInstance([math.inf] * net.n, d)
            yield net, inst, price_of_security(net, inst)


def test_n1_certification():
    cases = AUDIT + list(_pjm5_audit_cases())
    sced_bad, ed_secure, priced = 0, 0, 0
    for net, inst, rep in cases:
        if not check_n1_security(net, inst, rep.sc_solution.generation, tol=1e-6).secure:
            sced_bad += 1
        if rep.pos > 1 + 1e-6:
            priced += 1
            if check_n1_security(net, inst, rep.ed_solution.generation, tol=1e-6).secure:
                ed_secure += 1
    ok = sced_bad == 0 and ed_secure == 0 and priced > 0
    assert record(5, ok, f"{len(cases)} instances: insecure SCED dispatches {sced_bad}; "
                         f"secure ED dispatches among {priced} with PoS>1: {ed_secure}")


# -- 7 -------------------------------------------------------------------------

def test_determinism():
    specs = [
        SweepSpec("pjm5", "random-distribution-study", 0, 1000, 100, runs=20, seed=3),
        SweepSpec("2bus", "demand-grid", 0, 300, 50, second=(0, 300, 50)),
        SweepSpec("pjm5", "capacity-sweep", 0, 1.5, 0.25, aggregate_demand=600, relative_capacity=True,
                  runs=10, seed=5),
    ]
    same = []
    for spec in specs:
        a = run_sweep(spec).to_csv().encode()
        b = run_sweep(spec).to_csv().encode()
        c = run_sweep(spec, workers=2).to_csv().encode()
        same.append(a == b == c)
    assert record(7, all(same), f"byte-identical CSV across repeated and parallel runs: {same}")
