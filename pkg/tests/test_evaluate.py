"""Segment calculus, adaptive penalties and O(1) route delta evaluation."""

import math
import random

import pytest

from conftest import build_instance, random_instance, worked_solution
from twoechelon.evaluate import (EMPTY_SEG, PenaltyState, RouteTimeCache,
                                 generalized_cost, route_metrics, seg_concat,
                                 seg_node, seg_warp, update_penalties)
from twoechelon.model import (INF, LevRoute, VesselRoute, VesselVisit,
                              chain_forward, chain_latest_starts,
                              lev_route_cost, lev_route_distance,
                              lev_route_load, lev_route_timing, preprocess,
                              schedule_solution, total_cost, validate)

W0 = [10.0, 10.0, 10.0, 10.0]


# === segment calculus ===

def test_seg_hand_cases():
    s = seg_node(2.0, 9.0, 0.5)
    assert seg_concat(EMPTY_SEG, s, 0.0) == s
    # forced waiting: A closes at 10, B opens at 20, one hour apart
    joined = seg_concat(seg_node(0, 10, 0), seg_node(20, 21, 0), 1.0)
    assert joined == (10.0, 0.0, 10.0, 10.0)
    # forced lateness: leaving A no earlier than 4 reaches B (closes 2) at >= 5
    joined = seg_concat(seg_node(4, 10, 0), seg_node(0, 2, 0), 1.0)
    assert joined == (1.0, 3.0, 4.0, 4.0)
    assert seg_warp(joined) == 3.0
    # a negative latest start adds the start-at-zero violation
    assert seg_warp((0.0, 1.0, 5.0, -2.0)) == 3.0


def random_chain(rng, n):
    windows, services = [], []
    for _ in range(n):
        a = rng.uniform(0, 10)
        windows.append((a, a + rng.uniform(0, 4)))
        services.append(rng.uniform(0, 0.5))
    gaps = [rng.uniform(0, 2) for _ in range(n - 1)]
    return windows, services, gaps


def fold_chain(windows, services, gaps):
    seg = seg_node(windows[0][0], windows[0][1], services[0])
    for i in range(1, len(windows)):
        node = seg_node(windows[i][0], windows[i][1], services[i])
        seg = seg_concat(seg, node, gaps[i - 1])
    return seg


def test_seg_concat_is_associative():
    rng = random.Random(11)
    for _ in range(300):
        (w, s, g) = random_chain(rng, 3)
        a, b, c = (seg_node(w[i][0], w[i][1], s[i]) for i in range(3))
        left = seg_concat(seg_concat(a, b, g[0]), c, g[1])
        right = seg_concat(a, seg_concat(b, c, g[1]), g[0])
        for x, y in zip(left, right):
            assert x == pytest.approx(y, abs=1e-9)


def test_seg_warp_equals_minimal_forward_warp():
    rng = random.Random(13)
    for _ in range(300):
        windows, services, gaps = random_chain(rng, rng.randint(2, 8))
        seg = fold_chain(windows, services, gaps)
        lat = chain_latest_starts(windows, services, gaps)
        _, warp = chain_forward(windows, services, gaps, max(0.0, lat[0]))
        assert seg_warp(seg) == pytest.approx(warp, abs=1e-9)


# === adaptive penalty weights ===

def test_update_penalties_examples():
    st = PenaltyState()
    for i in range(10):
        st.record((i < 3, False, True, i % 2 == 0))
    update_penalties(st, 10)
    assert st.weights[0] == pytest.approx(12.0)          # 3 of 10 violated
    assert st.weights[1] == pytest.approx(10.0 / 1.2)    # never violated
    assert st.weights[2] == pytest.approx(12.0)          # always violated
    assert st.weights[3] == pytest.approx(12.0)          # 5 of 10 violated
    assert st.history == []


def test_update_penalties_boundary_guard():
    st = PenaltyState()
    st.record((True, True, True, True))
    with pytest.raises(ValueError):
        update_penalties(st, 7)
    update_penalties(st, 0)   # boundary with empty closing window is a no-op
    st2 = PenaltyState()
    update_penalties(st2, 10)
    assert st2.weights == W0


def test_update_penalties_clamps():
    st = PenaltyState()
    for period in range(1, 41):
        for _ in range(10):
            st.record((True, False, True, False))
        update_penalties(st, 10 * period)
        assert st.weights[0] <= 5000.0 and st.weights[1] >= 0.1
    assert st.weights[0] == 5000.0
    assert st.weights[1] == 0.1
    assert st.weights[2] == 5000.0
    assert st.weights[3] == 0.1


# === generalized cost ===

def test_generalized_equals_objective_when_feasible(tiny):
    sol = worked_solution(tiny)
    assert generalized_cost(tiny, sol, W0) == pytest.approx(total_cost(tiny, sol))
    assert generalized_cost(tiny, sol, [500.0] * 4) == pytest.approx(total_cost(tiny, sol))


def test_generalized_prices_capacity_excess(tiny):
    sol = worked_solution(tiny)
    sol.lev_routes = [LevRoute("L", 0, "D1", "T1", ["P1"]),
                      LevRoute("L", 1, "D1", "T2", ["P2", "P3", "P4"])]
    sol.vessel_routes = [
        VesselRoute("V", 0, [VesselVisit("T1", 1.0, 0.1, 0.1, ("P1",))]),
        VesselRoute("V", 1, [VesselVisit("T2", 6.0, 0.4, 0.4, ("P2", "P3", "P4"))]),
    ]
    schedule_solution(tiny, sol)
    # load 6.0 against LEV capacity 4.0: only the capacity family is hit
    assert validate(tiny, sol).total("lev_capacity") == pytest.approx(2.0)
    assert (generalized_cost(tiny, sol, W0)
            == pytest.approx(total_cost(tiny, sol) + 10.0 * 2.0))


def test_generalized_without_vessels_scores_second_echelon(tiny):
    sol = worked_solution(tiny)
    sol.vessel_routes = []
    assert generalized_cost(tiny, sol, W0) == pytest.approx(total_cost(tiny, sol))


# === O(1) route deltas ===

def sample_route(inst, rng, allow_empty=True):
    cls = rng.choice(inst.lev_classes)
    depot = rng.choice(inst.depots)
    tp = rng.choice(inst.tp_ids)
    lo = 0 if allow_empty else 1
    seq = rng.sample(inst.point_ids, rng.randint(lo, min(5, len(inst.point_ids))))
    return cls, depot, tp, seq


def expected_deltas(inst, cls, depot, tp, before, after):
    c0, d0, l0, w0 = route_metrics(inst, cls.id, depot, tp, before)
    c1, d1, l1, w1 = route_metrics(inst, cls.id, depot, tp, after)
    ex = lambda v, lim: v - lim if v > lim else 0.0
    return (c1 - c0, w1 - w0,
            ex(l1, cls.capacity) - ex(l0, cls.capacity),
            ex(d1, cls.driving_range) - ex(d0, cls.driving_range))


def test_cache_metrics_match_model_functions():
    rng = random.Random(17)
    for _ in range(40):
        inst = random_instance(rng, n_points=rng.randint(3, 8),
                               n_tps=2, tight_windows=True)
        mask = preprocess(inst)
        cls, depot, tp, seq = sample_route(inst, rng, allow_empty=False)
        cache = RouteTimeCache(inst, mask, cls.id, depot, tp, seq)
        assert cache.metrics() == pytest.approx(
            route_metrics(inst, cls.id, depot, tp, seq), abs=1e-9)
        r = LevRoute(cls.id, 0, depot, tp, seq)
        want = (lev_route_cost(inst, r), lev_route_distance(inst, r),
                lev_route_load(inst, r), lev_route_timing(inst, r).warp)
        assert cache.metrics() == pytest.approx(want, abs=1e-9)


def test_delta_insert_matches_recompute():
    rng = random.Random(19)
    checked = masked = 0
    for _ in range(40):
        inst = random_instance(rng, n_points=rng.randint(3, 8),
                               n_tps=2, tight_windows=True)
        mask = preprocess(inst)
        cls, depot, tp, seq = sample_route(inst, rng)
        cache = RouteTimeCache(inst, mask, cls.id, depot, tp, seq)
        for q in inst.point_ids:
            if q in seq:
                continue
            for pos in range(len(seq) + 1):
                got = cache.delta_insert(pos, q)
                a, b = cache.nodes[pos + 1], cache.nodes[pos + 2]
                if not (mask.ok_ids(a, q) and mask.ok_ids(q, b)):
                    assert math.isinf(got[0])
                    masked += 1
                    continue
                want = expected_deltas(inst, cls, depot, tp, seq,
                                       seq[:pos] + [q] + seq[pos:])
                assert got == pytest.approx(want, abs=1e-9)
                checked += 1
    assert checked > 200 and masked > 20


def test_delta_remove_matches_recompute():
    rng = random.Random(23)
    checked = 0
    for _ in range(40):
        inst = random_instance(rng, n_points=rng.randint(3, 8),
                               n_tps=2, tight_windows=True)
        mask = preprocess(inst)
        cls, depot, tp, seq = sample_route(inst, rng, allow_empty=False)
        cache = RouteTimeCache(inst, mask, cls.id, depot, tp, seq)
        for pos in range(len(seq)):
            want = expected_deltas(inst, cls, depot, tp, seq,
                                   seq[:pos] + seq[pos + 1:])
            assert cache.delta_remove(pos) == pytest.approx(want, abs=1e-9)
            checked += 1
    assert checked > 60


def test_insert_then_remove_cancels():
    rng = random.Random(29)
    for _ in range(40):
        inst = random_instance(rng, n_points=6, n_tps=2)
        mask = preprocess(inst)
        cls, depot, tp, seq = sample_route(inst, rng)
        q = rng.choice([p for p in inst.point_ids if p not in seq])
        pos = rng.randint(0, len(seq))
        cache = RouteTimeCache(inst, mask, cls.id, depot, tp, seq)
        d_in = cache.delta_insert(pos, q)
        if math.isinf(d_in[0]):
            continue
        cache2 = RouteTimeCache(inst, mask, cls.id, depot, tp,
                                seq[:pos] + [q] + seq[pos:])
        d_out = cache2.delta_remove(pos)
        for x, y in zip(d_in, d_out):
            assert x + y == pytest.approx(0.0, abs=1e-9)


def test_masked_insertion_reports_inf():
    inst = build_instance(
        "mask", (0, 0), [(0, 1)],
        [("T1", (1, 0), 100.0, 20.0, 1.0, "moderate", 0.25, 0.1)],
        [("A", (2, 0), 1.0, 8.0, 10.0, 0.1),
         ("B", (3, 0), 1.0, 0.0, 2.0, 0.1)],
        [("V", 1, 6.0, 10.0, 2.0)], [("L", 2, 4.0, 40.0, 30.0, 0.27)],
        jack_threshold=0.3, horizon=12.0)
    cache = RouteTimeCache(inst, preprocess(inst), "L", "D1", "T1", ["A"])
    assert math.isinf(cache.delta_insert(1, "B")[0])   # A before B impossible
    assert not math.isinf(cache.delta_insert(0, "B")[0])
