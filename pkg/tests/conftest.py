"""Shared fixtures: handcrafted instances built independently of package io."""

import math
import random

import numpy as np
import pytest

from twoechelon.model import (DemandPoint, Instance, LevClass, TpSite,
                              VesselClass, check_instance)


def euclid(a, b):
    return math.hypot(a[0] - b[0], a[1] - b[1])


def build_instance(name, hub_xy, depot_xys, tp_rows, point_rows, vessel_rows,
                   lev_rows, jack_threshold, horizon, jack_speed=5.0):
    """Assemble an Instance from coordinates with Euclidean matrices.

    tp_rows: (id, xy, fc, cap, laying, space, s1, s2)
    point_rows: (id, xy, demand, ta, tb, service)
    vessel_rows: (id, count, capacity, speed, cost_per_km)
    lev_rows: (id, count, capacity, range, speed, cost_per_km)
    """
    coords = {"CH": hub_xy}
    depots = []
    for i, xy in enumerate(depot_xys, 1):
        did = "D%d" % i
        depots.append(did)
        coords[did] = xy
    tps = []
    for (tid, xy, fc, cap, lay, space, s1, s2) in tp_rows:
        tps.append(TpSite(tid, fc, cap, lay, space, s1, s2))
        coords[tid] = xy
    points = []
    for (pid, xy, dem, ta, tb, srv) in point_rows:
        points.append(DemandPoint(pid, dem, ta, tb, srv))
        coords[pid] = xy
    vessels = [VesselClass(*row) for row in vessel_rows]
    levs = [LevClass(*row) for row in lev_rows]

    second_ids = depots + [t.id for t in tps] + [p.id for p in points]
    n2 = len(second_ids)
    dist2 = np.zeros((n2, n2))
    for i, a in enumerate(second_ids):
        for j, b in enumerate(second_ids):
            dist2[i, j] = euclid(coords[a], coords[b])
    first_ids = ["CH"] + [t.id for t in tps]
    n1 = len(first_ids)
    dist1 = np.zeros((n1, n1))
    for i, a in enumerate(first_ids):
        for j, b in enumerate(first_ids):
            dist1[i, j] = euclid(coords[a], coords[b])
    tt1 = {v.id: dist1 / v.speed for v in vessels}
    cc1 = {v.id: dist1 * v.cost_per_km for v in vessels}
    tt2 = {l.id: dist2 / l.speed for l in levs}
    cc2 = {l.id: dist2 * l.cost_per_km for l in levs}
    tjack = np.zeros((len(tps), len(points)))
    for i, t in enumerate(tps):
        for j, p in enumerate(points):
            tjack[i, j] = euclid(coords[t.id], coords[p.id]) / jack_speed

    inst = Instance(name, "CH", depots, tps, points, vessels, levs, dist2,
                    tt1, cc1, tt2, cc2, tjack, jack_threshold, horizon,
                    coords=coords, jack_speed=jack_speed)
    check_instance(inst)
    return inst


def tiny_instance(with_jack_point=False):
    points = [
        ("P1", (1.0, 1.0), 1.0, 0.0, 12.0, 0.05),
        ("P2", (2.0, 1.0), 2.0, 0.0, 12.0, 0.05),
        ("P3", (4.0, 1.0), 1.5, 0.0, 12.0, 0.05),
        ("P4", (5.0, 1.0), 2.5, 2.0, 6.0, 0.05),
    ]
    if with_jack_point:
        points.append(("P5", (1.05, 0.0), 0.8, 0.0, 12.0, 0.05))
    return build_instance(
        "tiny", (0.0, 0.0), [(0.0, 1.0)],
        [("T1", (1.0, 0.0), 100.0, 20.0, 1.0, "moderate", 0.25, 0.1),
         ("T2", (4.0, 0.0), 120.0, 20.0, 1.0, "moderate", 0.25, 0.1)],
        points,
        [("V", 2, 6.0, 10.0, 2.0)],
        [("L", 3, 4.0, 40.0, 30.0, 0.27)],
        jack_threshold=0.3, horizon=12.0)


@pytest.fixture
def tiny():
    return tiny_instance()


@pytest.fixture
def tiny_jack():
    return tiny_instance(with_jack_point=True)


def worked_solution(inst):
    """Two LEV routes, two vessel calls; feasible by construction."""
    from twoechelon.model import (JackAssignment, LevRoute, Solution,
                                  VesselRoute, VesselVisit, schedule_solution)
    sol = Solution(open_tps={"T1", "T2"})
    sol.lev_routes = [
        LevRoute("L", 0, "D1", "T1", ["P1", "P2"]),
        LevRoute("L", 1, "D1", "T2", ["P3", "P4"]),
    ]
    served1 = ("P1", "P2", "P5") if "P5" in inst.point_by_id else ("P1", "P2")
    q1 = sum(inst.point_by_id[p].demand for p in served1)
    sol.vessel_routes = [
        VesselRoute("V", 0, [VesselVisit("T1", q1, 0.1, 0.1, served1)]),
        VesselRoute("V", 1, [VesselVisit("T2", 4.0, 0.4, 0.4, ("P3", "P4"))]),
    ]
    if "P5" in inst.point_by_id:
        sol.jacks = [JackAssignment("T1", "P5", vessel=("V", 0))]
    for r in sol.lev_routes:
        r.vessel = ("V", 0) if r.tp == "T1" else ("V", 1)
    return schedule_solution(inst, sol)


def random_instance(rng, n_points=8, n_tps=3, n_depots=2, tight_windows=True,
                    n_vessel_classes=1, n_lev_classes=2):
    """Random coordinate instance for fuzzing; always passes check_instance."""
    hub = (rng.uniform(0, 2), rng.uniform(0, 2))
    depots = [(rng.uniform(0, 6), rng.uniform(0, 6)) for _ in range(n_depots)]
    tp_rows = []
    for i in range(n_tps):
        tp_rows.append(("T%d" % (i + 1), (rng.uniform(0, 6), rng.uniform(0, 6)),
                        rng.uniform(100, 175), rng.uniform(8, 20), rng.uniform(0.5, 1.5),
                        rng.choice(["poor", "moderate", "spacious"]),
                        rng.uniform(0.1, 0.3), rng.uniform(0.05, 0.15)))
    point_rows = []
    for j in range(n_points):
        if tight_windows:
            center = rng.uniform(1, 11)
            width = rng.uniform(1, 3)
            ta, tb = max(0.0, center - width / 2), min(12.0, center + width / 2)
        else:
            ta, tb = 0.0, 12.0
        point_rows.append(("P%d" % (j + 1), (rng.uniform(0, 6), rng.uniform(0, 6)),
                           rng.uniform(0.1, 1.0), ta, tb, rng.uniform(0.02, 0.1)))
    vessel_rows = [("V%d" % (k + 1), rng.randint(1, 3), rng.uniform(4, 10),
                    rng.uniform(5, 15), rng.uniform(1.8, 2.5))
                   for k in range(n_vessel_classes)]
    lev_rows = [("L%d" % (k + 1), rng.randint(2, 4), rng.uniform(1.5, 4.0),
                 rng.uniform(15, 40), 30.0, 0.27)
                for k in range(n_lev_classes)]
    return build_instance("rand", hub, depots, tp_rows, point_rows, vessel_rows,
                          lev_rows, jack_threshold=rng.uniform(0.2, 0.8), horizon=12.0)
