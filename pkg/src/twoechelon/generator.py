"""Random benchmark instances over the published size classes."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (DemandPoint, Instance, LevClass, TpSite, VesselClass,
                    check_instance)

ZONE_AREA = {5: 0.5, 10: 0.5, 15: 0.5, 20: 0.5, 25: 0.5,
             50: 1.0, 75: 5.0, 100: 10.0, 150: 15.0, 200: 25.0}
SPACE_CAPACITY = {"poor": 10.0, "moderate": 20.0, "spacious": 40.0}
SPACE_COST = {"poor": (100.0, 125.0), "moderate": (125.0, 150.0),
              "spacious": (150.0, 175.0)}
HORIZON = 12.0
LAYING_LIMIT = 1.0
LEV_SPEED = 30.0
LEV_COST = 0.27
JACK_SPEED = 5.0


@dataclass
class GeneratorSpec:
    customers: int
    depots: Optional[int] = None     # drawn from the size-class range if None
    tps: Optional[int] = None


def size_prefix(customers: int) -> str:
    if customers <= 25:
        return "SI"
    return "MI" if customers <= 75 else "LI"


def _class_ranges(customers: int):
    small = customers <= 25
    return (1, 2) if small else (3, 4), (2, 4) if small else (5, 10)


def generate(spec: GeneratorSpec, rng: random.Random) -> Instance:
    """Instance with uniform customers in the class zone; deterministic in rng."""
    if spec.customers not in ZONE_AREA:
        raise ValueError("unknown size class: %r customers (expected one of %s)"
                         % (spec.customers, sorted(ZONE_AREA)))
    (d_lo, d_hi), (t_lo, t_hi) = _class_ranges(spec.customers)
    n_depots = spec.depots if spec.depots is not None else rng.randint(d_lo, d_hi)
    n_tps = spec.tps if spec.tps is not None else rng.randint(t_lo, t_hi)
    if not d_lo <= n_depots <= d_hi:
        raise ValueError("depot count %d outside the size-class range [%d, %d]"
                         % (n_depots, d_lo, d_hi))
    if not t_lo <= n_tps <= t_hi:
        raise ValueError("TP count %d outside the size-class range [%d, %d]"
                         % (n_tps, t_lo, t_hi))

    side = math.sqrt(ZONE_AREA[spec.customers])
    name = "%s-D%d-C%d-T%d" % (size_prefix(spec.customers), n_depots,
                               spec.customers, n_tps)
    coords = {"CH": (side / 2.0, -0.25 * side)}

    depots = []
    for i in range(n_depots):
        did = "D%d" % (i + 1)
        depots.append(did)
        coords[did] = (rng.uniform(0.0, side), rng.uniform(0.0, side))

    tps = []
    for i in range(n_tps):
        tid = "T%d" % (i + 1)
        space = rng.choice(sorted(SPACE_CAPACITY))
        lo, hi = SPACE_COST[space]
        tps.append(TpSite(tid, rng.uniform(lo, hi), SPACE_CAPACITY[space],
                          LAYING_LIMIT, space, rng.uniform(0.1, 0.3),
                          rng.uniform(0.05, 0.15)))
        # quay sites sit on the waterfront strip of the zone
        coords[tid] = (rng.uniform(0.0, side), rng.uniform(0.0, 0.1 * side))

    points = []
    for j in range(spec.customers):
        pid = "P%d" % (j + 1)
        coords[pid] = (rng.uniform(0.0, side), rng.uniform(0.0, side))
        center = rng.uniform(0.0, HORIZON)
        width = rng.uniform(1.0, 3.0)
        ta = max(0.0, center - width / 2.0)
        tb = min(HORIZON, center + width / 2.0)
        points.append(DemandPoint(pid, rng.uniform(0.1, 1.0), ta, tb,
                                  rng.uniform(0.02, 0.1)))
    total = sum(p.demand for p in points)

    levs = []
    for k in range(2):
        cap = rng.uniform(1.5, 4.0)
        count = max(2, math.ceil(0.8 * total / cap))
        levs.append(LevClass("L%d" % (k + 1), count, cap,
                             rng.uniform(15.0, 40.0), LEV_SPEED, LEV_COST))

    # a full LEV load rides a single vessel call, so vessels must hold at
    # least the largest LEV load
    floor_cap = max(1.0, max(l.capacity for l in levs))
    n_vcls = 1 if spec.customers <= 25 else 2
    vessels = []
    for k in range(n_vcls):
        cap = max(floor_cap, rng.uniform(0.25, 0.4) * total)
        count = max(2, math.ceil(1.5 * total / (n_vcls * cap)))
        vessels.append(VesselClass("V%d" % (k + 1), count, cap,
                                   rng.uniform(5.0, 15.0),
                                   rng.uniform(1.8, 2.5)))

    jack_threshold = rng.uniform(0.15, 0.4) * side

    second_ids = depots + [t.id for t in tps] + [p.id for p in points]
    dist2 = np.zeros((len(second_ids), len(second_ids)))
    for i, a in enumerate(second_ids):
        for j, b in enumerate(second_ids):
            dist2[i, j] = math.hypot(coords[a][0] - coords[b][0],
                                     coords[a][1] - coords[b][1])
    first_ids = ["CH"] + [t.id for t in tps]
    dist1 = np.zeros((len(first_ids), len(first_ids)))
    for i, a in enumerate(first_ids):
        for j, b in enumerate(first_ids):
            dist1[i, j] = math.hypot(coords[a][0] - coords[b][0],
                                     coords[a][1] - coords[b][1])
    tt1 = {v.id: dist1 / v.speed for v in vessels}
    cc1 = {v.id: dist1 * v.cost_per_km for v in vessels}
    tt2 = {l.id: dist2 / l.speed for l in levs}
    cc2 = {l.id: dist2 * l.cost_per_km for l in levs}
    tjack = np.zeros((len(tps), len(points)))
    for i, t in enumerate(tps):
        for j, p in enumerate(points):
            tjack[i, j] = math.hypot(coords[t.id][0] - coords[p.id][0],
                                     coords[t.id][1] - coords[p.id][1]) / JACK_SPEED

    inst = Instance(name, "CH", depots, tps, points, vessels, levs, dist2,
                    tt1, cc1, tt2, cc2, tjack, jack_threshold, HORIZON,
                    coords=coords, jack_speed=JACK_SPEED)
    check_instance(inst)
    return inst
