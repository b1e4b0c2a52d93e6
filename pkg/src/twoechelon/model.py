"""Problem data, solution types, cost, constraint validation and arc preprocessing.

The model covers a two-echelon location-routing problem: vessels carry goods
from a city hub to transshipment points (TPs), light electric vehicles (LEVs)
and hand-carried jacks take them onward to demand points.  Vessel deliveries
may split a TP's inflow, every demand point is served exactly once, and the
two echelons are synchronized: goods must be unloaded at a TP before the LEV
or jack serving a demand point departs from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

TIME_EPS = 1e-6
QTY_EPS = 1e-6
INF = math.inf


# === instance data ===

@dataclass(frozen=True)
class TpSite:
    """A candidate transshipment location on the quay."""
    id: str
    establish_cost: float
    capacity: float
    laying_limit: float          # max berth occupation per vessel call (h)
    space: str                   # poor | moderate | spacious
    unload_time: float           # vessel unload service S1 (h)
    load_time: float             # LEV / jack loading service S2 (h)


@dataclass(frozen=True)
class DemandPoint:
    id: str
    demand: float
    tw_open: float
    tw_close: float
    service_time: float


@dataclass(frozen=True)
class VesselClass:
    id: str
    count: int
    capacity: float
    speed: Optional[float] = None        # km/h, kept for file round trips
    cost_per_km: Optional[float] = None


@dataclass(frozen=True)
class LevClass:
    id: str
    count: int
    capacity: float
    driving_range: float
    speed: Optional[float] = None
    cost_per_km: Optional[float] = None


class Instance:
    """Immutable problem data with index maps and per-class matrices.

    Second-echelon matrices are indexed over depots + TPs + demand points (in
    that order); first-echelon matrices over hub + TPs.  Unreachable arcs of
    the first echelon are encoded as +inf in both time and cost.
    """

    def __init__(self, name: str, hub: str, depots: Sequence[str],
                 tp_sites: Sequence[TpSite], demand_points: Sequence[DemandPoint],
                 vessel_classes: Sequence[VesselClass], lev_classes: Sequence[LevClass],
                 dist_second: np.ndarray,
                 travel_time_first: Dict[str, np.ndarray], cost_first: Dict[str, np.ndarray],
                 travel_time_second: Dict[str, np.ndarray], cost_second: Dict[str, np.ndarray],
                 travel_time_jack: np.ndarray,
                 jack_threshold: float, horizon: float,
                 coords: Optional[Dict[str, Tuple[float, float]]] = None,
                 jack_speed: Optional[float] = None, relaxed: bool = False):
        self.name = name
        self.hub = hub
        self.relaxed = relaxed
        self.depots = list(depots)
        self.tp_sites = list(tp_sites)
        self.demand_points = list(demand_points)
        self.vessel_classes = list(vessel_classes)
        self.lev_classes = list(lev_classes)
        self.dist_second = np.asarray(dist_second, dtype=float)
        self.travel_time_first = {k: np.asarray(v, dtype=float) for k, v in travel_time_first.items()}
        self.cost_first = {k: np.asarray(v, dtype=float) for k, v in cost_first.items()}
        self.travel_time_second = {k: np.asarray(v, dtype=float) for k, v in travel_time_second.items()}
        self.cost_second = {k: np.asarray(v, dtype=float) for k, v in cost_second.items()}
        self.travel_time_jack = np.asarray(travel_time_jack, dtype=float)
        self.jack_threshold = float(jack_threshold)
        self.horizon = float(horizon)
        self.coords = dict(coords) if coords else None
        self.jack_speed = jack_speed

        self.tp_ids = [t.id for t in self.tp_sites]
        self.point_ids = [p.id for p in self.demand_points]
        self.second_ids = self.depots + self.tp_ids + self.point_ids
        self.index2 = {n: i for i, n in enumerate(self.second_ids)}
        self.first_ids = [hub] + self.tp_ids
        self.index1 = {n: i for i, n in enumerate(self.first_ids)}
        self.tp_pos = {t: i for i, t in enumerate(self.tp_ids)}
        self.hrc_pos = {p: i for i, p in enumerate(self.point_ids)}

        self.tp_by_id = {t.id: t for t in self.tp_sites}
        self.point_by_id = {p.id: p for p in self.demand_points}
        self.vessel_class_by_id = {v.id: v for v in self.vessel_classes}
        self.lev_class_by_id = {v.id: v for v in self.lev_classes}

        # plain nested lists: scalar lookups in hot loops beat ndarray indexing
        self.d2 = self.dist_second.tolist()
        self.t2 = {k: v.tolist() for k, v in self.travel_time_second.items()}
        self.c2 = {k: v.tolist() for k, v in self.cost_second.items()}
        self.t1 = {k: v.tolist() for k, v in self.travel_time_first.items()}
        self.c1 = {k: v.tolist() for k, v in self.cost_first.items()}
        self.tjack = self.travel_time_jack.tolist()

        n2 = len(self.second_ids)
        self.n2 = n2
        nd, nt = len(self.depots), len(self.tp_ids)
        self.is_depot = [i < nd for i in range(n2)]
        self.is_tp = [nd <= i < nd + nt for i in range(n2)]
        self.is_hrc = [i >= nd + nt for i in range(n2)]
        # per-index window / service / demand tables for the second echelon
        self.ta_ix = [0.0] * n2
        self.tb_ix = [INF] * n2
        self.srv_ix = [0.0] * n2
        self.dem_ix = [0.0] * n2
        for t in self.tp_sites:
            self.srv_ix[self.index2[t.id]] = t.load_time
        for p in self.demand_points:
            i = self.index2[p.id]
            self.ta_ix[i] = p.tw_open
            self.tb_ix[i] = p.tw_close
            self.srv_ix[i] = p.service_time
            self.dem_ix[i] = p.demand
        # with every window open, schedules can never violate ta/tb
        self.windows_open = all(p.tw_open == 0.0 and math.isinf(p.tw_close)
                                for p in self.demand_points)

    # small conveniences -------------------------------------------------
    def dist(self, a: str, b: str) -> float:
        return self.d2[self.index2[a]][self.index2[b]]

    def tp(self, tp_id: str) -> TpSite:
        return self.tp_by_id[tp_id]

    def point(self, pid: str) -> DemandPoint:
        return self.point_by_id[pid]

    def jack_time(self, tp_id: str, pid: str) -> float:
        return self.tjack[self.tp_pos[tp_id]][self.hrc_pos[pid]]

    def total_demand(self) -> float:
        return sum(p.demand for p in self.demand_points)


class InfeasibleInstance(ValueError):
    """No solution can exist: a demand point cannot be served at all."""


def check_instance(inst: Instance) -> None:
    """Raise ValueError naming the offending entity on malformed data."""
    n2 = inst.n2
    if inst.dist_second.shape != (n2, n2):
        raise ValueError("dist_second must be %dx%d, got %s" % (n2, n2, inst.dist_second.shape))
    if len(set(inst.second_ids)) != n2 or inst.hub in inst.index2:
        raise ValueError("node ids must be unique and the hub distinct from second-echelon nodes")
    for i in range(n2):
        if abs(inst.dist_second[i, i]) > 1e-12:
            raise ValueError("nonzero self-distance at node %s" % inst.second_ids[i])
    for p in inst.demand_points:
        if p.demand <= 0:
            raise ValueError("demand point %s has non-positive demand" % p.id)
        if p.tw_open > p.tw_close:
            raise ValueError("demand point %s has tw_open > tw_close" % p.id)
        if p.tw_open < 0 or p.service_time < 0:
            raise ValueError("demand point %s has negative window or service time" % p.id)
    for t in inst.tp_sites:
        if t.capacity <= 0:
            raise ValueError("TP %s has non-positive capacity" % t.id)
        if t.establish_cost < 0 or t.unload_time < 0 or t.load_time < 0:
            raise ValueError("TP %s has negative cost or service time" % t.id)
        if t.unload_time > t.laying_limit:
            raise ValueError("TP %s unload time exceeds its laying limit" % t.id)
    for cls_list, kind in ((inst.vessel_classes, "vessel"), (inst.lev_classes, "LEV")):
        for c in cls_list:
            if c.count < 0 or c.capacity <= 0:
                raise ValueError("%s class %s has bad count or capacity" % (kind, c.id))
    n1 = len(inst.first_ids)
    for k in (inst.vessel_class_by_id):
        if k not in inst.travel_time_first or k not in inst.cost_first:
            raise ValueError("missing first-echelon matrices for vessel class %s" % k)
        tt, cc = inst.travel_time_first[k], inst.cost_first[k]
        if tt.shape != (n1, n1) or cc.shape != (n1, n1):
            raise ValueError("first-echelon matrices of class %s must be %dx%d" % (k, n1, n1))
        inf_mismatch = np.isinf(tt) != np.isinf(cc)
        if inf_mismatch.any():
            i, j = np.argwhere(inf_mismatch)[0]
            raise ValueError("class %s arc %s->%s: unreachable arcs need +inf in both time and cost"
                             % (k, inst.first_ids[i], inst.first_ids[j]))
    for k in inst.lev_class_by_id:
        if k not in inst.travel_time_second or k not in inst.cost_second:
            raise ValueError("missing second-echelon matrices for LEV class %s" % k)
        if inst.travel_time_second[k].shape != (n2, n2):
            raise ValueError("second-echelon matrices of class %s must be %dx%d" % (k, n2, n2))
    if inst.travel_time_jack.shape != (len(inst.tp_ids), len(inst.point_ids)):
        raise ValueError("travel_time_jack must be |TP| x |points|")
    if inst.jack_threshold < 0:
        raise ValueError("jack threshold must be non-negative")
    if not inst.depots:
        raise ValueError("at least one LEV depot is required")
    if not inst.tp_sites:
        raise ValueError("at least one TP candidate is required")


# === solution types ===

@dataclass
class VesselVisit:
    tp: str
    quantity: float
    arrival: float
    service_start: float
    served: Tuple[str, ...]      # demand points whose goods ride this call


@dataclass
class VesselRoute:
    vessel_class: str
    vessel_no: int
    visits: List[VesselVisit]


@dataclass
class LevRoute:
    lev_class: str
    lev_no: int
    depot: str
    tp: str
    sequence: List[str]
    start_times: Optional[List[float]] = None   # service starts at [tp] + sequence
    vessel: Optional[Tuple[str, int]] = None    # feeding vessel


@dataclass
class JackAssignment:
    tp: str
    point: str
    start_time: Optional[float] = None          # loading start at the TP
    vessel: Optional[Tuple[str, int]] = None


@dataclass
class Solution:
    open_tps: set
    vessel_routes: List[VesselRoute] = field(default_factory=list)
    lev_routes: List[LevRoute] = field(default_factory=list)
    jacks: List[JackAssignment] = field(default_factory=list)


def clone_solution(sol: Solution) -> Solution:
    return Solution(
        open_tps=set(sol.open_tps),
        vessel_routes=[VesselRoute(r.vessel_class, r.vessel_no,
                                   [VesselVisit(v.tp, v.quantity, v.arrival, v.service_start, tuple(v.served))
                                    for v in r.visits])
                       for r in sol.vessel_routes],
        lev_routes=[LevRoute(r.lev_class, r.lev_no, r.depot, r.tp, list(r.sequence),
                             list(r.start_times) if r.start_times else None, r.vessel)
                    for r in sol.lev_routes],
        jacks=[JackAssignment(j.tp, j.point, j.start_time, j.vessel) for j in sol.jacks],
    )


def solution_signature(sol: Solution) -> tuple:
    """Canonical second-echelon signature used for 'seen before' bookkeeping."""
    routes = tuple(sorted((r.lev_class, r.depot, r.tp, tuple(r.sequence)) for r in sol.lev_routes))
    jacks = tuple(sorted((j.tp, j.point) for j in sol.jacks))
    return (frozenset(sol.open_tps), routes, jacks)


# === timing ===

def chain_latest_starts(windows: List[Tuple[float, float]], services: List[float],
                        gaps: List[float]) -> List[float]:
    """Latest service starts along a fixed chain that avoid any window violation.

    windows[i] = (ta, tb), services[i] = on-site time, gaps[i] = travel from
    node i to i+1.  Waiting before a window opening is free.
    """
    n = len(windows)
    lat = [0.0] * n
    lat[n - 1] = windows[n - 1][1]
    for i in range(n - 2, -1, -1):
        nxt = max(lat[i + 1], windows[i + 1][0])
        lat[i] = min(windows[i][1], nxt - services[i] - gaps[i])
    return lat


def chain_forward(windows: List[Tuple[float, float]], services: List[float],
                  gaps: List[float], start: float) -> Tuple[List[float], float]:
    """Forward schedule from a given arrival time at the first node.

    Returns the true service starts (late service begins at arrival) and the
    total window violation under non-propagating accounting: a late node
    contributes (arrival - tw_close) once and the clock continues from the
    window closing, so one delay is never charged twice.
    """
    starts = []
    warp = 0.0
    acc = true = start
    for i, (ta, tb) in enumerate(windows):
        if acc > tb:
            warp += acc - tb
            st_acc = tb
        else:
            st_acc = max(acc, ta)
        starts.append(max(true, ta))
        if i + 1 < len(windows):
            acc = st_acc + services[i] + gaps[i]
            true = starts[-1] + services[i] + gaps[i]
    return starts, warp


def lev_route_chain(inst: Instance, route: LevRoute):
    """(windows, services, gaps) over depot, TP, demand points, depot."""
    t2 = inst.t2[route.lev_class]
    ix = inst.index2
    nodes = [route.depot, route.tp] + list(route.sequence) + [route.depot]
    idxs = [ix[n] for n in nodes]
    windows = [(inst.ta_ix[i], inst.tb_ix[i]) for i in idxs]
    windows[0] = (0.0, INF)
    windows[-1] = (0.0, INF)
    services = [inst.srv_ix[i] for i in idxs]
    services[0] = services[-1] = 0.0
    gaps = [t2[idxs[i]][idxs[i + 1]] for i in range(len(idxs) - 1)]
    return windows, services, gaps


@dataclass
class RouteTiming:
    starts: List[float]          # service starts at [tp] + sequence
    warp: float                  # minimal summed window violation
    latest_tp_start: float       # latest TP service start the windows allow


def lev_route_timing(inst: Instance, route: LevRoute) -> RouteTiming:
    """Schedule a LEV route as late as its windows allow (weakest sync deadline)."""
    windows, services, gaps = lev_route_chain(inst, route)
    lat = chain_latest_starts(windows, services, gaps)
    start = max(0.0, lat[0]) if not math.isinf(lat[0]) else 0.0
    starts, warp = chain_forward(windows, services, gaps, start)
    return RouteTiming(starts=starts[1:-1], warp=warp, latest_tp_start=lat[1])


def jack_timing(inst: Instance, tp_id: str, pid: str):
    """(loading start at the TP, window violation, latest feasible loading start)."""
    t3 = inst.jack_time(tp_id, pid)
    s2 = inst.tp(tp_id).load_time
    p = inst.point(pid)
    latest = p.tw_close - s2 - t3
    warp = max(0.0, -latest) if not math.isinf(latest) else 0.0
    if math.isinf(latest):
        start = max(0.0, p.tw_open - s2 - t3)
    else:
        start = max(0.0, latest)
    return start, warp, latest


def schedule_solution(inst: Instance, sol: Solution) -> Solution:
    """Fill in committed service-start times for LEV routes and jacks."""
    for r in sol.lev_routes:
        r.start_times = lev_route_timing(inst, r).starts
    for j in sol.jacks:
        j.start_time = jack_timing(inst, j.tp, j.point)[0]
    return sol


# === objective ===

def lev_route_cost(inst: Instance, route: LevRoute) -> float:
    c2 = inst.c2[route.lev_class]
    ix = inst.index2
    nodes = [route.depot, route.tp] + list(route.sequence) + [route.depot]
    return sum(c2[ix[nodes[i]]][ix[nodes[i + 1]]] for i in range(len(nodes) - 1))


def lev_route_distance(inst: Instance, route: LevRoute) -> float:
    d2 = inst.d2
    ix = inst.index2
    nodes = [route.depot, route.tp] + list(route.sequence) + [route.depot]
    return sum(d2[ix[nodes[i]]][ix[nodes[i + 1]]] for i in range(len(nodes) - 1))


def lev_route_load(inst: Instance, route: LevRoute) -> float:
    return sum(inst.point_by_id[p].demand for p in route.sequence)


def vessel_route_cost(inst: Instance, route: VesselRoute) -> float:
    c1 = inst.c1[route.vessel_class]
    ix = inst.index1
    stops = [inst.hub] + [v.tp for v in route.visits] + [inst.hub]
    return sum(c1[ix[stops[i]]][ix[stops[i + 1]]] for i in range(len(stops) - 1))


def cost_breakdown(inst: Instance, sol: Solution) -> Tuple[float, float, float]:
    """(first-echelon travel, second-echelon travel, establishment)."""
    first = sum(vessel_route_cost(inst, r) for r in sol.vessel_routes)
    second = sum(lev_route_cost(inst, r) for r in sol.lev_routes)
    estab = sum(inst.tp_by_id[t].establish_cost for t in sol.open_tps)
    return first, second, estab


def total_cost(inst: Instance, sol: Solution) -> float:
    """Objective: vessel arc costs + LEV arc costs + establishment costs."""
    return sum(cost_breakdown(inst, sol))


# === validation ===

FAMILIES = (
    "vessel_capacity",    # per-vessel load limit
    "tp_capacity",        # throughput limit at each open TP
    "laying",             # berth occupation limit per vessel call
    "lev_capacity",       # per-LEV load limit
    "lev_range",          # LEV driving range
    "time_window",        # service-start windows at demand points
    "flow",               # structural and bookkeeping consistency
    "synchronization",    # vessel-before-LEV / vessel-before-jack coupling
    "jack_coherence",     # jack iff served from an open TP strictly within reach
)


class ViolationReport:
    """Per-family violation records; magnitudes are in the constraint's unit."""

    def __init__(self):
        self.entries: Dict[str, List[Tuple[str, float]]] = {f: [] for f in FAMILIES}

    def add(self, family: str, detail: str, magnitude: float) -> None:
        self.entries[family].append((detail, magnitude))

    def total(self, family: str) -> float:
        return sum(m for _, m in self.entries[family])

    def grand_total(self) -> float:
        return sum(self.total(f) for f in FAMILIES)

    def is_empty(self, eps: float = TIME_EPS) -> bool:
        return all(self.total(f) <= eps for f in FAMILIES)

    def summary(self) -> str:
        lines = []
        for f in FAMILIES:
            if self.entries[f]:
                lines.append("%s: %d violation(s), total %.6f" % (f, len(self.entries[f]), self.total(f)))
                lines.extend("  - %s (%.6f)" % (d, m) for d, m in self.entries[f])
        return "\n".join(lines) if lines else "no violations"

    def __repr__(self):
        return "ViolationReport(%s)" % ", ".join(
            "%s=%.4g" % (f, self.total(f)) for f in FAMILIES if self.entries[f])


def validate(inst: Instance, sol: Solution, *, second_echelon_only: bool = False) -> ViolationReport:
    """Check every constraint family; violations are data, not errors."""
    rep = ViolationReport()
    served_by_route: Dict[str, LevRoute] = {}
    served_by_jack: Dict[str, JackAssignment] = {}

    for t in sol.open_tps:
        if t not in inst.tp_by_id:
            rep.add("flow", "unknown TP %s declared open" % t, 1.0)

    # --- second echelon ---------------------------------------------------
    usage: Dict[Tuple[str, int], int] = {}
    per_class: Dict[str, int] = {}
    for r in sol.lev_routes:
        key = (r.lev_class, r.lev_no)
        usage[key] = usage.get(key, 0) + 1
        per_class[r.lev_class] = per_class.get(r.lev_class, 0) + 1
        if r.lev_class not in inst.lev_class_by_id:
            rep.add("flow", "unknown LEV class %s" % r.lev_class, 1.0)
            continue
        cls = inst.lev_class_by_id[r.lev_class]
        if r.depot not in inst.depots:
            rep.add("flow", "route of LEV %s:%d starts at unknown depot %s" % (key + (r.depot,)), 1.0)
            continue
        if r.tp not in sol.open_tps:
            rep.add("flow", "LEV %s:%d visits unopened TP %s" % (key + (r.tp,)), 1.0)
        if not r.sequence:
            rep.add("flow", "LEV %s:%d runs an empty route" % key, 1.0)
            continue
        for p in r.sequence:
            if p in served_by_route or p in served_by_jack:
                rep.add("flow", "demand point %s served more than once" % p, 1.0)
            served_by_route[p] = r
        load = lev_route_load(inst, r)
        if load > cls.capacity + QTY_EPS:
            rep.add("lev_capacity", "LEV %s:%d load %.4f over capacity %.4f" % (key + (load, cls.capacity)),
                    load - cls.capacity)
        dist = lev_route_distance(inst, r)
        if dist > cls.driving_range + QTY_EPS:
            rep.add("lev_range", "LEV %s:%d distance %.4f over range %.4f" % (key + (dist, cls.driving_range)),
                    dist - cls.driving_range)
        timing = lev_route_timing(inst, r)
        if timing.warp > TIME_EPS:
            rep.add("time_window", "LEV %s:%d misses windows by %.4f" % (key + (timing.warp,)), timing.warp)
        if r.start_times is not None:
            if len(r.start_times) != 1 + len(r.sequence):
                rep.add("flow", "LEV %s:%d stores %d start times for %d stops"
                        % (key + (len(r.start_times), 1 + len(r.sequence))), 1.0)
            else:
                windows, services, gaps = lev_route_chain(inst, r)
                for i in range(1, len(r.start_times)):
                    earliest = r.start_times[i - 1] + services[i] + gaps[i]
                    if r.start_times[i] < earliest - TIME_EPS:
                        rep.add("flow", "LEV %s:%d service at stop %d starts before it can arrive"
                                % (key + (i,)), earliest - r.start_times[i])
    for cls in inst.lev_classes:
        if per_class.get(cls.id, 0) > cls.count:
            rep.add("flow", "LEV class %s uses %d routes but only %d vehicles exist"
                    % (cls.id, per_class[cls.id], cls.count), per_class[cls.id] - cls.count)
    for key, n in usage.items():
        if n > 1:
            rep.add("flow", "LEV %s:%d drives %d routes" % (key + (n,)), n - 1)

    for j in sol.jacks:
        if j.point in served_by_route or j.point in served_by_jack:
            rep.add("flow", "demand point %s served more than once" % j.point, 1.0)
        served_by_jack[j.point] = j
        if j.tp not in inst.tp_by_id:
            rep.add("flow", "jack from unknown TP %s" % j.tp, 1.0)
            continue
        dis = inst.dist(j.tp, j.point)
        if j.tp not in sol.open_tps or dis >= inst.jack_threshold:
            rep.add("jack_coherence", "point %s jack-served from %s (open=%s, DIS=%.4f, DTr=%.4f)"
                    % (j.point, j.tp, j.tp in sol.open_tps, dis, inst.jack_threshold), 1.0)
        _, warp, _ = jack_timing(inst, j.tp, j.point)
        if warp > TIME_EPS:
            rep.add("time_window", "jack to %s misses its window by %.4f" % (j.point, warp), warp)
    for r in sol.lev_routes:
        for p in r.sequence:
            if r.tp in sol.open_tps and inst.dist(r.tp, p) < inst.jack_threshold:
                rep.add("jack_coherence", "point %s rides a LEV from %s although at jack distance"
                        % (p, r.tp), 1.0)

    for p in inst.point_ids:
        if p not in served_by_route and p not in served_by_jack:
            rep.add("flow", "demand point %s is not served" % p, 1.0)

    # TP throughput, measured on the goods actually moved through each TP
    tp_load: Dict[str, float] = {}
    for r in sol.lev_routes:
        tp_load[r.tp] = tp_load.get(r.tp, 0.0) + lev_route_load(inst, r)
    for j in sol.jacks:
        tp_load[j.tp] = tp_load.get(j.tp, 0.0) + inst.point_by_id[j.point].demand
    for t, load in sorted(tp_load.items()):
        cap = inst.tp_by_id[t].capacity if t in inst.tp_by_id else 0.0
        if load > cap + QTY_EPS:
            rep.add("tp_capacity", "TP %s moves %.4f over capacity %.4f" % (t, load, cap), load - cap)

    if second_echelon_only:
        return rep

    # --- first echelon ----------------------------------------------------
    vusage: Dict[Tuple[str, int], int] = {}
    vper_class: Dict[str, int] = {}
    carried: Dict[str, Tuple[Tuple[str, int], str]] = {}   # point -> (vessel, tp)
    for r in sol.vessel_routes:
        key = (r.vessel_class, r.vessel_no)
        vusage[key] = vusage.get(key, 0) + 1
        vper_class[r.vessel_class] = vper_class.get(r.vessel_class, 0) + 1
        if r.vessel_class not in inst.vessel_class_by_id:
            rep.add("flow", "unknown vessel class %s" % r.vessel_class, 1.0)
            continue
        cls = inst.vessel_class_by_id[r.vessel_class]
        if not r.visits:
            rep.add("flow", "vessel %s:%d sails an empty route" % key, 1.0)
            continue
        seen_tps = set()
        prev_tp = None
        load = 0.0
        t1 = inst.t1[r.vessel_class]
        prev_depart = 0.0
        prev_node = inst.hub
        for v in r.visits:
            if v.tp not in inst.tp_by_id:
                rep.add("flow", "vessel %s:%d visits unknown TP %s" % (key + (v.tp,)), 1.0)
                continue
            if v.tp not in sol.open_tps:
                rep.add("flow", "vessel %s:%d visits unopened TP %s" % (key + (v.tp,)), 1.0)
            if v.tp in seen_tps or v.tp == prev_tp:
                rep.add("flow", "vessel %s:%d revisits TP %s" % (key + (v.tp,)), 1.0)
            seen_tps.add(v.tp)
            prev_tp = v.tp
            load += v.quantity
            site = inst.tp_by_id[v.tp]
            hop = t1[inst.index1[prev_node]][inst.index1[v.tp]]
            if math.isinf(hop):
                rep.add("flow", "vessel %s:%d uses unreachable arc %s->%s" % (key + (prev_node, v.tp)), INF)
            else:
                earliest = prev_depart + hop
                if v.arrival < earliest - TIME_EPS:
                    rep.add("flow", "vessel %s:%d reaches %s before it can arrive" % (key + (v.tp,)),
                            earliest - v.arrival)
            if v.service_start < v.arrival - TIME_EPS:
                rep.add("flow", "vessel %s:%d unloads at %s before arriving" % (key + (v.tp,)),
                        v.arrival - v.service_start)
            laying = v.service_start + site.unload_time - v.arrival
            if laying > site.laying_limit + TIME_EPS:
                rep.add("laying", "vessel %s:%d occupies %s for %.4f over limit %.4f"
                        % (key + (v.tp, laying, site.laying_limit)), laying - site.laying_limit)
            want = sum(inst.point_by_id[p].demand for p in v.served if p in inst.point_by_id)
            if abs(want - v.quantity) > QTY_EPS:
                rep.add("flow", "vessel %s:%d drops %.4f at %s but its points need %.4f"
                        % (key + (v.quantity, v.tp, want)), abs(want - v.quantity))
            for p in v.served:
                if p in carried:
                    rep.add("flow", "goods of point %s ride two vessel calls" % p, 1.0)
                carried[p] = (key, v.tp)
            prev_depart = v.service_start + site.unload_time
            prev_node = v.tp
        back = t1[inst.index1[prev_node]][inst.index1[inst.hub]]
        if math.isinf(back):
            rep.add("flow", "vessel %s:%d cannot return from %s" % (key + (prev_node,)), INF)
        if load > cls.capacity + QTY_EPS:
            rep.add("vessel_capacity", "vessel %s:%d carries %.4f over capacity %.4f"
                    % (key + (load, cls.capacity)), load - cls.capacity)
    for cls in inst.vessel_classes:
        if vper_class.get(cls.id, 0) > cls.count:
            rep.add("flow", "vessel class %s sails %d routes but only %d vessels exist"
                    % (cls.id, vper_class[cls.id], cls.count), vper_class[cls.id] - cls.count)
    for key, n in vusage.items():
        if n > 1:
            rep.add("flow", "vessel %s:%d sails %d routes" % (key + (n,)), n - 1)

    for p in inst.point_ids:
        if p not in carried:
            rep.add("flow", "goods of point %s never leave the hub" % p, 1.0)

    # synchronization: the vessel carrying a point's goods must call at the
    # point's own TP and finish unloading before the LEV / jack departs
    visit_lookup: Dict[Tuple[str, int, str], VesselVisit] = {}
    for r in sol.vessel_routes:
        for v in r.visits:
            visit_lookup[(r.vessel_class, r.vessel_no, v.tp)] = v
    for r in sol.lev_routes:
        tp_start = (r.start_times[0] if r.start_times
                    else lev_route_timing(inst, r).starts[0])
        for p in r.sequence:
            got = carried.get(p)
            if got is None:
                continue
            vkey, vtp = got
            if vtp != r.tp:
                rep.add("synchronization", "goods of %s land at %s but its LEV loads at %s"
                        % (p, vtp, r.tp), 1.0)
                continue
            if r.vessel is not None and tuple(r.vessel) != vkey:
                rep.add("synchronization", "LEV of %s synced to vessel %s:%d but goods ride %s:%d"
                        % ((p,) + tuple(r.vessel) + vkey), 1.0)
            visit = visit_lookup.get(vkey + (r.tp,))
            if visit is None:
                continue
            ready = visit.service_start + inst.tp_by_id[r.tp].unload_time
            if tp_start < ready - TIME_EPS:
                rep.add("synchronization", "LEV at %s departs %.4f before vessel %s:%d finishes at %.4f"
                        % ((r.tp, tp_start) + vkey + (ready,)), ready - tp_start)
    for j in sol.jacks:
        got = carried.get(j.point)
        if got is None:
            continue
        vkey, vtp = got
        if vtp != j.tp:
            rep.add("synchronization", "goods of %s land at %s but its jack loads at %s"
                    % (j.point, vtp, j.tp), 1.0)
            continue
        visit = visit_lookup.get(vkey + (j.tp,))
        if visit is None:
            continue
        start = j.start_time if j.start_time is not None else jack_timing(inst, j.tp, j.point)[0]
        ready = visit.service_start + inst.tp_by_id[j.tp].unload_time
        if start < ready - TIME_EPS:
            rep.add("synchronization", "jack to %s departs %.4f before vessel %s:%d finishes at %.4f"
                    % ((j.point, start) + vkey + (ready,)), ready - start)

    return rep


def penalized_magnitudes(rep: ViolationReport) -> Tuple[float, float, float, float]:
    """(vehicle capacity, TP capacity, time windows, driving range) totals."""
    return (rep.total("vessel_capacity") + rep.total("lev_capacity"),
            rep.total("tp_capacity"),
            rep.total("time_window"),
            rep.total("lev_range"))


# === preprocessing ===

class ArcMask:
    """Admissible second-echelon arcs after structural and bound pruning."""

    def __init__(self, allowed: np.ndarray, index2: Dict[str, int]):
        self.allowed = allowed
        self.index2 = index2
        self.rows = allowed.tolist()

    def ok(self, i: int, j: int) -> bool:
        return self.rows[i][j]

    def ok_ids(self, a: str, b: str) -> bool:
        return self.rows[self.index2[a]][self.index2[b]]


def preprocess(inst: Instance) -> ArcMask:
    """Mask arcs that no feasible route can use.

    Keeps the admissible shapes (depot->TP, TP->point, point->point,
    point->depot) and drops pairs that no time window or no LEV capacity can
    accommodate.
    """
    n2 = inst.n2
    allowed = np.zeros((n2, n2), dtype=bool)
    max_cap = max((c.capacity for c in inst.lev_classes), default=0.0)
    min_t2 = None
    for k in inst.travel_time_second:
        m = inst.travel_time_second[k]
        min_t2 = m.copy() if min_t2 is None else np.minimum(min_t2, m)
    for i in range(n2):
        for j in range(n2):
            if i == j:
                continue
            if inst.is_depot[i] and inst.is_tp[j]:
                pass
            elif inst.is_tp[i] and inst.is_hrc[j]:
                pass
            elif inst.is_hrc[i] and (inst.is_hrc[j] or inst.is_depot[j]):
                pass
            else:
                continue
            if inst.is_hrc[j]:
                reach = inst.ta_ix[i] + inst.srv_ix[i] + min_t2[i, j]
                if reach > inst.tb_ix[j] + TIME_EPS:
                    continue
                if inst.is_hrc[i] and inst.dem_ix[i] + inst.dem_ix[j] > max_cap + QTY_EPS:
                    continue
            allowed[i, j] = True
    return ArcMask(allowed, inst.index2)
