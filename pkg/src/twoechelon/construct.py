"""Initial solutions: capacity-aware TP clustering, jack pre-assignment and
the semi-parallel route construction heuristic."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from .evaluate import RouteTimeCache, route_metrics
from .model import (INF, InfeasibleInstance, Instance, JackAssignment,
                    LevRoute, QTY_EPS, Solution, VesselRoute, VesselVisit,
                    lev_route_cost, lev_route_load, preprocess,
                    schedule_solution)

OVERLOAD_FACTOR = 1.25     # cluster load tolerance before k is raised
ADMISSION_FACTOR = 2.0     # out-of-cluster admission radius, x cluster radius
RCL_SIZE = 5


def initial_k(inst: Instance) -> int:
    """Lower-bound estimate of how many TPs the total demand needs."""
    mean_cap = sum(t.capacity for t in inst.tp_sites) / len(inst.tp_sites)
    k = math.ceil(inst.total_demand() / mean_cap)
    return max(1, min(k, len(inst.tp_sites)))


@dataclass
class ClusterPlan:
    k: int
    centers: List[str]                 # distinct TP candidate ids
    membership: Dict[str, int]         # demand point -> cluster index
    loads: List[float]                 # summed member demand per cluster
    radii: List[float]                 # max member distance per center
    neighbors: List[List[int]]         # cluster -> clusters sharing reach


def _assign_members(inst: Instance, centers: Sequence[str]) -> Dict[str, int]:
    membership = {}
    for p in inst.point_ids:
        best, pick = INF, 0
        for ci, c in enumerate(centers):
            d = inst.dist(c, p)
            if d < best - 1e-12:
                best, pick = d, ci
        membership[p] = pick
    return membership


def _snap_centers(inst: Instance, centers: Sequence[str],
                  membership: Dict[str, int]) -> List[str]:
    """Move each center to the candidate nearest its members' centroid."""
    new: List[str] = []
    used = set()
    for ci, old in enumerate(centers):
        members = [p for p in inst.point_ids if membership[p] == ci]
        if not members:
            order = [old] + [t for t in inst.tp_ids if t != old]
        elif inst.coords:
            cx = sum(inst.coords[p][0] for p in members) / len(members)
            cy = sum(inst.coords[p][1] for p in members) / len(members)
            order = sorted(inst.tp_ids,
                           key=lambda t: ((inst.coords[t][0] - cx) ** 2
                                          + (inst.coords[t][1] - cy) ** 2, t))
        else:
            order = sorted(inst.tp_ids,
                           key=lambda t: (sum(inst.dist(t, p) for p in members), t))
        pick = next(t for t in order if t not in used)
        new.append(pick)
        used.add(pick)
    return new


def _lloyd(inst: Instance, k: int, first: str):
    """One clustering run seeded farthest-first from a given first center."""
    centers = [first]
    while len(centers) < k:
        best, pick = -1.0, None
        for t in inst.tp_ids:
            if t in centers:
                continue
            d = min(inst.dist(t, c) for c in centers)
            if d > best + 1e-12:
                best, pick = d, t
        centers.append(pick)
    for _ in range(100):
        membership = _assign_members(inst, centers)
        new = _snap_centers(inst, centers, membership)
        if new == centers:
            break
        centers = new
    membership = _assign_members(inst, centers)
    obj = sum(inst.dist(centers[membership[p]], p) for p in inst.point_ids)
    return obj, centers, membership


def cluster(inst: Instance, k: int) -> ClusterPlan:
    """Cluster demand points onto k TP candidates, raising k while any
    cluster's load exceeds its center's capacity by more than 25%."""
    n_tp = len(inst.tp_ids)
    if not 1 <= k <= n_tp:
        raise ValueError("cluster count must be in [1, %d], got %d" % (n_tp, k))
    while True:
        best = None
        for first in inst.tp_ids:   # small deterministic restart portfolio
            cand = _lloyd(inst, k, first)
            if best is None or cand[0] < best[0] - 1e-12:
                best = cand
        _, centers, membership = best
        loads = [0.0] * k
        for p in inst.point_ids:
            loads[membership[p]] += inst.point_by_id[p].demand
        ok = all(loads[ci] <= OVERLOAD_FACTOR * inst.tp_by_id[centers[ci]].capacity + QTY_EPS
                 for ci in range(k))
        if ok or k == n_tp:
            break
        k += 1
    radii = [0.0] * k
    for p in inst.point_ids:
        ci = membership[p]
        radii[ci] = max(radii[ci], inst.dist(centers[ci], p))
    neighbors = []
    for a in range(k):
        lim = ADMISSION_FACTOR * radii[a]
        nb = {a}
        for p in inst.point_ids:
            if membership[p] != a and inst.dist(centers[a], p) <= lim + 1e-12:
                nb.add(membership[p])
        neighbors.append(sorted(nb))
    return ClusterPlan(k, centers, membership, loads, radii, neighbors)


def random_plan(inst: Instance, rng) -> ClusterPlan:
    """Plan with k TPs opened uniformly at random and no cluster structure.

    Membership still snaps each point to its nearest opened TP, but every
    cluster neighbors every other, so construction sees one flat pool."""
    k = initial_k(inst)
    centers = sorted(rng.sample(sorted(inst.tp_ids), k))
    membership = _assign_members(inst, centers)
    loads = [0.0] * k
    radii = [0.0] * k
    for p in inst.point_ids:
        ci = membership[p]
        loads[ci] += inst.point_by_id[p].demand
        radii[ci] = max(radii[ci], inst.dist(centers[ci], p))
    neighbors = [list(range(k)) for _ in range(k)]
    return ClusterPlan(k, centers, membership, loads, radii, neighbors)


def assign_jacks(inst: Instance, open_tps) -> List[JackAssignment]:
    """Points strictly within jack reach of their nearest open TP."""
    opens = sorted(open_tps)
    if not opens:
        raise ValueError("jack assignment needs at least one open TP")
    out = []
    for p in inst.point_ids:
        best, pick = INF, None
        for t in opens:
            d = inst.dist(t, p)
            if d < best - 1e-12:
                best, pick = d, t
        if best < inst.jack_threshold:
            out.append(JackAssignment(pick, p))
    return out


def roulette_rank(rng, m: int) -> int:
    """Rank-proportional roulette over m ranked entries (best rank favored)."""
    total = m * (m + 1) / 2.0
    x = rng.random() * total
    acc = 0.0
    for i in range(m):
        acc += m - i
        if x < acc:
            return i
    return m - 1


def route_acut(inst: Instance, route: LevRoute) -> float:
    """Average cost per unit transferred; empty routes rank worst."""
    load = lev_route_load(inst, route)
    return lev_route_cost(inst, route) / load if load > QTY_EPS else INF


def nearest_depot(inst: Instance, tp: str) -> str:
    return min(inst.depots, key=lambda d: (inst.dist(d, tp), d))


def spc_construct(inst: Instance, plan: ClusterPlan,
                  jacks: Sequence[JackAssignment], rng,
                  mask=None) -> Solution:
    """Build a second-echelon solution cluster by cluster.

    Each iteration drafts one candidate route per reachable cluster and
    commits the one with the lowest average cost per unit transferred.
    Capacity is hard here; windows are left to the penalty machinery.
    """
    if mask is None:
        mask = preprocess(inst)
    max_cap = max(c.capacity for c in inst.lev_classes)
    for p in inst.demand_points:
        if p.demand > max_cap + QTY_EPS:
            raise InfeasibleInstance("point %s needs %.4f but the largest LEV carries %.4f"
                                     % (p.id, p.demand, max_cap))
    members: List[List[str]] = [[] for _ in range(plan.k)]
    for p in inst.point_ids:
        members[plan.membership[p]].append(p)
    jack_points = {j.point for j in jacks}
    pool = {p for p in inst.point_ids if p not in jack_points}
    sol = Solution(open_tps=set(plan.centers),
                   jacks=[JackAssignment(j.tp, j.point) for j in jacks])
    units = {c.id: c.count for c in inst.lev_classes}
    counter = {c.id: 0 for c in inst.lev_classes}

    def pick_class(min_cap: float = 0.0):
        avail = [c for c in inst.lev_classes if units[c.id] > 0]
        fitting = [c for c in avail if c.capacity >= min_cap - QTY_EPS]
        group = fitting or avail
        return max(group, key=lambda c: (c.capacity, c.id)) if group else None

    def build_route(ci: int, cls):
        tp = plan.centers[ci]
        depot = nearest_depot(inst, tp)
        lim = ADMISSION_FACTOR * plan.radii[ci]
        remaining = sorted(p for p in pool
                           if plan.membership[p] == ci
                           or inst.dist(tp, p) <= lim + 1e-12)
        seq: List[str] = []
        load = 0.0
        cache = RouteTimeCache(inst, mask, cls.id, depot, tp, seq)
        while remaining:
            cands = []
            for p in remaining:
                d = inst.point_by_id[p].demand
                if load + d > cls.capacity + QTY_EPS:
                    continue
                for pos in range(len(seq) + 1):
                    dc = cache.delta_insert(pos, p)[0]
                    if not math.isinf(dc):
                        cands.append((dc / d, p, pos))
            if not cands:
                break
            cands.sort()
            pick = roulette_rank(rng, min(RCL_SIZE, len(cands)))
            _, p, pos = cands[pick]
            seq.insert(pos, p)
            load += inst.point_by_id[p].demand
            remaining.remove(p)
            cache = RouteTimeCache(inst, mask, cls.id, depot, tp, seq)
        if not seq:
            return None
        return (cache.cost / load, tp, depot, seq, load)

    def commit(cls, tp, depot, seq):
        sol.lev_routes.append(LevRoute(cls.id, counter[cls.id], depot, tp, list(seq)))
        counter[cls.id] += 1
        units[cls.id] -= 1
        pool.difference_update(seq)

    def force_singleton(cls):
        """Last resort: serve the lowest pool point alone, ignoring the mask."""
        p = min(pool)
        best = None
        for t in sorted(sol.open_tps):
            depot = nearest_depot(inst, t)
            c = route_metrics(inst, cls.id, depot, t, [p])[0]
            if best is None or c < best[0] - 1e-9:
                best = (c, t, depot)
        commit(cls, best[1], best[2], [p])

    while pool:
        live = sorted(ci for ci in range(plan.k) if any(p in pool for p in members[ci]))
        seed = live[rng.randrange(len(live))]
        closure, frontier = set(), [seed]
        while frontier:
            a = frontier.pop()
            if a not in closure:
                closure.add(a)
                frontier.extend(plan.neighbors[a])
        cand_clusters = [ci for ci in live if ci in closure] or live
        cls = pick_class(min(inst.point_by_id[p].demand for p in pool))
        if cls is None:
            if not sol.lev_routes:
                raise InfeasibleInstance("no LEV units available at all")
            _absorb_leftovers(inst, sol, sorted(pool))
            pool.clear()
            break
        built = []
        for ci in cand_clusters:
            r = build_route(ci, cls)
            if r is not None:
                built.append((r[0], ci, r))
        if not built:
            force_singleton(cls)
            continue
        built.sort(key=lambda b: (b[0], b[1]))
        _, _, (_, tp, depot, seq, _) = built[0]
        commit(cls, tp, depot, seq)
    return schedule_solution(inst, sol)


def _absorb_leftovers(inst: Instance, sol: Solution, leftovers: Sequence[str]) -> None:
    """Fleet exhausted: push remaining points into existing routes at the
    cheapest position; the penalty machinery prices the resulting overloads."""
    for p in leftovers:
        best = None
        for r in sol.lev_routes:
            for pos in range(len(r.sequence) + 1):
                trial = r.sequence[:pos] + [p] + r.sequence[pos:]
                c = route_metrics(inst, r.lev_class, r.depot, r.tp, trial)[0]
                if best is None or c < best[0] - 1e-9:
                    best = (c, r, pos)
        best[1].sequence.insert(best[2], p)
    schedule_solution(inst, sol)


def initial_first_echelon(inst: Instance, sol: Solution) -> None:
    """Greedy vessel sweep over the open TPs in nearest-neighbor order.

    A placeholder good enough to complete an initial solution; the pricing
    stage rebuilds the first echelon from scratch anyway.
    """
    tp_points: Dict[str, List[str]] = {}
    for r in sol.lev_routes:
        tp_points.setdefault(r.tp, []).extend(r.sequence)
    for j in sol.jacks:
        tp_points.setdefault(j.tp, []).append(j.point)
    min_t1 = {}
    for a in inst.first_ids:
        for b in inst.first_ids:
            min_t1[a, b] = min(inst.t1[k][inst.index1[a]][inst.index1[b]]
                               for k in inst.vessel_class_by_id)
    order = []
    here = inst.hub
    todo = sorted(tp_points)
    while todo:
        nxt = min(todo, key=lambda t: (min_t1[here, t], t))
        order.append(nxt)
        todo.remove(nxt)
        here = nxt
    fleet = []
    for cls in sorted(inst.vessel_classes, key=lambda c: (-c.capacity, c.id)):
        fleet.extend((cls, i) for i in range(cls.count))
    if not fleet and tp_points:
        raise InfeasibleInstance("no vessel units available at all")
    sol.vessel_routes = []
    ui = 0
    stops: List[List] = []      # [tp, [points]] for the vessel being filled
    load = 0.0

    def flush():
        nonlocal stops, load
        if not stops:
            return
        cls, no = fleet[min(ui, len(fleet) - 1)]
        t1 = inst.t1[cls.id]
        visits = []
        prev, depart = inst.hub, 0.0
        for tp, pts in stops:
            at = depart + t1[inst.index1[prev]][inst.index1[tp]]
            q = sum(inst.point_by_id[p].demand for p in pts)
            visits.append(VesselVisit(tp, q, at, at, tuple(pts)))
            depart = at + inst.tp_by_id[tp].unload_time
            prev = tp
        sol.vessel_routes.append(VesselRoute(cls.id, no, visits))
        stops, load = [], 0.0

    for tp in order:
        for p in tp_points[tp]:
            d = inst.point_by_id[p].demand
            cap = fleet[ui][0].capacity if ui < len(fleet) else INF
            if stops and load + d > cap + QTY_EPS and ui < len(fleet) - 1:
                flush()
                ui += 1
            if stops and stops[-1][0] == tp:
                stops[-1][1].append(p)
            else:
                stops.append([tp, [p]])
            load += d
    flush()


def initial_solution(inst: Instance, rng, mask=None) -> Solution:
    """Cluster, pre-assign jacks, construct routes, sketch the first echelon."""
    plan = cluster(inst, initial_k(inst))
    jacks = assign_jacks(inst, plan.centers)
    sol = spc_construct(inst, plan, jacks, rng, mask=mask)
    initial_first_echelon(inst, sol)
    return sol
