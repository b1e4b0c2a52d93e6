"""First-echelon solve: aggregate second-echelon commitments into merged
demands per TP, then run branch-and-price over the vessel fleet.

The second echelon fixes, for every LEV route and jack trip, the latest time
goods must be ready at the TP.  Each route / jack becomes a demand copy with a
deadline; copies are merged exactly (bin size + window tolerance) and the
resulting VRPTW over TP copies is solved to optimality by column generation
with arc-flow branching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np

from .model import (INF, InfeasibleInstance, Instance, QTY_EPS, Solution,
                    TIME_EPS, VesselRoute, VesselVisit, chain_forward,
                    clone_solution, jack_timing, lev_route_chain,
                    lev_route_timing)
from .simplex import LpError, lp_solve

RC_TOL = 1e-6
ART_COST = 1e7


# === aggregation ===

def aggregate(inst: Instance, sol: Solution) -> Dict[str, List[tuple]]:
    """Per-TP raw demand copies: (quantity, deadline, origin).

    One copy per LEV route (its whole load) and one per jack-served point.
    The deadline is the latest vessel unload start that still lets the route
    or jack begin loading in time for every downstream window; departures can
    always be postponed up to that point.
    """
    out: Dict[str, List[tuple]] = {t: [] for t in sorted(sol.open_tps)}
    for r in sorted(sol.lev_routes, key=lambda r: (r.lev_class, r.lev_no)):
        qty = sum(inst.point_by_id[p].demand for p in r.sequence)
        latest = lev_route_timing(inst, r).latest_tp_start
        deadline = latest - inst.tp_by_id[r.tp].unload_time
        out.setdefault(r.tp, []).append(
            (qty, deadline, ("route", r.lev_class, r.lev_no)))
    for j in sorted(sol.jacks, key=lambda j: j.point):
        qty = inst.point_by_id[j.point].demand
        latest = jack_timing(inst, j.tp, j.point)[2]
        deadline = latest - inst.tp_by_id[j.tp].unload_time
        out.setdefault(j.tp, []).append((qty, deadline, ("jack", j.point)))
    return out


# === exact merging (bin packing with window compatibility) ===

@dataclass
class MergeProblem:
    demands: List[float]
    windows: List[Tuple[float, float]]
    cap: float
    tol: float


@dataclass
class MergedDemand:
    tp: str
    quantity: float
    tw_open: float
    tw_close: float
    origins: Tuple[tuple, ...]
    group: int


def _wdiff(a: float, b: float) -> float:
    if math.isinf(a) and math.isinf(b):
        return 0.0
    return abs(a - b)


def _compatible_windows(problem: MergeProblem, i: int, j: int) -> bool:
    wa, wb = problem.windows[i], problem.windows[j]
    return (_wdiff(wa[0], wb[0]) <= problem.tol + TIME_EPS
            and _wdiff(wa[1], wb[1]) <= problem.tol + TIME_EPS)


def merge(problem: MergeProblem) -> List[List[int]]:
    """Minimal grouping with per-group demand <= cap and pairwise window
    differences within the tolerance; exact branch-and-bound."""
    n = len(problem.demands)
    if n == 0:
        return []
    for j, d in enumerate(problem.demands):
        if d > problem.cap + QTY_EPS:
            raise ValueError("demand copy %d (%.4f) exceeds the bin size %.4f"
                             % (j, d, problem.cap))
    order = sorted(range(n), key=lambda j: (-problem.demands[j], j))
    total = sum(problem.demands)
    lower = max(1, math.ceil(total / problem.cap - QTY_EPS))

    best: List[Optional[List[List[int]]]] = [None]
    best_count = [n + 1]

    def first_fit() -> List[List[int]]:
        groups: List[List[int]] = []
        loads: List[float] = []
        for j in order:
            for g, grp in enumerate(groups):
                if (loads[g] + problem.demands[j] <= problem.cap + QTY_EPS
                        and all(_compatible_windows(problem, j, o) for o in grp)):
                    grp.append(j)
                    loads[g] += problem.demands[j]
                    break
            else:
                groups.append([j])
                loads.append(problem.demands[j])
        return groups

    seed = first_fit()
    best[0] = [list(g) for g in seed]
    best_count[0] = len(seed)
    if best_count[0] == lower:
        return sorted([sorted(g) for g in best[0]])

    groups: List[List[int]] = []
    loads: List[float] = []

    def rec(k: int) -> None:
        if len(groups) >= best_count[0]:
            return
        if k == n:
            best[0] = [list(g) for g in groups]
            best_count[0] = len(groups)
            return
        j = order[k]
        for g in range(len(groups)):
            if (loads[g] + problem.demands[j] <= problem.cap + QTY_EPS
                    and all(_compatible_windows(problem, j, o)
                            for o in groups[g])):
                groups[g].append(j)
                loads[g] += problem.demands[j]
                rec(k + 1)
                groups[g].pop()
                loads[g] -= problem.demands[j]
        if len(groups) + 1 < best_count[0]:
            groups.append([j])
            loads.append(problem.demands[j])
            rec(k + 1)
            groups.pop()
            loads.pop()

    rec(0)
    if best_count[0] < lower:
        raise AssertionError("grouping beat the packing lower bound")
    return sorted([sorted(g) for g in best[0]])


def build_merged(inst: Instance, sol: Solution, cap_fraction: float = 0.25,
                 tol: float = 2.0) -> List[MergedDemand]:
    """Aggregate and merge every TP's copies into B&P demand units."""
    copies = aggregate(inst, sol)
    base_cap = cap_fraction * min(c.capacity for c in inst.vessel_classes)
    merged: List[MergedDemand] = []
    for tp in sorted(copies):
        rows = copies[tp]
        if not rows:
            continue
        cap = max([base_cap] + [q for q, _, _ in rows])
        problem = MergeProblem(demands=[q for q, _, _ in rows],
                               windows=[(0.0, tb) for _, tb, _ in rows],
                               cap=cap, tol=tol)
        for group in merge(problem):
            qty = sum(rows[j][0] for j in group)
            tb = min(rows[j][1] for j in group)
            origins = tuple(sorted(rows[j][2] for j in group))
            merged.append(MergedDemand(tp=tp, quantity=qty, tw_open=0.0,
                                       tw_close=tb, origins=origins,
                                       group=len(merged)))
    return merged


# === pricing (elementary shortest path with resources) ===

@dataclass(frozen=True)
class Column:
    vessel_class: str
    stops: Tuple[int, ...]       # merged-demand indices, visit order
    cost: float


def column_cost(inst: Instance, merged: Sequence[MergedDemand],
                vessel_class: str, stops: Sequence[int]) -> float:
    c1 = inst.c1[vessel_class]
    ix = inst.index1
    cost = 0.0
    prev = inst.hub
    for s in stops:
        tp = merged[s].tp
        if tp != prev:
            cost += c1[ix[prev]][ix[tp]]
        prev = tp
    cost += c1[ix[prev]][ix[inst.hub]]
    return cost


class _Label:
    __slots__ = ("node", "rcost", "time", "load", "visited", "parent")

    def __init__(self, node, rcost, time, load, visited, parent):
        self.node = node
        self.rcost = rcost
        self.time = time
        self.load = load
        self.visited = visited
        self.parent = parent

    def path(self) -> List[int]:
        out, lab = [], self
        while lab.parent is not None:
            out.append(lab.node)
            lab = lab.parent
        return out[::-1]


def _dominates(a: "_Label", b: "_Label") -> bool:
    if (a.rcost > b.rcost + 1e-12 or a.time > b.time + 1e-12
            or a.load > b.load + 1e-12 or not a.visited <= b.visited):
        return False
    return (a.rcost < b.rcost - 1e-12 or a.time < b.time - 1e-12
            or a.load < b.load - 1e-12 or a.visited != b.visited)


def price(inst: Instance, merged: Sequence[MergedDemand], vessel_class: str,
          pi: Sequence[float], sigma: float,
          forbidden: FrozenSet[Tuple[int, int]] = frozenset()
          ) -> Optional[Column]:
    """Best negative-reduced-cost vessel route, or None.

    Nodes are merged demands (their TP copies); consecutive stops at the same
    TP share one berth call.  Labels carry (reduced cost, call start, load,
    visited set); dominance additionally requires a visited-subset so pruning
    never cuts off an elementary extension.
    """
    cls = inst.vessel_class_by_id[vessel_class]
    t1 = inst.t1[vessel_class]
    c1 = inst.c1[vessel_class]
    ix = inst.index1
    hub = ix[inst.hub]
    M = len(merged)
    usable = []
    for i, md in enumerate(merged):
        site = inst.tp_by_id[md.tp]
        if site.unload_time > site.laying_limit + TIME_EPS:
            continue
        usable.append(i)

    buckets: List[List[_Label]] = [[] for _ in range(M)]
    queue: List[_Label] = []
    root = _Label(-1, 0.0, 0.0, 0.0, frozenset(), None)
    best: Optional[Tuple[float, _Label]] = None

    def try_extend(lab: _Label, j: int) -> None:
        md = merged[j]
        arc = (lab.node + 1, j + 1)
        if arc in forbidden:
            return
        load = lab.load + md.quantity
        if load > cls.capacity + QTY_EPS:
            return
        if lab.node < 0:
            hop = t1[hub][ix[md.tp]]
            if math.isinf(hop):
                return
            time = hop
        else:
            cur = merged[lab.node]
            if cur.tp == md.tp:
                time = lab.time
            else:
                if md.tp in {merged[v].tp for v in lab.visited}:
                    return
                hop = t1[ix[cur.tp]][ix[md.tp]]
                if math.isinf(hop):
                    return
                time = lab.time + inst.tp_by_id[cur.tp].unload_time + hop
        if time > md.tw_close + TIME_EPS:
            return
        rcost = lab.rcost - pi[j]
        if lab.node < 0 or merged[lab.node].tp != md.tp:
            a = hub if lab.node < 0 else ix[merged[lab.node].tp]
            rcost += c1[a][ix[md.tp]]
        new = _Label(j, rcost, time, load, lab.visited | {j}, lab)
        bucket = buckets[j]
        for other in bucket:
            if _dominates(other, new) or (other.rcost <= new.rcost + 1e-12
                                          and other.time <= new.time + 1e-12
                                          and other.load <= new.load + 1e-12
                                          and other.visited <= new.visited):
                return
        bucket[:] = [o for o in bucket if not _dominates(new, o)]
        bucket.append(new)
        queue.append(new)

    def try_close(lab: _Label) -> None:
        nonlocal best
        if lab.node < 0:
            return
        if (lab.node + 1, 0) in forbidden:
            return
        back = c1[ix[merged[lab.node].tp]][hub]
        if math.isinf(back):
            return
        total = lab.rcost + back - sigma
        if total < -RC_TOL and (best is None or total < best[0] - 1e-12):
            best = (total, lab)

    for j in usable:
        try_extend(root, j)
    while queue:
        lab = queue.pop()
        if lab not in buckets[lab.node]:
            continue
        try_close(lab)
        for j in usable:
            if j not in lab.visited:
                try_extend(lab, j)

    if best is None:
        return None
    stops = tuple(best[1].path())
    return Column(vessel_class, stops,
                  column_cost(inst, merged, vessel_class, stops))


# === restricted master + branch and price ===

def _column_arcs(col: Column) -> List[Tuple[int, int]]:
    arcs = []
    prev = 0
    for s in col.stops:
        arcs.append((prev, s + 1))
        prev = s + 1
    arcs.append((prev, 0))
    return arcs


def _master(inst: Instance, merged: Sequence[MergedDemand],
            columns: Sequence[Column]):
    """Solve the restricted set-partitioning master; returns (x, pi, sigma,
    objective, artificial usage)."""
    M = len(merged)
    classes = [c.id for c in inst.vessel_classes]
    K = len(classes)
    n = len(columns)
    A = np.zeros((M + K, n + M))
    c = np.zeros(n + M)
    for r, col in enumerate(columns):
        for s in col.stops:
            A[s, r] = 1.0
        A[M + classes.index(col.vessel_class), r] = 1.0
        c[r] = col.cost
    for j in range(M):
        A[j, n + j] = 1.0
        c[n + j] = ART_COST
    b = [1.0] * M + [float(inst.vessel_class_by_id[k].count) for k in classes]
    senses = ["="] * M + ["<="] * K
    x, y, obj = lp_solve(A, b, c, senses)
    art = float(np.sum(x[n:]))
    return x[:n], y[:M], y[M:], obj, art


@dataclass
class BnpStats:
    nodes: int = 0
    columns: int = 0
    lp_rounds: int = 0
    root_lp: float = 0.0


def _generate_columns(inst, merged, pool: List[Column],
                      forbidden: Dict[str, FrozenSet[Tuple[int, int]]],
                      stats: BnpStats):
    """Column generation loop at one tree node; returns final master data."""
    keys = {(c.vessel_class, c.stops) for c in pool}
    while True:
        active = [c for c in pool
                  if not (set(_column_arcs(c))
                          & forbidden.get(c.vessel_class, frozenset()))]
        x, pi, sigma, obj, art = _master(inst, merged, active)
        stats.lp_rounds += 1
        grew = False
        for k, cls in enumerate(inst.vessel_classes):
            if cls.count <= 0:
                continue
            col = price(inst, merged, cls.id, pi, float(sigma[k]),
                        forbidden.get(cls.id, frozenset()))
            if col is None:
                continue
            key = (col.vessel_class, col.stops)
            if key in keys:
                continue
            keys.add(key)
            pool.append(col)
            stats.columns += 1
            grew = True
        if not grew:
            return active, x, obj, art


def _arc_flows(active: Sequence[Column], x: np.ndarray):
    flows: Dict[Tuple[str, int, int], float] = {}
    for col, xv in zip(active, x):
        if xv <= 1e-9:
            continue
        for arc in _column_arcs(col):
            key = (col.vessel_class,) + arc
            flows[key] = flows.get(key, 0.0) + float(xv)
    return flows


def _extract_routes(active, x) -> Optional[List[Column]]:
    """Turn an all-integral-arc LP solution into whole columns."""
    chosen: List[Column] = []
    for col, xv in zip(active, x):
        r = round(float(xv))
        if abs(xv - r) > 1e-6:
            return None
        chosen.extend([col] * int(r))
    return chosen


def branch_and_price(inst: Instance, merged: Sequence[MergedDemand],
                     stats: Optional[BnpStats] = None) -> List[Column]:
    """Exact vessel routing over merged demands; returns the chosen columns."""
    if not merged:
        return []
    if not any(c.count > 0 for c in inst.vessel_classes):
        raise InfeasibleInstance("no vessel units available at all")
    stats = stats if stats is not None else BnpStats()
    pool: List[Column] = []
    incumbent: Optional[List[Column]] = None
    incumbent_cost = INF
    root_art = None

    stack: List[Dict[str, FrozenSet[Tuple[int, int]]]] = [{}]
    while stack:
        forbidden = stack.pop()
        stats.nodes += 1
        try:
            active, x, obj, art = _generate_columns(inst, merged, pool,
                                                    forbidden, stats)
        except LpError:
            continue
        if root_art is None:
            root_art = art
            stats.root_lp = obj
            if art > 1e-6:
                raise InfeasibleInstance(
                    "first echelon cannot cover every merged demand "
                    "(fleet or deadlines too tight)")
        if art > 1e-6 or obj >= incumbent_cost - 1e-9:
            continue
        chosen = _extract_routes(active, x)
        if chosen is not None:
            cost = sum(c.cost for c in chosen)
            if cost < incumbent_cost - 1e-9:
                incumbent, incumbent_cost = chosen, cost
            continue
        flows = _arc_flows(active, x)
        frac_key, frac_val = None, 0.0
        for key, v in sorted(flows.items()):
            f = abs(v - round(v))
            if f > frac_val + 1e-9:
                frac_key, frac_val = key, f
        if frac_key is None:
            # integral arcs decompose into whole pool columns
            chosen = _walk_arcs(inst, merged, active, x)
            cost = sum(c.cost for c in chosen)
            if cost < incumbent_cost - 1e-9:
                incumbent, incumbent_cost = chosen, cost
            continue
        cls_id, a, b = frac_key
        base = forbidden.get(cls_id, frozenset())
        deny = dict(forbidden)
        deny[cls_id] = base | {(a, b)}
        force = dict(forbidden)
        extra: Set[Tuple[int, int]] = set()
        M = len(merged)
        if a != 0:
            extra |= {(a, l) for l in range(M + 1) if l != b}
        if b != 0:
            extra |= {(l, b) for l in range(M + 1) if l != a}
        force[cls_id] = base | extra
        for other in inst.vessel_classes:
            if other.id == cls_id:
                continue
            ban = set(force.get(other.id, frozenset()))
            for node in (a, b):
                if node != 0:
                    ban |= {(node, l) for l in range(M + 1)}
                    ban |= {(l, node) for l in range(M + 1)}
            force[other.id] = frozenset(ban)
        stack.append(deny)
        stack.append(force)

    if incumbent is None:
        raise InfeasibleInstance("branch and price found no integral plan")
    return incumbent


def _walk_arcs(inst, merged, active, x) -> List[Column]:
    """Decompose integral per-class arc flows into whole routes."""
    chosen: List[Column] = []
    for cls in inst.vessel_classes:
        flows: Dict[Tuple[int, int], float] = {}
        for col, xv in zip(active, x):
            if col.vessel_class != cls.id or xv <= 1e-9:
                continue
            for arc in _column_arcs(col):
                flows[arc] = flows.get(arc, 0.0) + float(xv)
        out: Dict[int, List[int]] = {}
        for (a, b), v in sorted(flows.items()):
            n = int(round(v))
            if a != 0 and n > 0:
                out.setdefault(a, []).extend([b] * n)
        heads = sorted(b for (a, b), v in flows.items()
                       if a == 0 for _ in range(int(round(v))))
        for head in heads:
            stops = []
            node = head
            while node != 0:
                stops.append(node - 1)
                node = out[node].pop()
            chosen.append(Column(cls.id, tuple(stops),
                                 column_cost(inst, merged, cls.id, stops)))
    counts: Dict[int, int] = {}
    for col in chosen:
        for s in col.stops:
            counts[s] = counts.get(s, 0) + 1
    assert all(counts.get(s, 0) == 1 for s in range(len(merged))), \
        "arc walk did not reproduce an exact cover"
    return chosen


# === recombination ===

def _commit_route(inst: Instance, r, ready: float) -> None:
    """Commit service starts so loading begins once the goods are ashore."""
    windows, services, gaps = lev_route_chain(inst, r)
    start = max(0.0, ready - gaps[0])
    starts, _ = chain_forward(windows, services, gaps, start)
    r.start_times = starts[1:-1]


def combine(inst: Instance, sol: Solution, merged: Sequence[MergedDemand],
            chosen: Sequence[Column]) -> Solution:
    """Attach the priced vessel routes to the second echelon and commit the
    second-echelon departures behind each unload."""
    out = clone_solution(sol)
    route_by_key = {(r.lev_class, r.lev_no): r for r in out.lev_routes}
    jack_by_point = {j.point: j for j in out.jacks}
    out.vessel_routes = []
    numbering: Dict[str, int] = {}
    for col in sorted(chosen, key=lambda c: (c.vessel_class, c.stops)):
        no = numbering.get(col.vessel_class, 0)
        numbering[col.vessel_class] = no + 1
        vkey = (col.vessel_class, no)
        t1 = inst.t1[col.vessel_class]
        ix = inst.index1
        visits = []
        t = 0.0
        prev = inst.hub
        i = 0
        while i < len(col.stops):
            tp = merged[col.stops[i]].tp
            calls = []
            while i < len(col.stops) and merged[col.stops[i]].tp == tp:
                calls.append(merged[col.stops[i]])
                i += 1
            arrival = t + t1[ix[prev]][ix[tp]]
            ready = arrival + inst.tp_by_id[tp].unload_time
            served: List[str] = []
            qty = 0.0
            for md in calls:
                qty += md.quantity
                for origin in md.origins:
                    if origin[0] == "route":
                        r = route_by_key[(origin[1], origin[2])]
                        r.vessel = vkey
                        served.extend(r.sequence)
                        _commit_route(inst, r, ready)
                    else:
                        j = jack_by_point[origin[1]]
                        j.vessel = vkey
                        served.append(origin[1])
                        j.start_time = max(jack_timing(inst, j.tp, j.point)[0],
                                           ready)
            visits.append(VesselVisit(tp, qty, arrival, arrival,
                                      tuple(served)))
            t = ready
            prev = tp
        out.vessel_routes.append(VesselRoute(col.vessel_class, no, visits))
    return out


def solve_first_echelon(inst: Instance, sol: Solution,
                        cap_fraction: float = 0.25, tol: float = 2.0,
                        stats: Optional[BnpStats] = None) -> Solution:
    """Aggregate, merge, price and recombine; returns the full solution."""
    merged = build_merged(inst, sol, cap_fraction=cap_fraction, tol=tol)
    chosen = branch_and_price(inst, merged, stats=stats)
    return combine(inst, sol, merged, chosen)
