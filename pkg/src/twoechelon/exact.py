"""Exhaustive reference solvers for very small instances.

Deliberately independent of the heuristic machinery: plain enumeration over
open-TP subsets, forced jack assignments, ordered route partitions and
per-route resource checks.  Only usable for a handful of demand points.
"""

from __future__ import annotations

import itertools
import math
from typing import Dict, List, Optional, Sequence, Tuple

from .construct import assign_jacks
from .evaluate import route_metrics
from .model import (INF, Instance, JackAssignment, LevRoute, QTY_EPS,
                    Solution, TIME_EPS, jack_timing, lev_route_timing,
                    schedule_solution)

MAX_POINTS = 7


def set_partitions(items: Sequence):
    """Every partition of `items` into non-empty unlabelled blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [first]] + part[i + 1:]
        yield part + [[first]]


def ordered_partitions(items: Sequence):
    """Every partition into an unordered set of ordered sequences."""
    for part in set_partitions(items):
        for perms in itertools.product(*(itertools.permutations(b) for b in part)):
            yield [list(p) for p in perms]


def _assignments(ids_counts, n_blocks: int):
    """All ways to give each block a class id without exceeding unit counts."""
    ids = [i for i, _ in ids_counts]
    counts = {i: c for i, c in ids_counts}
    def rec(i, left):
        if i == n_blocks:
            yield []
            return
        for cid in ids:
            if left[cid] == 0:
                continue
            left[cid] -= 1
            for tail in rec(i + 1, left):
                yield [cid] + tail
            left[cid] += 1
    yield from rec(0, dict(counts))


def _class_assignments(inst: Instance, n_blocks: int):
    return _assignments([(c.id, c.count) for c in inst.lev_classes], n_blocks)


def brute_force_second(inst: Instance) -> Tuple[float, Optional[Solution]]:
    """Optimal second-echelon plan (or (inf, None) when none is feasible)."""
    if len(inst.point_ids) > MAX_POINTS:
        raise ValueError("brute force is capped at %d demand points" % MAX_POINTS)
    best_cost, best_sol = INF, None
    tps = inst.tp_ids
    for r in range(1, len(tps) + 1):
        for subset in itertools.combinations(tps, r):
            opens = set(subset)
            estab = sum(inst.tp_by_id[t].establish_cost for t in subset)
            jacks = assign_jacks(inst, opens)
            if any(jack_timing(inst, j.tp, j.point)[1] > 1e-9 for j in jacks):
                continue
            jack_load: Dict[str, float] = {}
            for j in jacks:
                jack_load[j.tp] = jack_load.get(j.tp, 0.0) + inst.point_by_id[j.point].demand
            if any(jack_load.get(t, 0.0) > inst.tp_by_id[t].capacity + QTY_EPS
                   for t in subset):
                continue
            routed = [p for p in inst.point_ids
                      if p not in {j.point for j in jacks}]
            if not routed:
                if estab < best_cost:
                    sol = Solution(open_tps=set(opens), jacks=[
                        JackAssignment(j.tp, j.point) for j in jacks])
                    best_cost, best_sol = estab, schedule_solution(inst, sol)
                continue
            for blocks in ordered_partitions(routed):
                for classes in _class_assignments(inst, len(blocks)):
                    options = []
                    ok = True
                    for block, cid in zip(blocks, classes):
                        cls = inst.lev_class_by_id[cid]
                        opts = []
                        for t in subset:
                            for d in inst.depots:
                                c, dist, load, warp = route_metrics(
                                    inst, cid, d, t, block)
                                if (warp > 1e-9 or load > cls.capacity + QTY_EPS
                                        or dist > cls.driving_range + 1e-9):
                                    continue
                                opts.append((c, d, t, load))
                        if not opts:
                            ok = False
                            break
                        opts.sort()
                        options.append(opts)
                    if not ok:
                        continue
                    picked = _cheapest_tp_feasible(inst, subset, jack_load,
                                                   options,
                                                   best_cost - estab)
                    if picked is None:
                        continue
                    cost = estab + sum(o[0] for o in picked)
                    if cost >= best_cost:
                        continue
                    sol = Solution(open_tps=set(opens))
                    used: Dict[str, int] = {}
                    for (c, d, t, load), cid, block in zip(picked, classes,
                                                           blocks):
                        no = used.get(cid, 0)
                        used[cid] = no + 1
                        sol.lev_routes.append(LevRoute(cid, no, d, t,
                                                       list(block)))
                    sol.jacks = [JackAssignment(j.tp, j.point) for j in jacks]
                    best_cost, best_sol = cost, schedule_solution(inst, sol)
    return best_cost, best_sol


def _cheapest_tp_feasible(inst, subset, jack_load, options, budget):
    """Cheapest per-block (route option) choice respecting TP capacities."""
    greedy = [opts[0] for opts in options]
    load: Dict[str, float] = dict(jack_load)
    for c, d, t, q in greedy:
        load[t] = load.get(t, 0.0) + q
    if all(load.get(t, 0.0) <= inst.tp_by_id[t].capacity + QTY_EPS
           for t in subset):
        return greedy if sum(o[0] for o in greedy) < budget else None
    caps = {t: inst.tp_by_id[t].capacity for t in subset}
    best = [None, budget]

    def rec(i, acc, load):
        if acc >= best[1]:
            return
        if i == len(options):
            best[0] = list(current)
            best[1] = acc
            return
        for opt in options[i]:
            c, d, t, q = opt
            if load.get(t, 0.0) + q > caps[t] + QTY_EPS:
                continue
            load[t] = load.get(t, 0.0) + q
            current.append(opt)
            rec(i + 1, acc + c, load)
            current.pop()
            load[t] -= q

    current: List[tuple] = []
    rec(0, 0.0, dict(jack_load))
    return best[0]


# === first echelon over merged transshipment demands ===

def first_route_cost(inst: Instance, merged, vessel_class: str,
                     stops: Sequence[int]) -> Optional[float]:
    """Cost of one vessel route over merged demand indices, None if infeasible.

    Walks the stop list directly: consecutive stops at the same TP share one
    berth call, a TP may not be revisited later, every call must start by the
    stop's deadline and unloading must fit the laying allowance.
    """
    if not stops:
        return None
    cls = inst.vessel_class_by_id[vessel_class]
    t1 = inst.t1[vessel_class]
    c1 = inst.c1[vessel_class]
    ix = inst.index1
    hub = ix[inst.hub]
    if sum(merged[s].quantity for s in stops) > cls.capacity + QTY_EPS:
        return None
    cost, time = 0.0, 0.0
    prev_tp = None
    seen = set()
    for s in stops:
        md = merged[s]
        site = inst.tp_by_id[md.tp]
        if site.unload_time > site.laying_limit + TIME_EPS:
            return None
        if md.tp != prev_tp:
            if md.tp in seen:
                return None
            seen.add(md.tp)
            a = hub if prev_tp is None else ix[prev_tp]
            hop = t1[a][ix[md.tp]]
            if math.isinf(hop):
                return None
            depart = time if prev_tp is None else time + inst.tp_by_id[prev_tp].unload_time
            time = depart + hop
            cost += c1[a][ix[md.tp]]
            prev_tp = md.tp
        if time > md.tw_close + TIME_EPS:
            return None
    back = c1[ix[prev_tp]][hub]
    if math.isinf(back):
        return None
    return cost + back


def brute_force_first(inst: Instance, merged):
    """Cheapest fleet plan serving each merged demand exactly once.

    Enumerates every partition of the demand indices into ordered routes and
    every class assignment within unit counts.  Returns (cost, plan) where
    plan is a list of (vessel_class, stops) tuples, or (INF, None).
    """
    idx = list(range(len(merged)))
    counts = [(v.id, v.count) for v in inst.vessel_classes]
    best_cost, best_plan = INF, None
    for part in ordered_partitions(idx):
        for classes in _assignments(counts, len(part)):
            total, plan, ok = 0.0, [], True
            for block, cid in zip(part, classes):
                c = first_route_cost(inst, merged, cid, block)
                if c is None or total + c >= best_cost:
                    ok = False
                    break
                total += c
                plan.append((cid, tuple(block)))
            if ok and total < best_cost:
                best_cost, best_plan = total, plan
    return best_cost, best_plan


# === whole-problem optimum (both echelons coupled) ===

class _Copy:
    """One indivisible parcel for the first echelon: a route load or a jack
    customer, with the latest vessel call start that still meets its windows."""
    __slots__ = ("tp", "quantity", "tw_close")

    def __init__(self, tp, quantity, tw_close):
        self.tp = tp
        self.quantity = quantity
        self.tw_close = tw_close


def brute_force_full(inst: Instance):
    """Provably optimal total cost over both echelons together.

    Enumerates open-TP subsets, jack pre-assignment, every ordered partition
    of the remaining customers, every LEV class assignment and every
    (depot, TP) pairing per route; each surviving second echelon hands its
    parcel copies to brute_force_first for the cheapest fleet plan.  Unlike
    brute_force_second this keeps second echelons that are not themselves
    cheapest, because a pricier LEV plan can buy a cheaper vessel plan.

    Returns (cost, detail) with detail = (open TPs, LEV routes, jacks,
    vessel plan), or (inf, None) when nothing is feasible.
    """
    if len(inst.point_ids) > MAX_POINTS:
        raise ValueError("brute force is capped at %d demand points" % MAX_POINTS)
    best_cost, best_detail = INF, None
    route_cache: Dict[tuple, Optional[tuple]] = {}
    first_cache: Dict[tuple, tuple] = {}

    def route_option(cid, d, t, block):
        key = (cid, d, t, block)
        got = route_cache.get(key, 0)
        if got != 0:
            return got
        cls = inst.lev_class_by_id[cid]
        c, dist, load, warp = route_metrics(inst, cid, d, t, list(block))
        if (warp > 1e-9 or load > cls.capacity + QTY_EPS
                or dist > cls.driving_range + 1e-9):
            route_cache[key] = None
            return None
        timing = lev_route_timing(inst, LevRoute(cid, 0, d, t, list(block)))
        deadline = timing.latest_tp_start - inst.tp_by_id[t].unload_time
        route_cache[key] = (c, load, deadline)
        return route_cache[key]

    def first_cost(copies):
        key = tuple(sorted((c.tp, round(c.quantity, 9), c.tw_close)
                           for c in copies))
        got = first_cache.get(key)
        if got is None:
            got = first_cache[key] = brute_force_first(inst, copies)
        return got

    for r in range(1, len(inst.tp_ids) + 1):
        for subset in itertools.combinations(inst.tp_ids, r):
            opens = set(subset)
            estab = sum(inst.tp_by_id[t].establish_cost for t in subset)
            if estab >= best_cost:
                continue
            jacks = assign_jacks(inst, opens)
            if any(jack_timing(inst, j.tp, j.point)[1] > 1e-9 for j in jacks):
                continue
            jack_load: Dict[str, float] = {}
            jack_copies = []
            for j in jacks:
                q = inst.point_by_id[j.point].demand
                jack_load[j.tp] = jack_load.get(j.tp, 0.0) + q
                dl = jack_timing(inst, j.tp, j.point)[2] \
                    - inst.tp_by_id[j.tp].unload_time
                jack_copies.append(_Copy(j.tp, q, dl))
            caps = {t: inst.tp_by_id[t].capacity for t in subset}
            if any(jack_load.get(t, 0.0) > caps[t] + QTY_EPS for t in subset):
                continue
            routed = [p for p in inst.point_ids
                      if p not in {j.point for j in jacks}]
            for blocks in ([[]] if not routed else ordered_partitions(routed)):
                for classes in _class_assignments(inst, len(blocks)):
                    options = []
                    ok = True
                    for block, cid in zip(blocks, classes):
                        opts = []
                        for t in subset:
                            for d in inst.depots:
                                got = route_option(cid, d, t, tuple(block))
                                if got is not None:
                                    opts.append((got[0], d, t, got[1], got[2]))
                        if not opts:
                            ok = False
                            break
                        opts.sort()
                        options.append(opts)
                    if not ok:
                        continue
                    chosen: List[tuple] = []

                    def rec(i, acc, load):
                        nonlocal best_cost, best_detail
                        if acc >= best_cost:
                            return
                        if i == len(options):
                            copies = jack_copies + [
                                _Copy(t, q, dl)
                                for _, _, t, q, dl in chosen]
                            if not copies:
                                return
                            fcost, plan = first_cost(copies)
                            if acc + fcost < best_cost:
                                best_cost = acc + fcost
                                best_detail = (
                                    sorted(subset),
                                    [(cid, d, t, list(block))
                                     for (c, d, t, q, dl), cid, block
                                     in zip(chosen, classes, blocks)],
                                    [(j.tp, j.point) for j in jacks],
                                    [(cid, tuple(copies[s].tp for s in stops))
                                     for cid, stops in plan])
                            return
                        for opt in options[i]:
                            c, d, t, q, dl = opt
                            if load.get(t, 0.0) + q > caps[t] + QTY_EPS:
                                continue
                            load[t] = load.get(t, 0.0) + q
                            chosen.append(opt)
                            rec(i + 1, acc + c, load)
                            chosen.pop()
                            load[t] -= q

                    rec(0, estab, dict(jack_load))
    return best_cost, best_detail
