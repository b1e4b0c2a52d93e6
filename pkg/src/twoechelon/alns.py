"""Adaptive large neighborhood search over the second echelon.

The search wanders through capacity/window-infeasible solutions priced by the
adaptive penalty weights; structural invariants (every point served exactly
once, jack rules coherent with the open TP set, fleet counts respected) hold
at every iteration by construction.
"""

from __future__ import annotations

import math
import time
import weakref
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .construct import (assign_jacks, nearest_depot, roulette_rank,
                        route_acut)
from .evaluate import (PenaltyState, RouteTimeCache, route_metrics,
                       update_penalties)
from .model import (INF, InfeasibleInstance, Instance, JackAssignment,
                    LevRoute, QTY_EPS, Solution, TIME_EPS, ViolationReport,
                    clone_solution, jack_timing, preprocess,
                    schedule_solution, solution_signature, total_cost,
                    validate)

EPS = 1e-9

DESTROY_OPS = ("random", "worst", "shaw", "random_route", "inefficient_route",
               "tp_removal", "tp_opening", "tp_swap")
REPAIR_OPS = ("greedy", "regret2", "spc")


@dataclass
class SearchParams:
    max_iterations: int = 2000
    max_non_improving: int = 250
    restart_period: int = 200
    weight_period: int = 50
    penalty_period: int = 10
    destroy_fraction: Tuple[float, float] = (0.05, 0.15)
    rcl_size: int = 5
    ls_sample: int = 50
    theta: float = 0.6
    sigma: Tuple[float, float, float] = (10.0, 5.0, 2.0)
    shaw_weights: Tuple[float, float, float] = (6.0, 4.0, 5.0)
    sa_p0: float = 0.5
    sa_w0: float = 0.05
    sa_gamma: float = 0.9975
    use_local_search: bool = True
    trace: bool = False
    paranoid: bool = False


# === relatedness ===

_shaw_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _shaw_norms(inst: Instance):
    got = _shaw_cache.get(inst)
    if got is not None:
        return got
    pts = inst.point_ids
    max_d = 0.0
    for i, a in enumerate(pts):
        for b in pts[i + 1:]:
            d = inst.dist(a, b)
            if d > max_d:
                max_d = d
    dems = [p.demand for p in inst.demand_points]
    tas = [p.tw_open for p in inst.demand_points]
    norms = (max_d, max(dems) - min(dems), max(tas) - min(tas))
    _shaw_cache[inst] = norms
    return norms


def shaw_relatedness(inst: Instance, i: str, j: str,
                     weights: Sequence[float]) -> float:
    """Low values mean similar points; degenerate ranges contribute nothing."""
    max_d, dem_rng, ta_rng = _shaw_norms(inst)
    pi, pj = inst.point_by_id[i], inst.point_by_id[j]
    val = 0.0
    if max_d > 0:
        val += weights[0] * inst.dist(i, j) / max_d
    if dem_rng > 0:
        val += weights[1] * abs(pi.demand - pj.demand) / dem_rng
    if ta_rng > 0:
        val += weights[2] * abs(pi.tw_open - pj.tw_open) / ta_rng
    return val


# === shared bookkeeping ===

def second_echelon_scores(inst: Instance, sol: Solution):
    """(objective, (vehicle cap, TP cap, windows, range) magnitudes).

    Matches the validator's penalized magnitudes whenever the solution is
    structurally sound, at a fraction of the price.
    """
    cost = sum(inst.tp_by_id[t].establish_cost for t in sol.open_tps)
    v_cap = v_tw = v_dis = 0.0
    tp_load: Dict[str, float] = {}
    for r in sol.lev_routes:
        cls = inst.lev_class_by_id[r.lev_class]
        c, d, load, warp = route_metrics(inst, r.lev_class, r.depot, r.tp,
                                         r.sequence)
        cost += c
        v_tw += warp
        if load > cls.capacity:
            v_cap += load - cls.capacity
        if d > cls.driving_range:
            v_dis += d - cls.driving_range
        tp_load[r.tp] = tp_load.get(r.tp, 0.0) + load
    for j in sol.jacks:
        _, warp, _ = jack_timing(inst, j.tp, j.point)
        v_tw += warp
        tp_load[j.tp] = tp_load.get(j.tp, 0.0) + inst.point_by_id[j.point].demand
    v_tp = 0.0
    for t, load in tp_load.items():
        cap = inst.tp_by_id[t].capacity
        if load > cap:
            v_tp += load - cap
    return cost, (v_cap, v_tp, v_tw, v_dis)


def fast_gen(inst: Instance, sol: Solution, weights: Sequence[float]) -> float:
    cost, mags = second_echelon_scores(inst, sol)
    return cost + sum(w * m for w, m in zip(weights, mags))


def _route_points(sol: Solution) -> List[Tuple[int, int, str]]:
    """(route index, position, point) triples in deterministic order."""
    out = []
    for ri, r in enumerate(sol.lev_routes):
        for pos, p in enumerate(r.sequence):
            out.append((ri, pos, p))
    return out


def _drop_empty_routes(sol: Solution) -> None:
    sol.lev_routes = [r for r in sol.lev_routes if r.sequence]


def _free_unit(inst: Instance, sol: Solution, cls_id: str) -> Optional[int]:
    used = {r.lev_no for r in sol.lev_routes if r.lev_class == cls_id}
    for no in range(inst.lev_class_by_id[cls_id].count):
        if no not in used:
            return no
    return None


def rederive_assignments(inst: Instance, sol: Solution, pool: List[str]) -> None:
    """Re-apply the jack rule after the open TP set changed.

    Points now strictly within reach of an open TP leave routes and the pool
    for jack service; previously jacked points that lost eligibility join the
    pool.
    """
    eligible = {j.point: j.tp for j in assign_jacks(inst, sol.open_tps)}
    sol.jacks = [JackAssignment(t, p) for p, t in sorted(eligible.items())]
    for r in sol.lev_routes:
        r.sequence = [p for p in r.sequence if p not in eligible]
    _drop_empty_routes(sol)
    seen = {p for r in sol.lev_routes for p in r.sequence}
    seen.update(eligible)
    pool[:] = sorted({p for p in pool if p not in eligible}
                     | {p for p in inst.point_ids if p not in seen and p not in pool})
    pool[:] = [p for p in pool if p not in eligible and p not in seen]


# === destroy operators ===

def _remove_points(sol: Solution, picks: Sequence[Tuple[int, int, str]]) -> List[str]:
    by_route: Dict[int, List[int]] = {}
    for ri, pos, _ in picks:
        by_route.setdefault(ri, []).append(pos)
    for ri, positions in by_route.items():
        seq = sol.lev_routes[ri].sequence
        for pos in sorted(positions, reverse=True):
            del seq[pos]
    removed = [p for _, _, p in picks]
    _drop_empty_routes(sol)
    return removed


def _destroy_random(inst, sol, goal, rng, params, weights, mask):
    cands = _route_points(sol)
    take = min(goal, len(cands))
    picks = rng.sample(cands, take)
    return _remove_points(sol, picks)


def _destroy_worst(inst, sol, goal, rng, params, weights, mask):
    pool: List[str] = []
    caches: Dict[int, RouteTimeCache] = {}
    while len(pool) < goal:
        cands = []
        for ri, r in enumerate(sol.lev_routes):
            cache = caches.get(ri)
            if cache is None or cache.sequence() != r.sequence:
                cache = RouteTimeCache(inst, mask, r.lev_class, r.depot, r.tp,
                                       r.sequence)
                caches[ri] = cache
            for pos in range(len(r.sequence)):
                dc, dtw, dcap, ddis = cache.delta_remove(pos)
                gain = -(dc + weights[2] * dtw + weights[0] * dcap
                         + weights[3] * ddis)
                cands.append((-gain, r.sequence[pos], ri, pos))
        if not cands:
            break
        cands.sort()
        pick = roulette_rank(rng, min(params.rcl_size, len(cands)))
        _, p, ri, pos = cands[pick]
        del sol.lev_routes[ri].sequence[pos]
        caches.pop(ri, None)
        pool.append(p)
    _drop_empty_routes(sol)
    return pool


def _destroy_shaw(inst, sol, goal, rng, params, weights, mask):
    cands = _route_points(sol)
    if not cands:
        return []
    removed = [rng.choice(cands)[2]]
    while len(removed) < goal:
        remaining = [t for t in cands if t[2] not in removed]
        if not remaining:
            break
        ref = removed[rng.randrange(len(removed))]
        scored = sorted((shaw_relatedness(inst, ref, t[2], params.shaw_weights),
                         t[2]) for t in remaining)
        pick = roulette_rank(rng, min(params.rcl_size, len(scored)))
        removed.append(scored[pick][1])
    picks = [t for t in cands if t[2] in set(removed)]
    return _remove_points(sol, picks)


def _destroy_random_route(inst, sol, goal, rng, params, weights, mask):
    pool: List[str] = []
    while sol.lev_routes and len(pool) < goal:
        r = sol.lev_routes.pop(rng.randrange(len(sol.lev_routes)))
        pool.extend(r.sequence)
    return pool


def _destroy_inefficient_route(inst, sol, goal, rng, params, weights, mask):
    pool: List[str] = []
    while sol.lev_routes and len(pool) < goal:
        ranked = sorted(((-route_acut(inst, r), ri)
                         for ri, r in enumerate(sol.lev_routes)))
        pick = roulette_rank(rng, min(params.rcl_size, len(ranked)))
        r = sol.lev_routes.pop(ranked[pick][1])
        pool.extend(r.sequence)
    return pool


def _pool_routes_at(sol: Solution, tp: str) -> List[str]:
    pool = []
    keep = []
    for r in sol.lev_routes:
        if r.tp == tp:
            pool.extend(r.sequence)
        else:
            keep.append(r)
    sol.lev_routes = keep
    return pool


def _top_up(inst, sol, pool, goal, rng, params, weights, mask):
    if len(pool) < goal:
        extra = _destroy_random(inst, sol, goal - len(pool), rng, params,
                                weights, mask)
        pool.extend(extra)
    return pool


def _destroy_tp_removal(inst, sol, goal, rng, params, weights, mask):
    opens = sorted(sol.open_tps)
    closed = sorted(t for t in inst.tp_ids if t not in sol.open_tps)
    if len(opens) <= 1:
        return _destroy_tp_swap(inst, sol, goal, rng, params, weights, mask)
    victim = opens[rng.randrange(len(opens))]
    sol.open_tps.discard(victim)
    pool = _pool_routes_at(sol, victim)
    if closed:
        sol.open_tps.add(closed[rng.randrange(len(closed))])
    rederive_assignments(inst, sol, pool)
    return _top_up(inst, sol, pool, goal, rng, params, weights, mask)


def _destroy_tp_opening(inst, sol, goal, rng, params, weights, mask):
    closed = sorted(t for t in inst.tp_ids if t not in sol.open_tps)
    if not closed:
        return _destroy_random(inst, sol, goal, rng, params, weights, mask)
    sol.open_tps.add(closed[rng.randrange(len(closed))])
    pool: List[str] = []
    rederive_assignments(inst, sol, pool)
    return _top_up(inst, sol, pool, goal, rng, params, weights, mask)


def _destroy_tp_swap(inst, sol, goal, rng, params, weights, mask):
    opens = sorted(sol.open_tps)
    closed = sorted(t for t in inst.tp_ids if t not in sol.open_tps)
    if not closed:
        if len(opens) > 1:
            return _destroy_tp_removal(inst, sol, goal, rng, params, weights,
                                       mask)
        return _destroy_random(inst, sol, goal, rng, params, weights, mask)
    victim = opens[rng.randrange(len(opens))]
    sol.open_tps.discard(victim)
    pool = _pool_routes_at(sol, victim)
    ranked = sorted((inst.dist(victim, t), t) for t in closed)
    pick = roulette_rank(rng, min(params.rcl_size, len(ranked)))
    sol.open_tps.add(ranked[pick][1])
    rederive_assignments(inst, sol, pool)
    return _top_up(inst, sol, pool, goal, rng, params, weights, mask)


_DESTROY = {
    "random": _destroy_random,
    "worst": _destroy_worst,
    "shaw": _destroy_shaw,
    "random_route": _destroy_random_route,
    "inefficient_route": _destroy_inefficient_route,
    "tp_removal": _destroy_tp_removal,
    "tp_opening": _destroy_tp_opening,
    "tp_swap": _destroy_tp_swap,
}


def destroy(inst: Instance, kind: str, sol: Solution, goal: int, rng,
            params: SearchParams, weights: Sequence[float], mask) -> List[str]:
    """Remove (at least) `goal` demand points from `sol` into the pool."""
    pool = _DESTROY[kind](inst, sol, goal, rng, params, weights, mask)
    assert len(set(pool)) == len(pool)
    return pool


# === repair operators ===

def _peel_jack_eligible(inst, sol, pool) -> None:
    eligible = {j.point: j.tp for j in assign_jacks(inst, sol.open_tps)}
    jacked = {j.point for j in sol.jacks}
    for p in sorted(eligible):
        if p in pool and p not in jacked:
            sol.jacks.append(JackAssignment(eligible[p], p))
            pool.remove(p)
    sol.jacks.sort(key=lambda j: j.point)


def _candidate_tps(inst, sol, p, limit=3) -> List[str]:
    ranked = sorted((inst.dist(t, p), t) for t in sorted(sol.open_tps))
    return [t for _, t in ranked[:limit]]


def _insertion_options(inst, sol, caches, tp_load, p, weights, mask,
                       restrict=True):
    """Yield (score, ri_or_None, pos, tp, cls_id, depot) insert options."""
    d = inst.point_by_id[p].demand
    tps = set(_candidate_tps(inst, sol, p)) if restrict else set(sol.open_tps)
    opts = []
    for ri, r in enumerate(sol.lev_routes):
        if r.tp not in tps:
            continue
        cache = caches[ri]
        cls = inst.lev_class_by_id[r.lev_class]
        excess = lambda v, cap: v - cap if v > cap else 0.0
        load_t = tp_load.get(r.tp, 0.0)
        cap_t = inst.tp_by_id[r.tp].capacity
        d_tp = excess(load_t + d, cap_t) - excess(load_t, cap_t)
        for pos in range(len(r.sequence) + 1):
            dc, dtw, dcap, ddis = cache.delta_insert(pos, p)
            if math.isinf(dc):
                continue
            score = (dc + weights[2] * dtw + weights[0] * dcap
                     + weights[3] * ddis + weights[1] * d_tp)
            opts.append((score, ri, pos, r.tp, r.lev_class, r.depot))
    for t in sorted(tps):
        depot = nearest_depot(inst, t)
        load_t = tp_load.get(t, 0.0)
        cap_t = inst.tp_by_id[t].capacity
        d_tp = (max(load_t + d - cap_t, 0.0) - max(load_t - cap_t, 0.0))
        for cls in inst.lev_classes:
            if _free_unit(inst, sol, cls.id) is None:
                continue
            c, dist, load, warp = route_metrics(inst, cls.id, depot, t, [p])
            if not (mask.ok_ids(depot, t) and mask.ok_ids(t, p)
                    and mask.ok_ids(p, depot)):
                continue
            score = (c + weights[2] * warp
                     + weights[0] * max(load - cls.capacity, 0.0)
                     + weights[3] * max(dist - cls.driving_range, 0.0)
                     + weights[1] * d_tp)
            opts.append((score, None, 0, t, cls.id, depot))
    return opts


def _opt_key(opt):
    """Total order for insert options; None route slots sort first on ties."""
    score, ri, pos, tp, cls_id, depot = opt
    return (score, ri is not None, ri if ri is not None else 0, pos, tp,
            cls_id, depot)


def _apply_insertion(inst, sol, caches, tp_load, p, opt, mask):
    _, ri, pos, tp, cls_id, depot = opt
    d = inst.point_by_id[p].demand
    if ri is None:
        no = _free_unit(inst, sol, cls_id)
        sol.lev_routes.append(LevRoute(cls_id, no, depot, tp, [p]))
        caches.append(RouteTimeCache(inst, mask, cls_id, depot, tp, [p]))
    else:
        r = sol.lev_routes[ri]
        r.sequence.insert(pos, p)
        caches[ri] = RouteTimeCache(inst, mask, r.lev_class, r.depot, r.tp,
                                    r.sequence)
    tp_load[tp] = tp_load.get(tp, 0.0) + d


def _repair_setup(inst, sol, pool, mask):
    _peel_jack_eligible(inst, sol, pool)
    caches = [RouteTimeCache(inst, mask, r.lev_class, r.depot, r.tp, r.sequence)
              for r in sol.lev_routes]
    tp_load: Dict[str, float] = {}
    for r in sol.lev_routes:
        tp_load[r.tp] = tp_load.get(r.tp, 0.0) + sum(
            inst.point_by_id[p].demand for p in r.sequence)
    for j in sol.jacks:
        tp_load[j.tp] = tp_load.get(j.tp, 0.0) + inst.point_by_id[j.point].demand
    return caches, tp_load


def _best_option(inst, sol, caches, tp_load, p, weights, mask):
    opts = _insertion_options(inst, sol, caches, tp_load, p, weights, mask)
    if not opts:
        opts = _insertion_options(inst, sol, caches, tp_load, p, weights, mask,
                                  restrict=False)
    if not opts:
        raise InfeasibleInstance("point %s cannot be inserted anywhere" % p)
    return min(opts, key=_opt_key)


def _repair_greedy(inst, sol, pool, rng, params, weights, mask):
    caches, tp_load = _repair_setup(inst, sol, pool, mask)
    while pool:
        best = None
        for p in sorted(pool):
            opt = _best_option(inst, sol, caches, tp_load, p, weights, mask)
            if best is None or opt[0] < best[1][0] - EPS:
                best = (p, opt)
        p, opt = best
        _apply_insertion(inst, sol, caches, tp_load, p, opt, mask)
        pool.remove(p)


def _repair_regret2(inst, sol, pool, rng, params, weights, mask):
    caches, tp_load = _repair_setup(inst, sol, pool, mask)
    while pool:
        best = None
        for p in sorted(pool):
            opts = _insertion_options(inst, sol, caches, tp_load, p, weights,
                                      mask)
            if not opts:
                opts = _insertion_options(inst, sol, caches, tp_load, p,
                                          weights, mask, restrict=False)
            if not opts:
                raise InfeasibleInstance("point %s cannot be inserted anywhere"
                                         % p)
            opts.sort(key=_opt_key)
            regret = (opts[1][0] - opts[0][0]) if len(opts) > 1 else INF
            if best is None or regret > best[0] + EPS:
                best = (regret, p, opts[0])
        _, p, opt = best
        _apply_insertion(inst, sol, caches, tp_load, p, opt, mask)
        pool.remove(p)


def _repair_spc(inst, sol, pool, rng, params, weights, mask):
    """Route-building repair: drafts one route per nearby TP, commits the
    cheapest per unit transferred; capacity stays hard while units last."""
    caches, tp_load = _repair_setup(inst, sol, pool, mask)
    while pool:
        anchor: Dict[str, List[str]] = {}
        for p in sorted(pool):
            t = _candidate_tps(inst, sol, p, limit=1)[0]
            anchor.setdefault(t, []).append(p)
        built = []
        for t in sorted(anchor):
            depot = nearest_depot(inst, t)
            cls = None
            for c in sorted(inst.lev_classes, key=lambda c: (-c.capacity, c.id)):
                if _free_unit(inst, sol, c.id) is not None:
                    cls = c
                    break
            if cls is None:
                continue
            seq: List[str] = []
            load = 0.0
            cache = RouteTimeCache(inst, mask, cls.id, depot, t, seq)
            remaining = list(anchor[t])
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
                pick = roulette_rank(rng, min(params.rcl_size, len(cands)))
                _, p, pos = cands[pick]
                seq.insert(pos, p)
                load += inst.point_by_id[p].demand
                remaining.remove(p)
                cache = RouteTimeCache(inst, mask, cls.id, depot, t, seq)
            if seq:
                built.append((cache.cost / load, t, depot, cls.id, seq))
        if not built:
            _repair_greedy(inst, sol, pool, rng, params, weights, mask)
            return
        built.sort(key=lambda b: (b[0], b[1]))
        _, t, depot, cls_id, seq = built[0]
        no = _free_unit(inst, sol, cls_id)
        sol.lev_routes.append(LevRoute(cls_id, no, depot, t, list(seq)))
        caches.append(RouteTimeCache(inst, mask, cls_id, depot, t, seq))
        tp_load[t] = tp_load.get(t, 0.0) + sum(inst.point_by_id[p].demand
                                               for p in seq)
        for p in seq:
            pool.remove(p)


_REPAIR = {
    "greedy": _repair_greedy,
    "regret2": _repair_regret2,
    "spc": _repair_spc,
}


def repair(inst: Instance, kind: str, sol: Solution, pool: List[str], rng,
           params: SearchParams, weights: Sequence[float], mask) -> Solution:
    """Insert every pooled point back; the solution covers all points after."""
    _REPAIR[kind](inst, sol, pool, rng, params, weights, mask)
    return sol


# === local search ===

def _route_cost_tuple(inst, r: LevRoute, seq: Sequence[str], weights, memo):
    if not seq:
        return 0.0
    key = (r.lev_class, r.depot, r.tp, tuple(seq))
    got = memo.get(key)
    if got is not None:
        return got
    cls = inst.lev_class_by_id[r.lev_class]
    c, d, load, warp = route_metrics(inst, r.lev_class, r.depot, r.tp, seq)
    got = (c + weights[2] * warp + weights[0] * max(load - cls.capacity, 0.0)
           + weights[3] * max(d - cls.driving_range, 0.0))
    memo[key] = got
    return got


def _pair_gain(inst, weights, memo, r1, seq1, new1, r2, seq2, new2):
    before = (_route_cost_tuple(inst, r1, seq1, weights, memo)
              + _route_cost_tuple(inst, r2, seq2, weights, memo))
    after = (_route_cost_tuple(inst, r1, new1, weights, memo)
             + _route_cost_tuple(inst, r2, new2, weights, memo))
    return before - after


def _tp_excess_delta(inst, tp_load, moves):
    """moves: list of (tp, quantity delta); returns penalty-magnitude delta."""
    delta = 0.0
    agg: Dict[str, float] = {}
    for tp, dq in moves:
        agg[tp] = agg.get(tp, 0.0) + dq
    for tp, dq in agg.items():
        cap = inst.tp_by_id[tp].capacity
        load = tp_load.get(tp, 0.0)
        delta += max(load + dq - cap, 0.0) - max(load - cap, 0.0)
    return delta


def _moves_two_opt(inst, sol, weights, tp_load, memo):
    for ri, r in enumerate(sol.lev_routes):
        n = len(r.sequence)
        for i in range(n - 1):
            for j in range(i + 2, n + 1):
                new = r.sequence[:i] + r.sequence[i:j][::-1] + r.sequence[j:]
                gain = (_route_cost_tuple(inst, r, r.sequence, weights, memo)
                        - _route_cost_tuple(inst, r, new, weights, memo))
                yield gain, (ri, new), None


def _moves_two_opt_star(inst, sol, weights, tp_load, memo):
    R = len(sol.lev_routes)
    for a in range(R):
        for b in range(a + 1, R):
            r1, r2 = sol.lev_routes[a], sol.lev_routes[b]
            for i in range(len(r1.sequence) + 1):
                for j in range(len(r2.sequence) + 1):
                    if i == len(r1.sequence) and j == len(r2.sequence):
                        continue
                    new1 = r1.sequence[:i] + r2.sequence[j:]
                    new2 = r2.sequence[:j] + r1.sequence[i:]
                    gain = _pair_gain(inst, weights, memo, r1, r1.sequence,
                                      new1, r2, r2.sequence, new2)
                    if r1.tp != r2.tp:
                        q1 = sum(inst.point_by_id[p].demand for p in r1.sequence[i:])
                        q2 = sum(inst.point_by_id[p].demand for p in r2.sequence[j:])
                        gain -= weights[1] * _tp_excess_delta(
                            inst, tp_load, [(r1.tp, q2 - q1), (r2.tp, q1 - q2)])
                    yield gain, (a, new1), (b, new2)


def _moves_segment_swap(length1, length2):
    """Exchange a length1 segment of one route with a length2 segment of
    another in place; length2 = 0 relocates the segment to any position."""
    def gen(inst, sol, weights, tp_load, memo):
        R = len(sol.lev_routes)
        for a in range(R):
            for b in range(R):
                if a == b:
                    continue
                r1, r2 = sol.lev_routes[a], sol.lev_routes[b]
                n1, n2 = len(r1.sequence), len(r2.sequence)
                if n1 < length1 or n2 < length2:
                    continue
                for i in range(n1 - length1 + 1):
                    seg1 = r1.sequence[i:i + length1]
                    rest1 = r1.sequence[:i] + r1.sequence[i + length1:]
                    if length2 == 0:
                        for pos2 in range(n2 + 1):
                            new2 = r2.sequence[:pos2] + seg1 + r2.sequence[pos2:]
                            gain = _pair_gain(inst, weights, memo, r1,
                                              r1.sequence, rest1, r2,
                                              r2.sequence, new2)
                            gain -= _seg_tp_term(inst, weights, tp_load,
                                                 r1, r2, seg1, [])
                            yield gain, (a, rest1), (b, new2)
                        continue
                    for j in range(n2 - length2 + 1):
                        seg2 = r2.sequence[j:j + length2]
                        new1 = r1.sequence[:i] + seg2 + r1.sequence[i + length1:]
                        new2 = r2.sequence[:j] + seg1 + r2.sequence[j + length2:]
                        gain = _pair_gain(inst, weights, memo, r1, r1.sequence,
                                          new1, r2, r2.sequence, new2)
                        gain -= _seg_tp_term(inst, weights, tp_load, r1, r2,
                                             seg1, seg2)
                        yield gain, (a, new1), (b, new2)
    return gen


def _seg_tp_term(inst, weights, tp_load, r1, r2, seg1, seg2):
    if r1.tp == r2.tp:
        return 0.0
    q1 = sum(inst.point_by_id[p].demand for p in seg1)
    q2 = sum(inst.point_by_id[p].demand for p in seg2)
    return weights[1] * _tp_excess_delta(inst, tp_load,
                                         [(r1.tp, q2 - q1), (r2.tp, q1 - q2)])


def _moves_reinsertion(inst, sol, weights, tp_load, memo):
    R = len(sol.lev_routes)
    for a in range(R):
        r1 = sol.lev_routes[a]
        for i in range(len(r1.sequence)):
            p = r1.sequence[i]
            rest1 = r1.sequence[:i] + r1.sequence[i + 1:]
            for b in range(R):
                r2 = sol.lev_routes[b]
                if a == b:
                    for pos in range(len(rest1) + 1):
                        if pos == i:
                            continue
                        new = rest1[:pos] + [p] + rest1[pos:]
                        gain = (_route_cost_tuple(inst, r1, r1.sequence,
                                                  weights, memo)
                                - _route_cost_tuple(inst, r1, new, weights,
                                                    memo))
                        yield gain, (a, new), None
                else:
                    for pos in range(len(r2.sequence) + 1):
                        new2 = r2.sequence[:pos] + [p] + r2.sequence[pos:]
                        gain = _pair_gain(inst, weights, memo, r1, r1.sequence,
                                          rest1, r2, r2.sequence, new2)
                        gain -= _seg_tp_term(inst, weights, tp_load, r1, r2,
                                             [p], [])
                        yield gain, (a, rest1), (b, new2)


def _moves_depot_reselect(inst, sol, weights, tp_load, memo):
    for ri, r in enumerate(sol.lev_routes):
        base = _route_cost_tuple(inst, r, r.sequence, weights, memo)
        for depot in inst.depots:
            if depot == r.depot:
                continue
            alt = LevRoute(r.lev_class, r.lev_no, depot, r.tp, r.sequence)
            gain = base - _route_cost_tuple(inst, alt, r.sequence, weights,
                                            memo)
            yield gain, ("depot", ri, depot), None


NEIGHBORHOODS = [
    ("two_opt", _moves_two_opt),
    ("two_opt_star", _moves_two_opt_star),
    ("reinsertion", _moves_reinsertion),
    ("swap_1_0", _moves_segment_swap(1, 0)),
    ("swap_2_1", _moves_segment_swap(2, 1)),
    ("swap_3_2", _moves_segment_swap(3, 2)),
    ("swap_4_3", _moves_segment_swap(4, 3)),
    ("depot_reselect", _moves_depot_reselect),
]


def _apply_move(inst, sol, upd1, upd2):
    for upd in (upd1, upd2):
        if upd is None:
            continue
        if upd[0] == "depot":
            _, ri, depot = upd
            r = sol.lev_routes[ri]
            sol.lev_routes[ri] = LevRoute(r.lev_class, r.lev_no, depot, r.tp,
                                          list(r.sequence))
        else:
            ri, new = upd
            sol.lev_routes[ri].sequence = list(new)
    _drop_empty_routes(sol)


def local_search(inst: Instance, sol: Solution, sample: int, rng,
                 weights: Sequence[float] = (10.0, 10.0, 10.0, 10.0),
                 order: Optional[List[int]] = None) -> Solution:
    """Composite descent: never increases the generalized cost."""
    sol = clone_solution(sol)
    hoods = list(NEIGHBORHOODS)
    if order is None:
        rng.shuffle(hoods)
    else:
        hoods = [hoods[i] for i in order]
    fails = 0
    hi = 0
    memo: Dict[tuple, float] = {}
    while fails < len(hoods):
        name, gen = hoods[hi % len(hoods)]
        tp_load: Dict[str, float] = {}
        for r in sol.lev_routes:
            tp_load[r.tp] = tp_load.get(r.tp, 0.0) + sum(
                inst.point_by_id[p].demand for p in r.sequence)
        for j in sol.jacks:
            tp_load[j.tp] = tp_load.get(j.tp, 0.0) + inst.point_by_id[j.point].demand
        best = None
        seen = 0
        for gain, upd1, upd2 in gen(inst, sol, weights, tp_load, memo):
            seen += 1
            if gain > EPS and (best is None or gain > best[0]):
                best = (gain, upd1, upd2)
            if seen >= sample and best is not None:
                break
        if best is not None:
            _apply_move(inst, sol, best[1], best[2])
            fails = 0
        else:
            fails += 1
            hi += 1
    return schedule_solution(inst, sol)


# === acceptance and operator weights ===

def accept(candidate_gen: float, current_gen: float, temperature: float,
           rng) -> bool:
    delta = candidate_gen - current_gen
    if delta <= 0.0:
        return True
    return rng.random() < math.exp(-delta / temperature)


@dataclass
class OperatorBook:
    names: Tuple[str, ...]
    theta: float = 0.6
    weights: Dict[str, float] = field(default_factory=dict)
    scores: Dict[str, float] = field(default_factory=dict)
    uses: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for n in self.names:
            self.weights.setdefault(n, 1.0)
            self.scores.setdefault(n, 0.0)
            self.uses.setdefault(n, 0)

    def select(self, rng) -> str:
        total = sum(self.weights[n] for n in self.names)
        x = rng.random() * total
        acc = 0.0
        for n in self.names:
            acc += self.weights[n]
            if x < acc:
                return n
        return self.names[-1]

    def reward(self, name: str, score: float) -> None:
        self.scores[name] += score
        self.uses[name] += 1


def update_operator_weights(book: OperatorBook) -> OperatorBook:
    """Blend each operator's period success rate into its weight."""
    for n in book.names:
        if book.uses[n] > 0:
            book.weights[n] = (book.theta * book.scores[n] / book.uses[n]
                               + (1.0 - book.theta) * book.weights[n])
        book.scores[n] = 0.0
        book.uses[n] = 0
    return book


# === the search itself ===

@dataclass
class AlnsResult:
    best_feasible: Optional[Solution]
    best_feasible_cost: float
    best: Solution
    best_gen: float
    violations: ViolationReport
    iterations: int
    trace: List[tuple] = field(default_factory=list)


def _strip_first_echelon(sol: Solution) -> Solution:
    out = clone_solution(sol)
    out.vessel_routes = []
    for r in out.lev_routes:
        r.vessel = None
    for j in out.jacks:
        j.vessel = None
    return out


def alns_run(inst: Instance, initial: Solution, params: SearchParams, rng,
             mask=None, penalties: Optional[PenaltyState] = None,
             deadline: Optional[float] = None) -> AlnsResult:
    """Algorithm: destroy/repair with SA acceptance, adaptive operator
    weights, adaptive penalties, local search on every candidate, restarts.

    `deadline` is an absolute time.monotonic() backstop; when it passes, the
    run stops early (results then depend on the clock, not just the seed)."""
    if mask is None:
        mask = preprocess(inst)
    pen = (penalties if penalties is not None
           else PenaltyState(period=params.penalty_period))

    current = _strip_first_echelon(initial)
    schedule_solution(inst, current)
    cur_gen = fast_gen(inst, current, pen.weights)
    best = clone_solution(current)
    best_gen = cur_gen
    best_feasible = None
    best_feasible_cost = INF
    rep0 = validate(inst, current, second_echelon_only=True)
    if rep0.is_empty():
        best_feasible = clone_solution(current)
        best_feasible_cost = total_cost(inst, current)

    t0 = params.sa_w0 * max(cur_gen, 1.0) / math.log(2.0)
    temp = t0
    dbook = OperatorBook(DESTROY_OPS, theta=params.theta)
    rbook = OperatorBook(REPAIR_OPS, theta=params.theta)
    seen = {solution_signature(current)}
    s1, s2, s3 = params.sigma
    non_improving = 0
    trace: List[tuple] = []
    it = 0

    while it < params.max_iterations and non_improving < params.max_non_improving:
        if deadline is not None and time.monotonic() >= deadline:
            break
        it += 1
        d_op = dbook.select(rng)
        r_op = rbook.select(rng)
        work = clone_solution(current)
        lam = rng.uniform(*params.destroy_fraction)
        goal = max(1, round(lam * len(inst.point_ids)))
        pool = destroy(inst, d_op, work, goal, rng, params, pen.weights, mask)
        repair(inst, r_op, work, pool, rng, params, pen.weights, mask)
        if params.use_local_search:
            work = local_search(inst, work, params.ls_sample, rng, pen.weights)
        cost, mags = second_echelon_scores(inst, work)
        work_gen = cost + sum(w * m for w, m in zip(pen.weights, mags))

        if params.paranoid:
            rep = validate(inst, work, second_echelon_only=True)
            assert rep.total("flow") == 0, rep.summary()
            assert rep.total("jack_coherence") == 0, rep.summary()

        sig = solution_signature(work)
        fresh = sig not in seen
        accepted = accept(work_gen, cur_gen, temp, rng)
        score = 0.0
        if work_gen < best_gen - EPS:
            best = clone_solution(work)
            best_gen = work_gen
            score = s1
            non_improving = 0
        else:
            non_improving += 1
            if accepted and fresh:
                score = s2 if work_gen < cur_gen - EPS else s3
        if fresh and score:
            dbook.reward(d_op, score)
            rbook.reward(r_op, score)
        else:
            dbook.reward(d_op, 0.0)
            rbook.reward(r_op, 0.0)
        structurally = max(mags) <= TIME_EPS
        if structurally:
            c = total_cost(inst, work)
            if c < best_feasible_cost - EPS:
                rep = validate(inst, work, second_echelon_only=True)
                if rep.is_empty():
                    best_feasible = clone_solution(work)
                    best_feasible_cost = c
        if accepted:
            current = work
            cur_gen = work_gen
            seen.add(sig)

        pen.record(tuple(m > TIME_EPS for m in mags))
        if it % pen.period == 0:
            update_penalties(pen, it)
            cur_gen = fast_gen(inst, current, pen.weights)
            best_gen = fast_gen(inst, best, pen.weights)
            if best_feasible is not None and best_feasible_cost < best_gen:
                best = clone_solution(best_feasible)
                best_gen = best_feasible_cost
        if it % params.weight_period == 0:
            update_operator_weights(dbook)
            update_operator_weights(rbook)
        restarted = bool(non_improving
                         and non_improving % params.restart_period == 0)
        if restarted:
            current = clone_solution(best)
            cur_gen = best_gen
            temp = t0
        if params.trace:
            trace.append((it, work_gen, best_gen, best_feasible_cost, temp,
                          d_op, r_op, accepted, restarted))
        temp *= params.sa_gamma

    schedule_solution(inst, best)
    if best_feasible is not None:
        schedule_solution(inst, best_feasible)
        report = validate(inst, best_feasible, second_echelon_only=True)
    else:
        report = validate(inst, best, second_echelon_only=True)
    return AlnsResult(best_feasible=best_feasible,
                      best_feasible_cost=best_feasible_cost,
                      best=best, best_gen=best_gen, violations=report,
                      iterations=it, trace=trace)
