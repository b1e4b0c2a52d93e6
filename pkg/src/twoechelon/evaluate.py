"""Generalized (penalty) cost and constant-time route delta evaluation.

Search is allowed to wander through infeasible solutions: vehicle capacity,
TP capacity, time windows and LEV driving range are relaxed into weighted
penalty terms whose weights adapt to how often each family is violated.
Window violations use non-propagating accounting (a late node is charged
once, then the clock resumes from the window closing), which lets route
segments be summarized by (duration, violation, earliest, latest) tuples and
concatenated in O(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from .model import (INF, Instance, Solution, TIME_EPS, penalized_magnitudes,
                    total_cost, validate)

# a segment is (duration, warp, earliest_start, latest_start)
EMPTY_SEG = (0.0, 0.0, 0.0, INF)


def seg_node(ta: float, tb: float, service: float) -> tuple:
    return (service, 0.0, ta, tb)


def seg_concat(s1: tuple, s2: tuple, gap: float) -> tuple:
    """Join two schedule segments separated by `gap` travel time."""
    d1, w1, e1, l1 = s1
    d2, w2, e2, l2 = s2
    delta = d1 - w1 + gap
    wait = e2 - delta - l1
    if wait < 0.0:
        wait = 0.0
    warp = e1 + delta - l2
    if warp < 0.0:
        warp = 0.0
    e = max(e2 - delta, e1) - wait
    l = min(l2 - delta, l1) + warp
    return (d1 + d2 + gap + wait, w1 + w2 + warp, e, l)


def seg_warp(seg: tuple) -> float:
    """Total window violation of a segment whose start may be any time >= 0."""
    w = seg[1]
    if seg[3] < 0.0:
        w -= seg[3]
    return w


# === penalty weights ===

@dataclass
class PenaltyState:
    """Adaptive weights for (vehicle capacity, TP capacity, windows, range)."""
    weights: List[float] = field(default_factory=lambda: [10.0, 10.0, 10.0, 10.0])
    w_min: float = 0.1
    w_max: float = 5000.0
    omega: float = 1.2
    period: int = 10
    violated_fraction: float = 0.25
    history: List[Tuple[bool, bool, bool, bool]] = field(default_factory=list)

    def record(self, flags: Sequence[bool]) -> None:
        self.history.append(tuple(bool(f) for f in flags))


def update_penalties(state: PenaltyState, iteration_index: int) -> None:
    """Adapt weights from the violation history of the closing period.

    A family violated in at least ceil(fraction * period) of the period's
    iterations gets its weight multiplied by omega; otherwise, if it stayed
    satisfied often enough, the weight is divided by omega.  Weights are
    clamped to [w_min, w_max] and the history window is cleared.
    """
    if iteration_index % state.period != 0:
        raise ValueError("update_penalties must be called on period boundaries")
    window = state.history[-state.period:]
    if not window:
        return
    need = math.ceil(state.violated_fraction * state.period)
    for i in range(4):
        violated = sum(1 for flags in window if flags[i])
        if violated >= need:
            state.weights[i] *= state.omega
        elif violated <= state.period - need:
            state.weights[i] /= state.omega
        state.weights[i] = min(state.w_max, max(state.w_min, state.weights[i]))
    state.history.clear()


def generalized_cost(inst: Instance, sol: Solution, weights: Sequence[float]) -> float:
    """Objective plus weighted violation magnitudes of the four relaxed families.

    Equals total_cost exactly when the validator reports none of the relaxed
    families (capacity, TP capacity, windows, range).
    """
    rep = validate(inst, sol, second_echelon_only=not sol.vessel_routes)
    v = penalized_magnitudes(rep)
    return total_cost(inst, sol) + sum(w * m for w, m in zip(weights, v))


# === per-route cache ===

class RouteTimeCache:
    """Prefix/suffix schedule segments plus load, distance and cost prefixes.

    Built in O(n) for a route (depot, TP, points..., depot); single-point
    insertions and removals are then evaluated in O(1).
    """

    __slots__ = ("inst", "mask", "cls", "cap", "rng_limit", "nodes", "idx",
                 "pre", "suf", "load", "dist", "cost", "warp", "t2", "c2", "d2")

    def __init__(self, inst: Instance, mask, lev_class: str, depot: str, tp: str,
                 sequence: Sequence[str]):
        self.inst = inst
        self.mask = mask
        self.cls = lev_class
        cls = inst.lev_class_by_id[lev_class]
        self.cap = cls.capacity
        self.rng_limit = cls.driving_range
        self.t2 = inst.t2[lev_class]
        self.c2 = inst.c2[lev_class]
        self.d2 = inst.d2
        ix = inst.index2
        self.nodes = [depot, tp] + list(sequence) + [depot]
        self.idx = [ix[n] for n in self.nodes]
        n = len(self.idx)
        segs = []
        for pos, i in enumerate(self.idx):
            if pos == 0 or pos == n - 1:
                segs.append(seg_node(0.0, INF, 0.0))
            else:
                segs.append(seg_node(inst.ta_ix[i], inst.tb_ix[i], inst.srv_ix[i]))
        pre = [segs[0]]
        load = [0.0]
        dist = [0.0]
        cost = [0.0]
        for pos in range(1, n):
            a, b = self.idx[pos - 1], self.idx[pos]
            pre.append(seg_concat(pre[-1], segs[pos], self.t2[a][b]))
            load.append(load[-1] + inst.dem_ix[b])
            dist.append(dist[-1] + self.d2[a][b])
            cost.append(cost[-1] + self.c2[a][b])
        suf = [None] * n
        suf[n - 1] = segs[n - 1]
        for pos in range(n - 2, -1, -1):
            a, b = self.idx[pos], self.idx[pos + 1]
            suf[pos] = seg_concat(segs[pos], suf[pos + 1], self.t2[a][b])
        self.pre = pre
        self.suf = suf
        self.load = load[-1]
        self.dist = dist[-1]
        self.cost = cost[-1]
        self.warp = seg_warp(pre[-1])

    def sequence(self) -> List[str]:
        return self.nodes[2:-1]

    def metrics(self) -> Tuple[float, float, float, float]:
        """(cost, distance, load, window violation) of the cached route."""
        return self.cost, self.dist, self.load, self.warp

    def cap_excess(self, load: float) -> float:
        return load - self.cap if load > self.cap else 0.0

    def dist_excess(self, dist: float) -> float:
        return dist - self.rng_limit if dist > self.rng_limit else 0.0

    def delta_insert(self, position: int, point: str) -> Tuple[float, float, float, float]:
        """Deltas (objective, V_TW, V_cap, V_dis) of inserting before sequence
        index `position`; +inf objective when a masked arc would be created."""
        inst = self.inst
        cp = position + 2                      # chain slot the point lands in
        a = self.idx[cp - 1]
        b = self.idx[cp]
        v = inst.index2[point]
        rows = self.mask.rows
        if not (rows[a][v] and rows[v][b]):
            return (INF, 0.0, 0.0, 0.0)
        t2 = self.t2
        node = seg_node(inst.ta_ix[v], inst.tb_ix[v], inst.srv_ix[v])
        seg = seg_concat(self.pre[cp - 1], node, t2[a][v])
        seg = seg_concat(seg, self.suf[cp], t2[v][b])
        d_tw = seg_warp(seg) - self.warp
        c2 = self.c2
        d_cost = c2[a][v] + c2[v][b] - c2[a][b]
        d2 = self.d2
        nd = self.dist + d2[a][v] + d2[v][b] - d2[a][b]
        d_dis = self.dist_excess(nd) - self.dist_excess(self.dist)
        nl = self.load + inst.dem_ix[v]
        d_cap = self.cap_excess(nl) - self.cap_excess(self.load)
        return (d_cost, d_tw, d_cap, d_dis)

    def delta_remove(self, position: int) -> Tuple[float, float, float, float]:
        """Deltas of removing sequence index `position` (negative = improvement)."""
        inst = self.inst
        cp = position + 2
        a = self.idx[cp - 1]
        v = self.idx[cp]
        b = self.idx[cp + 1]
        t2 = self.t2
        seg = seg_concat(self.pre[cp - 1], self.suf[cp + 1], t2[a][b])
        d_tw = seg_warp(seg) - self.warp
        c2 = self.c2
        d_cost = c2[a][b] - c2[a][v] - c2[v][b]
        d2 = self.d2
        nd = self.dist + d2[a][b] - d2[a][v] - d2[v][b]
        d_dis = self.dist_excess(nd) - self.dist_excess(self.dist)
        nl = self.load - inst.dem_ix[v]
        d_cap = self.cap_excess(nl) - self.cap_excess(self.load)
        return (d_cost, d_tw, d_cap, d_dis)


def route_metrics(inst: Instance, lev_class: str, depot: str, tp: str,
                  sequence: Sequence[str]) -> Tuple[float, float, float, float]:
    """(cost, distance, load, window violation) computed in one forward pass."""
    t2 = inst.t2[lev_class]
    c2 = inst.c2[lev_class]
    d2 = inst.d2
    ix = inst.index2
    idxs = [ix[depot], ix[tp]] + [ix[p] for p in sequence] + [ix[depot]]
    n = len(idxs)
    cost = dist = load = 0.0
    last = idxs[0]
    if inst.windows_open:
        for pos in range(1, n):
            cur = idxs[pos]
            cost += c2[last][cur]
            dist += d2[last][cur]
            load += inst.dem_ix[cur]
            last = cur
        return cost, dist, load, 0.0
    seg = seg_node(0.0, INF, 0.0)
    for pos in range(1, n):
        cur = idxs[pos]
        cost += c2[last][cur]
        dist += d2[last][cur]
        load += inst.dem_ix[cur]
        if pos == n - 1:
            node = seg_node(0.0, INF, 0.0)
        else:
            node = seg_node(inst.ta_ix[cur], inst.tb_ix[cur], inst.srv_ix[cur])
        seg = seg_concat(seg, node, t2[last][cur])
        last = cur
    return cost, dist, load, seg_warp(seg)
