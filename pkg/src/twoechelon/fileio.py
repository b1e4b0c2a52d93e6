"""Instance, solution and report files.

Native schema v1 is a sectioned UTF-8 text document; matrices are optional
and derived from coordinates when absent (Euclidean distances, per-class
speed and unit cost).  The legacy reader ingests classic two-echelon
benchmark records and relaxes them into this model: satellites become
pre-established zero-cost TPs with co-located LEV depots, windows and
ranges open up, and hand carts are disabled.
"""

from __future__ import annotations

import csv
import math
import re
import warnings
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .model import (DemandPoint, INF, Instance, JackAssignment, LevClass,
                    LevRoute, Solution, TpSite, VesselClass, VesselRoute,
                    VesselVisit, ViolationReport, check_instance,
                    cost_breakdown, total_cost, validate)

NATIVE_HEADER = "# twoechelon instance v1"
SOLUTION_HEADER = "# twoechelon solution v1"
LEGACY_HEADER = "# 2evrp legacy v1"
REPORT_COLUMNS = ("instance", "best", "mean", "gap_to_reference", "time_s",
                  "seed")


class ParseError(ValueError):
    def __init__(self, msg: str, path: Optional[str] = None,
                 line: Optional[int] = None):
        where = "%s:%d: " % (path, line) if path and line else \
                ("%s: " % path if path else "")
        super().__init__(where + msg)


def _fmt(x: float) -> str:
    return repr(float(x))


def _float(tok: str, path, line) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError("expected a number, got %r" % tok, path, line)


def _int(tok: str, path, line) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError("expected an integer, got %r" % tok, path, line)


def _matrix_rows(rows, n, m, path) -> np.ndarray:
    if len(rows) != n:
        raise ParseError("matrix needs %d rows, found %d" % (n, len(rows)),
                         path, rows[0][0] if rows else None)
    out = np.zeros((n, m))
    for i, (ln, toks) in enumerate(rows):
        if len(toks) != m:
            raise ParseError("matrix row needs %d entries, found %d"
                             % (m, len(toks)), path, ln)
        out[i] = [_float(t, path, ln) for t in toks]
    return out


def _euclid(coords, a, b) -> float:
    return math.hypot(coords[a][0] - coords[b][0], coords[a][1] - coords[b][1])


def _derived_matrices(inst: Instance):
    """What the derivable matrices look like when built from coordinates.

    Only second-echelon and hand-cart matrices derive from coordinates;
    first-echelon travel is over water, so per-class matrices are always
    written out explicitly.
    """
    if inst.coords is None:
        return {}
    c = inst.coords
    d2 = np.zeros((inst.n2, inst.n2))
    for i, a in enumerate(inst.second_ids):
        for j, b in enumerate(inst.second_ids):
            d2[i, j] = _euclid(c, a, b)
    out = {"dist_second": d2}
    for l in inst.lev_classes:
        if l.speed is not None and l.cost_per_km is not None:
            out[("second_time", l.id)] = d2 / l.speed
            out[("second_cost", l.id)] = d2 * l.cost_per_km
    if inst.jack_speed is not None:
        tj = np.zeros((len(inst.tp_ids), len(inst.point_ids)))
        for i, t in enumerate(inst.tp_ids):
            for j, p in enumerate(inst.point_ids):
                tj[i, j] = _euclid(c, t, p) / inst.jack_speed
        out["jack_time"] = tj
    return out


# === native writer ===

def write_native(inst: Instance, path: str) -> None:
    for nid in [inst.hub] + inst.second_ids:
        if re.search(r"\s", nid):
            raise ValueError("node id %r contains whitespace" % nid)
    lines = [NATIVE_HEADER, "", "[meta]", "version 1", "id %s" % inst.name,
             "mode %s" % ("relaxed" if inst.relaxed else "full"),
             "horizon %s" % _fmt(inst.horizon),
             "jack_threshold %s" % _fmt(inst.jack_threshold),
             "jack_speed %s" % (_fmt(inst.jack_speed)
                                if inst.jack_speed is not None else "-")]

    lines += ["", "[nodes]"]
    roles = [(inst.hub, "hub")] + [(d, "depot") for d in inst.depots] + \
            [(t, "tp") for t in inst.tp_ids] + \
            [(p, "customer") for p in inst.point_ids]
    for nid, role in roles:
        if inst.coords is not None and nid in inst.coords:
            x, y = inst.coords[nid]
            lines.append("%s %s %s %s" % (nid, role, _fmt(x), _fmt(y)))
        else:
            lines.append("%s %s - -" % (nid, role))

    lines += ["", "[tps]"]
    for t in inst.tp_sites:
        lines.append(" ".join([t.id, _fmt(t.establish_cost), _fmt(t.capacity),
                               _fmt(t.laying_limit), t.space,
                               _fmt(t.unload_time), _fmt(t.load_time)]))
    lines += ["", "[customers]"]
    for p in inst.demand_points:
        lines.append(" ".join([p.id, _fmt(p.demand), _fmt(p.tw_open),
                               _fmt(p.tw_close), _fmt(p.service_time)]))
    lines += ["", "[vessels]"]
    for v in inst.vessel_classes:
        lines.append(" ".join([v.id, str(v.count), _fmt(v.capacity),
                               _fmt(v.speed) if v.speed is not None else "-",
                               _fmt(v.cost_per_km) if v.cost_per_km is not None else "-"]))
    lines += ["", "[levs]"]
    for l in inst.lev_classes:
        lines.append(" ".join([l.id, str(l.count), _fmt(l.capacity),
                               _fmt(l.driving_range),
                               _fmt(l.speed) if l.speed is not None else "-",
                               _fmt(l.cost_per_km) if l.cost_per_km is not None else "-"]))

    derived = _derived_matrices(inst)

    def emit(section: str, have: np.ndarray, key=None) -> None:
        if key is not None and key in derived and \
                np.array_equal(have, derived[key]):
            return
        lines.extend(["", "[%s]" % section])
        for row in have:
            lines.append(" ".join(_fmt(x) for x in row))

    emit("dist_second", inst.dist_second, "dist_second")
    for v in inst.vessel_classes:
        emit("first_time %s" % v.id, inst.travel_time_first[v.id])
        emit("first_cost %s" % v.id, inst.cost_first[v.id])
    for l in inst.lev_classes:
        emit("second_time %s" % l.id, inst.travel_time_second[l.id],
             ("second_time", l.id))
        emit("second_cost %s" % l.id, inst.cost_second[l.id],
             ("second_cost", l.id))
    emit("jack_time", inst.travel_time_jack, "jack_time")

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# === native parser ===

def _read_sections(path: str, expected_header: str):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as e:
        raise ParseError(str(e), path)
    sections: Dict[tuple, List[Tuple[int, List[str]]]] = {}
    order: List[tuple] = []
    current = None
    saw_header = False
    for ln, line in enumerate(raw.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if stripped == expected_header:
                saw_header = True
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            current = tuple(stripped[1:-1].split())
            if current in sections:
                raise ParseError("duplicate section [%s]" % " ".join(current),
                                 path, ln)
            sections[current] = []
            order.append(current)
            continue
        if current is None:
            raise ParseError("content before the first section", path, ln)
        sections[current].append((ln, stripped.split()))
    if not saw_header:
        raise ParseError("missing header line %r" % expected_header, path)
    return sections


def parse_native(path: str) -> Instance:
    sections = _read_sections(path, NATIVE_HEADER)

    def need(name: tuple):
        if name not in sections:
            raise ParseError("missing required section [%s]" % " ".join(name),
                             path)
        return sections[name]

    meta = {}
    for ln, toks in need(("meta",)):
        if len(toks) < 2:
            raise ParseError("meta entries are 'key value'", path, ln)
        meta[toks[0]] = (toks[1], ln)
    for key in ("version", "id", "horizon", "jack_threshold"):
        if key not in meta:
            raise ParseError("meta is missing %r" % key, path)
    if meta["version"][0] != "1":
        raise ParseError("unsupported schema version %r" % meta["version"][0],
                         path, meta["version"][1])
    name = meta["id"][0]
    relaxed = meta.get("mode", ("full", 0))[0] == "relaxed"
    horizon = _float(*(meta["horizon"][0], path, meta["horizon"][1]))
    jack_threshold = _float(meta["jack_threshold"][0], path,
                            meta["jack_threshold"][1])
    jack_speed = None
    if meta.get("jack_speed", ("-", 0))[0] != "-":
        jack_speed = _float(meta["jack_speed"][0], path, meta["jack_speed"][1])

    hub = None
    depots, tp_nodes, customer_nodes = [], [], []
    coords: Dict[str, Tuple[float, float]] = {}
    have_coords = True
    seen = set()
    for ln, toks in need(("nodes",)):
        if len(toks) != 4:
            raise ParseError("node rows are 'id role x y'", path, ln)
        nid, role, xs, ys = toks
        if nid in seen:
            raise ParseError("duplicate node id %r" % nid, path, ln)
        seen.add(nid)
        if role == "hub":
            if hub is not None:
                raise ParseError("second hub %r" % nid, path, ln)
            hub = nid
        elif role == "depot":
            depots.append(nid)
        elif role == "tp":
            tp_nodes.append(nid)
        elif role == "customer":
            customer_nodes.append(nid)
        else:
            raise ParseError("unknown node role %r" % role, path, ln)
        if xs == "-" or ys == "-":
            have_coords = False
        else:
            coords[nid] = (_float(xs, path, ln), _float(ys, path, ln))
    if hub is None:
        raise ParseError("no hub node declared", path)

    tps = []
    for ln, toks in need(("tps",)):
        if len(toks) != 7:
            raise ParseError("tp rows are 'id cost capacity laying space "
                             "unload load'", path, ln)
        if toks[0] not in tp_nodes:
            raise ParseError("tp %r has no node declaration" % toks[0],
                             path, ln)
        tps.append(TpSite(toks[0], _float(toks[1], path, ln),
                          _float(toks[2], path, ln), _float(toks[3], path, ln),
                          toks[4], _float(toks[5], path, ln),
                          _float(toks[6], path, ln)))
    missing = set(tp_nodes) - {t.id for t in tps}
    if missing:
        raise ParseError("tp node %r has no [tps] row" % sorted(missing)[0],
                         path)
    tps.sort(key=lambda t: tp_nodes.index(t.id))

    points = []
    for ln, toks in need(("customers",)):
        if len(toks) != 5:
            raise ParseError("customer rows are 'id demand tw_open tw_close "
                             "service'", path, ln)
        if toks[0] not in customer_nodes:
            raise ParseError("customer %r has no node declaration" % toks[0],
                             path, ln)
        points.append(DemandPoint(toks[0], _float(toks[1], path, ln),
                                  _float(toks[2], path, ln),
                                  _float(toks[3], path, ln),
                                  _float(toks[4], path, ln)))
    missing = set(customer_nodes) - {p.id for p in points}
    if missing:
        raise ParseError("customer node %r has no [customers] row"
                         % sorted(missing)[0], path)
    points.sort(key=lambda p: customer_nodes.index(p.id))

    def opt_float(tok, path, ln):
        return None if tok == "-" else _float(tok, path, ln)

    vessels = []
    for ln, toks in need(("vessels",)):
        if len(toks) != 5:
            raise ParseError("vessel rows are 'id count capacity speed cost'",
                             path, ln)
        vessels.append(VesselClass(toks[0], _int(toks[1], path, ln),
                                   _float(toks[2], path, ln),
                                   opt_float(toks[3], path, ln),
                                   opt_float(toks[4], path, ln)))
    levs = []
    for ln, toks in need(("levs",)):
        if len(toks) != 6:
            raise ParseError("lev rows are 'id count capacity range speed "
                             "cost'", path, ln)
        levs.append(LevClass(toks[0], _int(toks[1], path, ln),
                             _float(toks[2], path, ln),
                             _float(toks[3], path, ln),
                             opt_float(toks[4], path, ln),
                             opt_float(toks[5], path, ln)))

    second_ids = depots + tp_nodes + customer_nodes
    n2, n1 = len(second_ids), 1 + len(tp_nodes)

    def matrix(key, n, m):
        if key in sections:
            return _matrix_rows(sections[key], n, m, path)
        return None

    def dist_from_coords(ids):
        if not have_coords:
            raise ParseError("no coordinates: matrices must be explicit "
                             "(first missing: %s)" % " ".join(ids[:1]), path)
        out = np.zeros((len(ids), len(ids)))
        for i, a in enumerate(ids):
            for j, b in enumerate(ids):
                out[i, j] = _euclid(coords, a, b)
        return out

    dist2 = matrix(("dist_second",), n2, n2)
    if dist2 is None:
        dist2 = dist_from_coords(second_ids)
    else:
        bad = np.argwhere(np.abs(dist2 - dist2.T) > 1e-9)
        if len(bad):
            i, j = bad[0]
            raise ParseError("dist_second is asymmetric at %s/%s"
                             % (second_ids[i], second_ids[j]), path)

    tt1, cc1 = {}, {}
    for v in vessels:
        tt = matrix(("first_time", v.id), n1, n1)
        ccm = matrix(("first_cost", v.id), n1, n1)
        if tt is None or ccm is None:
            raise ParseError("vessel class %s needs explicit [first_time %s] "
                             "and [first_cost %s] matrices" % (v.id, v.id,
                                                               v.id), path)
        tt1[v.id], cc1[v.id] = tt, ccm

    tt2, cc2 = {}, {}
    for l in levs:
        tt = matrix(("second_time", l.id), n2, n2)
        ccm = matrix(("second_cost", l.id), n2, n2)
        if tt is None:
            if l.speed is None:
                raise ParseError("LEV class %s has no speed and no "
                                 "[second_time] matrix" % l.id, path)
            tt = dist2 / l.speed
        if ccm is None:
            if l.cost_per_km is None:
                raise ParseError("LEV class %s has no unit cost and no "
                                 "[second_cost] matrix" % l.id, path)
            ccm = dist2 * l.cost_per_km
        tt2[l.id], cc2[l.id] = tt, ccm

    tjack = matrix(("jack_time",), len(tp_nodes), len(customer_nodes))
    if tjack is None:
        if have_coords and jack_speed is not None:
            tjack = np.zeros((len(tp_nodes), len(customer_nodes)))
            for i, t in enumerate(tp_nodes):
                for j, p in enumerate(customer_nodes):
                    tjack[i, j] = _euclid(coords, t, p) / jack_speed
        elif jack_threshold > 0:
            raise ParseError("jack_threshold > 0 needs coordinates plus "
                             "jack_speed, or an explicit [jack_time] matrix",
                             path)
        else:
            tjack = np.zeros((len(tp_nodes), len(customer_nodes)))

    inst = Instance(name, hub, depots, tps, points, vessels, levs, dist2,
                    tt1, cc1, tt2, cc2, tjack, jack_threshold, horizon,
                    coords=coords if have_coords else None,
                    jack_speed=jack_speed, relaxed=relaxed)
    try:
        check_instance(inst)
    except ValueError as e:
        raise ParseError(str(e), path)
    return inst


def read_instance(path: str) -> Instance:
    """Parse an instance file of either format, sniffing the header line."""
    native = False
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            s = line.strip()
            if s:
                native = s == NATIVE_HEADER
                break
    return parse_native(path) if native else parse_legacy(path)


# === legacy two-echelon benchmark files ===

_LEGACY_NAME = re.compile(r"^E-n(\d+)-k\d+", re.IGNORECASE)
_LEGACY_SET5 = re.compile(r"^(\d+)-(\d+)-")


def parse_legacy(path: str) -> Instance:
    """Classic 2E-VRP records relaxed into this model.

    Satellites become zero-cost pre-established TPs each with a co-located
    LEV depot, so freighter routes cost exactly what satellite-based routes
    cost; windows, ranges, laying limits and the horizon open to infinity
    and hand carts are disabled.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as e:
        raise ParseError(str(e), path)
    rows = []
    for ln, line in enumerate(raw.splitlines(), 1):
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            rows.append((ln, stripped.split()))

    name = None
    trucks = freighters = None
    depot_xy = None
    sat_xy: List[Tuple[float, float]] = []
    cust: List[Tuple[float, float, float]] = []
    for ln, toks in rows:
        kind = toks[0]
        if kind == "name" and len(toks) == 2:
            name = toks[1]
        elif kind == "trucks" and len(toks) == 3:
            trucks = (_int(toks[1], path, ln), _float(toks[2], path, ln))
        elif kind == "freighters" and len(toks) == 3:
            freighters = (_int(toks[1], path, ln), _float(toks[2], path, ln))
        elif kind == "depot" and len(toks) == 3:
            depot_xy = (_float(toks[1], path, ln), _float(toks[2], path, ln))
        elif kind == "satellite" and len(toks) == 3:
            sat_xy.append((_float(toks[1], path, ln), _float(toks[2], path, ln)))
        elif kind == "customer" and len(toks) == 4:
            cust.append((_float(toks[1], path, ln), _float(toks[2], path, ln),
                         _float(toks[3], path, ln)))
        else:
            raise ParseError("unknown legacy record %r" % " ".join(toks),
                             path, ln)
    for what, val in (("name", name), ("trucks", trucks),
                      ("freighters", freighters), ("depot", depot_xy)):
        if val is None:
            raise ParseError("legacy file is missing the %s record" % what,
                             path)
    if not sat_xy or not cust:
        raise ParseError("legacy file needs satellite and customer records",
                         path)

    m = _LEGACY_NAME.match(name)
    want = int(m.group(1)) - 1 if m else None
    m5 = _LEGACY_SET5.match(name)
    if m5:
        want = int(m5.group(1))
        if len(sat_xy) != int(m5.group(2)):
            warnings.warn("%s: name promises %s satellites, file has %d"
                          % (name, m5.group(2), len(sat_xy)))
    if want is not None and want != len(cust):
        warnings.warn("%s: name promises %d customers, file has %d"
                      % (name, want, len(cust)))

    coords: Dict[str, Tuple[float, float]] = {"CH": depot_xy}
    depots, tps = [], []
    for i, xy in enumerate(sat_xy, 1):
        tid, did = "S%d" % i, "D%d" % i
        tps.append(TpSite(tid, 0.0, INF, INF, "quay", 0.0, 0.0))
        depots.append(did)
        coords[tid] = xy
        coords[did] = xy
    points = []
    for j, (x, y, d) in enumerate(cust, 1):
        pid = "C%d" % j
        points.append(DemandPoint(pid, d, 0.0, INF, 0.0))
        coords[pid] = (x, y)

    vessels = [VesselClass("T", trucks[0], trucks[1], 1.0, 1.0)]
    levs = [LevClass("F", freighters[0], freighters[1], INF, 1.0, 1.0)]

    second_ids = depots + [t.id for t in tps] + [p.id for p in points]
    dist2 = np.zeros((len(second_ids), len(second_ids)))
    for i, a in enumerate(second_ids):
        for j, b in enumerate(second_ids):
            dist2[i, j] = _euclid(coords, a, b)
    first_ids = ["CH"] + [t.id for t in tps]
    dist1 = np.zeros((len(first_ids), len(first_ids)))
    for i, a in enumerate(first_ids):
        for j, b in enumerate(first_ids):
            dist1[i, j] = _euclid(coords, a, b)
    inst = Instance(name, "CH", depots, tps, points, vessels, levs, dist2,
                    {"T": dist1 / 1.0}, {"T": dist1 * 1.0},
                    {"F": dist2 / 1.0}, {"F": dist2 * 1.0},
                    np.zeros((len(tps), len(points))), 0.0, INF,
                    coords=coords, jack_speed=5.0, relaxed=True)
    check_instance(inst)
    return inst


# === solution documents ===

def write_solution(inst: Instance, sol: Solution, path: str,
                   report: Optional[ViolationReport] = None) -> None:
    if report is None:
        report = validate(inst, sol)
    first, second, estab = cost_breakdown(inst, sol)
    lines = [SOLUTION_HEADER, "", "[summary]",
             "instance %s" % inst.name,
             "feasible %s" % ("true" if report.is_empty() else "false"),
             "total_cost %s" % _fmt(total_cost(inst, sol)),
             "vessel_cost %s" % _fmt(first),
             "lev_cost %s" % _fmt(second),
             "establishment %s" % _fmt(estab)]

    lines += ["", "[open_tps]"]
    lines += sorted(sol.open_tps)

    lines += ["", "[vessel_routes]"]
    for r in sorted(sol.vessel_routes, key=lambda r: (r.vessel_class, r.vessel_no)):
        for v in r.visits:
            served = ",".join(v.served) if v.served else "-"
            lines.append(" ".join([r.vessel_class, str(r.vessel_no), v.tp,
                                   _fmt(v.quantity), _fmt(v.arrival),
                                   _fmt(v.service_start), served]))

    lines += ["", "[lev_routes]"]
    for r in sorted(sol.lev_routes, key=lambda r: (r.lev_class, r.lev_no)):
        starts = r.start_times if r.start_times is not None \
            else ["-"] * (1 + len(r.sequence))
        toks = [r.lev_class, str(r.lev_no), r.depot, r.tp,
                starts[0] if starts[0] == "-" else _fmt(starts[0])]
        if r.vessel is not None:
            toks += [r.vessel[0], str(r.vessel[1])]
        else:
            toks += ["-", "-"]
        for p, st in zip(r.sequence, starts[1:]):
            toks += [p, st if st == "-" else _fmt(st)]
        lines.append(" ".join(toks))

    lines += ["", "[jacks]"]
    for j in sorted(sol.jacks, key=lambda j: j.point):
        toks = [j.tp, j.point,
                "-" if j.start_time is None else _fmt(j.start_time)]
        if j.vessel is not None:
            toks += [j.vessel[0], str(j.vessel[1])]
        else:
            toks += ["-", "-"]
        lines.append(" ".join(toks))

    lines += ["", "[violations]"]
    for family in sorted(report.entries):
        for detail, mag in report.entries[family]:
            lines.append("%s %s %s" % (family, _fmt(mag), detail))

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_solution(path: str) -> Tuple[Solution, Dict[str, object]]:
    """Solution document back into a Solution plus its header facts."""
    sections = _read_sections(path, SOLUTION_HEADER)
    header: Dict[str, object] = {}
    for ln, toks in sections.get(("summary",), []):
        if len(toks) < 2:
            raise ParseError("summary entries are 'key value'", path, ln)
        key = toks[0]
        if key == "feasible":
            header[key] = toks[1] == "true"
        elif key == "instance":
            header[key] = toks[1]
        else:
            header[key] = _float(toks[1], path, ln)

    sol = Solution(open_tps=set())
    for ln, toks in sections.get(("open_tps",), []):
        sol.open_tps.add(toks[0])

    routes: Dict[Tuple[str, int], VesselRoute] = {}
    for ln, toks in sections.get(("vessel_routes",), []):
        if len(toks) != 7:
            raise ParseError("vessel visit rows have 7 fields", path, ln)
        key = (toks[0], _int(toks[1], path, ln))
        served = tuple(toks[6].split(",")) if toks[6] != "-" else ()
        visit = VesselVisit(toks[2], _float(toks[3], path, ln),
                            _float(toks[4], path, ln),
                            _float(toks[5], path, ln), served)
        routes.setdefault(key, VesselRoute(key[0], key[1], [])).visits.append(visit)
    sol.vessel_routes = [routes[k] for k in sorted(routes)]

    for ln, toks in sections.get(("lev_routes",), []):
        if len(toks) < 7 or (len(toks) - 7) % 2:
            raise ParseError("malformed lev route row", path, ln)
        vessel = None if toks[5] == "-" else (toks[5], _int(toks[6], path, ln))
        seq, starts = [], [None if toks[4] == "-" else _float(toks[4], path, ln)]
        for i in range(7, len(toks), 2):
            seq.append(toks[i])
            starts.append(None if toks[i + 1] == "-"
                          else _float(toks[i + 1], path, ln))
        has_starts = all(s is not None for s in starts)
        sol.lev_routes.append(LevRoute(toks[0], _int(toks[1], path, ln),
                                       toks[2], toks[3], seq,
                                       start_times=starts if has_starts else None,
                                       vessel=vessel))

    for ln, toks in sections.get(("jacks",), []):
        if len(toks) != 5:
            raise ParseError("jack rows have 5 fields", path, ln)
        vessel = None if toks[3] == "-" else (toks[3], _int(toks[4], path, ln))
        sol.jacks.append(JackAssignment(
            toks[0], toks[1],
            start_time=None if toks[2] == "-" else _float(toks[2], path, ln),
            vessel=vessel))
    return sol, header


# === benchmark reports ===

def write_report(rows: Sequence[Dict[str, object]], path: str,
                 columns: Sequence[str] = REPORT_COLUMNS) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([row.get(c, "") for c in columns])
