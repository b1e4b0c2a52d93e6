"""Native schema round trips, parse errors, legacy ingestion, documents."""

import math
import random
from pathlib import Path

import numpy as np
import pytest

from conftest import random_instance, tiny_instance, worked_solution
from twoechelon.construct import assign_jacks, cluster, initial_k, spc_construct
from twoechelon.fileio import (ParseError, REPORT_COLUMNS, parse_legacy,
                               parse_native, parse_solution, write_native,
                               write_report, write_solution)
from twoechelon.generator import GeneratorSpec, generate
from twoechelon.model import INF, Instance, total_cost, validate

LEGACY_DIR = Path(__file__).resolve().parents[1] / "data" / "legacy"

MINI_DOC = """\
# twoechelon instance v1

[meta]
version 1
id mini
mode full
horizon 12.0
jack_threshold 0.0
jack_speed 5.0

[nodes]
CH hub 0.0 0.0
D1 depot 0.0 1.0
T1 tp 1.0 0.0
P1 customer 2.0 1.0

[tps]
T1 100.0 20.0 1.0 moderate 0.25 0.1

[customers]
P1 1.0 0.0 12.0 0.05

[vessels]
V 2 6.0 10.0 2.0

[levs]
L 2 4.0 40.0 30.0 0.27

[first_time V]
0.0 0.1
0.1 0.0

[first_cost V]
0.0 2.0
2.0 0.0
"""


def instances_equal(a: Instance, b: Instance) -> bool:
    if (a.name, a.hub, a.depots, a.tp_sites, a.demand_points,
            a.vessel_classes, a.lev_classes) != \
       (b.name, b.hub, b.depots, b.tp_sites, b.demand_points,
            b.vessel_classes, b.lev_classes):
        return False
    if (a.jack_threshold, a.horizon, a.jack_speed, a.relaxed, a.coords) != \
       (b.jack_threshold, b.horizon, b.jack_speed, b.relaxed, b.coords):
        return False
    if not np.array_equal(a.dist_second, b.dist_second):
        return False
    if not np.array_equal(a.travel_time_jack, b.travel_time_jack):
        return False
    for mats_a, mats_b in ((a.travel_time_first, b.travel_time_first),
                           (a.cost_first, b.cost_first),
                           (a.travel_time_second, b.travel_time_second),
                           (a.cost_second, b.cost_second)):
        if mats_a.keys() != mats_b.keys():
            return False
        if not all(np.array_equal(mats_a[k], mats_b[k]) for k in mats_a):
            return False
    return True


# === native schema ===

def test_write_parse_round_trip_is_identity(tmp_path):
    cases = [tiny_instance(with_jack_point=True),
             generate(GeneratorSpec(10), random.Random(5)),
             generate(GeneratorSpec(50), random.Random(6)),
             random_instance(random.Random(11), n_vessel_classes=2)]
    for i, inst in enumerate(cases):
        p1 = tmp_path / ("a%d.txt" % i)
        p2 = tmp_path / ("b%d.txt" % i)
        write_native(inst, str(p1))
        back = parse_native(str(p1))
        assert instances_equal(inst, back), inst.name
        write_native(back, str(p2))
        assert p1.read_bytes() == p2.read_bytes()
        assert instances_equal(back, parse_native(str(p2)))


def test_round_trip_without_coordinates(tmp_path):
    src = tiny_instance()
    inst = Instance(src.name, src.hub, src.depots, src.tp_sites,
                    src.demand_points, src.vessel_classes, src.lev_classes,
                    src.dist_second, src.travel_time_first, src.cost_first,
                    src.travel_time_second, src.cost_second,
                    src.travel_time_jack, src.jack_threshold, src.horizon,
                    coords=None, jack_speed=None)
    p = tmp_path / "nocoords.txt"
    write_native(inst, str(p))
    text = p.read_text()
    assert "- -" in text and "[dist_second]" in text and "[jack_time]" in text
    back = parse_native(str(p))
    assert instances_equal(inst, back)


def test_minimal_document_parses(tmp_path):
    p = tmp_path / "mini.txt"
    p.write_text(MINI_DOC)
    inst = parse_native(str(p))
    assert inst.name == "mini" and not inst.relaxed
    assert inst.dist_second[0, 2] == pytest.approx(math.hypot(2.0, 0.0))
    assert inst.travel_time_second["L"][0, 1] == pytest.approx(
        inst.dist_second[0, 1] / 30.0)
    assert inst.cost_first["V"][0, 1] == 2.0


def test_missing_tp_row_names_the_id(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text(MINI_DOC.replace("T1 100.0 20.0 1.0 moderate 0.25 0.1\n", ""))
    with pytest.raises(ParseError, match="'T1' has no \\[tps\\] row"):
        parse_native(str(p))


def test_undeclared_customer_id_is_an_error(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text(MINI_DOC.replace("P1 1.0 0.0 12.0 0.05",
                                  "PX 1.0 0.0 12.0 0.05"))
    with pytest.raises(ParseError, match="'PX' has no node declaration"):
        parse_native(str(p))


def test_asymmetric_distance_matrix_reported(tmp_path):
    doc = MINI_DOC + "\n[dist_second]\n" + \
        "0.0 1.0 2.0\n1.0 0.0 1.5\n2.0 1.4 0.0\n"
    p = tmp_path / "asym.txt"
    p.write_text(doc)
    with pytest.raises(ParseError, match="asymmetric at T1/P1"):
        parse_native(str(p))


def test_negative_demand_rejected(tmp_path):
    p = tmp_path / "neg.txt"
    p.write_text(MINI_DOC.replace("P1 1.0 0.0 12.0 0.05",
                                  "P1 -1.0 0.0 12.0 0.05"))
    with pytest.raises(ParseError, match="non-positive demand"):
        parse_native(str(p))


def test_first_echelon_matrices_must_be_explicit(tmp_path):
    head, _, _ = MINI_DOC.partition("[first_time")
    p = tmp_path / "nofirst.txt"
    p.write_text(head)
    with pytest.raises(ParseError, match="needs explicit"):
        parse_native(str(p))


def test_malformed_rows_carry_line_numbers(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text(MINI_DOC.replace("CH hub 0.0 0.0", "CH hub 0.0"))
    with pytest.raises(ParseError, match=r"bad\.txt:12: node rows"):
        parse_native(str(p))


# === legacy benchmark files ===

def test_legacy_en22_counts_and_relaxation():
    inst = parse_legacy(str(LEGACY_DIR / "E-n22-k4-s6-17.txt"))
    assert inst.name == "E-n22-k4-s6-17"
    assert len(inst.demand_points) == 21
    assert len(inst.tp_sites) == 2 and len(inst.depots) == 2
    assert inst.relaxed
    v, = inst.vessel_classes
    assert (v.count, v.capacity) == (3, 15000.0)
    l, = inst.lev_classes
    assert (l.count, l.capacity) == (4, 6000.0)
    for t in inst.tp_sites:
        assert t.establish_cost == 0.0 and t.capacity == INF
        assert t.laying_limit == INF and t.unload_time == 0.0
    for p in inst.demand_points:
        assert (p.tw_open, p.tw_close, p.service_time) == (0.0, INF, 0.0)
    assert inst.jack_threshold == 0.0 and inst.horizon == INF
    # each LEV depot sits on its satellite, so depot legs cost nothing
    for d, t in zip(inst.depots, inst.tp_ids):
        assert inst.dist(d, t) == 0.0
    # satellite S1 is co-located with customer 6 of the classic instance
    assert inst.coords["S1"] == inst.coords["C6"]


def test_legacy_set5_name_convention(tmp_path):
    doc = ["# 2evrp legacy v1", "name 100-5-1", "trucks 3 15000",
           "freighters 4 6000", "depot 0 0"]
    doc += ["satellite %d 5" % i for i in range(5)]
    doc += ["customer %d %d 10" % (i % 20, 10 + i // 20) for i in range(100)]
    p = tmp_path / "100-5-1.dat"
    p.write_text("\n".join(doc) + "\n")
    inst = parse_legacy(str(p))
    assert len(inst.demand_points) == 100 and len(inst.tp_sites) == 5


def test_legacy_count_mismatch_warns_but_parses(tmp_path):
    doc = ("name E-n22-k4-s6-17\ntrucks 3 15000\nfreighters 4 6000\n"
           "depot 0 0\nsatellite 1 1\nsatellite 2 2\n"
           "customer 3 3 10\ncustomer 4 4 10\ncustomer 5 5 10\n")
    p = tmp_path / "short.txt"
    p.write_text(doc)
    with pytest.warns(UserWarning, match="promises 21 customers, file has 3"):
        inst = parse_legacy(str(p))
    assert len(inst.demand_points) == 3


def test_every_legacy_file_passes_relaxed_invariants():
    files = sorted(LEGACY_DIR.glob("*.txt"))
    assert len(files) == 12
    vacuous = ("tp_capacity", "laying", "lev_range", "time_window",
               "synchronization", "jack_coherence")
    for path in files:
        inst = parse_legacy(str(path))
        assert inst.relaxed
        rng = random.Random(1)
        plan = cluster(inst, initial_k(inst))
        jacks = assign_jacks(inst, plan.centers)
        assert jacks == []
        sol = spc_construct(inst, plan, jacks, rng)
        rep = validate(inst, sol)
        for family in vacuous:
            assert rep.total(family) == 0.0, (path.name, family)


# === solution and report documents ===

def test_solution_document_round_trips(tmp_path):
    inst = tiny_instance(with_jack_point=True)
    sol = worked_solution(inst)
    p = tmp_path / "sol.txt"
    write_solution(inst, sol, str(p))
    back, header = parse_solution(str(p))
    assert header["instance"] == "tiny" and header["feasible"] is True
    assert header["total_cost"] == pytest.approx(total_cost(inst, sol))
    assert total_cost(inst, back) == pytest.approx(total_cost(inst, sol))
    assert back.open_tps == sol.open_tps
    assert sorted((r.lev_class, r.lev_no, r.depot, r.tp, tuple(r.sequence),
                   tuple(r.start_times), r.vessel) for r in back.lev_routes) == \
        sorted((r.lev_class, r.lev_no, r.depot, r.tp, tuple(r.sequence),
                tuple(r.start_times), r.vessel) for r in sol.lev_routes)
    assert sorted((r.vessel_class, r.vessel_no, tuple(v.tp for v in r.visits))
                  for r in back.vessel_routes) == \
        sorted((r.vessel_class, r.vessel_no, tuple(v.tp for v in r.visits))
               for r in sol.vessel_routes)
    assert [(j.tp, j.point, j.vessel) for j in back.jacks] == \
        [(j.tp, j.point, j.vessel) for j in sol.jacks]
    assert validate(inst, back).is_empty()


def test_infeasible_document_carries_the_violation_report(tmp_path):
    inst = tiny_instance()
    sol = worked_solution(inst)
    sol.lev_routes.pop()
    p = tmp_path / "bad.txt"
    write_solution(inst, sol, str(p))
    text = p.read_text()
    assert "feasible false" in text
    assert "flow" in text.split("[violations]")[1]
    _, header = parse_solution(str(p))
    assert header["feasible"] is False


def test_report_csv_shape(tmp_path):
    rows = [{"instance": "x", "best": 1.0, "mean": 1.5,
             "gap_to_reference": 0.01, "time_s": 2.5, "seed": s}
            for s in range(3)]
    rows.append({"instance": "x", "best": 1.0})
    p = tmp_path / "report.csv"
    write_report(rows, str(p))
    lines = p.read_text().splitlines()
    assert lines[0] == ",".join(REPORT_COLUMNS)
    assert len(lines) == 5
    assert lines[-1] == "x,1.0,,,,"
