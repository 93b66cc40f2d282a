import json
from dataclasses import asdict

import pytest

from crewpair import __version__
from crewpair import io as cio
from crewpair.model import CostModel, Flight, LegalityRules
from crewpair.oracle import SyntheticSpec, generate_instance
from crewpair.pairings import enumerate_pairings

HEADER = "flight_id,origin,destination,departure_utc,arrival_utc\n"


def test_timestamps():
    assert cio.parse_timestamp("2024-01-01T00:00Z") == 28_401_120
    assert cio.parse_timestamp("2024-01-01T00:00:00+00:00") == 28_401_120
    assert cio.parse_timestamp("2024-01-01T06:30") == 28_401_120 + 390
    assert cio.format_timestamp(28_401_120 + 390) == "2024-01-01T06:30Z"
    for bad in ("2024-01-01T00:00+02:00", "2024-01-01T00:00:30Z", "tomorrow"):
        with pytest.raises(ValueError):
            cio.parse_timestamp(bad)


def test_schedule_round_trip():
    inst = generate_instance(SyntheticSpec(12, seed=1))
    text = cio.schedule_csv(inst.flights)
    assert tuple(cio.parse_schedule(text)) == inst.flights
    commented = "# exported\n" + text.replace("\n", "\n\n", 1)
    assert tuple(cio.parse_schedule(commented)) == inst.flights


@pytest.mark.parametrize("body, line, needle", [
    ("0,DAL,HOU,2024-01-01T08:00Z\n", 2, "fields"),
    ("0,DAL,HOU,2024-01-01T08:00Z,2024-01-01T07:00Z\n", 2, "arrival"),
    ("0,DAL,HOU,2024-01-01T08:00Z,2024-01-01T09:00Z\n0,HOU,DAL,2024-01-01T10:00Z,2024-01-01T11:00Z\n",
     3, "duplicate"),
    ("0,DAL,HOU,2024-01-01T08:00Z,2024-01-01T09:00Z\nx,HOU,DAL,2024-01-01T10:00Z,2024-01-01T11:00Z\n",
     3, "invalid literal"),
    ("0,DAL,HOU,not-a-time,2024-01-01T09:00Z\n", 2, "isoformat"),
])
def test_schedule_errors_carry_line_numbers(body, line, needle):
    with pytest.raises(cio.FormatError) as err:
        cio.parse_schedule(HEADER + body, "s.csv")
    assert err.value.line == line
    assert str(err.value).startswith(f"s.csv:{line}: ")
    assert needle in str(err.value).lower() or needle in str(err.value)


def test_schedule_structure_errors():
    with pytest.raises(cio.FormatError, match="empty"):
        cio.parse_schedule("# nothing\n")
    with pytest.raises(cio.FormatError) as err:
        cio.parse_schedule("id,from,to\n")
    assert err.value.line == 1
    with pytest.raises(cio.FormatError, match="dense"):
        cio.parse_schedule(HEADER + "1,DAL,HOU,2024-01-01T08:00Z,2024-01-01T09:00Z\n")


def test_non_utf8_schedule(tmp_path):
    p = tmp_path / "s.csv"
    p.write_bytes(HEADER.encode() + b"0,D\xffL,HOU,2024-01-01T08:00Z,2024-01-01T09:00Z\n")
    with pytest.raises(cio.FormatError, match="UTF-8"):
        cio.read_schedule(p)


def _rules_file(tmp_path, **override):
    data = {"bases": ["dal"], "rules": asdict(LegalityRules()), "cost_model": asdict(CostModel())}
    data.update(override)
    p = tmp_path / "rules.json"
    p.write_text(json.dumps(data))
    return p


def test_rules_are_strict(tmp_path):
    bases, rules, cost = cio.load_rules(_rules_file(tmp_path))
    assert bases == ("DAL",) and rules == LegalityRules() and cost == CostModel()
    partial = asdict(LegalityRules())
    partial.pop("min_rest")
    with pytest.raises(cio.FormatError, match="missing"):
        cio.load_rules(_rules_file(tmp_path, rules=partial))
    with pytest.raises(cio.FormatError, match="unknown"):
        cio.load_rules(_rules_file(tmp_path, rules={**asdict(LegalityRules()), "max_legs": 4}))
    with pytest.raises(cio.FormatError, match="bases"):
        cio.load_rules(_rules_file(tmp_path, bases=[]))
    no_cost = _rules_file(tmp_path)
    data = json.loads(no_cost.read_text())
    del data["cost_model"]
    no_cost.write_text(json.dumps(data))
    assert cio.load_rules(no_cost)[2] is None
    (tmp_path / "bad.json").write_text("{\n  \"bases\": [\n")
    with pytest.raises(cio.FormatError) as err:
        cio.load_rules(tmp_path / "bad.json")
    assert err.value.line is not None


def test_load_instance_needs_cost_model(tmp_path):
    inst = generate_instance(SyntheticSpec(6, num_airports=3, seed=0))
    sched = tmp_path / "s.csv"
    sched.write_text(cio.schedule_csv(inst.flights))
    rules = _rules_file(tmp_path, bases=list(inst.bases))
    data = json.loads(rules.read_text())
    cm = data.pop("cost_model")
    rules.write_text(json.dumps(data))
    with pytest.raises(cio.FormatError, match="cost model"):
        cio.load_instance(sched, rules)
    (tmp_path / "cost.json").write_text(json.dumps(cm))
    assert cio.load_instance(sched, rules, tmp_path / "cost.json") == inst


def test_allpairs_round_trip(tmp_path):
    inst = generate_instance(SyntheticSpec(14, num_airports=4, seed=5))
    ap = enumerate_pairings(inst)
    p = tmp_path / "pool.jsonl"
    p.write_text(cio.allpairs_lines(ap, inst))
    back, inst2 = cio.read_allpairs(p)
    assert inst2 == inst and back.pairings == ap.pairings
    header = json.loads(p.read_text().splitlines()[0])
    assert header["toolkit_version"] == __version__ and len(header["config_hash"]) == 16
    # tampered cost is caught on the right line
    lines = p.read_text().splitlines()
    rec = json.loads(lines[2])
    rec["cost_cents"] += 1
    lines[2] = json.dumps(rec)
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(cio.FormatError) as err:
        cio.read_allpairs(p)
    assert err.value.line == 3
    p.write_text("hello\n")
    with pytest.raises(cio.FormatError):
        cio.read_allpairs(p)


def test_csv_stamp_and_reader(tmp_path):
    text = cio.csv_text(["a", "b"], [[1, 2], [3, 4]], {"k": 1})
    first = text.splitlines()[0]
    assert first == f"# crewpair {__version__} config={cio.config_hash({'k': 1})}"
    p = tmp_path / "t.csv"
    p.write_text(text)
    assert cio.read_csv_rows(p) == [{"a": "1", "b": "2"}, {"a": "3", "b": "4"}]
    assert cio.config_hash({"a": 1, "b": 2}) == cio.config_hash({"b": 2, "a": 1})


def test_allpairs_csv():
    inst = generate_instance(SyntheticSpec(6, num_airports=3, seed=0))
    ap = enumerate_pairings(inst)
    lines = cio.allpairs_csv(ap, {}).splitlines()
    assert lines[1] == "pairing_id,base,cost_cents,num_duties,flight_ids"
    p = ap.pairings[0]
    assert lines[2] == f"0,{p.base},{p.cost},{len(p.duties)},{';'.join(map(str, p.flight_ids))}"


def test_atomic_write(tmp_path, monkeypatch):
    target = tmp_path / "sub" / "out.txt"
    cio.atomic_write(target, "one")
    assert target.read_text() == "one"

    def broken(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(cio.os, "replace", broken)
    with pytest.raises(OSError):
        cio.atomic_write(target, "two")
    assert target.read_text() == "one"
    assert sorted(x.name for x in target.parent.iterdir()) == ["out.txt"]


def test_flight_validation_via_schedule():
    with pytest.raises(cio.FormatError):
        cio.parse_schedule(HEADER + "0,DAL,DAL,2024-01-01T08:00Z,2024-01-01T09:00Z\n")
    flights = cio.parse_schedule(HEADER + "0,dal,hou,2024-01-01T08:00Z,2024-01-01T09:00Z\n")
    assert flights == [Flight(0, "DAL", "HOU", 28_401_600, 28_401_660)]
