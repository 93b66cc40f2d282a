"""File formats: schedule CSV, instance JSON, AllPairs JSONL, solutions.

Machine outputs carry the toolkit version and a hash of the resolved
configuration; CSV files put them on a leading ``#`` comment line that
the readers here skip.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from dataclasses import asdict, fields
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Mapping

from . import __version__
from .model import CostModel, Duty, Flight, Instance, LegalityRules, make_pairing
from .pairings import AllPairs

SCHEDULE_HEADER = ["flight_id", "origin", "destination", "departure_utc", "arrival_utc"]
ALLPAIRS_FORMAT = "crewpair.allpairs"
_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


class FormatError(ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message: str, path: str | os.PathLike | None = None, line: int | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        where = ""
        if self.path:
            where = self.path + (f":{line}" if line else "") + ": "
        elif line:
            where = f"line {line}: "
        super().__init__(where + message)


def config_hash(config: Mapping) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def stamp(config: Mapping) -> dict:
    return {"toolkit_version": __version__, "config_hash": config_hash(config)}


def parse_timestamp(text: str) -> int:
    """ISO-8601 UTC timestamp to minutes since epoch."""
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    elif dt.utcoffset() != timedelta(0):
        raise ValueError(f"timestamp {text!r} is not UTC")
    if dt.second or dt.microsecond:
        raise ValueError(f"timestamp {text!r} has sub-minute precision")
    return int((dt - _EPOCH).total_seconds()) // 60


def format_timestamp(minutes: int) -> str:
    return (_EPOCH + timedelta(minutes=minutes)).strftime("%Y-%m-%dT%H:%MZ")


def _data_lines(text: str) -> list[tuple[int, str]]:
    return [(n, ln) for n, ln in enumerate(text.splitlines(), 1)
            if ln.strip() and not ln.lstrip().startswith("#")]


def read_schedule(path: str | os.PathLike) -> list[Flight]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"not UTF-8 text ({exc})", path) from exc
    return parse_schedule(text, path)


def parse_schedule(text: str, path: str | os.PathLike | None = None) -> list[Flight]:
    lines = _data_lines(text)
    if not lines:
        raise FormatError("empty schedule", path)
    header_no, header = lines[0]
    if next(csv.reader([header])) != SCHEDULE_HEADER:
        raise FormatError(f"header must be {','.join(SCHEDULE_HEADER)}", path, header_no)
    flights = []
    seen = set()
    for n, line in lines[1:]:
        row = next(csv.reader([line]))
        if len(row) != len(SCHEDULE_HEADER):
            raise FormatError(f"expected {len(SCHEDULE_HEADER)} fields, got {len(row)}", path, n)
        try:
            fid = int(row[0])
            flight = Flight(fid, row[1].strip().upper(), row[2].strip().upper(),
                            parse_timestamp(row[3]), parse_timestamp(row[4]))
        except ValueError as exc:
            raise FormatError(str(exc), path, n) from exc
        if fid in seen:
            raise FormatError(f"duplicate flight_id {fid}", path, n)
        seen.add(fid)
        flights.append(flight)
    if sorted(seen) != list(range(len(seen))):
        raise FormatError("flight_id values must be dense 0..F-1", path)
    return flights


def schedule_csv(flights: Iterable[Flight]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCHEDULE_HEADER)
    for f in sorted(flights, key=lambda f: f.id):
        w.writerow([f.id, f.origin, f.destination, format_timestamp(f.departure), format_timestamp(f.arrival)])
    return buf.getvalue()


def _strict(cls, data, path, section):
    if not isinstance(data, dict):
        raise FormatError(f"{section} must be an object", path)
    names = [f.name for f in fields(cls)]
    missing = [n for n in names if n not in data]
    unknown = [k for k in data if k not in names]
    if missing:
        raise FormatError(f"{section} is missing {missing}", path)
    if unknown:
        raise FormatError(f"{section} has unknown keys {unknown}", path)
    try:
        return cls(**data)
    except ValueError as exc:
        raise FormatError(str(exc), path) from exc


def read_json(path: str | os.PathLike) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, path, exc.lineno) from exc


def load_rules(path: str | os.PathLike) -> tuple[tuple[str, ...], LegalityRules, CostModel | None]:
    """Read ``{"bases": [...], "rules": {...}, "cost_model": {...}}``.

    Every rule and cost field must be present; ``cost_model`` may be left
    out when it comes from a separate file.
    """
    data = read_json(path)
    bases = data.get("bases")
    if not isinstance(bases, list) or not bases or not all(isinstance(b, str) for b in bases):
        raise FormatError("bases must be a non-empty list of airport codes", path)
    rules = _strict(LegalityRules, data.get("rules"), path, "rules")
    cost = _strict(CostModel, data["cost_model"], path, "cost_model") if "cost_model" in data else None
    return tuple(b.upper() for b in bases), rules, cost


def load_cost_model(path: str | os.PathLike) -> CostModel:
    data = read_json(path)
    return _strict(CostModel, data.get("cost_model", data), path, "cost_model")


def instance_json(inst: Instance) -> dict:
    return {"bases": list(inst.bases), "rules": asdict(inst.rules), "cost_model": asdict(inst.cost_model)}


def load_instance(schedule: str | os.PathLike, rules: str | os.PathLike,
                  cost_model: str | os.PathLike | None = None) -> Instance:
    flights = read_schedule(schedule)
    bases, legality, cost = load_rules(rules)
    if cost_model is not None:
        cost = load_cost_model(cost_model)
    if cost is None:
        raise FormatError("no cost model: add cost_model to the rules file or pass a cost-model file", rules)
    return Instance(tuple(flights), bases, legality, cost)


def allpairs_lines(allpairs: AllPairs, inst: Instance, config: Mapping | None = None) -> str:
    """Self-contained JSONL: header (with the instance) then one pairing per line."""
    header = {
        "format": ALLPAIRS_FORMAT,
        **stamp(config if config is not None else instance_json(inst)),
        "num_flights": allpairs.num_flights,
        "num_pairings": len(allpairs),
        "instance": {**instance_json(inst), "flights": [
            [f.id, f.origin, f.destination, f.departure, f.arrival] for f in inst.flights]},
    }
    out = [json.dumps(header, sort_keys=True, separators=(",", ":"))]
    for p in allpairs.pairings:
        out.append(json.dumps({"id": p.id, "base": p.base, "flights": list(p.flight_ids),
                               "duty_bounds": list(p.duty_bounds), "cost_cents": p.cost},
                              sort_keys=True, separators=(",", ":")))
    return "\n".join(out) + "\n"


def read_allpairs(path: str | os.PathLike) -> tuple[AllPairs, Instance]:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty AllPairs file", path)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad header ({exc.msg})", path, 1) from exc
    if header.get("format") != ALLPAIRS_FORMAT:
        raise FormatError("not an AllPairs file", path, 1)
    spec = header["instance"]
    try:
        flights = tuple(Flight(*row) for row in spec["flights"])
        inst = Instance(flights, tuple(spec["bases"]), LegalityRules(**spec["rules"]),
                        CostModel(**spec["cost_model"]))
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad instance block ({exc})", path, 1) from exc
    pairings = []
    for n, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            seq = rec["flights"]
            duties, start = [], 0
            for end in rec["duty_bounds"]:
                duties.append(Duty.build([inst.flights[i] for i in seq[start:end]], inst.rules))
                start = end
            p = make_pairing(rec["id"], duties, rec["base"], inst.cost_model)
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise FormatError(f"bad pairing record ({exc})", path, n) from exc
        if p.cost != rec["cost_cents"]:
            raise FormatError(f"pairing {p.id}: stored cost {rec['cost_cents']} != recomputed {p.cost}", path, n)
        pairings.append(p)
    if len(pairings) != header["num_pairings"]:
        raise FormatError("pairing count does not match header", path)
    return AllPairs(tuple(pairings), inst.num_flights), inst


def allpairs_csv(allpairs: AllPairs, config: Mapping) -> str:
    buf = io.StringIO()
    s = stamp(config)
    buf.write(f"# crewpair {s['toolkit_version']} config={s['config_hash']}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pairing_id", "base", "cost_cents", "num_duties", "flight_ids"])
    for p in allpairs.pairings:
        w.writerow([p.id, p.base, p.cost, len(p.duties), ";".join(map(str, p.flight_ids))])
    return buf.getvalue()


def csv_text(header: list[str], rows: Iterable[Iterable], config: Mapping) -> str:
    buf = io.StringIO()
    s = stamp(config)
    buf.write(f"# crewpair {s['toolkit_version']} config={s['config_hash']}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def read_csv_rows(path: str | os.PathLike) -> list[dict]:
    text = Path(path).read_text(encoding="utf-8")
    body = "\n".join(ln for _, ln in _data_lines(text))
    return list(csv.DictReader(io.StringIO(body)))


def json_text(payload: Mapping) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def commit(outputs: Mapping[str | os.PathLike, str]) -> None:
    """Write every staged output; called only once all of them are ready."""
    for path, text in outputs.items():
        atomic_write(path, text)
