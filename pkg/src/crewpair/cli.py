"""``crewpair`` command line.

Exit codes: 0 success, 1 usage error, 2 infeasible instance or solution,
3 I/O or format error. Machine outputs go to files (written atomically,
only on success); stdout carries a short human summary and stderr the
log, whose level is set by ``CREWPAIR_LOG`` (default INFO).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__
from . import io as cio
from . import harness
from .ga import GaConfig, InfeasibleChromosomeError, RunRecord, run
from .model import Duty, Instance, InstanceError, make_pairing
from .oracle import SizeGuardError, SyntheticSpec, generate_instance, solve_exact, solve_greedy
from .pairings import AllPairs, UncoverableFlightsError, check_pairing, enumerate_pairings

log = logging.getLogger("crewpair")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _setup_logging() -> None:
    level = os.environ.get("CREWPAIR_LOG", "INFO").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        level = "INFO"
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                        force=True)


def _log_config(command: str, config: dict) -> None:
    log.info("%s config %s", command, json.dumps(config, sort_keys=True, default=str))


def _workers(args) -> int:
    if args.workers is not None and args.workers < 1:
        raise UsageError("--workers must be at least 1")
    return args.workers or os.cpu_count() or 1


def _instance_from(args) -> Instance:
    if not args.schedule or not args.rules:
        raise UsageError("--schedule and --rules are required")
    return cio.load_instance(args.schedule, args.rules, args.cost_model)


def _allpairs_from(args) -> tuple[AllPairs, Instance, str]:
    if args.allpairs:
        allpairs, inst = cio.read_allpairs(args.allpairs)
        header = json.loads(Path(args.allpairs).read_text(encoding="utf-8").split("\n", 1)[0])
        return allpairs, inst, header.get("config_hash", "")
    inst = _instance_from(args)
    allpairs = enumerate_pairings(inst, workers=_workers(args))
    return allpairs, inst, cio.config_hash(cio.instance_json(inst))


# generate-instance

def cmd_generate(args) -> int:
    spec = SyntheticSpec(args.flights, num_airports=args.airports, num_bases=args.bases,
                         time_horizon=args.days, hub_factor=args.hub_factor, seed=args.seed)
    config = {"num_flights": spec.num_flights, "num_airports": spec.num_airports,
              "num_bases": spec.num_bases, "time_horizon": spec.time_horizon,
              "hub_factor": spec.hub_factor, "seed": spec.seed,
              "rules": asdict(spec.rules), "cost_model": asdict(spec.cost_model)}
    _log_config("generate-instance", config)
    inst = generate_instance(spec)
    out = Path(args.out)
    cio.commit({out / "schedule.csv": cio.schedule_csv(inst.flights),
                out / "instance.json": cio.json_text({**cio.instance_json(inst), **cio.stamp(config)})})
    print(f"flights={inst.num_flights} bases={','.join(inst.bases)} out={out}")
    return EXIT_OK


# enumerate

def cmd_enumerate(args) -> int:
    inst = _instance_from(args)
    config = cio.instance_json(inst)
    _log_config("enumerate", {**config, "schedule": args.schedule, "workers": _workers(args)})
    allpairs = enumerate_pairings(inst, workers=_workers(args), strict=False)
    bad = allpairs.uncoverable
    print(f"flights={allpairs.num_flights} pairings={len(allpairs)} uncoverable={len(bad)}")
    if bad:
        log.error("flights with no legal pairing: %s", " ".join(map(str, bad)))
        return EXIT_INFEASIBLE
    if args.out:
        outputs = {Path(args.out): cio.allpairs_lines(allpairs, inst, config)}
        if args.csv:
            outputs[Path(args.csv)] = cio.allpairs_csv(allpairs, config)
        cio.commit(outputs)
    return EXIT_OK


# solve

def _ga_config(args) -> GaConfig:
    raw: dict = {}
    if args.config:
        raw = dict(cio.read_json(args.config))
        known = {"config", "population_size", "termination", "crossover_rate",
                 "mutation_rate_factor", "dhd_penalty_cents", "seed", "unexpressed_slots"}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise cio.FormatError(f"unknown GA config keys {unknown}", args.config)
    term = dict(raw.pop("termination", {}) or {})
    if set(term) - {"seconds", "generations"}:
        raise cio.FormatError('termination must look like {"seconds": S} or {"generations": G}', args.config)
    kw = {k: v for k, v in raw.items()}
    if "config" in kw:
        kw["variant"] = kw.pop("config")
    if args.variant:
        kw["variant"] = args.variant
    kw["seconds"] = term.get("seconds")
    kw["generations"] = term.get("generations")
    if args.budget_seconds is not None or args.budget_generations is not None:
        kw["seconds"], kw["generations"] = args.budget_seconds, args.budget_generations
    if args.seed is not None:
        kw["seed"] = _parse_seed(args.seed)
    if args.dhd_penalty is not None:
        kw["dhd_penalty_cents"] = args.dhd_penalty
    try:
        return GaConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _parse_seed(text: str) -> float | int:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"bad seed {text!r}") from None


def solution_payload(record: RunRecord, allpairs: AllPairs, config: dict) -> dict:
    pairings = []
    for pid in record.selection:
        p = allpairs.pairings[pid]
        pairings.append({"id": p.id, "base": p.base, "flights": list(p.flight_ids),
                         "duty_bounds": list(p.duty_bounds), "cost_cents": p.cost})
    return {**cio.stamp(config), "config": config, "fitness_cents": record.fitness_cents,
            "cost_cents": record.cost_cents, "deadheads": record.deadheads,
            "num_flights": allpairs.num_flights, "pairings": pairings,
            "record": record.deterministic_view()}


def trace_path(out: Path) -> Path:
    return out.with_name(out.stem + ".trace.csv")


def cmd_solve(args) -> int:
    if not args.out:
        raise UsageError("--out is required")
    cfg = _ga_config(args)
    allpairs, _, source_hash = _allpairs_from(args)
    config = {**cfg.to_dict(), "allpairs_hash": source_hash}
    workers = _workers(args)
    _log_config("solve", {**config, "workers": workers})
    record = run(allpairs, cfg, workers=workers)
    out = Path(args.out)
    cio.commit({out: cio.json_text(solution_payload(record, allpairs, config)),
                trace_path(out): harness.trace_csv(record, config)})
    print(f"{record.config} seed={record.seed} generations={record.generations} "
          f"fitness_cents={record.fitness_cents} cost_cents={record.cost_cents} "
          f"deadheads={record.deadheads} pairings={record.num_pairings}")
    return EXIT_OK


# oracle

def cmd_oracle(args) -> int:
    allpairs, _, source_hash = _allpairs_from(args)
    penalty = args.dhd_penalty or 0
    config = {"method": args.method, "dhd_penalty_cents": penalty, "max_pairings": args.max_pairings,
              "override_size_guard": args.override_size_guard, "allpairs_hash": source_hash}
    _log_config("oracle", config)
    if args.method == "exact":
        res = solve_exact(allpairs, penalty, max_pairings=args.max_pairings,
                          override=args.override_size_guard)
    else:
        res = solve_greedy(allpairs, penalty)
    if args.out:
        record = res.to_record()
        payload = solution_payload(record, allpairs, config)
        payload["objective_cents"] = res.objective_cents
        cio.commit({Path(args.out): cio.json_text(payload)})
    print(f"method={res.method} objective_cents={res.objective_cents} cost_cents={res.cost_cents} "
          f"deadheads={res.deadheads} pairings={len(res.selection)}")
    return EXIT_OK


# experiment

def cmd_experiment(args) -> int:
    plan_path = args.plan or args.config
    if not plan_path or not args.out:
        raise UsageError("experiment needs --config PLAN.json and --out DIR")
    plan = harness.ExperimentPlan.load(plan_path)
    if args.seed is not None:
        raise UsageError("seeds come from the plan file")
    if args.budget_seconds is not None or args.budget_generations is not None:
        plan = replace(plan, budget_seconds=args.budget_seconds,
                       budget_generations=args.budget_generations)
    workers = _workers(args)
    config = plan.to_dict()
    _log_config("experiment", {**config, "workers": workers})
    allpairs = harness.load_allpairs(plan, workers)
    failures: list[harness.RunFailure] = []
    records = harness.run_experiment(plan, allpairs, workers=workers, failures=failures)
    if not records:
        for f in failures:
            log.error("run %s seed=%s failed: %s", f.config, f.seed, f.error)
        return EXIT_INFEASIBLE
    out = Path(args.out)
    rows = harness.summarize(records)
    outputs = {out / "summary.csv": harness.summary_csv(rows, config),
               out / "records.json": cio.json_text({**cio.stamp(config), "config": config,
                                                    "records": [r.to_dict() for r in records]})}
    reference = harness.resolve_reference(plan, allpairs)
    if reference is not None:
        outputs[out / "gaps.csv"] = harness.gaps_csv(harness.gap_report(records, reference), config)
    for r in records:
        outputs[out / harness.trace_name(r)] = harness.trace_csv(r, config)
    cio.commit(outputs)
    print(harness.summary_text(rows), end="")
    if reference is not None:
        for g in harness.gap_report(records, reference):
            print(f"{g.config} gap={g.gap_pct}% vs reference {g.reference_cents}")
    if failures:
        log.warning("%d run(s) failed: %s", len(failures),
                    "; ".join(f"{f.config}/{f.seed}: {f.error}" for f in failures))
    return EXIT_OK


# report

def check_solution(payload: dict, inst: Instance) -> list[str]:
    """Re-validate a solution file against the raw schedule and rules."""
    problems = []
    F = inst.num_flights
    counts = [0] * F
    total = 0
    for rec in payload.get("pairings", []):
        seq, bounds = rec["flights"], rec["duty_bounds"]
        if any(not 0 <= f < F for f in seq):
            problems.append(f"pairing {rec['id']}: unknown flight id")
            continue
        duties, start = [], 0
        try:
            for end in bounds:
                duties.append(Duty.build([inst.flights[f] for f in seq[start:end]], inst.rules))
                start = end
            p = make_pairing(rec["id"], duties, rec["base"], inst.cost_model)
        except (InstanceError, ValueError) as exc:
            problems.append(f"pairing {rec['id']}: {exc}")
            continue
        problems += [f"pairing {rec['id']}: {v}" for v in check_pairing(p, inst)]
        if p.cost != rec["cost_cents"]:
            problems.append(f"pairing {rec['id']}: stated cost {rec['cost_cents']} != recomputed {p.cost}")
        total += p.cost
        for f in seq:
            counts[f] += 1
    missing = [f for f in range(F) if counts[f] == 0]
    if missing:
        problems.append(f"uncovered flights: {missing}")
    if total != payload.get("cost_cents"):
        problems.append(f"stated total cost {payload.get('cost_cents')} != recomputed {total}")
    dh = sum(counts) - F
    if dh != payload.get("deadheads"):
        problems.append(f"stated deadheads {payload.get('deadheads')} != recomputed {dh}")
    penalty = payload.get("config", {}).get("dhd_penalty_cents", 0)
    if "fitness_cents" in payload and payload["fitness_cents"] != total + penalty * dh:
        problems.append(f"stated fitness {payload['fitness_cents']} != recomputed {total + penalty * dh}")
    return problems


def _records_from(paths) -> list[RunRecord]:
    records = []
    for path in paths:
        data = cio.read_json(path)
        if "records" in data:
            records += [RunRecord.from_dict(r) for r in data["records"]]
        elif "record" in data:
            records.append(RunRecord.from_dict(data["record"]))
        else:
            raise cio.FormatError("no run records in file", path)
    return records


def cmd_report(args) -> int:
    if args.check:
        inst = _instance_from(args)
        payload = cio.read_json(args.check)
        _log_config("report", {"check": args.check, **cio.instance_json(inst)})
        problems = check_solution(payload, inst)
        for p in problems:
            print(f"FAIL {p}")
        if problems:
            raise CheckFailed(f"{len(problems)} problem(s) in {args.check}")
        print(f"check ok: {len(payload['pairings'])} pairings cover {inst.num_flights} flights, "
              f"cost_cents={payload['cost_cents']} deadheads={payload['deadheads']}")
        return EXIT_OK
    if not args.records:
        raise UsageError("report needs --check SOLUTION or record files")
    records = _records_from(args.records)
    if not records:
        raise UsageError("no records to report")
    config = {"records": [str(p) for p in args.records], "reference_cost_cents": args.reference_cost}
    _log_config("report", config)
    rows = harness.summarize(records)
    outputs = {}
    gaps = None
    if args.reference_cost is not None:
        try:
            gaps = harness.gap_report(records, args.reference_cost)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    if args.out:
        out = Path(args.out)
        outputs[out / "summary.csv"] = harness.summary_csv(rows, config)
        if gaps is not None:
            outputs[out / "gaps.csv"] = harness.gaps_csv(gaps, config)
        cio.commit(outputs)
    print(harness.summary_text(rows), end="")
    for g in gaps or ():
        print(f"{g.config} gap={g.gap_pct}% vs reference {g.reference_cents}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crewpair", description="Crew pairing generation and optimization.")
    parser.add_argument("--version", action="version", version=f"crewpair {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, *, instance=True, allpairs=False, workers=True):
        if instance:
            p.add_argument("--schedule", help="flight schedule CSV")
            p.add_argument("--rules", help="bases, legality rules and (optionally) cost model JSON")
            p.add_argument("--cost-model", help="cost model JSON overriding the one in --rules")
        if allpairs:
            p.add_argument("--allpairs", help="AllPairs JSONL from `enumerate`")
        if workers:
            p.add_argument("--workers", type=int, help="concurrency cap (default: all cores)")
        p.add_argument("--out", help="output path")

    p = sub.add_parser("generate-instance", help="write a synthetic schedule and rules file")
    p.add_argument("--flights", type=int, required=True)
    p.add_argument("--airports", type=int, default=6)
    p.add_argument("--bases", type=int, default=1)
    p.add_argument("--days", type=int, default=3)
    p.add_argument("--hub-factor", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    common(p, instance=False, workers=False)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("enumerate", help="enumerate all legal pairings")
    common(p)
    p.add_argument("--csv", help="also export the pairings as CSV")
    p.set_defaults(func=cmd_enumerate)

    def ga_flags(p):
        p.add_argument("--config", help="GA configuration JSON")
        p.add_argument("--variant", choices=("GA1", "GA2", "GA3", "GA4"))
        p.add_argument("--seed")
        p.add_argument("--budget-seconds", type=float)
        p.add_argument("--budget-generations", type=int)
        p.add_argument("--dhd-penalty", type=int, help="deadhead penalty in cents")

    p = sub.add_parser("solve", help="run the GA once")
    common(p, allpairs=True)
    ga_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exact or greedy baseline")
    common(p, allpairs=True)
    p.add_argument("--method", choices=("exact", "greedy"), default="exact")
    p.add_argument("--dhd-penalty", type=int, help="deadhead penalty in cents")
    p.add_argument("--max-pairings", type=int, default=5000)
    p.add_argument("--override-size-guard", action="store_true")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("experiment", help="run a multi-seed experiment plan")
    common(p, instance=False)
    p.add_argument("--config", help="experiment plan JSON")
    p.add_argument("--plan", help="alias of --config")
    p.add_argument("--seed")
    p.add_argument("--budget-seconds", type=float)
    p.add_argument("--budget-generations", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="check a solution or tabulate run records")
    common(p, workers=False)
    p.add_argument("--check", help="solution JSON to re-validate against --schedule/--rules")
    p.add_argument("--reference-cost", type=int, help="reference cost in cents for gaps")
    p.add_argument("records", nargs="*", help="solution or records JSON files")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (UncoverableFlightsError, InfeasibleChromosomeError, CheckFailed) as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    except (cio.FormatError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    except SizeGuardError as exc:
        log.error("%s (use --override-size-guard)", exc)
        return EXIT_USAGE
    except (InstanceError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
