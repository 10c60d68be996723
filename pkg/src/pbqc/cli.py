"""Batch driver: ``pbqc <subcommand> --config scenario.ini``.

Each subcommand turns a scenario file into one JSON report (and optionally a
CSV table).  Exit status: 0 ok, 2 parse error, 3 validation error, 1 runtime
failure; failures print one ``pbqc: error=<kind> reason=<text>`` line on stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (TELEPORT_RATE_EXACT, measure_hold_rate_exact, optimal_b2_basis_search, parse_grid,
                       qutrit_cheat_search, rate_monte_carlo, rate_profile, rate_quadrature_teleport,
                       two_qubit_cheat_search)
from .attacks import (ATTACKS, enumerate_branches, protocol_b_n3_expected_generators, protocol_b_n3_tableau,
                      qss_residual, qss_residual_dense)
from .pauli import PauliString
from .protocols import (ModifiedInstance, ProtocolAInstance, ProtocolBInstance, expected_answer,
                        modified_run_honest, protA_run_honest, protB_run_honest, verify_response)
from .quantum_core import CodeSpace, PureState, bell_code, code_closure_check, make_rng
from .scenario import (ConfigParseError, ConfigValidationError, ScenarioConfig, config_as_dict, parse_config,
                       validate)
from .spacetime import cheat_completion, feasibility_check, honest_completion, witness_dominates
from .stabilizer import qss_residual_tableau

COMMANDS = ("run-protocol", "run-attack", "rates", "search-2q", "search-3l", "feasibility", "verify-stabilizers")
DEFAULT_TABLE = {
    "run-protocol": "schedule",
    "run-attack": "branches",
    "rates": "rates",
    "search-2q": "restarts",
    "search-3l": "restarts",
    "feasibility": "schedule",
    "verify-stabilizers": "table1",
}
SIG_DIGITS = 9


class RuntimeFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def run_protocol(cfg: ScenarioConfig) -> dict:
    geo = cfg.geometry.build()
    inst = cfg.protocol.build()
    rng = make_rng(cfg.seed)
    if isinstance(inst, ProtocolAInstance):
        tr = protA_run_honest(inst, geo, rng)
    elif isinstance(inst, ProtocolBInstance):
        tr = protB_run_honest(inst, geo, rng)
    else:
        tr = modified_run_honest(inst, geo, rng)
    expected = expected_answer(inst)
    verdict = verify_response(tr, expected, geo)
    return {
        "protocol": cfg.protocol.name,
        "N": geo.n,
        "expected": list(expected),
        "answer": list(tr.answer),
        "answers": [list(a) for a in tr.answers],
        "schedule": tr.schedule.as_dict(),
        "accepted": verdict.accepted,
        "reason": verdict.reason,
    }


def _attack_args(cfg: ScenarioConfig):
    inst = cfg.protocol.build()
    geo = cfg.geometry.build()
    if cfg.attack.name == "modified":
        return (inst, cfg.attack.strategy, geo)
    return (inst, geo)


def run_attack(cfg: ScenarioConfig) -> dict:
    attack = ATTACKS[cfg.attack.name]
    args = _attack_args(cfg)
    forced = dict(cfg.attack.forced)
    out: dict = {"attack": cfg.attack.name, "protocol": cfg.protocol.name, "N": args[-1].n}
    if cfg.attack.name == "modified":
        out["strategy"] = cfg.attack.strategy
    if cfg.attack.enumerate:
        branches = enumerate_branches(attack, *args, forced=forced)
        branches.sort(key=lambda o: json.dumps(o.records, sort_keys=True, default=str))
        out["branches"] = [o.as_dict() for o in branches]
        out["branch_count"] = len(branches)
        out["success_probability"] = float(sum(o.probability for o in branches if o.success))
        out["total_probability"] = float(sum(o.probability for o in branches))
        out["schedule"] = branches[0].schedule.as_dict()
    else:
        o = attack(*args, rng=make_rng(cfg.seed), forced=forced or None)
        out["branches"] = [o.as_dict()]
        out["branch_count"] = 1
        out["success"] = o.success
        out["schedule"] = o.schedule.as_dict()
    return out


def run_rates(cfg: ScenarioConfig) -> dict:
    r = cfg.rates
    rows = []
    for i, name in enumerate(r.strategies):
        rep = rate_monte_carlo(name, r.samples, cfg.seed + i, r.engine)
        rows.append(rep.as_dict())
    quad, history = rate_quadrature_teleport()
    thetas = np.linspace(0.0, math.pi, r.profile_points) if r.profile_points > 1 else np.array([0.0])
    out = {
        "rates": rows,
        "exact": {
            "RandomGuess": 0.5,
            "MeasureHold": float(measure_hold_rate_exact()),
            "MeasureHold_fraction": str(measure_hold_rate_exact()),
            "TeleportOptimal_closed_form": TELEPORT_RATE_EXACT,
            "TeleportOptimal_quadrature": quad,
        },
        "quadrature_history": [{"n": n, "value": v} for n, v in history],
        "profile": rate_profile(thetas),
    }
    if r.basis_restarts:
        out["basis_search"] = optimal_b2_basis_search(r.basis_restarts, cfg.seed).as_dict()
    return out


def run_search(cfg: ScenarioConfig, d: int) -> dict:
    s = cfg.search
    axes = parse_grid(s.grid)
    fn = two_qubit_cheat_search if d == 2 else qutrit_cheat_search
    res = fn(axes, restarts=s.restarts, seed=cfg.seed, weights=s.weights, maxiter=s.maxiter)
    out = res.as_dict()
    out["grid"] = s.grid
    out["per_point"] = [{"axis": [float(v) for v in a], "success": float(f)} for a, f in zip(axes, res.per_point)]
    return out


def run_feasibility(cfg: ScenarioConfig) -> dict:
    geo = cfg.geometry.build()
    feasible, witness = feasibility_check(geo)
    out = {
        "N": geo.n,
        "feasible": feasible,
        "witness": None if witness is None else [witness.x, witness.y, witness.z],
        "witness_dominates": None if witness is None else witness_dominates(geo, witness),
        "honest": honest_completion(geo).as_dict(),
        "cheat": cheat_completion(geo).as_dict(),
    }
    out["schedule"] = out["cheat"]
    return out


def table1_rows() -> list[dict]:
    """Residual stabilizer of B1 for every (q2, q3, s2, s3) with three engines."""
    rows = []
    for q2, q3, s2, s3 in itertools.product((0, 1), (0, 1), (1, -1), (1, -1)):
        letter, sign = qss_residual((q2, q3), (s2, s3))
        tab = qss_residual_tableau((q2, q3), (s2, s3))
        dense = qss_residual_dense((q2, q3), (s2, s3))
        residual = ("-" if sign < 0 else "+") + letter
        rows.append({
            "q2": q2, "q3": q3, "s2": s2, "s3": s3,
            "residual": residual,
            "tableau": ("-" if tab.sign < 0 else "+") + tab.letters,
            "dense": ("-" if dense[1] < 0 else "+") + dense[0],
        })
    for row in rows:
        row["agree"] = row["residual"] == row["tableau"] == row["dense"]
    return rows


def protocol_b_n3_rows() -> list[dict]:
    rows = []
    for label in itertools.product((0, 1), repeat=3):
        for vals in itertools.product((1, -1), repeat=4):
            signs = dict(zip(("s2", "s3", "s4", "s6"), vals))
            tab = protocol_b_n3_tableau(label, signs)
            want = protocol_b_n3_expected_generators(label, signs)
            rows.append({"label": list(label), **signs, "match": all(tab.contains(g) for g in want)})
    return rows


def closure_rows() -> list[dict]:
    paulis = [PauliString.parse(a + b) for a in "IXYZ" for b in "IXYZ"]
    r2 = 1 / math.sqrt(2)
    mixed = CodeSpace([PureState((2, 2), [1, 0, 0, 0]), PureState((2, 2), [0, r2, r2, 0]),
                       PureState((2, 2), [0, r2, -r2, 0]), PureState((2, 2), [0, 0, 0, 1])])
    out = []
    for name, code in (("bell", bell_code()), ("triplet_singlet", mixed)):
        closed, witness = code_closure_check(code, paulis)
        out.append({
            "code": name,
            "closed": closed,
            "witness_byproduct": None if witness is None else str(witness.byproduct),
            "witness_codeword": None if witness is None else witness.codeword,
        })
    return out


def run_verify_stabilizers(cfg: ScenarioConfig) -> dict:
    t1 = table1_rows()
    b3 = protocol_b_n3_rows()
    closure = closure_rows()
    return {
        "table1": t1,
        "table1_ok": all(r["agree"] for r in t1),
        "protocol_b_n3": b3,
        "protocol_b_n3_ok": all(r["match"] for r in b3),
        "closure": closure,
    }


RUNNERS = {
    "run-protocol": run_protocol,
    "run-attack": run_attack,
    "rates": run_rates,
    "search-2q": lambda cfg: run_search(cfg, 2),
    "search-3l": lambda cfg: run_search(cfg, 3),
    "feasibility": run_feasibility,
    "verify-stabilizers": run_verify_stabilizers,
}


# ---------------------------------------------------------------------------
# reports and tables
# ---------------------------------------------------------------------------

def _clean(obj, path="report"):
    """JSON-safe copy; raises on non-finite numbers."""
    if isinstance(obj, dict):
        return {str(k): _clean(v, f"{path}.{k}") for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v, f"{path}[{i}]") for i, v in enumerate(obj)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise RuntimeFailure(f"non-finite number at {path}")
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist(), path)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def build_report(command: str, cfg: ScenarioConfig) -> dict:
    t0 = time.perf_counter()
    result = RUNNERS[command](cfg)
    body = {
        "tool": "pbqc",
        "version": __version__,
        "command": command,
        "seed": cfg.seed,
        "config": config_as_dict(cfg),
        "result": result,
    }
    body = _clean(body)
    body["wall_clock_seconds"] = time.perf_counter() - t0
    return body


def report_body(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "wall_clock_seconds"}


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _g(v):
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    if isinstance(v, list):
        return " ".join(_g(x) for x in v)
    return str(v)


def _table_rows(report: dict, selector: str) -> tuple[list[str], list[list]]:
    res = report["result"]
    if selector == "rates" and "rates" in res:
        return ["strategy", "rate", "stderr", "n"], [[r["strategy"], r["rate"], r["stderr"], r["samples"]]
                                                     for r in res["rates"]]
    if selector == "table1" and "table1" in res:
        return ["q2", "q3", "s2", "s3", "residual"], [[r["q2"], r["q3"], r["s2"], r["s3"], r["residual"]]
                                                      for r in res["table1"]]
    if selector == "profile" and "profile" in res:
        cols = ["theta", "RandomGuess", "MeasureHold", "TeleportOptimal"]
        return cols, [[r[c] for c in cols] for r in res["profile"]]
    if selector == "schedule" and "schedule" in res:
        s = res["schedule"]
        return ["verifier", "arrival", "deadline", "on_time"], [
            [i + 1, t, s["deadline"], t <= s["deadline"] + 1e-12] for i, t in enumerate(s["arrivals"])]
    if selector == "branches" and "branches" in res:
        return ["branch", "probability", "answer", "expected", "consistent", "success"], [
            [i, b["branch_probability"], b["answer"], b["expected"], b["consistent"], b["success"]]
            for i, b in enumerate(res["branches"])]
    if selector == "restarts" and "restart_values" in res:
        return ["restart", "best_success"], [[i, v] for i, v in enumerate(res["restart_values"])]
    if selector == "points" and "per_point" in res:
        return ["x", "y", "z", "success"], [[*p["axis"], p["success"]] for p in res["per_point"]]
    raise KeyError(f"report has no section for table {selector!r}")


def emit_table(report: dict, selector: str) -> str:
    header, rows = _table_rows(report, selector)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_g(v) for v in row])
    return buf.getvalue()


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pbqc", description="Position-verification attack experiments.")
    p.add_argument("--version", action="version", version=f"pbqc {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", type=Path)
        sp.add_argument("--format", choices=("report", "table"), default="report")
        sp.add_argument("--table", help="table selector (default depends on the subcommand)")
        sp.add_argument("--quiet", action="store_true")
    return p


def _fail(kind: str, code: int, reason: str) -> int:
    reason = " ".join(str(reason).split())
    print(f"pbqc: error={kind} reason={reason}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as e:
        return _fail("parse", 2, f"cannot read config: {e.strerror}: {args.config}")
    try:
        cfg = parse_config(text)
    except ConfigParseError as e:
        return _fail("parse", 2, e)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    try:
        validate(cfg, args.command)
    except ConfigValidationError as e:
        return _fail("validation", 3, e)
    selector = args.table or cfg.table or DEFAULT_TABLE[args.command]
    out_dir = args.out or (Path(cfg.out) if cfg.out else None)
    try:
        report = build_report(args.command, cfg)
        table = emit_table(report, selector) if args.format == "table" else None
    except KeyError as e:
        return _fail("validation", 3, e.args[0] if e.args else e)
    except Exception as e:       # noqa: BLE001 - surfaced as exit status 1
        return _fail("runtime", 1, f"{type(e).__name__}: {e}")

    text = table if table is not None else dumps_report(report)
    if out_dir is not None:
        name = f"{args.command}-{selector}.csv" if table is not None else f"{args.command}.json"
        target = out_dir / name
        atomic_write(target, text)
        if not args.quiet:
            print(f"wrote {target}")
    elif not args.quiet:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
