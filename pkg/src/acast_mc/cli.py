"""Command-line entry point: ``acast-mc check|oracle|validate|lemma1|gen-hk|expand``."""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from pathlib import Path

from .acast import AcastError, AcastWarning, broadcast_violations, check_acast
from .engine import DEFAULT_NODE_BUDGET, EngineError, NotAFormulaError, evaluate, replay
from .formula import check_agents, desugar_formula, format_formula, parse_formula
from .hk import TF_FORMULA, HkParams, gen_hk
from .oracle import OracleError, lemma1_probe, oracle_eval
from .semantics import DEFAULT_STATE_BUDGET, BudgetExceeded, expand
from .specdsl import SpecError, desugar, parse_spec, validate_spec

EXIT_HOLDS, EXIT_FAILS, EXIT_ERROR = 0, 1, 2


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage
        self.message = message


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (SpecError, AcastError, NotAFormulaError, BudgetExceeded, EngineError, OracleError,
            ValueError, OSError) as exc:
        raise StageError(name, str(exc)) from exc


def _coalition(text: str) -> tuple:
    names = tuple(x.strip() for x in text.split(",") if x.strip())
    if not names:
        raise StageError("args", "empty coalition")
    return names


def _load_model(path):
    text = _stage("read", Path(path).read_text)
    spec = _stage("parse", parse_spec, text)
    model = _stage("desugar", desugar, spec)
    problems = validate_spec(model)
    if problems:
        first = problems[0]
        raise StageError("validate", f"{first.kind}: {first.detail} (agent {first.agent}, command {first.command})")
    return model


def _load_formula(args, model):
    if args.formula_str:
        text = args.formula_str
    elif args.formula:
        text = _stage("read", Path(args.formula).read_text).strip()
    else:
        raise StageError("args", "give --formula FILE or --formula-str STR")
    f = _stage("formula", lambda: desugar_formula(parse_formula(text)))
    _stage("formula", check_agents, f, model.agents)
    for name in _atoms(f):
        _stage("formula", model.proposition, name)
    return f


def _atoms(f):
    from .formula import atoms

    return sorted(atoms(f))


def _report(model, f, A, acast_reports, per_initial, arena, stats, started) -> dict:
    violations = [v.as_dict() for r in acast_reports for v in r.violations]
    return {
        "model": model.name,
        "formula": format_formula(f),
        "coalition": list(A),
        "acast": {"violations": violations},
        "verdicts": [{"initial_state": arena.describe(s), "holds": h} for s, h in per_initial],
        "overall": all(h for _, h in per_initial),
        "stats": {
            "states": len(arena.states),
            "game_nodes": stats.get("game_nodes", 0),
            "ms": round((time.perf_counter() - started) * 1000, 1),
        },
    }


def _emit(report: dict, args) -> None:
    print(json.dumps(report, indent=2))
    if not getattr(args, "json", False):
        verdict = "holds" if report.get("overall") else "fails"
        print(f"{report.get('model')}: {report.get('formula')} {verdict} "
              f"({sum(v['holds'] for v in report.get('verdicts', []))}/{len(report.get('verdicts', []))} initial states)",
              file=sys.stderr)


def _expand_checked(model, A, acast_ok, budget):
    arena = _stage("expand", expand, model, budget)
    if acast_ok:
        broken = broadcast_violations(arena, A)
        if broken:
            raise StageError("expand", f"broadcast invariant broken at state {broken[0][0]} for {broken[0][1]}")
    return arena


def cmd_check(args) -> int:
    started = time.perf_counter()
    model = _load_model(args.spec)
    A = _coalition(args.coalition)
    f = _load_formula(args, model)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AcastWarning)
        reports = check_acast(model, f, A, strict=args.strict)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if not reports[0].ok or (args.strict and not all(r.ok for r in reports)):
        bad = next(r for r in reports if not r.ok)
        raise StageError("acast", f"model is not {{{','.join(bad.coalition)}}}-cast: "
                                  f"{bad.violations[0].condition} at {bad.violations[0].command}")
    arena = _expand_checked(model, A, True, args.state_budget)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AcastWarning)  # already reported above
        verdict = _stage("eval", evaluate, arena, f, A, args.strict, args.node_budget)
    report = _report(model, f, A, reports, verdict.per_initial, arena, verdict.stats, started)
    if verdict.witnesses:
        s0, w = next(iter(verdict.witnesses.items()))
        witness = w.to_json()
        witness["replay"] = replay(arena, w, args.replay_bound)
        if args.witness:
            Path(args.witness).write_text(json.dumps(witness, indent=2, sort_keys=True))
            report["witness"] = args.witness
        else:
            report["witness"] = {"initial_state": arena.describe(s0), "replay": witness["replay"]}
    _emit(report, args)
    return EXIT_HOLDS if report["overall"] else EXIT_FAILS


def cmd_oracle(args) -> int:
    started = time.perf_counter()
    model = _load_model(args.spec)
    A = _coalition(args.coalition)
    f = _load_formula(args, model)
    reports = check_acast(model, f, A, strict=args.strict)
    arena = _expand_checked(model, A, reports[0].ok, args.state_budget)
    per = [(s0, _stage("oracle", oracle_eval, arena, f, s0, args.horizon)) for s0 in arena.initial]
    report = _report(model, f, A, reports, per, arena, {}, started)
    report["horizon"] = args.horizon
    _emit(report, args)
    return EXIT_HOLDS if report["overall"] else EXIT_FAILS


def cmd_validate(args) -> int:
    text = _stage("read", Path(args.spec).read_text)
    spec = _stage("parse", parse_spec, text)
    model = _stage("desugar", desugar, spec)
    A = _coalition(args.coalition)
    formula = None
    if args.formula or args.formula_str:
        formula = _load_formula(args, model)
    problems = [p.as_dict() for p in validate_spec(model)]
    reports = check_acast(model, formula, A, strict=args.strict)
    out = {
        "model": model.name,
        "coalition": list(A),
        "wellformedness": problems,
        "acast": {"violations": [v.as_dict() for r in reports for v in r.violations],
                  "coalitions": [r.as_dict() for r in reports]},
    }
    out["clean"] = not problems and not out["acast"]["violations"]
    print(json.dumps(out, indent=2))
    return EXIT_HOLDS if out["clean"] else EXIT_FAILS


def cmd_lemma1(args) -> int:
    model = _load_model(args.spec)
    A = _coalition(args.coalition)
    arena = _stage("expand", expand, model, args.state_budget)
    found = []
    for k in range(args.seeds):
        cex = lemma1_probe(arena, A, args.seed + k, args.depth)
        if cex is not None:
            cex["seed"] = args.seed + k
            found.append(cex)
    out = {"model": model.name, "coalition": list(A), "seeds": args.seeds, "depth": args.depth,
           "counterexamples": found[:10], "count": len(found)}
    print(json.dumps(out, indent=2))
    return EXIT_HOLDS if not found else EXIT_FAILS


def cmd_gen_hk(args) -> int:
    params = _stage("args", HkParams, args.n, args.d, args.c, args.e1, args.e2, args.seed)
    source = gen_hk(params)
    if args.out:
        Path(args.out).write_text(source)
    else:
        sys.stdout.write(source)
    if args.formula_out:
        Path(args.formula_out).write_text(TF_FORMULA + "\n")
    return EXIT_HOLDS


def cmd_expand(args) -> int:
    model = _load_model(args.spec)
    arena = _stage("expand", expand, model, args.state_budget)
    sys.stdout.write(arena.dump())
    return EXIT_HOLDS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="acast-mc", description="ATL model checking for coalition-cast game structures")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formula=True):
        sp.add_argument("spec", help="specification file")
        sp.add_argument("--coalition", required=True, help="comma separated agent names")
        if formula:
            sp.add_argument("--formula", help="file holding the formula")
            sp.add_argument("--formula-str", help="formula given inline")
        sp.add_argument("--strict", action="store_true", help="require every coalition of the formula to be cast")
        sp.add_argument("--state-budget", type=int, default=DEFAULT_STATE_BUDGET)
        sp.add_argument("--json", action="store_true", help="JSON only, no summary on stderr")

    sp = sub.add_parser("check", help="decide a formula with the macro-state game")
    common(sp)
    sp.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    sp.add_argument("--witness", help="write the witness strategy JSON here")
    sp.add_argument("--replay-bound", type=int, default=20)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("oracle", help="decide a formula by brute force on an absorbing arena")
    common(sp)
    sp.add_argument("--horizon", type=int, required=True)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("validate", help="well-formedness and cast report")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("lemma1", help="probe random uniform strategies for shared-knowledge breaches")
    common(sp, formula=False)
    sp.add_argument("--seeds", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--depth", type=int, default=4)
    sp.set_defaults(func=cmd_lemma1)

    sp = sub.add_parser("gen-hk", help="emit an HK corpus instance")
    for name, default in (("n", 1), ("d", 1), ("c", 1), ("e1", 1), ("e2", 1), ("seed", 0)):
        sp.add_argument(f"--{name}", type=int, default=default)
    sp.add_argument("--out", help="write the specification here instead of stdout")
    sp.add_argument("--formula-out", help="also write the TF formula to this file")
    sp.set_defaults(func=cmd_gen_hk)

    sp = sub.add_parser("expand", help="dump the reachable arena")
    sp.add_argument("spec")
    sp.add_argument("--state-budget", type=int, default=DEFAULT_STATE_BUDGET)
    sp.set_defaults(func=cmd_expand)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(json.dumps({"error": exc.message, "stage": exc.stage}, indent=2))
        print(f"error [{exc.stage}]: {exc.message}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
