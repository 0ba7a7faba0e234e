"""Command line front end.

Subcommands map one-to-one onto the library layers: ``dict`` evaluates a
rule to its dictionary, ``equiv`` compares two rules, ``check`` tests a
grouping against a rule, ``synthesize`` builds a grouping from a rule,
``select`` runs dictionary-constrained best-subset OLS, and
``from-dict`` reconstructs a rule from an explicit dictionary.

Exit codes: 0 on success, 1 when a negative verdict was computed (not
congruent, not equivalent, no grouping exists, estimation impossible on
this data), 2 when the inputs could not be processed at all. Whenever
the exit code is 0 or 1 standard output holds a single JSON document;
diagnostics go to standard error. The environment variable
``RULEDICT_MAX_ENUM`` overrides the enumeration cap.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .core import (
    DEFAULT_MAX_ENUM,
    Dictionary,
    Universe,
    make_universe,
    parse_braced_names,
)
from .dsl import format_rule, parse_rule, read_rule_document
from .errors import (
    EmptyDictionary,
    IncompatibleGrouping,
    InvalidStageResult,
    RankDeficient,
    RuledictError,
    SynthesisFailure,
    Underdetermined,
    UseClosureInstead,
)
from .grouping import (
    GroupingStructure,
    check_log_congruence,
    check_ogl_necessary,
    synthesize_log_grouping,
)
from .rules import (
    StageResult,
    eval_rule,
    expr_from_json_obj,
    rule_from_dictionary,
    rules_equivalent,
    sequential_nodes,
)
from .select import load_dataset, select_best

# Errors that are verdicts about the domain objects, not about the input.
_DOMAIN_ERRORS = (
    EmptyDictionary,
    InvalidStageResult,
    IncompatibleGrouping,
    UseClosureInstead,
    RankDeficient,
    Underdetermined,
    SynthesisFailure,
)


def _error_tag(exc: Exception) -> str:
    name = type(exc).__name__
    out = []
    for i, ch in enumerate(name):
        if ch.isupper() and i > 0:
            out.append("-")
        out.append(ch.lower())
    return "".join(out)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _score_json(value: float):
    if value == float("-inf"):
        return "-inf"
    return value


def _max_enum() -> int:
    raw = os.environ.get("RULEDICT_MAX_ENUM")
    if raw is None:
        return DEFAULT_MAX_ENUM
    try:
        value = int(raw)
    except ValueError:
        raise RuledictError(f"RULEDICT_MAX_ENUM is not an integer: {raw!r}") from None
    if value < 1:
        raise RuledictError(f"RULEDICT_MAX_ENUM must be positive, got {value}")
    return value


def _parse_vars(spec: str | None) -> Universe | None:
    if spec is None:
        return None
    names = [p.strip() for p in spec.split(",") if p.strip()]
    return make_universe(names)


def _load_rule(path: str, vars_spec: str | None):
    """Read a rule file (DSL text, or JSON when named *.json).

    Returns (universe, expression). An explicit --vars list overrides
    whatever the file declares.
    """
    override = _parse_vars(vars_spec)
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json"):
        obj = json.loads(text)
        if not isinstance(obj, dict) or "rule" not in obj:
            raise RuledictError(f"{path}: expected an object with a 'rule' field")
        if override is not None:
            u = override
        elif "vars" in obj:
            u = make_universe(list(obj["vars"]))
        else:
            raise RuledictError(f"{path}: no 'vars' field and no --vars given")
        return u, expr_from_json_obj(u, obj["rule"])
    return read_rule_document(text, universe=override)


def _load_grouping(path: str, u: Universe) -> GroupingStructure:
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json"):
        obj = json.loads(text)
        if isinstance(obj, dict) and "groups" in obj:
            obj = obj["groups"]
        return GroupingStructure.from_json_obj(u, obj)
    return GroupingStructure.from_text(u, text)


def _load_dictionary(path: str, u: Universe) -> Dictionary:
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json"):
        obj = json.loads(text)
        if isinstance(obj, dict) and "dictionary" in obj:
            obj = obj["dictionary"]
        return Dictionary.from_json_obj(u, obj)
    return Dictionary.from_text(u, text)


def _stages_for(expr, u: Universe, stage_specs: list[str]):
    nodes = sequential_nodes(expr)
    if len(stage_specs) > len(nodes):
        raise RuledictError(
            f"{len(stage_specs)} --stage values but the rule has "
            f"{len(nodes)} sequential operator(s)"
        )
    stages = {}
    for node, spec in zip(nodes, stage_specs):
        stages[node] = StageResult(parse_braced_names(u, spec, "stage result"))
    return stages or None


def _cmd_dict(args) -> int:
    cap = _max_enum()
    u, expr = _load_rule(args.rule, args.vars)
    stages = _stages_for(expr, u, args.stage)
    d = eval_rule(u, expr, stages=stages, max_entries=cap)
    payload = {
        "universe": list(u.names),
        "rule": format_rule(expr),
        "size": len(d.entries),
        "dictionary": d.to_json_obj(),
    }
    if stages:
        payload["stages"] = [list(s.chosen) for s in stages.values()]
    _emit(payload)
    return 0


def _cmd_equiv(args) -> int:
    cap = _max_enum()
    u, e1 = _load_rule(args.rule, args.vars)
    _, e2 = _load_rule(args.rule2, vars_spec=",".join(u.names))
    same = rules_equivalent(u, e1, e2, max_entries=cap)
    _emit(
        {
            "universe": list(u.names),
            "rule": format_rule(e1),
            "rule2": format_rule(e2),
            "equivalent": same,
        }
    )
    return 0 if same else 1


def _cmd_check(args) -> int:
    cap = _max_enum()
    u, expr = _load_rule(args.rule, args.vars)
    g = _load_grouping(args.grouping, u)
    d = eval_rule(u, expr, max_entries=cap)
    if args.method == "log":
        report = check_log_congruence(d, g, max_entries=cap)
    else:
        report = check_ogl_necessary(d, g, max_entries=cap)
    payload = {
        "method": args.method,
        "congruent": report.congruent,
        "missing": report.missing.to_json_obj(),
        "extra": report.extra.to_json_obj(),
    }
    if report.rule_family is not None:
        payload["rule_family"] = report.rule_family.to_json_obj()
        payload["method_family"] = report.method_family.to_json_obj()
    _emit(payload)
    return 0 if report.congruent else 1


def _cmd_synthesize(args) -> int:
    cap = _max_enum()
    u, expr = _load_rule(args.rule, args.vars)
    d = eval_rule(u, expr, max_entries=cap)
    g = synthesize_log_grouping(d)
    _emit(
        {
            "universe": list(u.names),
            "rule": format_rule(expr),
            "groups": g.to_json_obj(),
        }
    )
    return 0


def _cmd_select(args) -> int:
    cap = _max_enum()
    u, expr = _load_rule(args.rule, args.vars)
    d = eval_rule(u, expr, max_entries=cap)
    data = load_dataset(args.data, args.outcome, u)
    ranked = select_best(
        data, d, args.criterion, folds=args.folds, seed=args.seed
    )
    payload = [
        {
            "subset": list(m.subset),
            "score": _score_json(m.score),
            "intercept": m.intercept,
            "coefficients": dict(zip(m.subset, m.coefficients)),
        }
        for m in ranked.models
    ]
    _emit(payload)
    _print_table(ranked)
    return 0


def _print_table(ranked) -> None:
    lines = [f"criterion: {ranked.criterion}", f"{'rank':>4}  {'score':>14}  subset"]
    for i, m in enumerate(ranked.models, start=1):
        lines.append(f"{i:>4}  {m.score:>14.6g}  {m.subset.to_text()}")
    sys.stderr.write("\n".join(lines) + "\n")


def _cmd_from_dict(args) -> int:
    u = _parse_vars(args.vars)
    if u is None:
        raise RuledictError("from-dict needs --vars to name the universe")
    d = _load_dictionary(args.dict, u)
    expr = rule_from_dictionary(u, d)
    _emit(
        {
            "universe": list(u.names),
            "size": len(d.entries),
            "rule": format_rule(expr),
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruledict",
        description="Selection rules, their dictionaries, groupings, and "
        "dictionary-constrained subset selection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def rule_flags(p):
        p.add_argument("--rule", required=True, help="rule file (DSL text or .json)")
        p.add_argument("--vars", help="comma-separated universe, overrides the file")

    p = sub.add_parser("dict", help="evaluate a rule to its selection dictionary")
    rule_flags(p)
    p.add_argument(
        "--stage",
        action="append",
        default=[],
        metavar="NAME_SET",
        help="first-stage outcome like '{A,B}', repeatable, assigned to "
        "sequential operators in reading order",
    )
    p.set_defaults(func=_cmd_dict)

    p = sub.add_parser("equiv", help="decide whether two rules share a dictionary")
    rule_flags(p)
    p.add_argument("--rule2", required=True, help="second rule file")
    p.set_defaults(func=_cmd_equiv)

    p = sub.add_parser("check", help="compare a grouping's pattern family to a rule")
    rule_flags(p)
    p.add_argument("--grouping", required=True, help="grouping file (text or .json)")
    p.add_argument("--method", required=True, choices=["log", "ogl"])
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("synthesize", help="build a grouping realising a rule exactly")
    rule_flags(p)
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("select", help="best-subset OLS restricted to a dictionary")
    rule_flags(p)
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--outcome", required=True, help="outcome column name")
    p.add_argument("--criterion", required=True, choices=["aic", "bic", "adjr2", "cv"])
    p.add_argument("--folds", type=int, help="fold count, cv only")
    p.add_argument("--seed", type=int, help="shuffle rows before folding, cv only")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("from-dict", help="reconstruct a rule from a dictionary")
    p.add_argument("--dict", required=True, help="dictionary file (text or .json)")
    p.add_argument("--vars", required=True, help="comma-separated universe")
    p.set_defaults(func=_cmd_from_dict)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "command", None) == "select":
        if args.criterion != "cv" and (args.folds is not None or args.seed is not None):
            sys.stderr.write("error: --folds/--seed apply only to --criterion cv\n")
            return 2
        if args.criterion == "cv" and args.folds is None:
            sys.stderr.write("error: --criterion cv requires --folds\n")
            return 2
        if args.folds is not None and args.folds < 2:
            sys.stderr.write("error: --folds must be at least 2\n")
            return 2
    try:
        return args.func(args)
    except _DOMAIN_ERRORS as exc:
        payload = {"error": _error_tag(exc), "message": str(exc)}
        if isinstance(exc, SynthesisFailure):
            payload["reason"] = exc.reason
            payload["witness"] = (
                [list(w) for w in exc.witness] if exc.witness else None
            )
        _emit(payload)
        return 1
    except (RuledictError, OSError, ValueError) as exc:
        # json.JSONDecodeError is a ValueError; so are bad numeric flags.
        sys.stderr.write(f"error: {exc}\n")
        return 2


def entry() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
