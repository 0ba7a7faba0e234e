"""Selection rules as expression trees, and their dictionaries.

A rule is either a unit rule (select some permitted number of covariates
from a scope set) or a combination of rules under five operations: not,
and, or, material implication, and two-stage sequencing. Every rule over a
fixed universe has exactly one dictionary, computed here by structural
recursion: unit leaves via the closed-form union construction, inner nodes
via set algebra on the child dictionaries.

Sequencing is the odd one out: its dictionary depends on the outcome
actually chosen in the first stage, so evaluation takes that outcome as an
explicit input and a helper enumerates all possible outcomes instead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Mapping

from .core import (
    ConstraintSet,
    DEFAULT_MAX_ENUM,
    Dictionary,
    Universe,
    VarSet,
    dictionary_support,
    powerset,
    require_enumerable,
)
from .errors import (
    ArityMismatch,
    EnumerationTooLarge,
    InvalidStageResult,
    MissingStageResult,
    UnsupportedForEquivalence,
)


class SequentialScopeWarning(UserWarning):
    """The two stages of a sequential rule can select different variables.

    Sequencing is intended for stages that range over the same variables;
    when the stage dictionaries have different supports the result is still
    computed literally, but it may not mean what the author intended.
    """


@dataclass(frozen=True, slots=True)
class UnitRule:
    """Atomic rule: the number of selected covariates in ``scope`` must lie in ``constraint``."""

    scope: VarSet
    constraint: ConstraintSet


def is_coherent(rule: UnitRule) -> bool:
    """True iff the rule can be satisfied: max(constraint) <= |scope|."""
    return rule.constraint.max <= len(rule.scope)


class RuleExpr:
    """Base class for rule expression nodes."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Unit(RuleExpr):
    rule: UnitRule


@dataclass(frozen=True, slots=True)
class Not(RuleExpr):
    child: RuleExpr


@dataclass(frozen=True, slots=True)
class And(RuleExpr):
    left: RuleExpr
    right: RuleExpr


@dataclass(frozen=True, slots=True)
class Or(RuleExpr):
    left: RuleExpr
    right: RuleExpr


@dataclass(frozen=True, slots=True)
class Implies(RuleExpr):
    left: RuleExpr
    right: RuleExpr


@dataclass(frozen=True, slots=True)
class Sequential(RuleExpr):
    left: RuleExpr
    right: RuleExpr


@dataclass(frozen=True, slots=True)
class StageResult:
    """The subset actually chosen when the first stage of a sequential rule ran."""

    chosen: VarSet


def unit_dictionary(
    u: Universe, rule: UnitRule, max_entries: int = DEFAULT_MAX_ENUM
) -> Dictionary:
    """Dictionary of a unit rule via the closed-form construction.

    For a coherent rule the entries are exactly the unions of a subset
    ``a`` of the scope with ``|a|`` in the constraint and any subset ``b``
    of the covariates outside the scope. Distinct (a, b) pairs give
    distinct unions, so the result size is known up front. An incoherent
    rule (some required count exceeds the scope size) has the empty
    dictionary: no subset of the universe can respect it.

    Parameters
    ----------
    u
        Universe the rule lives in.
    rule
        The unit rule; its scope must belong to ``u``.
    max_entries
        Cap on the number of entries produced.

    Raises
    ------
    EnumerationTooLarge
        If the exact entry count would exceed ``max_entries``.
    """
    scope_bits = [i for i in range(u.size) if rule.scope.mask >> i & 1]
    free_bits = [i for i in range(u.size) if not rule.scope.mask >> i & 1]
    if not is_coherent(rule):
        return Dictionary(u)
    usable = sorted(c for c in rule.constraint.counts if c <= len(scope_bits))
    count = sum(math.comb(len(scope_bits), c) for c in usable) * (1 << len(free_bits))
    if count > max_entries:
        raise EnumerationTooLarge(
            f"unit dictionary would have {count} entries, over the cap of {max_entries}"
        )
    a_masks = []
    for c in usable:
        for combo in combinations(scope_bits, c):
            m = 0
            for i in combo:
                m |= 1 << i
            a_masks.append(m)
    masks = []
    for b_sel in range(1 << len(free_bits)):
        b = 0
        for j, i in enumerate(free_bits):
            if b_sel >> j & 1:
                b |= 1 << i
        for a in a_masks:
            masks.append(a | b)
    return Dictionary.from_masks(u, masks)


def combine(
    op: str,
    u: Universe,
    d1: Dictionary,
    d2: Dictionary | None = None,
    max_entries: int = DEFAULT_MAX_ENUM,
) -> Dictionary:
    """Apply one dictionary-level operation.

    ``op`` is one of "not", "and", "or", "implies". Negation is complement
    within the powerset; and/or are intersection/union; implication keeps
    every subset that either fails the left rule or satisfies both.

    Raises
    ------
    ArityMismatch
        If ``d2`` is missing for a binary operation or supplied for "not".
    EnumerationTooLarge
        If complementation needs a powerset enumeration over the cap.
    """
    if op == "not":
        if d2 is not None:
            raise ArityMismatch("'not' takes a single dictionary")
        return powerset(u, max_entries).difference(d1)
    if d2 is None:
        raise ArityMismatch(f"{op!r} needs two dictionaries")
    if op == "and":
        return d1.intersection(d2)
    if op == "or":
        return d1.union(d2)
    if op == "implies":
        return powerset(u, max_entries).difference(d1).union(d1.intersection(d2))
    raise ArityMismatch(f"unknown operation {op!r}")


def sequential_restrict(d2: Dictionary, stage: StageResult) -> Dictionary:
    """Entries of the second-stage dictionary contained in the first-stage outcome."""
    keep = [v for v in d2 if v.issubset(stage.chosen)]
    return Dictionary.from_varsets(d2.universe, keep)


def _check_sequential_scopes(d1: Dictionary, d2: Dictionary) -> None:
    if dictionary_support(d1).mask != dictionary_support(d2).mask:
        warnings.warn(
            "sequential stages select over different variables "
            f"({dictionary_support(d1).to_text()} vs {dictionary_support(d2).to_text()})",
            SequentialScopeWarning,
            stacklevel=3,
        )


def eval_rule(
    u: Universe,
    expr: RuleExpr,
    stages: Mapping[Sequential, StageResult] | None = None,
    max_entries: int = DEFAULT_MAX_ENUM,
) -> Dictionary:
    """Compute the unique dictionary congruent to ``expr``.

    Parameters
    ----------
    u
        Universe of discourse.
    expr
        Rule expression tree.
    stages
        First-stage outcomes for sequential nodes, keyed by the node. Each
        chosen subset must be an entry of that node's first-stage
        dictionary.
    max_entries
        Enumeration cap passed through to unit and complement expansion.

    Raises
    ------
    MissingStageResult
        A sequential node has no entry in ``stages``.
    InvalidStageResult
        A supplied outcome is not in the first stage's dictionary.
    """
    stages = stages or {}
    if isinstance(expr, Unit):
        return unit_dictionary(u, expr.rule, max_entries)
    if isinstance(expr, Not):
        return combine("not", u, eval_rule(u, expr.child, stages, max_entries), max_entries=max_entries)
    if isinstance(expr, And):
        return combine(
            "and",
            u,
            eval_rule(u, expr.left, stages, max_entries),
            eval_rule(u, expr.right, stages, max_entries),
            max_entries=max_entries,
        )
    if isinstance(expr, Or):
        return combine(
            "or",
            u,
            eval_rule(u, expr.left, stages, max_entries),
            eval_rule(u, expr.right, stages, max_entries),
            max_entries=max_entries,
        )
    if isinstance(expr, Implies):
        return combine(
            "implies",
            u,
            eval_rule(u, expr.left, stages, max_entries),
            eval_rule(u, expr.right, stages, max_entries),
            max_entries=max_entries,
        )
    if isinstance(expr, Sequential):
        d1 = eval_rule(u, expr.left, stages, max_entries)
        d2 = eval_rule(u, expr.right, stages, max_entries)
        _check_sequential_scopes(d1, d2)
        if expr not in stages:
            raise MissingStageResult(
                "sequential rule needs the outcome chosen by its first stage"
            )
        stage = stages[expr]
        if stage.chosen not in d1:
            raise InvalidStageResult(
                f"stage outcome {stage.chosen.to_text()} is not permitted by the first stage"
            )
        return sequential_restrict(d2, stage)
    raise TypeError(f"not a rule expression: {expr!r}")


def stage_outcomes(
    u: Universe, expr: Sequential, max_entries: int = DEFAULT_MAX_ENUM
) -> list[tuple[VarSet, Dictionary]]:
    """Enumerate a sequential rule's dictionary for every possible first-stage outcome.

    Returns (outcome, dictionary) pairs in the first stage's canonical
    order. Useful for exhaustive analysis when the data-driven outcome is
    not yet known.
    """
    d1 = eval_rule(u, expr.left, max_entries=max_entries)
    d2 = eval_rule(u, expr.right, max_entries=max_entries)
    _check_sequential_scopes(d1, d2)
    return [(m, sequential_restrict(d2, StageResult(m))) for m in d1]


def _walk(expr: RuleExpr) -> Iterator[RuleExpr]:
    """Pre-order traversal without recursion."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Not):
            stack.append(node.child)
        elif isinstance(node, (And, Or, Implies, Sequential)):
            stack.append(node.right)
            stack.append(node.left)


def sequential_nodes(expr: RuleExpr) -> list[Sequential]:
    """All sequential nodes in pre-order document order."""
    return [n for n in _walk(expr) if isinstance(n, Sequential)]


def rules_equivalent(
    u: Universe, e1: RuleExpr, e2: RuleExpr, max_entries: int = DEFAULT_MAX_ENUM
) -> bool:
    """True iff the two rules have positionally identical dictionaries.

    Raises
    ------
    UnsupportedForEquivalence
        If either expression contains a sequential node; those dictionaries
        depend on a first-stage outcome, so rule-level equivalence is not
        defined for them.
    """
    for e in (e1, e2):
        if sequential_nodes(e):
            raise UnsupportedForEquivalence(
                "equivalence is undefined for rules containing sequential stages"
            )
    return eval_rule(u, e1, max_entries=max_entries).masks() == eval_rule(
        u, e2, max_entries=max_entries
    ).masks()


def rule_from_dictionary(u: Universe, d: Dictionary) -> RuleExpr:
    """Build a rule whose dictionary is exactly ``d``.

    Each entry F becomes the conjunction "select all of F" and "select
    none of the rest"; entries are joined with or. The construction is
    deliberately unminimized. The empty dictionary maps to an incoherent
    unit rule that demands more covariates than the universe holds.
    """
    if len(d) == 0:
        return Unit(UnitRule(VarSet.full(u), ConstraintSet.of(u.size + 1)))
    parts = []
    for entry in d:
        inside = Unit(UnitRule(entry, ConstraintSet.of(len(entry))))
        outside = Unit(UnitRule(entry.complement(), ConstraintSet.of(0)))
        parts.append(And(inside, outside))
    expr: RuleExpr = parts[0]
    for p in parts[1:]:
        expr = Or(expr, p)
    return expr


def expr_to_json_obj(expr: RuleExpr) -> dict:
    """Nested-object form with ``op`` tags: unit/not/and/or/implies/seq."""
    if isinstance(expr, Unit):
        return {
            "op": "unit",
            "counts": sorted(expr.rule.constraint.counts),
            "scope": list(expr.rule.scope),
        }
    if isinstance(expr, Not):
        return {"op": "not", "child": expr_to_json_obj(expr.child)}
    tags = {And: "and", Or: "or", Implies: "implies", Sequential: "seq"}
    for cls, tag in tags.items():
        if isinstance(expr, cls):
            return {
                "op": tag,
                "left": expr_to_json_obj(expr.left),
                "right": expr_to_json_obj(expr.right),
            }
    raise TypeError(f"not a rule expression: {expr!r}")


def expr_from_json_obj(u: Universe, obj: dict) -> RuleExpr:
    """Inverse of :func:`expr_to_json_obj` against a known universe."""
    op = obj.get("op")
    if op == "unit":
        scope = VarSet.of_names(u, obj["scope"])
        counts = ConstraintSet(frozenset(int(c) for c in obj["counts"]))
        return Unit(UnitRule(scope, counts))
    if op == "not":
        return Not(expr_from_json_obj(u, obj["child"]))
    tags = {"and": And, "or": Or, "implies": Implies, "seq": Sequential}
    if op in tags:
        return tags[op](
            expr_from_json_obj(u, obj["left"]), expr_from_json_obj(u, obj["right"])
        )
    raise ArityMismatch(f"unknown rule op {op!r}")
